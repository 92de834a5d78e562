"""Node detection, wavelength relations and trajectory/action validators.

Validators are residual-based and dimensionless: each equation's terms are
evaluated in MeV-based units and the sum is normalized by the largest term
magnitude, so tolerances compare like with like across configurations
whose raw scales span many orders of magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .action import ReducedAction
from .errors import InsufficientTrajectories, RegimeError, TooFewSamples
from .kleingordon import SolutionBasis, wavenumber_sq
from .model import ConstantPotential, HiddenParams, PhysicalSetup, Potential
from .output import write_json
from .trajectory import Trajectory, node_period, node_spacing


@dataclass
class NodeReport:
    """Node times/positions and the per-interval spacing quantities.

    mean_momentum per interval is pi hbar / dx (in MeV/c); wavelength is
    2 dx, i.e. the de Broglie wavelength reconstructed from node spacing.
    """

    times: np.ndarray            # [s]
    positions: np.ndarray        # [fm]
    dt: np.ndarray               # [s]
    dx: np.ndarray               # [fm]
    mean_momentum: np.ndarray    # [MeV/c]
    wavelength: np.ndarray       # [fm]
    method: str
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "method": self.method,
            "units": {
                "times": "s",
                "positions": "fm",
                "dt": "s",
                "dx": "fm",
                "mean_momentum": "MeV/c",
                "wavelength": "fm",
            },
            "times": list(map(float, self.times)),
            "positions": list(map(float, self.positions)),
            "dt": list(map(float, self.dt)),
            "dx": list(map(float, self.dx)),
            "mean_momentum": list(map(float, self.mean_momentum)),
            "wavelength": list(map(float, self.wavelength)),
            "extras": {
                k: (list(map(float, v)) if isinstance(v, (list, np.ndarray)) else v)
                for k, v in self.extras.items()
            },
        }

    def to_json(self, path):
        write_json(path, self.to_dict())


@dataclass
class ValidationReport:
    """Per-sample normalized residuals with summary statistics."""

    kind: str
    residuals: np.ndarray
    max_residual: float
    mean_residual: float
    tolerance: float = None
    passed: bool = None
    notes: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "kind": self.kind,
            "units": "dimensionless (normalized by largest term)",
            "max_residual": float(self.max_residual),
            "mean_residual": float(self.mean_residual),
            "tolerance": self.tolerance,
            "passed": self.passed,
            "n_samples": int(np.size(self.residuals)),
            "notes": self.notes,
        }

    def to_json(self, path):
        write_json(path, self.to_dict())


def _summary(kind, residuals, tol=None, notes=None) -> ValidationReport:
    residuals = np.asarray(residuals, dtype=float)
    mx = float(np.max(residuals)) if residuals.size else 0.0
    mn = float(np.mean(residuals)) if residuals.size else 0.0
    return ValidationReport(
        kind=kind,
        residuals=residuals,
        max_residual=mx,
        mean_residual=mn,
        tolerance=tol,
        passed=None if tol is None else bool(mx <= tol),
        notes=notes or {},
    )


# ----------------------------------------------------------------------
# nodes and wavelengths
# ----------------------------------------------------------------------

def nodes_closed_form(
    setup: PhysicalSetup, u0: float, count: int = 10, x0: float = 0.0
) -> NodeReport:
    """Node pattern of the constant-potential family (a W > 0 convention).

    t_n = (n + 1/2) pi hbar (E-U0) / ((E-U0)^2 - m2), x_n = x0 + direction *
    (n + 1/2) * pi hbar c / sqrt((E-U0)^2 - m2).
    """
    dt = node_period(setup, u0)
    dx = node_spacing(setup, u0)
    n = np.arange(count)
    times = (n + 0.5) * dt
    positions = x0 + setup.direction * (n + 0.5) * dx
    dts = np.full(count - 1, dt)
    dxs = np.full(count - 1, dx)
    return NodeReport(
        times=times,
        positions=positions,
        dt=dts,
        dx=dxs,
        mean_momentum=np.pi * setup.hbar_c / dxs,
        wavelength=2.0 * dxs,
        method="closed-form",
    )


def _pairwise_crossings(t, xa, xb):
    """Meeting points of two sampled curves: sign changes and tangential touches.

    A sign change is refined by linear interpolation.  A touch (the curves
    meet without swapping order, as happens when both dwell at a node) shows
    up as a local minimum of |d| at the interpolation-noise scale; it is
    refined by the parabola vertex through the three neighbouring samples.
    """
    d = xa - xb
    out_t, out_x = [], []

    idx = np.nonzero(d[:-1] * d[1:] < 0)[0]
    if idx.size:
        frac = d[idx] / (d[idx] - d[idx + 1])
        tc = t[idx] + frac * (t[idx + 1] - t[idx])
        out_t.extend(tc)
        out_x.extend(xa[idx] + frac * (xa[idx + 1] - xa[idx]))

    ad = np.abs(d)
    k = np.nonzero((ad[1:-1] < ad[:-2]) & (ad[1:-1] <= ad[2:]))[0] + 1
    if k.size:
        # keep minima whose depth is at the local one-step variation scale,
        # i.e. numerically indistinguishable from zero at this resolution
        step = np.maximum(np.abs(d[k + 1] - d[k]), np.abs(d[k] - d[k - 1]))
        k = k[ad[k] <= 2.0 * step]
    for j in k:
        denom = d[j + 1] - 2.0 * d[j] + d[j - 1]
        if denom != 0.0:
            shift = 0.5 * (d[j - 1] - d[j + 1]) / denom * (t[j + 1] - t[j])
        else:
            shift = 0.0
        tc = t[j] + np.clip(shift, -(t[j] - t[j - 1]), t[j + 1] - t[j])
        out_t.append(float(tc))
        out_x.append(float(0.5 * (np.interp(tc, t, xa) + np.interp(tc, t, xb))))

    if not out_t:
        return np.empty(0), np.empty(0)
    # a single meeting can register both as a sign change and as a touch;
    # merge same-pair events within a few resampling steps
    order = np.argsort(out_t)
    ts = np.asarray(out_t)[order]
    xs = np.asarray(out_x)[order]
    gap = 3.0 * (t[1] - t[0])
    merged_t, merged_x, bucket_t, bucket_x = [], [], [ts[0]], [xs[0]]
    for tc, xc in zip(ts[1:], xs[1:]):
        if tc - bucket_t[-1] <= gap:
            bucket_t.append(tc)
            bucket_x.append(xc)
        else:
            merged_t.append(float(np.mean(bucket_t)))
            merged_x.append(float(np.mean(bucket_x)))
            bucket_t, bucket_x = [tc], [xc]
    merged_t.append(float(np.mean(bucket_t)))
    merged_x.append(float(np.mean(bucket_x)))
    return np.asarray(merged_t), np.asarray(merged_x)


def detect_nodes(
    trajectories,
    cluster_radius: float = None,
    resample_n: int = None,
    basis: SolutionBasis = None,
) -> NodeReport:
    """Nodes from pairwise crossings of trajectories sharing setup and potential.

    Crossings are found by sign change on a common time grid and refined by
    linear interpolation; crossings from all pairs are merged into clusters
    (radius defaults to 2 resampling steps).  Clusters hit by every pair
    count as nodes.  With ``basis`` given, the offset of each node position
    to the nearest zero of phi2 is reported (not asserted) in the extras.
    """
    trajs = list(trajectories)
    if len(trajs) < 2:
        raise InsufficientTrajectories("need at least two trajectories")
    s0 = trajs[0].setup
    for tr in trajs[1:]:
        s = tr.setup
        if (s.E, s.m0c2, s.hbar) != (s0.E, s0.m0c2, s0.hbar):
            raise ValueError("trajectories come from different setups")

    t_lo = max(tr.t[0] for tr in trajs)
    t_hi = min(tr.t[-1] for tr in trajs)
    if t_hi <= t_lo:
        raise ValueError("trajectories have no common time window")
    if resample_n is None:
        resample_n = max(tr.t.size for tr in trajs)
    tg = np.linspace(t_lo, t_hi, resample_n)
    xg = [np.interp(tg, tr.t, tr.x) for tr in trajs]

    dt_grid = tg[1] - tg[0]
    if cluster_radius is None:
        cluster_radius = 2.0 * dt_grid

    crossings = []
    n_pairs = 0
    for i in range(len(trajs)):
        for j in range(i + 1, len(trajs)):
            pair_id = n_pairs
            n_pairs += 1
            tc, xc = _pairwise_crossings(tg, xg[i], xg[j])
            crossings.extend((t_, x_, pair_id) for t_, x_ in zip(tc, xc))

    crossings.sort()
    clusters = []
    for tc, xc, pid in crossings:
        if clusters and tc - clusters[-1][-1][0] <= cluster_radius:
            clusters[-1].append((tc, xc, pid))
        else:
            clusters.append([(tc, xc, pid)])

    node_t, node_x, members, spreads = [], [], [], []
    xg_arr = np.stack(xg)
    for cl in clusters:
        ts = np.array([c[0] for c in cl])
        xs = np.array([c[1] for c in cl])
        members.append(len({c[2] for c in cl}))
        spreads.append(float(ts.max() - ts.min()))
        # pairs also cross near (not at) a node; the node itself is where the
        # spread across all curves is smallest, so refine the center there
        t_c = float(np.mean(ts))
        half = max(int(np.ceil((ts.max() - ts.min() + cluster_radius) / dt_grid)), 2)
        j_c = int(np.argmin(np.abs(tg - t_c)))
        j_lo, j_hi = max(j_c - half, 0), min(j_c + half + 1, tg.size)
        spread_w = xg_arr[:, j_lo:j_hi].max(axis=0) - xg_arr[:, j_lo:j_hi].min(axis=0)
        j_min = j_lo + int(np.argmin(spread_w))
        if 0 < j_min < tg.size - 1:
            s_m, s_0, s_p = (
                spread_w[j_min - 1 - j_lo] if j_min - 1 >= j_lo else spread_w[0],
                spread_w[j_min - j_lo],
                spread_w[j_min + 1 - j_lo] if j_min + 1 - j_lo < spread_w.size else spread_w[-1],
            )
            denom = s_p - 2.0 * s_0 + s_m
            shift = 0.5 * (s_m - s_p) / denom * dt_grid if denom > 0 else 0.0
            t_node = tg[j_min] + float(np.clip(shift, -dt_grid, dt_grid))
        else:
            t_node = tg[j_min]
        node_t.append(t_node)
        node_x.append(float(np.mean([np.interp(t_node, tg, xi) for xi in xg])))

    full = [k for k, m in enumerate(members) if m >= n_pairs]
    times = np.array([node_t[k] for k in full])
    positions = np.array([node_x[k] for k in full])
    dts = np.diff(times)
    dxs = np.abs(np.diff(positions))

    extras = {
        "n_pairs": n_pairs,
        "cluster_members": members,
        "cluster_t_spread_s": spreads,
        "n_clusters_total": len(clusters),
    }
    if basis is not None and positions.size:
        zeros = _zeros_of(basis.grid, basis.phi2)
        if zeros.size:
            offs = [float(np.min(np.abs(zeros - p))) for p in positions]
            extras["phi2_zero_offset_fm"] = offs

    hbar_c = trajs[0].setup.hbar_c
    with np.errstate(divide="ignore"):
        mean_p = np.pi * hbar_c / dxs

    return NodeReport(
        times=times,
        positions=positions,
        dt=dts,
        dx=dxs,
        mean_momentum=mean_p,
        wavelength=2.0 * dxs,
        method="crossing-detection",
        extras=extras,
    )


def _zeros_of(x, y):
    s = np.sign(y)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    if idx.size == 0:
        return np.empty(0)
    return x[idx] - y[idx] * (x[idx + 1] - x[idx]) / (y[idx + 1] - y[idx])


def de_broglie(setup: PhysicalSetup, u0: float) -> float:
    """Wavelength h c / sqrt((E-U0)^2 - m2) = h/p for a constant potential [fm]."""
    ev = setup.E - u0
    disc = ev * ev - setup.rest_sq
    if disc <= 0:
        raise RegimeError("de Broglie wavelength needs an oscillatory configuration")
    return float(2.0 * np.pi * setup.hbar_c / np.sqrt(disc))


def mean_momentum(ra: ReducedAction, x_a: float, x_b: float) -> float:
    """[S0(x_b) - S0(x_a)] / (x_b - x_a), expressed in MeV/c.

    Computed from the action endpoint difference, not by averaging momentum
    samples; between adjacent nodes this is (a, b)-independent.
    """
    if not x_a < x_b:
        raise ValueError("x_a must be below x_b")
    ds = ra.s0(x_b) - ra.s0(x_a)
    return float(ds / (x_b - x_a) * ra.setup.c_fm_s)


# ----------------------------------------------------------------------
# residual validators
# ----------------------------------------------------------------------

def _stencil_derivatives(t, x, half: int = 3, stride: int = 1):
    """First three derivatives of x(t) by local degree-6 interpolation on 7 samples.

    Works on non-uniform abscissae; windows are shifted and scaled before
    the Vandermonde solve for conditioning.  ``stride`` widens the stencil
    (every stride-th sample) to trade truncation error against float-noise
    amplification.  Returns arrays aligned with t[half*stride : -half*stride].
    """
    n = t.size
    if n < 2 * half * stride + 1:
        raise TooFewSamples(f"need at least {2 * half * stride + 1} samples")
    m = n - 2 * half * stride
    w = 2 * half + 1
    idx = np.arange(m)[:, None] + stride * np.arange(w)[None, :]
    tw = t[idx]
    xw = x[idx]
    tc = tw[:, half][:, None]
    s = tw - tc
    r = np.max(np.abs(s), axis=1, keepdims=True)
    sn = s / r
    # center x per window: the fit sees the variation, not the offset
    xc = xw - xw[:, half][:, None]
    powers = sn[:, :, None] ** np.arange(w)[None, None, :]
    coef = np.linalg.solve(powers, xc[:, :, None])[:, :, 0]
    r1 = r[:, 0]
    xd = coef[:, 1] / r1
    xdd = 2.0 * coef[:, 2] / r1**2
    xddd = 6.0 * coef[:, 3] / r1**3
    return xd, xdd, xddd


def closure_residual(traj: Trajectory, setup: PhysicalSetup = None, pot: Potential = None) -> ValidationReport:
    """Law-of-motion closure |xdot P / (sigma kin) - 1| with centered-difference xdot."""
    setup = setup or traj.setup
    pot = pot or traj.potential
    if traj.t.size < 3:
        raise TooFewSamples("closure needs at least 3 samples")
    xd = traj.velocity_centered()                       # [fm/s]
    x_in = traj.x[1:-1]
    pc = traj.momentum[1:-1]
    sigma = traj.meta.get("direction", setup.direction)
    ev = setup.E - np.asarray(pot.v(x_in), dtype=float)
    kin = ev - setup.rest_sq / ev
    res = np.abs(xd * pc / (sigma * setup.c_fm_s * kin) - 1.0)
    return _summary("closure", res)


def firqnl_residual(
    traj: Trajectory, setup: PhysicalSetup = None, pot: Potential = None,
    independent_var: str = "auto", stride: int = 1,
) -> ValidationReport:
    """Normalized residual of the third-order first integral of the motion.

    Five terms are evaluated per interior sample (derivatives from 7-point
    local polynomial fits) and the sum is divided by the largest term
    magnitude.  For constant potentials the potential-derivative terms are
    identically zero and are flagged as exact in the notes.

    Derivatives are taken along whichever variable the trace samples
    uniformly: t(x) windows for quadrature output (uniform x), x(t) windows
    for closed forms (uniform t).  Both give the same kinematics; the choice
    only controls where float noise is amplified.
    """
    setup = setup or traj.setup
    pot = pot or traj.potential
    if independent_var == "auto":
        independent_var = "x" if traj.meta.get("method") == "quadrature-simpson" else "t"
    if independent_var == "x":
        tp, tpp, tppp = _stencil_derivatives(traj.x, traj.t, stride=stride)
        xd = 1.0 / tp
        xdd = -tpp / tp**3
        xddd = (3.0 * tpp**2 - tppp * tp) / tp**5
    else:
        xd, xdd, xddd = _stencil_derivatives(traj.t, traj.x, stride=stride)
    x_in = traj.x[3 * stride : -3 * stride]

    c = setup.c_fm_s
    hb = setup.hbar
    m2 = setup.rest_sq
    w = setup.E - np.asarray(pot.v(x_in), dtype=float)
    vp = np.asarray(pot.dv(x_in), dtype=float)
    vpp = np.asarray(pot.d2v(x_in), dtype=float)
    q = w * w - m2

    t1 = q**3 * ((1.0 - xd**2 / c**2) - m2 / w**2)
    t2 = -(hb**2 / 2.0) * ((w**4 - m2**2) / w) * (xdd * vp)
    t3 = -(hb**2 / 2.0) * ((w**4 - m2**2) / w) * (xd**2 * vpp)
    t4 = (hb**2 / 2.0) * q**2 * (1.5 * (xdd / xd) ** 2 - xddd / xd)
    t5 = -(hb**2 / 4.0) * (4.0 * m2 * (1.0 - m2 / w**2) + 3.0 * (w + m2 / w) ** 2) * (xd * vp) ** 2

    total = t1 + t2 + t3 + t4 + t5
    # normalize by the largest displayed piece; the q^3 m2/w^2 monomial never
    # vanishes, so the denominator is bounded away from zero even where the
    # signed terms cross zero together
    pieces = np.stack(
        [
            np.abs(q**3 * (1.0 - xd**2 / c**2)),
            np.abs(q**3 * m2 / w**2),
            np.abs(t2),
            np.abs(t3),
            np.abs((hb**2 / 2.0) * q**2 * 1.5 * (xdd / xd) ** 2),
            np.abs((hb**2 / 2.0) * q**2 * xddd / xd),
            np.abs(t5),
        ]
    )
    scale = np.max(pieces, axis=0)
    res = np.abs(total) / scale

    notes = {}
    if isinstance(pot, ConstantPotential):
        notes["exact_zero_terms"] = ["xdd*dV", "xd^2*d2V", "(xd*dV)^2"]
    return _summary("first-integral", res, notes=notes)


def rqshje_residual(
    ra: ReducedAction, setup: PhysicalSetup = None, pot: Potential = None
) -> ValidationReport:
    """Normalized residual of the quantum Hamilton-Jacobi equation on the grid.

    Terms (each in MeV^2): (Pc)^2, the Schwarzian-type correction
    -(hbar c)^2/2 [3/2 (Pc'/Pc)^2 - Pc''/Pc], and m2 - (E-V)^2.  Momentum
    derivatives are closed-form (no differencing).
    """
    setup = setup or ra.setup
    if pot is None:
        raise ValueError("potential required")
    x = ra.grid
    u = -wavenumber_sq(setup, pot, x)
    pc, pcp, pcpp = ra.momentum_derivatives(u)
    ev = setup.E - np.asarray(pot.v(x), dtype=float)

    t1 = pc * pc
    t2 = -(setup.hbar_c**2 / 2.0) * (1.5 * (pcp / pc) ** 2 - pcpp / pc)
    t3 = setup.rest_sq - ev * ev
    total = t1 + t2 + t3
    scale = np.max(np.abs(np.stack([t1, t2, t3])), axis=0)
    res = np.abs(total) / scale
    return _summary("quantum-hj", res)


# ----------------------------------------------------------------------
# classical-limit metrics
# ----------------------------------------------------------------------

# plot-convention scales for distances in the (t, x) plane
T_SCALE_S = 1e-20
X_SCALE_FM = 1e3     # 1e-12 m


def pp0_distance(
    traj: Trajectory,
    x0: float,
    slope_fm_s: float,
    t_scale: float = T_SCALE_S,
    x_scale: float = X_SCALE_FM,
) -> np.ndarray:
    """Per-sample distance to the classical line x = x0 + slope * t.

    Measured in the scaled (t/t_scale, x/x_scale) plane, i.e. the plotting
    convention in which the projection construction is stated.
    """
    v = slope_fm_s * t_scale / x_scale
    dev = (traj.x - (x0 + slope_fm_s * traj.t)) / x_scale
    return np.abs(dev) / np.sqrt(1.0 + v * v)


def pp0_bound(
    setup: PhysicalSetup,
    u0: float,
    t_scale: float = T_SCALE_S,
    x_scale: float = X_SCALE_FM,
) -> float:
    """sqrt(1 + 1/v^2) * node period, an upper bound for any PP0 distance."""
    ev = setup.E - u0
    disc = ev * ev - setup.rest_sq
    v = setup.c_fm_s * np.sqrt(disc) / ev * t_scale / x_scale
    return float(np.sqrt(1.0 + 1.0 / v**2) * node_period(setup, u0) / t_scale)


def limit_checks(
    setup: PhysicalSetup,
    u0: float = 0.0,
    hp: HiddenParams = None,
    c_scales=(1.0, 2.0, 4.0, 8.0),
    eps_scales=(1.0, 0.5, 0.25, 0.125),
    kinetic_ratio: float = 1e-3,
) -> ValidationReport:
    """Two limit studies: the low-speed reduction and the small-hbar scaling.

    (i) With kinetic energy T fixed and the rest energy scaled up like c^2,
    the law-of-motion right side approaches 2T; the relative gap must track
    T / (2 m0c2) linearly.  (ii) With hbar scaled by eps the node spacings
    scale exactly linearly and the maximal distance to the classical line
    decreases monotonically.
    """
    from .trajectory import trace_constant_oscillatory

    hp = hp or HiddenParams(a=0.25, b=8.0)

    t_kin = kinetic_ratio * setup.m0c2
    gaps, ratios = [], []
    for s in c_scales:
        m0c2 = setup.m0c2 * s * s
        ev = m0c2 + t_kin
        kin = ev - m0c2 * m0c2 / ev
        gaps.append(abs(kin / (2.0 * t_kin) - 1.0))
        ratios.append(gaps[-1] / (t_kin / m0c2))
    nonrel_linear = all(0.4 <= r <= 0.6 for r in ratios)
    nonrel_monotone = all(gaps[i + 1] < gaps[i] for i in range(len(gaps) - 1))

    dx1 = node_spacing(setup, u0)
    dt1 = node_period(setup, u0)
    dx_ratio_err = []
    pp0_max = []
    t_end = 5.0 * dt1
    v_cl = setup.c_fm_s * np.sqrt((setup.E - u0) ** 2 - setup.rest_sq) / (setup.E - u0)
    for eps in eps_scales:
        se = setup.scaled_hbar(eps)
        dx_ratio_err.append(abs(node_spacing(se, u0) / dx1 - eps))
        dx_ratio_err.append(abs(node_period(se, u0) / dt1 - eps))
        tr = trace_constant_oscillatory(se, u0, hp, 0.0, (0.0, t_end), n_samples=20001)
        pp0_max.append(float(np.max(pp0_distance(tr, 0.0, v_cl))))
    eps_linear = max(dx_ratio_err) <= 1e-9
    pp0_monotone = all(pp0_max[i + 1] < pp0_max[i] for i in range(len(pp0_max) - 1))

    passed = nonrel_linear and nonrel_monotone and eps_linear and pp0_monotone
    notes = {
        "nonrel_gaps": [float(g) for g in gaps],
        "nonrel_gap_over_ratio": [float(r) for r in ratios],
        "nonrel_linear": nonrel_linear,
        "eps_scales": list(eps_scales),
        "eps_spacing_error_max": float(max(dx_ratio_err)),
        "pp0_max_per_eps": [float(p) for p in pp0_max],
        "pp0_monotone_decreasing": pp0_monotone,
    }
    residuals = np.array(gaps + dx_ratio_err)
    report = _summary("limit-checks", residuals, notes=notes)
    report.passed = passed
    return report

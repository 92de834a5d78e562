"""Trajectories x(t): closed forms for constant potentials, quadrature otherwise.

The trajectory law integrated here is

    dx/dt = sigma * (1 / hbar a W) * [E - V - (m0c2)^2/(E-V)] * [phi2^2 + (a phi1 + b phi2)^2]

with sigma = +-1 the direction sign.  For a constant potential the time
equation inverts in closed form to an arctan-of-tan staircase whose branch
constant advances by pi at every node crossing; the node pattern
(t_n, x_n) is shared by the whole (a, b) family.  For general potentials
the right side depends on x only, so t(x) is accumulated by composite
Simpson quadrature on the basis grid (no stiffness where the velocity
peaks, since no time stepping is involved).

Every emitted sample carries the conjugate momentum so validators can test
the closure xdot * P = sigma * [E - V - (m0c2)^2/(E-V)] sample by sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .action import ReducedAction
from .errors import BasisGapError, RegimeError, TurningPointSingular
from .kleingordon import SolutionBasis, wavenumber_sq
from .model import (
    ConstantPotential,
    HiddenParams,
    LinearPotential,
    PhysicalSetup,
    Potential,
    REGIME_REL_TOL,
)
from .output import write_csv


@dataclass
class Trajectory:
    """Ordered (t, x) samples with branch index, regime tags and metadata.

    t in seconds, x in fm, momentum in MeV/c (signed).  ``meta`` carries the
    producing setup/potential/params and any events (divergence, truncation).
    """

    t: np.ndarray
    x: np.ndarray
    branch: np.ndarray
    regime: np.ndarray
    momentum: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.t.size >= 2 and not np.all(np.diff(self.t) > 0):
            raise ValueError("sample times must be strictly increasing")

    @property
    def setup(self) -> PhysicalSetup:
        return self.meta["setup"]

    @property
    def potential(self) -> Potential:
        return self.meta["potential"]

    def velocity_centered(self):
        """Centered-difference xdot on interior samples [fm/s]."""
        dt = self.t[2:] - self.t[:-2]
        return (self.x[2:] - self.x[:-2]) / dt

    def to_csv(self, path, header=(), footer=()):
        write_csv(
            path,
            header,
            [
                ("t_s", self.t),
                ("x_fm", self.x),
                ("branch_n", self.branch),
                ("regime", self.regime),
                ("P_MeV_per_c", self.momentum),
            ],
            footer_comments=footer,
        )


def cumulative_simpson(f: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral of samples f on a uniform grid, Simpson weights.

    Even indices see plain composite Simpson; odd indices add the half-pair
    rule h/12 (5 f0 + 8 f1 - f2), so the whole table is fourth order.
    """
    n = f.size
    out = np.zeros(n)
    if n < 2:
        return out
    if n == 2:
        out[1] = 0.5 * h * (f[0] + f[1])
        return out

    npairs = (n - 1) // 2
    i = 2 * np.arange(npairs)
    pair_inc = h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2])
    even_vals = np.concatenate(([0.0], np.cumsum(pair_inc)))
    out[2 * np.arange(npairs + 1)] = even_vals

    j = 2 * np.arange(npairs)
    out[j + 1] = out[j] + h / 12.0 * (5.0 * f[j] + 8.0 * f[j + 1] - f[j + 2])
    if n % 2 == 0:
        # trailing odd interval: right half of the last full parabola
        out[n - 1] = out[n - 2] + h / 12.0 * (
            -f[n - 3] + 8.0 * f[n - 2] + 5.0 * f[n - 1]
        )
    return out


def _reduce_phase(theta: np.ndarray):
    """Split theta into branch index n and residual in [-pi/2, pi/2).

    The pairing is made consistent by construction (residual recomputed from
    n), so the tangent of the residual and the branch term can never
    disagree, even for samples within rounding of a pole.
    """
    n = np.floor(theta / np.pi + 0.5)
    res = theta - n * np.pi
    low = res < -np.pi / 2
    n = np.where(low, n - 1.0, n)
    res = np.where(low, res + np.pi, res)
    high = res >= np.pi / 2
    n = np.where(high, n + 1.0, n)
    res = np.where(high, res - np.pi, res)
    return n, res


def _constant_oscillatory_fields(setup: PhysicalSetup, u0: float):
    ev = setup.E - u0
    disc = ev * ev - setup.rest_sq
    tol = REGIME_REL_TOL * setup.rest_sq
    if abs(disc) <= tol:
        raise TurningPointSingular("(E-U0)^2 equals the rest-energy square")
    if disc < 0:
        raise RegimeError("oscillatory trace requested with evanescent parameters")
    k = np.sqrt(disc) / setup.hbar_c          # [1/fm]
    omega = disc / (setup.hbar * ev)          # [1/s], sign follows E-U0
    kin = disc / ev                           # [MeV]
    return disc, k, omega, kin


def node_period(setup: PhysicalSetup, u0: float) -> float:
    """Time between adjacent nodes |pi hbar (E-U0) / ((E-U0)^2 - m2)| [s]."""
    _, _, omega, _ = _constant_oscillatory_fields(setup, u0)
    return float(np.pi / abs(omega))


def node_spacing(setup: PhysicalSetup, u0: float) -> float:
    """Distance between adjacent nodes pi hbar c / sqrt((E-U0)^2 - m2) [fm]."""
    _, k, _, _ = _constant_oscillatory_fields(setup, u0)
    return float(np.pi / k)


def trace_constant_oscillatory(
    setup: PhysicalSetup,
    u0: float,
    hp: HiddenParams,
    x0: float,
    t_range,
    n_samples: int = 4096,
) -> Trajectory:
    """Closed-form staircase trajectory for a constant potential.

    ``x0`` is the additive constant of the closed form (the basis origin
    shared by a trajectory family; node positions are x0 + (n + 1/2) pi/k).
    x(0) = x0 + arctan(-b/a)/k, which is x0 exactly when b = 0.
    """
    disc, k, omega, kin = _constant_oscillatory_fields(setup, u0)
    a, b = hp.a, hp.b
    sigma = setup.direction

    t = np.linspace(t_range[0], t_range[1], n_samples)
    tau = sigma * t
    theta = omega * tau
    n_branch, theta_res = _reduce_phase(theta)
    with np.errstate(over="ignore", invalid="ignore"):
        u = (np.tan(theta_res) - b) / a
    phase = np.arctan(u) + np.sign(a) * np.pi * n_branch
    x = phase / k + x0
    n_branch = n_branch.astype(int)

    # direction only mirrors x(t); samples stay ascending in t
    d = np.cos(phase) ** 2 + (a * np.sin(phase) + b * np.cos(phase)) ** 2
    momentum = setup.hbar_c * a * k / d       # [MeV/c]

    return Trajectory(
        t=t,
        x=x,
        branch=n_branch,
        regime=np.full(t.shape, "oscillatory", dtype=object),
        momentum=momentum,
        meta={
            "setup": setup,
            "potential": ConstantPotential(u0),
            "params": hp,
            "x0": x0,
            "direction": sigma,
            "method": "closed-form",
            "node_period_s": node_period(setup, u0),
            "node_spacing_fm": node_spacing(setup, u0),
            "events": {},
        },
    )


def evanescent_divergence_times(
    setup: PhysicalSetup, u0: float, hp: HiddenParams, t_min: float = 0.0, count: int = 4
):
    """First few singular times of the evanescent closed form after t_min.

    Two families: the tangent argument reaching pi/2 (mod pi) sends x to
    +infinity; the log argument crossing zero sends x to -infinity.  Also
    returns, for comparison only, the (2n+1) pi hbar (E-U0) / (4 ((E-U0)^2 - m2))
    value quoted in prose in the source literature, which does not match the
    closed form (factor 2 and sign).
    """
    ev = setup.E - u0
    m_gap = setup.rest_sq - ev * ev
    omega_e = m_gap / (setup.hbar * ev)
    events = []
    n = 0
    while len(events) < 2 * count + 4 and n < 10 * count + 20:
        t_tan = (np.pi / 2 + n * np.pi) / omega_e
        if t_tan > t_min:
            events.append((t_tan, "tan_singularity"))
        t_log = (np.arctan(-hp.b) + n * np.pi) / omega_e
        if t_log > t_min:
            events.append((t_log, "log_zero"))
        n += 1
    events.sort()
    prose_value = abs(np.pi * setup.hbar * ev / (4.0 * (ev * ev - setup.rest_sq)))
    return events[: 2 * count], prose_value


def trace_constant_evanescent(
    setup: PhysicalSetup,
    u0: float,
    hp: HiddenParams,
    x0: float,
    t_range,
    n_samples: int = 4096,
    window_fm: float = None,
) -> Trajectory:
    """Closed-form trajectory in the classically forbidden constant-potential case.

    x(t) = (hbar c / 2 sqrt(m2 - (E-U0)^2)) ln|(tan(omega_e t) + b)/a| + x0,
    omega_e = (m2 - (E-U0)^2)/(hbar (E-U0)).  The particle covers an infinite
    distance in finite time: sampling stops once |x - x0| exceeds the window
    and the analytic divergence time is reported in the metadata.
    """
    ev = setup.E - u0
    m_gap = setup.rest_sq - ev * ev
    tol = REGIME_REL_TOL * setup.rest_sq
    if abs(m_gap) <= tol:
        raise TurningPointSingular("(E-U0)^2 equals the rest-energy square")
    if m_gap < 0:
        raise RegimeError("evanescent trace requested with oscillatory parameters")

    kappa2 = np.sqrt(m_gap)                   # sqrt(m2 - (E-U0)^2) [MeV]
    scale = setup.hbar_c / (2.0 * kappa2)     # [fm]
    omega_e = m_gap / (setup.hbar * ev)       # [1/s]
    kin = ev - setup.rest_sq / ev             # [MeV], negative for 0 < E-U0 < m0c2
    sigma = setup.direction

    if window_fm is None:
        window_fm = 20.0 * abs(scale)

    t = np.linspace(t_range[0], t_range[1], n_samples)
    tau = sigma * t
    _, theta_res = _reduce_phase(omega_e * tau)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        tan_arg = np.tan(theta_res)
        log_arg = (tan_arg + hp.b) / hp.a
        x = scale * np.log(np.abs(log_arg)) + x0
        # analytic velocity -> momentum through the closure identity
        dxdt = scale * omega_e * sigma * (1.0 + tan_arg**2) / (tan_arg + hp.b)
        momentum = sigma * kin * setup.c_fm_s / dxdt   # [MeV/c]

    inside = np.abs(x - x0) <= window_fm
    inside &= np.isfinite(x)
    events = {}
    if not bool(np.all(inside)):
        first_out = int(np.argmin(inside))  # first False
        if first_out == 0:
            first_out = 1
        t, x, momentum = t[:first_out], x[:first_out], momentum[:first_out]
        events["halt"] = "DivergenceReached"

    sing, prose_value = evanescent_divergence_times(setup, u0, hp, t_min=min(0.0, t_range[0]))
    events["divergence_time_s"] = float(sing[0][0]) if sing else None
    events["divergence_kind"] = sing[0][1] if sing else None
    events["prose_divergence_time_s"] = float(prose_value)

    return Trajectory(
        t=t,
        x=x,
        branch=np.zeros(t.shape, dtype=int),
        regime=np.full(t.shape, "evanescent", dtype=object),
        momentum=momentum,
        meta={
            "setup": setup,
            "potential": ConstantPotential(u0),
            "params": hp,
            "x0": x0,
            "direction": sigma,
            "method": "closed-form-evanescent",
            "window_fm": window_fm,
            "events": events,
        },
    )


def _zero_near(grid: np.ndarray, values: np.ndarray, x_target: float, what: str) -> float:
    """Position of the sign-change zero of ``values`` nearest x_target."""
    s = np.sign(values)
    flips = np.nonzero(s[:-1] * s[1:] < 0)[0]
    if flips.size == 0:
        raise BasisGapError(f"no zero of {what} inside the basis grid")
    xz = grid[flips] - values[flips] * (grid[flips + 1] - grid[flips]) / (
        values[flips + 1] - values[flips]
    )
    return float(xz[np.argmin(np.abs(xz - x_target))])


def trace_quadrature(
    setup: PhysicalSetup,
    pot: Potential,
    basis: SolutionBasis,
    hp: HiddenParams,
    x0: float,
    x_range,
    direction: int = None,
    v_min_frac: float = 1e-6,
    sync: str = "exact",
) -> Trajectory:
    """Trajectory t(x) by composite Simpson quadrature of 1/v on the basis grid.

    ``sync`` fixes the time origin: "exact" puts t = 0 at the grid point
    nearest x0.  "psi_zero" puts t = 0 where a phi1 + b phi2 vanishes
    nearest x0 (the convention of the constant-potential closed form, whose
    t = 0 has a zero reduced action).  "phi2_zero" puts t = 0 at the zero of
    phi2 nearest x0, a point all members of the (a, b) family cross at the
    same phase, so every synced trajectory passes through it at t = 0.
    Either zero convention makes a family share its nodes (exactly for a
    constant potential, to within a slow drift otherwise).  Integration
    truncates with a flag where |v| falls under v_min_frac * c (turning
    point ahead).
    """
    sigma = setup.direction if direction is None else direction
    lo, hi = float(min(x_range)), float(max(x_range))
    if not basis.covers(lo, hi):
        raise BasisGapError("basis grid does not cover the requested x range")
    if not (lo <= x0 <= hi):
        raise BasisGapError("x0 outside the requested x range")

    ra = ReducedAction(basis, hp, setup)
    grid = basis.grid
    sel = (grid >= lo - 1e-12 * max(1.0, abs(lo))) & (
        grid <= hi + 1e-12 * max(1.0, abs(hi))
    )
    xs = grid[sel]
    if xs.size < 3:
        raise BasisGapError("fewer than 3 basis points inside the x range")
    h = float(xs[1] - xs[0])
    if not np.allclose(np.diff(xs), h, rtol=1e-8):
        raise ValueError("quadrature requires a uniform basis grid")

    ev = setup.E - np.asarray(pot.v(xs), dtype=float)
    kin = ev - setup.rest_sq / ev                     # [MeV]
    pc = ra.momentum_grid[sel]                        # [MeV/c]
    v = sigma * setup.c_fm_s * kin / pc               # [fm/s]

    # regime tags and turning-point truncation
    disc = ev * ev - setup.rest_sq
    tol = REGIME_REL_TOL * setup.rest_sq
    regime = np.where(disc > tol, "oscillatory", np.where(disc < -tol, "evanescent", "turning"))

    slow = np.abs(v) < v_min_frac * setup.c_fm_s
    truncated = bool(np.any(slow))
    if truncated:
        cut = int(np.argmax(slow))
        if cut < 3:
            raise RegimeError("entire range is inside the slow/turning zone")
        xs, v, pc, kin, regime = xs[:cut], v[:cut], pc[:cut], kin[:cut], regime[:cut]
        sel_idx = np.nonzero(sel)[0][:cut]
    else:
        sel_idx = np.nonzero(sel)[0]

    tt = cumulative_simpson(1.0 / v, h)

    # time origin
    if sync == "psi_zero":
        psi = hp.a * basis.phi1 + hp.b * basis.phi2
        anchor = _zero_near(basis.grid, psi, x0, "a*phi1 + b*phi2")
        anchor = min(max(anchor, xs[0]), xs[-1])
    elif sync == "phi2_zero":
        anchor = _zero_near(basis.grid, basis.phi2, x0, "phi2")
        anchor = min(max(anchor, xs[0]), xs[-1])
    elif sync == "exact":
        anchor = xs[int(np.argmin(np.abs(xs - x0)))]
    else:
        raise ValueError(f"unknown sync mode {sync!r}")
    tt = tt - np.interp(anchor, xs, tt)

    branch = ra.branch_grid[sel_idx]

    order = np.argsort(tt)
    tt, xs_o, branch, regime, pc = tt[order], xs[order], branch[order], regime[order], pc[order]

    events = {}
    if truncated:
        events["halt"] = "TurningPointInRange"

    return Trajectory(
        t=tt,
        x=xs_o,
        branch=branch,
        regime=regime.astype(object),
        momentum=pc,
        meta={
            "setup": setup,
            "potential": pot,
            "params": hp,
            "x0": x0,
            "anchor_x_fm": float(anchor),
            "direction": sigma,
            "method": "quadrature-simpson",
            "sync": sync,
            "events": events,
        },
    )


def classical_trace(
    setup: PhysicalSetup,
    pot: Potential,
    x0: float,
    t_range=None,
    x_range=None,
    n_samples: int = 1024,
) -> Trajectory:
    """Classical relativistic reference trajectory (hbar plays no role).

    Constant potential: straight line sampled over t_range.  Linear
    potential: closed-form decelerated arc sampled over x_range (stops at
    the turning point).  Tabulated: Simpson quadrature of 1/v over x_range.
    """
    sigma = setup.direction
    if isinstance(pot, ConstantPotential):
        if t_range is None:
            raise ValueError("t_range required for a constant potential")
        ev = setup.E - pot.u0
        disc = ev * ev - setup.rest_sq
        if disc <= 0 or ev <= 0:
            raise RegimeError("classical trace needs E - V > m0c2")
        vel = sigma * setup.c_fm_s * np.sqrt(disc) / ev
        t = np.linspace(t_range[0], t_range[1], n_samples)
        x = x0 + vel * t
        pc = np.full(t.shape, np.sqrt(disc))
    elif isinstance(pot, LinearPotential):
        if x_range is None:
            raise ValueError("x_range required for a linear potential")
        g = pot.slope
        x_turn = (setup.E - setup.m0c2) / g if g != 0 else np.inf
        lo, hi = float(min(x_range)), float(max(x_range))
        if g > 0:
            hi = min(hi, x_turn)
        elif g < 0:
            lo = max(lo, x_turn)
        x = np.linspace(lo, hi, n_samples)
        ev = setup.E - g * x
        disc = np.maximum(ev * ev - setup.rest_sq, 0.0)
        ev0 = setup.E - g * x0
        disc0 = ev0 * ev0 - setup.rest_sq
        if disc0 <= 0 or ev0 <= 0:
            raise RegimeError("x0 is not in the classically allowed region")
        t = sigma * (np.sqrt(disc0) - np.sqrt(disc)) / (g * setup.c_fm_s)
        pc = np.sqrt(np.maximum(disc, 0.0))
        order = np.argsort(t)
        t, x, pc = t[order], x[order], pc[order]
        keep = np.concatenate(([True], np.diff(t) > 0))
        t, x, pc = t[keep], x[keep], pc[keep]
    else:
        if x_range is None:
            raise ValueError("x_range required for a tabulated potential")
        x = np.linspace(float(min(x_range)), float(max(x_range)), n_samples)
        h = x[1] - x[0]
        ev = setup.E - np.asarray(pot.v(x), dtype=float)
        disc = ev * ev - setup.rest_sq
        if np.any(disc <= 0) or np.any(ev <= 0):
            raise RegimeError("classically forbidden point inside x_range")
        vel = sigma * setup.c_fm_s * np.sqrt(disc) / ev
        t = cumulative_simpson(1.0 / vel, h)
        t = t - np.interp(x0, x, t)
        pc = np.sqrt(disc)
        order = np.argsort(t)
        t, x, pc = t[order], x[order], pc[order]

    return Trajectory(
        t=t,
        x=x,
        branch=np.zeros(t.shape, dtype=int),
        regime=np.full(t.shape, "oscillatory", dtype=object),
        momentum=pc,
        meta={
            "setup": setup,
            "potential": pot,
            "params": None,
            "x0": x0,
            "direction": sigma,
            "method": "classical",
            "events": {},
        },
    )

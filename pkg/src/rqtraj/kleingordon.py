"""Two-solution basis of the stationary wave equation on a position grid.

The second-order form integrated here is
    phi'' = u(x) phi,   u(x) = [(m0 c^2)^2 - (E - V)^2] / (hbar c)^2,
so u < 0 gives oscillatory solutions and u > 0 exponential ones.  Constant
potentials get the closed-form sin/cos (or sinh/cosh) pair; anything else is
propagated as a first-order system carrying (phi, phi') so the Wronskian
stays accurate.  RK4 is the default; the first-order Euler scheme is kept
as a deliberately crude comparison option.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import BasisGapError, DependentInitials, StepTooLarge, TurningPointSingular
from .model import PhysicalSetup, Potential, ConstantPotential, REGIME_REL_TOL
from .output import write_csv


@dataclass
class SolutionBasis:
    """Grid samples of two independent real solutions and their derivatives.

    Wronskian convention: W = phi1' phi2 - phi1 phi2', so the oscillatory
    sin/cos pair has W = k > 0.  For the pure second-order form W is a
    constant of the motion; pointwise drift measures solver quality.
    """

    grid: np.ndarray          # [fm], strictly increasing
    phi1: np.ndarray
    dphi1: np.ndarray         # [1/fm]
    phi2: np.ndarray
    dphi2: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.grid.size >= 2 and not np.all(np.diff(self.grid) > 0):
            raise ValueError("basis grid must be strictly increasing")
        if abs(self.wronskian) == 0.0:
            raise DependentInitials("zero Wronskian: columns are dependent")

    @property
    def wronskian(self) -> float:
        """W at the first grid point [1/fm]."""
        return float(
            self.dphi1[0] * self.phi2[0] - self.phi1[0] * self.dphi2[0]
        )

    def wronskian_pointwise(self) -> np.ndarray:
        return self.dphi1 * self.phi2 - self.phi1 * self.dphi2

    def covers(self, lo: float, hi: float) -> bool:
        tol = 1e-9 * max(1.0, abs(self.grid[-1] - self.grid[0]))
        return self.grid[0] <= lo + tol and hi <= self.grid[-1] + tol

    def index_of(self, x: float) -> int:
        """Index of the grid point at x (must lie on the grid)."""
        i = int(np.searchsorted(self.grid, x))
        for j in (i - 1, i, i + 1):
            if 0 <= j < self.grid.size and np.isclose(
                self.grid[j], x, rtol=0.0, atol=1e-9 * max(1.0, abs(x))
            ):
                return j
        raise BasisGapError(f"x = {x} is not a grid point of the basis")

    def to_csv(self, path, header=()):
        write_csv(
            path,
            header,
            [
                ("x_fm", self.grid),
                ("phi1", self.phi1),
                ("dphi1_per_fm", self.dphi1),
                ("phi2", self.phi2),
                ("dphi2_per_fm", self.dphi2),
                ("wronskian_per_fm", self.wronskian_pointwise()),
            ],
        )


def wavenumber_sq(setup: PhysicalSetup, pot: Potential, x):
    """-u(x) = [(E-V)^2 - (m0 c^2)^2] / (hbar c)^2  [1/fm^2]."""
    ev = setup.E - np.asarray(pot.v(x), dtype=float)
    return (ev * ev - setup.rest_sq) / setup.hbar_c**2


def solve_constant(setup: PhysicalSetup, u0: float, grid) -> SolutionBasis:
    """Closed-form basis for V = u0.

    Oscillatory: (sin kx, cos kx) with k = sqrt((E-u0)^2 - (m0c2)^2)/(hbar c),
    W = k.  Evanescent: (sinh Kx, cosh Kx), W = K.  A turning-point
    configuration has no two-solution oscillatory basis and raises.
    """
    grid = np.asarray(grid, dtype=float)
    ev = setup.E - u0
    disc = ev * ev - setup.rest_sq
    if abs(disc) <= REGIME_REL_TOL * setup.rest_sq:
        raise TurningPointSingular("(E-U0)^2 equals the rest-energy square")
    if disc > 0:
        k = np.sqrt(disc) / setup.hbar_c
        basis = SolutionBasis(
            grid=grid,
            phi1=np.sin(k * grid),
            dphi1=k * np.cos(k * grid),
            phi2=np.cos(k * grid),
            dphi2=-k * np.sin(k * grid),
            provenance={"method": "analytic", "regime": "oscillatory", "k": k},
        )
    else:
        kappa = np.sqrt(-disc) / setup.hbar_c
        basis = SolutionBasis(
            grid=grid,
            phi1=np.sinh(kappa * grid),
            dphi1=kappa * np.cosh(kappa * grid),
            phi2=np.cosh(kappa * grid),
            dphi2=kappa * np.sinh(kappa * grid),
            provenance={"method": "analytic", "regime": "evanescent", "kappa": kappa},
        )
    return basis


def solve_numeric(
    setup: PhysicalSetup,
    pot: Potential,
    grid,
    method: str = "rk4",
    init1=(0.0, 1.0),
    init2=(1.0, 0.0),
    guard_step: bool = True,
) -> SolutionBasis:
    """Integrate the basis over a uniform grid as a first-order system.

    ``init1``/``init2`` are (phi, phi') at the first grid point; the defaults
    mirror the sin/cos convention at the origin up to normalization.  The
    step guard rejects |k h| > 0.1 where k is the largest local wavenumber.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise ValueError("grid must be a non-empty 1-D array")
    w0 = init1[1] * init2[0] - init1[0] * init2[1]
    if w0 == 0.0:
        raise DependentInitials("initial conditions are linearly dependent")
    if method not in ("euler", "rk4"):
        raise ValueError(f"unknown method {method!r}")

    if grid.size == 1:
        return SolutionBasis(
            grid=grid,
            phi1=np.array([init1[0]], dtype=float),
            dphi1=np.array([init1[1]], dtype=float),
            phi2=np.array([init2[0]], dtype=float),
            dphi2=np.array([init2[1]], dtype=float),
            provenance={"method": method, "step": 0.0},
        )

    steps = np.diff(grid)
    h = float(steps[0])
    if not np.allclose(steps, h, rtol=1e-8, atol=0.0):
        raise ValueError("numeric solve requires a uniform grid")

    u_nodes = -wavenumber_sq(setup, pot, grid)
    kmax = float(np.sqrt(np.max(np.abs(u_nodes))))
    if guard_step and kmax * h > 0.1:
        raise StepTooLarge(
            f"|k h| = {kmax * h:.3g} > 0.1; refine the grid or pass guard_step=False"
        )

    y0 = (float(init1[0]), float(init1[1]), float(init2[0]), float(init2[1]))
    if method == "euler":
        phi1, dphi1, phi2, dphi2 = _kernels.euler_pair(u_nodes, h, y0)
    else:
        u_mid = -wavenumber_sq(setup, pot, grid[:-1] + 0.5 * h)
        phi1, dphi1, phi2, dphi2 = _kernels.rk4_pair(u_nodes, u_mid, h, y0)

    return SolutionBasis(
        grid=grid,
        phi1=phi1,
        dphi1=dphi1,
        phi2=phi2,
        dphi2=dphi2,
        provenance={"method": method, "step": h, "backend": _kernels.BACKEND},
    )


def wronskian_drift(basis: SolutionBasis) -> float:
    """max over the grid of |W(x)/W(x0) - 1| (zero for closed forms)."""
    if basis.grid.size < 2:
        raise ValueError("drift needs at least two grid points")
    w = basis.wronskian_pointwise()
    return float(np.max(np.abs(w / w[0] - 1.0)))


def kg_residual(basis: SolutionBasis, setup: PhysicalSetup, pot: Potential) -> float:
    """Wave-equation residual of both columns by centered second differences.

    Normalized by the largest |u phi| on the grid; the measurement floor is
    the O(h^2) stencil truncation even for exact solutions.
    """
    x = basis.grid
    if x.size < 3:
        raise ValueError("residual needs at least three grid points")
    h = x[1] - x[0]
    u = -wavenumber_sq(setup, pot, x)
    worst = 0.0
    scale = 0.0
    for phi in (basis.phi1, basis.phi2):
        d2 = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) / h**2
        res = d2 - u[1:-1] * phi[1:-1]
        worst = max(worst, float(np.max(np.abs(res))))
        scale = max(scale, float(np.max(np.abs(u * phi))))
    return worst / scale if scale > 0 else worst

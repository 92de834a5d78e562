import numpy as np

import rqtraj._kernels as kernels
from rqtraj._kernels import fallback


def _problem(n=4001):
    x = np.linspace(-800.0, 700.0, n)
    ev = 2.0 - 1e-3 * x
    u = (0.511**2 - ev * ev) / 197.327**2
    h = float(x[1] - x[0])
    u_mid_x = x[:-1] + 0.5 * h
    ev_m = 2.0 - 1e-3 * u_mid_x
    u_mid = (0.511**2 - ev_m * ev_m) / 197.327**2
    y0 = (0.0, 0.019, 1.0, 0.0)
    return u, u_mid, h, y0


def test_backend_reported():
    assert kernels.BACKEND in ("compiled", "python")


def test_euler_parity_with_fallback():
    u, _, h, y0 = _problem()
    sel = kernels.euler_pair(u, h, y0)
    ref = fallback.euler_pair(u, h, y0)
    for a, b in zip(sel, ref):
        assert np.allclose(a, b, rtol=1e-13, atol=0.0)


def test_rk4_parity_with_fallback():
    u, u_mid, h, y0 = _problem()
    sel = kernels.rk4_pair(u, u_mid, h, y0)
    ref = fallback.rk4_pair(u, u_mid, h, y0)
    for a, b in zip(sel, ref):
        assert np.allclose(a, b, rtol=1e-13, atol=0.0)


def test_fallback_rk4_order():
    """Fallback integrator alone: fourth-order convergence on sin/cos."""
    k = 0.01
    errs = []
    for n in (501, 1001):
        x = np.linspace(0.0, 2000.0, n)
        h = float(x[1] - x[0])
        u = np.full(n, -k * k)
        u_mid = np.full(n - 1, -k * k)
        phi1, dphi1, phi2, dphi2 = fallback.rk4_pair(u, u_mid, h, (0.0, k, 1.0, 0.0))
        errs.append(np.max(np.abs(phi1 - np.sin(k * x))))
    assert errs[0] / errs[1] > 12

"""Pure-Python stepping kernels (used when the compiled extension is absent).

Propagates two independent columns of the linear system
    phi'  = dphi
    dphi' = u(x) * phi
over a uniform grid.  Same call signatures as the compiled module.
"""

import numpy as np


def euler_pair(u_nodes, h, y0):
    u = [float(v) for v in u_nodes]
    n = len(u)
    p1, d1, p2, d2 = (float(v) for v in y0)
    h = float(h)
    phi1 = np.empty(n)
    dphi1 = np.empty(n)
    phi2 = np.empty(n)
    dphi2 = np.empty(n)
    for i in range(n - 1):
        phi1[i], dphi1[i], phi2[i], dphi2[i] = p1, d1, p2, d2
        ui = u[i]
        p1, d1 = p1 + h * d1, d1 + h * ui * p1
        p2, d2 = p2 + h * d2, d2 + h * ui * p2
    phi1[n - 1], dphi1[n - 1], phi2[n - 1], dphi2[n - 1] = p1, d1, p2, d2
    return phi1, dphi1, phi2, dphi2


def _rk4_step(p, d, h, u0, um, u1):
    k1p = d
    k1d = u0 * p
    k2p = d + 0.5 * h * k1d
    k2d = um * (p + 0.5 * h * k1p)
    k3p = d + 0.5 * h * k2d
    k3d = um * (p + 0.5 * h * k2p)
    k4p = d + h * k3d
    k4d = u1 * (p + h * k3p)
    return (
        p + h / 6.0 * (k1p + 2.0 * (k2p + k3p) + k4p),
        d + h / 6.0 * (k1d + 2.0 * (k2d + k3d) + k4d),
    )


def rk4_pair(u_nodes, u_mid, h, y0):
    u = [float(v) for v in u_nodes]
    um = [float(v) for v in u_mid]
    n = len(u)
    p1, d1, p2, d2 = (float(v) for v in y0)
    h = float(h)
    phi1 = np.empty(n)
    dphi1 = np.empty(n)
    phi2 = np.empty(n)
    dphi2 = np.empty(n)
    for i in range(n - 1):
        phi1[i], dphi1[i], phi2[i], dphi2[i] = p1, d1, p2, d2
        p1, d1 = _rk4_step(p1, d1, h, u[i], um[i], u[i + 1])
        p2, d2 = _rk4_step(p2, d2, h, u[i], um[i], u[i + 1])
    phi1[n - 1], dphi1[n - 1], phi2[n - 1], dphi2[n - 1] = p1, d1, p2, d2
    return phi1, dphi1, phi2, dphi2

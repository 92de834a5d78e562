# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernels for the two-column linear system
    phi'  = dphi
    dphi' = u(x) * phi
on a uniform grid.  Mirrors fallback.py exactly (same arithmetic order)."""

import numpy as np


def euler_pair(double[::1] u_nodes, double h, y0):
    cdef Py_ssize_t n = u_nodes.shape[0]
    cdef double p1 = y0[0], d1 = y0[1], p2 = y0[2], d2 = y0[3]
    cdef double ui, np1, nd1, np2, nd2
    phi1_arr = np.empty(n); dphi1_arr = np.empty(n)
    phi2_arr = np.empty(n); dphi2_arr = np.empty(n)
    cdef double[::1] phi1 = phi1_arr, dphi1 = dphi1_arr
    cdef double[::1] phi2 = phi2_arr, dphi2 = dphi2_arr
    cdef Py_ssize_t i
    for i in range(n - 1):
        phi1[i] = p1; dphi1[i] = d1; phi2[i] = p2; dphi2[i] = d2
        ui = u_nodes[i]
        np1 = p1 + h * d1; nd1 = d1 + h * ui * p1
        np2 = p2 + h * d2; nd2 = d2 + h * ui * p2
        p1 = np1; d1 = nd1; p2 = np2; d2 = nd2
    phi1[n - 1] = p1; dphi1[n - 1] = d1; phi2[n - 1] = p2; dphi2[n - 1] = d2
    return phi1_arr, dphi1_arr, phi2_arr, dphi2_arr


cdef inline void _rk4_step(double* p, double* d, double h,
                           double u0, double um, double u1) nogil:
    cdef double k1p = d[0]
    cdef double k1d = u0 * p[0]
    cdef double k2p = d[0] + 0.5 * h * k1d
    cdef double k2d = um * (p[0] + 0.5 * h * k1p)
    cdef double k3p = d[0] + 0.5 * h * k2d
    cdef double k3d = um * (p[0] + 0.5 * h * k2p)
    cdef double k4p = d[0] + h * k3d
    cdef double k4d = u1 * (p[0] + h * k3p)
    cdef double pn = p[0] + h / 6.0 * (k1p + 2.0 * (k2p + k3p) + k4p)
    cdef double dn = d[0] + h / 6.0 * (k1d + 2.0 * (k2d + k3d) + k4d)
    p[0] = pn; d[0] = dn


def rk4_pair(double[::1] u_nodes, double[::1] u_mid, double h, y0):
    cdef Py_ssize_t n = u_nodes.shape[0]
    cdef double p1 = y0[0], d1 = y0[1], p2 = y0[2], d2 = y0[3]
    phi1_arr = np.empty(n); dphi1_arr = np.empty(n)
    phi2_arr = np.empty(n); dphi2_arr = np.empty(n)
    cdef double[::1] phi1 = phi1_arr, dphi1 = dphi1_arr
    cdef double[::1] phi2 = phi2_arr, dphi2 = dphi2_arr
    cdef Py_ssize_t i
    for i in range(n - 1):
        phi1[i] = p1; dphi1[i] = d1; phi2[i] = p2; dphi2[i] = d2
        _rk4_step(&p1, &d1, h, u_nodes[i], u_mid[i], u_nodes[i + 1])
        _rk4_step(&p2, &d2, h, u_nodes[i], u_mid[i], u_nodes[i + 1])
    phi1[n - 1] = p1; dphi1[n - 1] = d1; phi2[n - 1] = p2; dphi2[n - 1] = d2
    return phi1_arr, dphi1_arr, phi2_arr, dphi2_arr

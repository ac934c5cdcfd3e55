# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; same signatures as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, log, log1p, pow, fmax

cnp.import_array()


def pgfl_exponent_derivs(s_in, d_in, q_in, pref_in, shape_in, alpha_in, blockage_in, los_in,
                         unit_nodes, unit_weights, double decades, int max_order):
    cdef const double[::1] s = np.ascontiguousarray(s_in, dtype=np.float64)
    cdef const double[:, ::1] d = np.ascontiguousarray(d_in, dtype=np.float64)
    cdef const double[::1] q = np.ascontiguousarray(q_in, dtype=np.float64)
    cdef const double[::1] pref = np.ascontiguousarray(pref_in, dtype=np.float64)
    cdef const double[::1] shape = np.ascontiguousarray(shape_in, dtype=np.float64)
    cdef const double[::1] alpha = np.ascontiguousarray(alpha_in, dtype=np.float64)
    cdef const double[::1] blockage = np.ascontiguousarray(blockage_in, dtype=np.float64)
    cdef const cnp.uint8_t[::1] los = np.ascontiguousarray(los_in, dtype=np.uint8)
    cdef const double[::1] un = np.ascontiguousarray(unit_nodes, dtype=np.float64)
    cdef const double[::1] uw = np.ascontiguousarray(unit_weights, dtype=np.float64)
    cdef Py_ssize_t npts = s.shape[0], ncls = q.shape[0], nt = un.shape[0]
    cdef Py_ssize_t p, c, i
    cdef int m
    out_arr = np.zeros((npts, max_order + 1))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] rising = np.empty(max_order + 1)
    cdef double[::1] acc = np.empty(max_order + 1)
    cdef double kk, a, bb, dc, tmax, span, t, jac, wt, u, us, lg, base, pw, scale, tailw
    cdef double grow = pow(10.0, decades)
    for c in range(ncls):
        if pref[c] == 0.0:
            continue
        kk = shape[c]
        a = alpha[c]
        bb = blockage[c]
        rising[0] = 1.0
        for m in range(1, max_order + 1):
            rising[m] = rising[m - 1] * (kk + m - 1)
        for p in range(npts):
            dc = d[p, c]
            tmax = fmax(fmax(dc, pow(q[c] * s[p], 1.0 / a)), 1.0 / bb) * grow
            span = log(tmax / dc)
            for m in range(max_order + 1):
                acc[m] = 0.0
            for i in range(nt):
                t = dc * exp(span * un[i])
                jac = span * uw[i] * t * t
                if los[c]:
                    wt = exp(-bb * t)
                else:
                    wt = -expm1(-bb * t)
                base = wt * jac
                if base == 0.0:
                    continue
                u = q[c] * pow(t, -a)
                us = u * s[p]
                lg = log1p(us)
                acc[0] += expm1(-kk * lg) * base
                scale = exp(-kk * lg) * base
                pw = 1.0
                for m in range(1, max_order + 1):
                    pw *= -u
                    scale /= (1.0 + us)
                    acc[m] += rising[m] * pw * scale
            if not los[c]:
                tailw = -expm1(-bb * tmax)
                acc[0] += -kk * q[c] * s[p] * pow(tmax, 2.0 - a) / (a - 2.0) * tailw
                pw = 1.0
                for m in range(1, max_order + 1):
                    pw *= -q[c]
                    acc[m] += rising[m] * pw * pow(tmax, 2.0 - m * a) / (m * a - 2.0) * tailw
            for m in range(max_order + 1):
                out[p, m] += pref[c] * acc[m]
    return out_arr


def associate(metric_in, r_in, tier_in):
    cdef const double[::1] metric = np.ascontiguousarray(metric_in, dtype=np.float64)
    cdef const double[::1] r = np.ascontiguousarray(r_in, dtype=np.float64)
    cdef const long long[::1] tier = np.ascontiguousarray(tier_in, dtype=np.int64)
    cdef Py_ssize_t i, best = 0, n = metric.shape[0]
    for i in range(1, n):
        if metric[i] > metric[best] or (metric[i] == metric[best] and (
                r[i] < r[best] or (r[i] == r[best] and tier[i] < tier[best]))):
            best = i
    return best


def interference_sum(tier_in, path_loss_in, uniform_in, fading_in, cum_in, gains_in, power_in,
                     Py_ssize_t skip):
    cdef const long long[::1] tier = np.ascontiguousarray(tier_in, dtype=np.int64)
    cdef const double[::1] pl = np.ascontiguousarray(path_loss_in, dtype=np.float64)
    cdef const double[::1] u = np.ascontiguousarray(uniform_in, dtype=np.float64)
    cdef const double[::1] g = np.ascontiguousarray(fading_in, dtype=np.float64)
    cdef const double[:, ::1] cum = np.ascontiguousarray(cum_in, dtype=np.float64)
    cdef const double[:, ::1] gains = np.ascontiguousarray(gains_in, dtype=np.float64)
    cdef const double[::1] power = np.ascontiguousarray(power_in, dtype=np.float64)
    cdef Py_ssize_t i, n = tier.shape[0]
    cdef long long j
    cdef int k
    cdef double total = 0.0
    for i in range(n):
        if i == skip:
            continue
        j = tier[i]
        k = 0
        while k < 3 and u[i] >= cum[j, k]:
            k += 1
        total += gains[j, k] * power[j] * pl[i] * g[i]
    return total

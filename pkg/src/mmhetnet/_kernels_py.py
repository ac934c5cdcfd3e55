"""NumPy implementations of the hot kernels; used when the compiled module is absent."""
from __future__ import annotations

import numpy as np


def pgfl_exponent_derivs(s, d, q, pref, shape, alpha, blockage, los, unit_nodes, unit_weights,
                         decades, max_order):
    """Derivatives in ``s`` of the log-Laplace functional of the interference.

    For each outer point ``p`` (serving distance) and interferer class ``c``
    the class contributes

        pref[c] * int_{d[p, c]}^inf  D^m [(1 + s u)^-K - 1]  w(t) t dt,  u = q[c] t^-alpha[c]

    with ``w = exp(-blockage t)`` for LOS classes and ``1 - exp(-blockage t)``
    otherwise. Returns an array of shape ``(len(s), max_order + 1)``; column
    ``m`` is the m-th derivative of the exponent.
    """
    s = np.asarray(s, dtype=float)
    d = np.asarray(d, dtype=float)
    out = np.zeros((len(s), max_order + 1))
    for c in range(len(q)):
        if pref[c] == 0.0:
            continue
        kk, a, bb = float(shape[c]), float(alpha[c]), float(blockage[c])
        # rising factorials (K)_m
        rising = np.concatenate([[1.0], np.cumprod(kk + np.arange(max_order))])
        dc = d[:, c]
        sat = (q[c] * s) ** (1.0 / a)
        tmax = np.maximum(np.maximum(dc, sat), 1.0 / bb) * 10.0**decades
        span = np.log(tmax / dc)
        t = dc[:, None] * np.exp(span[:, None] * unit_nodes[None, :])
        jac = span[:, None] * unit_weights[None, :] * t * t
        wt = np.exp(-bb * t) if los[c] else -np.expm1(-bb * t)
        u = q[c] * t ** -a
        us = u * s[:, None]
        lg = np.log1p(us)
        base = wt * jac
        out[:, 0] += pref[c] * np.sum(np.expm1(-kk * lg) * base, axis=1)
        for order in range(1, max_order + 1):
            f = rising[order] * (-u) ** order * np.exp(-(kk + order) * lg)
            out[:, order] += pref[c] * np.sum(f * base, axis=1)
        if not los[c]:
            tail = np.empty((len(s), max_order + 1))
            tail[:, 0] = -kk * q[c] * s * tmax ** (2 - a) / (a - 2)
            for order in range(1, max_order + 1):
                tail[:, order] = rising[order] * (-q[c]) ** order * tmax ** (2 - order * a) / (order * a - 2)
            out += pref[c] * tail * -np.expm1(-bb * tmax)[:, None]
    return out


def associate(metric, r, tier):
    """Index of the strongest BS; ties by smaller distance, then lower tier."""
    # lexsort: last key is primary
    return int(np.lexsort((tier, r, -metric))[0])


def interference_sum(tier, path_loss, uniform, fading, cum, gains, power, skip):
    """Aggregate interference: gain class by inverse CDF of ``uniform``, then gain * P * L * g."""
    k = np.minimum((uniform[:, None] >= cum[tier]).sum(axis=1), 3)
    terms = gains[tier, k] * power[tier] * path_loss * fading
    if 0 <= skip < len(terms):
        terms[skip] = 0.0
    return float(terms.sum())

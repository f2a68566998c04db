"""Hypergeometric series, Hermite polynomials, Pochhammer symbols.

All routines are vectorized over the argument and evaluate in float64 unless
``extended=True``, which sums the series and returns values in ``numpy.longdouble``.
"""
from __future__ import annotations

import numpy as np
from scipy import special

from .errors import InvalidParameterError, NonConvergenceError

REL_TOL = 1e-16
MAX_TERMS = 100_000


def _is_nonpositive_int(c: float) -> bool:
    return c <= 0 and float(c).is_integer()


def _check_denominators(denoms) -> None:
    for b in denoms:
        if _is_nonpositive_int(b):
            raise InvalidParameterError(f"denominator parameter {b} is a non-positive integer")


def _sum_series(ratio, x, growth_index: float, extended: bool):
    """Sum t_0 = 1, t_{m+1} = t_m * ratio(m) * x until the tail is negligible.

    ``growth_index`` is the largest |numerator parameter|; the stopping test is
    only trusted once m exceeds it and the term ratio has turned below 1/2.
    """
    if np.iscomplexobj(x):
        dtype = np.clongdouble if extended else np.complex128
    else:
        dtype = np.longdouble if extended else np.float64
    x = np.asarray(x, dtype=dtype)
    term = np.ones_like(x)
    total = np.ones_like(x)
    xmax = float(np.max(np.abs(x))) if x.size else 0.0
    m = 0
    while True:
        r = ratio(m)
        term = term * r * x
        total = total + term
        m += 1
        if m > growth_index and abs(r) * xmax < 0.5:
            if np.all(np.abs(term) <= REL_TOL * np.abs(total)):
                break
        if not np.any(term):
            if m > growth_index:
                break
        if m >= MAX_TERMS:
            raise NonConvergenceError(f"series did not converge within {MAX_TERMS} terms")
    return total


def _series_1f1(a: float, b: float, x, extended: bool = False):
    return _sum_series(lambda m: (a + m) / ((b + m) * (m + 1)), x, abs(a) + 1, extended)


def kummer_1f1(a: float, b: float, x, extended: bool = False):
    """Confluent hypergeometric function 1F1(a; b; x).

    Negative arguments go through Kummer's transformation
    1F1(a; b; x) = e^x 1F1(b - a; b; -x) so that the summed series never
    alternates, unless ``a`` is a non-positive integer (a polynomial, summed as is).
    """
    _check_denominators([b])
    x = np.asarray(x, dtype=np.longdouble if extended else float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty(x.shape, dtype=np.longdouble if extended else float)
    if _is_nonpositive_int(a):
        out[...] = _series_1f1(a, b, x, extended)
    else:
        pos = x >= 0
        if np.any(pos):
            out[pos] = _series_1f1(a, b, x[pos], extended)
        if np.any(~pos):
            xn = x[~pos]
            out[~pos] = np.exp(xn) * _series_1f1(b - a, b, -xn, extended)
    return out[0] if scalar else out


def kummer_1f1_da(a: float, b: float, x):
    """Parameter derivative d/da 1F1(a; b; x) for x >= 0, summed termwise.

    Uses d(a)_{m+1} = d(a)_m (a + m) + (a)_m, which stays finite when
    ``a`` is a non-positive integer.
    """
    _check_denominators([b])
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise InvalidParameterError("kummer_1f1_da expects non-negative arguments")
    poch = np.ones_like(x)  # (a)_m x^m / ((b)_m m!)
    dpoch = np.zeros_like(x)  # d/da of the same
    total = np.zeros_like(x)
    xmax = float(np.max(x)) if x.size else 0.0
    m = 0
    while True:
        scale = x / ((b + m) * (m + 1))
        poch, dpoch = poch * (a + m) * scale, (dpoch * (a + m) + poch) * scale
        total = total + dpoch
        m += 1
        ratio = abs(a + m) / ((b + m) * (m + 1)) * xmax
        if m > abs(a) + 1 and ratio < 0.5:
            if np.all(np.abs(dpoch) <= REL_TOL * np.maximum(np.abs(total), 1e-300)):
                break
        if m >= MAX_TERMS:
            raise NonConvergenceError(f"series did not converge within {MAX_TERMS} terms")
    return total


def hyper_0fq(denoms, x, extended: bool = False):
    """Generalized hypergeometric 0Fq(; b_1, ..., b_q; x), real or complex x."""
    denoms = [float(b) for b in denoms]
    _check_denominators(denoms)

    def ratio(m):
        r = 1.0 / (m + 1)
        for b in denoms:
            r /= b + m
        return r

    x = np.asarray(x)
    kind = complex if np.iscomplexobj(x) else float
    out = _sum_series(ratio, x.astype(kind), 0.0, extended).astype(kind)
    return out[()] if out.ndim == 0 else out


def pochhammer(c, m: int):
    """Rising factorial (c)_m = c (c + 1) ... (c + m - 1)."""
    if m < 0:
        raise InvalidParameterError("pochhammer index must be non-negative")
    out = np.ones_like(np.asarray(c, dtype=float))
    for j in range(m):
        out = out * (np.asarray(c, dtype=float) + j)
    return out[()] if out.ndim == 0 else out


def hermite(n: int, x):
    """Physicists' Hermite polynomial H_n(x) by the three-term recursion."""
    if n < 0:
        raise InvalidParameterError("hermite degree must be non-negative")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev[()] if x.ndim == 0 else h_prev
    h = 2 * x
    for k in range(1, n):
        h_prev, h = h, 2 * x * h - 2 * k * h_prev
    return h[()] if x.ndim == 0 else h


def erf(x):
    return special.erf(x)


def gamma_ratio(p: float, q: float) -> float:
    """Gamma(p) / Gamma(q); zero when q sits on a pole, error when p does."""
    if _is_nonpositive_int(p):
        if _is_nonpositive_int(q):
            raise InvalidParameterError(f"Gamma({p})/Gamma({q}) is a ratio of two poles")
        raise InvalidParameterError(f"Gamma({p}) has a pole")
    if _is_nonpositive_int(q):
        return 0.0
    sign = special.gammasgn(p) * special.gammasgn(q)
    return float(sign * np.exp(special.gammaln(p) - special.gammaln(q)))

"""Truncated Taylor arithmetic.

A jet of order K is an array ``c`` of shape ``(K + 1, *x.shape)`` holding the
normalized Taylor coefficients ``c[n] = f^(n)(x) / n!`` of a function at every
sample point.  Products, quotients and Wronskians of jets carry exact
derivatives, which is what the Darboux machinery needs.
"""
from __future__ import annotations

from itertools import permutations
from math import factorial

import numpy as np


def order(a: np.ndarray) -> int:
    return a.shape[0] - 1


def constant(value, x: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((k + 1,) + np.shape(x), dtype=np.result_type(value, float))
    out[0] = value
    return out


def identity(x: np.ndarray, k: int) -> np.ndarray:
    """Jet of f(x) = x."""
    out = np.zeros((k + 1,) + np.shape(x), dtype=np.result_type(x, float))
    out[0] = x
    if k >= 1:
        out[1] = 1.0
    return out


def truncate(a: np.ndarray, k: int) -> np.ndarray:
    if order(a) < k:
        raise ValueError(f"jet of order {order(a)} cannot be truncated to {k}")
    return a[: k + 1]


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    k = min(order(a), order(b))
    out = np.zeros((k + 1,) + a.shape[1:], dtype=np.result_type(a, b))
    for n in range(k + 1):
        acc = a[0] * b[n]
        for j in range(1, n + 1):
            acc = acc + a[j] * b[n - j]
        out[n] = acc
    return out


def div(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    k = min(order(a), order(b))
    out = np.zeros((k + 1,) + a.shape[1:], dtype=np.result_type(a, b))
    for n in range(k + 1):
        acc = a[n]
        for j in range(1, n + 1):
            acc = acc - b[j] * out[n - j]
        out[n] = acc / b[0]
    return out


def reciprocal(b: np.ndarray) -> np.ndarray:
    return div(constant(1.0, b[0], order(b)), b)


def diff(a: np.ndarray) -> np.ndarray:
    """Jet of f' (one order lower)."""
    k = order(a)
    if k < 1:
        raise ValueError("cannot differentiate an order-0 jet")
    n = np.arange(1, k + 1).reshape((k,) + (1,) * (a.ndim - 1))
    return a[1:] * n


def integrate(a: np.ndarray, value: np.ndarray) -> np.ndarray:
    """Jet of F with F' = a and F(x) = value (one order higher)."""
    k = order(a)
    out = np.zeros((k + 2,) + a.shape[1:], dtype=np.result_type(a, value))
    out[0] = value
    n = np.arange(1, k + 2).reshape((k + 1,) + (1,) * (a.ndim - 1))
    out[1:] = a / n
    return out


def log_derivative(a: np.ndarray) -> np.ndarray:
    """Jet of f'/f (one order lower)."""
    return div(diff(a), truncate(a, order(a) - 1))


def rescale(a: np.ndarray, s: float) -> np.ndarray:
    """Coefficients of y -> f(s * y) given the jet of f at x = s * y."""
    k = order(a)
    powers = s ** np.arange(k + 1, dtype=float)
    return a * powers.reshape((k + 1,) + (1,) * (a.ndim - 1))


def derivatives(a: np.ndarray) -> np.ndarray:
    """Plain derivatives f^(n)(x) from normalized coefficients."""
    k = order(a)
    f = np.array([factorial(n) for n in range(k + 1)], dtype=float)
    return a * f.reshape((k + 1,) + (1,) * (a.ndim - 1))


def from_derivatives(d: np.ndarray) -> np.ndarray:
    k = order(d)
    f = np.array([factorial(n) for n in range(k + 1)], dtype=float)
    return d / f.reshape((k + 1,) + (1,) * (d.ndim - 1))


def _sign(perm) -> int:
    p = list(perm)
    sign = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def determinant(rows: list[list[np.ndarray]]) -> np.ndarray:
    """Leibniz expansion of a small matrix whose entries are jets."""
    m = len(rows)
    total = None
    for perm in permutations(range(m)):
        term = rows[0][perm[0]]
        for r in range(1, m):
            term = mul(term, rows[r][perm[r]])
        term = term if _sign(perm) > 0 else -term
        total = term if total is None else total + term
    return total


def wronskian(jets: list[np.ndarray], k: int) -> np.ndarray:
    """Order-k jet of W(f_1, ..., f_m); each input needs order >= k + m - 1."""
    m = len(jets)
    if m == 0:
        raise ValueError("empty Wronskian has no jet shape; handle m == 0 upstream")
    rows = []
    current = [truncate(j, k + m - 1) for j in jets]
    for r in range(m):
        rows.append([truncate(c, k) for c in current])
        if r < m - 1:
            current = [diff(c) for c in current]
    return determinant(rows)

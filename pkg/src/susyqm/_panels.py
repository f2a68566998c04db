"""Cumulative quadrature on Chebyshev-Lobatto panels.

Panels are laid out outward from an anchor point with widths shrinking like
1/(1 + |x|), so Gaussian-type integrands are resolved to machine precision
on each panel.  Cumulative integrals are accumulated away from the anchor,
never as differences of large numbers, and stay available at every node so
nested integrals (Jordan chains) reuse the same mesh.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import chebyshev as C

from .errors import InvalidParameterError


class PanelMesh:
    def __init__(self, domain, anchor: float, n_nodes: int = 20, width: float = 0.5):
        a, b = map(float, domain)
        if not a <= anchor <= b:
            raise InvalidParameterError(f"anchor {anchor} outside {domain}")
        right = [anchor]
        while right[-1] < b:
            right.append(min(b, right[-1] + width / (1 + abs(right[-1]))))
        left = [anchor]
        while left[-1] > a:
            left.append(max(a, left[-1] - width / (1 + abs(left[-1]))))
        self.edges = np.array(left[::-1] + right[1:])
        # drop slivers produced by clipping at the domain ends
        if len(self.edges) > 2 and self.edges[1] - self.edges[0] < 1e-3 * width:
            self.edges = np.delete(self.edges, 1)
        if len(self.edges) > 2 and self.edges[-1] - self.edges[-2] < 1e-3 * width:
            self.edges = np.delete(self.edges, -2)
        self.anchor = float(anchor)
        self.anchor_index = int(np.argmin(np.abs(self.edges - anchor)))
        self.domain = (a, b)
        self.t = -np.cos(np.pi * np.arange(n_nodes) / (n_nodes - 1))
        self._to_coeffs = np.linalg.inv(C.chebvander(self.t, n_nodes - 1))
        lo, hi = self.edges[:-1], self.edges[1:]
        self.half = 0.5 * (hi - lo)
        self.mid = 0.5 * (hi + lo)
        self.x = self.mid[:, None] + self.half[:, None] * self.t[None, :]

    @property
    def n_panels(self) -> int:
        return len(self.edges) - 1

    def locate(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.domain
        if np.any(x < a - 1e-12) or np.any(x > b + 1e-12):
            raise InvalidParameterError(f"evaluation point outside the quadrature domain {self.domain}")
        idx = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, self.n_panels - 1)
        t = (x - self.mid[idx]) / self.half[idx]
        return idx, t

    def coefficients(self, values: np.ndarray) -> np.ndarray:
        """Chebyshev coefficients per panel, shape (P, n)."""
        return values @ self._to_coeffs.T

    def cumulative(self, values: np.ndarray, start: float = 0.0) -> "PanelFunction":
        """F(x) = start + integral from the anchor to x of the sampled integrand."""
        values = np.asarray(values, dtype=float)
        if values.shape != self.x.shape:
            raise InvalidParameterError("integrand must be sampled on the mesh nodes")
        coeffs = C.chebint(self.coefficients(values).T, lbnd=-1, axis=0).T * self.half[:, None]
        end = C.chebval(1.0, coeffs.T)  # integral over each whole panel
        k0 = self.anchor_index
        offset = np.zeros(self.n_panels)
        acc = start
        for p in range(k0, self.n_panels):
            offset[p] = acc
            acc += end[p]
        acc = start
        for p in range(k0 - 1, -1, -1):
            acc -= end[p]
            offset[p] = acc
        coeffs[:, 0] += offset
        return PanelFunction(self, coeffs)

    def interpolant(self, values: np.ndarray) -> "PanelFunction":
        return PanelFunction(self, self.coefficients(np.asarray(values, dtype=float)))


class PanelFunction:
    """Piecewise Chebyshev series on a PanelMesh."""

    def __init__(self, mesh: PanelMesh, coeffs: np.ndarray):
        self.mesh = mesh
        self.coeffs = coeffs
        self.nodes = coeffs @ C.chebvander(mesh.t, coeffs.shape[1] - 1).T

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx, t = self.mesh.locate(x.ravel())
        out = C.chebval(t, self.coeffs[idx].T, tensor=False)
        return out.reshape(x.shape)

"""Dirac-Weyl electrons in graphene under a magnetic field B(x) e_z.

In the Landau gauge A = A(x) e_y and with Psi = e^{iky} (psi+, i psi-) the
Dirac-Weyl equation reduces to the first-order pair

    (+-d/dx + W) psi-+ = (E / hbar v_F) psi+-,     W = e A / (c hbar) + k,

so H+- = -d^2/dx^2 + W^2 +- W' are first-order SUSY partners (convention
factor 1) with H+- = B-+ B+-, B+- = -+d/dx + W.  Natural units are the default.

Spectra are computed by Chebyshev collocation on a Dirichlet box: the
eigenvectors are polynomials, so psi+ = B- psi- / sqrt(calE) and every
derivative used in a residual is exact for the computed state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.fft import dct
from scipy.linalg import eig

from ._panels import PanelMesh
from .errors import ConvergenceError, InvalidParameterError
from .schrodinger import Potential, WaveFunction, schrodinger_residual, solve_spectrum_fd

ZERO_MODE_TOL = 1e-6


@dataclass(frozen=True)
class Units:
    """hbar, c, e and v_F; they only enter W = eA/(c hbar) + k and E = hbar v_F sqrt(calE)."""
    hbar: float = 1.0
    c: float = 1.0
    e: float = 1.0
    v_F: float = 1.0

    @property
    def coupling(self) -> float:
        return self.e / (self.c * self.hbar)


NATURAL = Units()


@dataclass(frozen=True)
class MagneticProfile:
    """Field magnitude B(x), vector potential A(x) with A' = B, and wave number k_y.

    When ``A_of_x`` is omitted it is built by panel quadrature of B from x = 0
    over ``interval``.
    """
    B_of_x: Callable[[np.ndarray], np.ndarray]
    A_of_x: Callable[[np.ndarray], np.ndarray] | None = None
    k_y: float = 0.0
    name: str = "custom"
    interval: tuple[float, float] = (-10.0, 10.0)
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.A_of_x is None:
            a, b = self.interval
            mesh = PanelMesh((a, b), anchor=min(max(0.0, a), b))
            prim = mesh.cumulative(np.asarray(self.B_of_x(mesh.x), dtype=float))
            object.__setattr__(self, "A_of_x", prim)

    def B(self, x):
        return np.asarray(self.B_of_x(np.asarray(x, dtype=float)), dtype=float)

    def A(self, x):
        return np.asarray(self.A_of_x(np.asarray(x, dtype=float)), dtype=float)

    def with_ky(self, k_y: float) -> "MagneticProfile":
        return MagneticProfile(self.B_of_x, self.A_of_x, k_y, self.name, self.interval, dict(self.params))


def constant_field(B0: float = 1.0, k_y: float = 0.0, interval=(-10.0, 10.0)) -> MagneticProfile:
    return MagneticProfile(lambda x: np.full_like(x, B0, dtype=float), lambda x: B0 * x, k_y,
                           "constant", tuple(interval), {"B0": B0})


def sech2_field(B0: float = 3.0, k_y: float = 0.0, interval=(-12.0, 12.0)) -> MagneticProfile:
    """B = B0 sech^2 x, A = B0 tanh x; V- is a Poeschl-Teller well."""
    return MagneticProfile(lambda x: B0 / np.cosh(x) ** 2, lambda x: B0 * np.tanh(x), k_y,
                           "sech2", tuple(interval), {"B0": B0})


def linear_field(b1: float = 1.0, k_y: float = 0.0, interval=(-8.0, 8.0)) -> MagneticProfile:
    """B = b1 x, A = b1 x^2 / 2 (a field reversing sign at the origin)."""
    return MagneticProfile(lambda x: b1 * x, lambda x: 0.5 * b1 * x**2, k_y,
                           "linear", tuple(interval), {"b1": b1})


PROFILES = {"constant": constant_field, "sech2": sech2_field, "linear": linear_field}


def profile_by_name(name: str, k_y: float = 0.0, **params) -> MagneticProfile:
    try:
        make = PROFILES[name]
    except KeyError:
        raise InvalidParameterError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None
    return make(k_y=k_y, **params)


class Superpotential:
    """W(x) = e A(x) / (c hbar) + k, with W' = e B(x) / (c hbar)."""

    def __init__(self, profile: MagneticProfile, units: Units = NATURAL):
        self.profile = profile
        self.units = units

    def __call__(self, x):
        return self.units.coupling * self.profile.A(x) + self.profile.k_y

    def derivative(self, x):
        return self.units.coupling * self.profile.B(x)


def superpotential(profile: MagneticProfile, units: Units = NATURAL) -> Superpotential:
    return Superpotential(profile, units)


def partner_potentials(w: Superpotential) -> tuple[Potential, Potential]:
    """(V+, V-) = W^2 +- W', convention factor 1."""
    name = w.profile.name
    v_plus = Potential(lambda x: w(x) ** 2 + w.derivative(x), f"V+[{name}]", w.profile.interval, 1.0,
                       meta={"partner": "V-", "superpotential": name})
    v_minus = Potential(lambda x: w(x) ** 2 - w.derivative(x), f"V-[{name}]", w.profile.interval, 1.0,
                        meta={"partner": "V+", "superpotential": name})
    return v_plus, v_minus


# --- Chebyshev collocation -------------------------------------------------

def _cheb_nodes_and_matrix(n: int, interval):
    """Lobatto nodes (descending, as in the classical construction) and D on the interval."""
    a, b = interval
    t = np.cos(np.pi * np.arange(n + 1) / n)
    cw = np.ones(n + 1)
    cw[0] = cw[-1] = 2.0
    cw *= (-1.0) ** np.arange(n + 1)
    dt = t[:, None] - t[None, :]
    d = np.outer(cw, 1 / cw) / (dt + np.eye(n + 1))
    d -= np.diag(d.sum(axis=1))
    scale = 2.0 / (b - a)
    return 0.5 * (a + b) + 0.5 * (b - a) * t, t, d * scale


class ChebFunction:
    """Polynomial on [a, b] given by Chebyshev coefficients; zero outside."""

    def __init__(self, coeffs: np.ndarray, interval):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.interval = tuple(float(v) for v in interval)

    @classmethod
    def interpolate(cls, t, values, interval):
        """Exact interpolant through values at the Lobatto nodes cos(pi j / n)."""
        n = len(t) - 1
        a = dct(np.asarray(values, dtype=float), type=1) / n
        a[0] /= 2
        a[-1] /= 2
        return cls(a, interval)

    def _t(self, x):
        a, b = self.interval
        return (2 * x - a - b) / (b - a)

    def jet(self, x, k):
        x = np.asarray(x, dtype=float)
        a, b = self.interval
        inside = (x >= a) & (x <= b)
        t = self._t(x)
        out = np.zeros((k + 1,) + x.shape)
        c = self.coeffs
        for n in range(k + 1):
            out[n] = np.where(inside, C.chebval(t, c), 0.0) / factorial(n)
            c = C.chebder(c) * (2.0 / (b - a))
        return out

    def integral_of_square(self) -> float:
        a, b = self.interval
        sq = C.chebint(C.chebmul(self.coeffs, self.coeffs), lbnd=-1)
        return float(C.chebval(1.0, sq) * 0.5 * (b - a))

    def as_wavefunction(self, energy, name) -> WaveFunction:
        return WaveFunction(self.jet, energy, normalized=True, name=name)


@dataclass
class DiracSolution:
    """One Dirac level: energy E, spinor (psi+, psi-) and calE = E^2 / (hbar v_F)^2.

    Each component is L2-normalized on the box when it is not identically zero.
    """
    n: int
    energy: float
    psi_plus: WaveFunction
    psi_minus: WaveFunction
    calE: float
    branch: int = 1

    def __post_init__(self):
        if self.calE < 0:
            raise InvalidParameterError(f"calE must be non-negative, got {self.calE}")


def _zero_function(interval) -> ChebFunction:
    return ChebFunction(np.zeros(1), interval)


def _fixed_sign(values: np.ndarray) -> np.ndarray:
    return values if values[np.argmax(np.abs(values))] >= 0 else -values


def _collocation_levels(v_minus: Potential, interval, n_nodes: int, n_levels: int):
    x, t, d = _cheb_nodes_and_matrix(n_nodes, interval)
    d2 = d @ d
    inner = slice(1, n_nodes)
    h = -d2[inner, inner] + np.diag(v_minus(x[inner]))
    w, vecs = eig(h)
    ok = np.abs(w.imag) < 1e-8 * (1 + np.abs(w.real))
    w, vecs = w.real[ok], vecs.real[:, ok]
    order = np.argsort(w)[:n_levels]
    full = np.zeros((n_nodes + 1, len(order)))
    full[inner] = vecs[:, order]
    return x, t, d, w[order], full


def dirac_spectrum(profile: MagneticProfile, n_levels: int = 5, units: Units = NATURAL,
                   n_nodes: int = 300, tolerance: float = 1e-8) -> list[DiracSolution]:
    """Lowest ``n_levels`` values of calE with both branches E = +-hbar v_F sqrt(calE).

    H- is diagonalized; psi+ = (d/dx + W) psi- / sqrt(calE).  A normalizable zero
    mode (psi- ~ exp(-int W), or psi+ ~ exp(+int W)) is emitted once, with the
    other component identically zero.  Collocation at n_nodes and 3 n_nodes / 4
    must agree within ``tolerance`` or ConvergenceError is raised.
    """
    if n_levels < 1:
        raise InvalidParameterError("n_levels must be positive")
    interval = profile.interval
    w = superpotential(profile, units)
    v_plus, v_minus = partner_potentials(w)
    zero_sector = zero_mode_sector(profile, units)
    n_minus = n_levels if zero_sector != "+" else n_levels - 1

    out: list[DiracSolution] = []
    if n_minus > 0:
        x, t, d, levels, vecs = _collocation_levels(v_minus, interval, n_nodes, n_minus)
        _, _, _, coarse, _ = _collocation_levels(v_minus, interval, (3 * n_nodes) // 4, n_minus)
        if len(levels) < n_minus or len(coarse) < n_minus:
            raise ConvergenceError("collocation produced too few real levels")
        drift = np.abs(levels - coarse)
        if np.any(drift > tolerance * (1 + np.abs(levels))):
            raise ConvergenceError(f"collocation levels moved by {drift.max():.3g} under refinement")
        edge = min(v_minus(np.array(interval, dtype=float)))
        if levels[-1] >= edge:
            raise InvalidParameterError(
                f"level {levels[-1]:.6g} is not confined by V- on {interval} (edge value {edge:.6g})")
        wx = w(x)
        for n, (cal_e, vec) in enumerate(zip(levels, vecs.T)):
            if zero_sector == "-" and n == 0:
                if abs(cal_e) > ZERO_MODE_TOL:
                    raise ConvergenceError(f"expected a zero mode in H-, lowest level is {cal_e:.3g}")
                cal_e = 0.0
            psi_m = ChebFunction.interpolate(t, _fixed_sign(vec), interval)
            psi_m = ChebFunction(psi_m.coeffs / np.sqrt(psi_m.integral_of_square()), interval)
            if cal_e == 0.0:
                out.append(DiracSolution(0, 0.0, _zero_function(interval).as_wavefunction(0.0, "psi+ 0"),
                                         psi_m.as_wavefunction(0.0, "psi- 0"), 0.0, 0))
                continue
            if cal_e < 0:
                raise ConvergenceError(f"negative calE {cal_e:.3g} in H- = B+ B-")
            vals = psi_m.jet(x, 0)[0]
            plus_vals = (d @ vals + wx * vals) / np.sqrt(cal_e)
            psi_p = ChebFunction.interpolate(t, plus_vals, interval)
            label = n + (1 if zero_sector == "+" else 0)
            for branch in (1, -1):
                energy = branch * units.hbar * units.v_F * np.sqrt(cal_e)
                pp = ChebFunction(branch * psi_p.coeffs, interval)
                out.append(DiracSolution(label, float(energy),
                                         pp.as_wavefunction(cal_e, f"psi+ {label}"),
                                         psi_m.as_wavefunction(cal_e, f"psi- {label}"), float(cal_e), branch))
    if zero_sector == "+":
        x, t, _ = _cheb_nodes_and_matrix(n_nodes, interval)
        phi = _antiderivative(w, interval, n_nodes)
        vals = np.exp(phi(x) - phi(x).max())
        vals[0] = vals[-1] = 0.0
        psi_p = ChebFunction.interpolate(t, vals, interval)
        psi_p = ChebFunction(psi_p.coeffs / np.sqrt(psi_p.integral_of_square()), interval)
        out.insert(0, DiracSolution(0, 0.0, psi_p.as_wavefunction(0.0, "psi+ 0"),
                                    _zero_function(interval).as_wavefunction(0.0, "psi- 0"), 0.0, 0))
    return out


def _antiderivative(w: Superpotential, interval, n_nodes: int) -> ChebFunction:
    x, t, _ = _cheb_nodes_and_matrix(n_nodes, interval)
    c = C.chebint(ChebFunction.interpolate(t, w(x), interval).coeffs, lbnd=0) * 0.5 * (interval[1] - interval[0])
    a, b = interval
    return lambda y: C.chebval((2 * np.asarray(y) - a - b) / (b - a), c)


def zero_mode_sector(profile: MagneticProfile, units: Units = NATURAL, rel: float = 1e-8) -> str | None:
    """'-' if exp(-int W) is normalizable on the box, '+' if exp(+int W) is, else None."""
    w = superpotential(profile, units)
    phi = _antiderivative(w, profile.interval, 200)
    x = np.linspace(*profile.interval, 2001)
    p = phi(x)
    for sector, s in (("-", -1.0), ("+", 1.0)):
        q = s * p
        if q[0] - q.max() < np.log(rel) and q[-1] - q.max() < np.log(rel):
            return sector
    return None


def intertwine_residual(profile: MagneticProfile, solution: DiracSolution, units: Units = NATURAL,
                        grid=None) -> float:
    """max over the grid of |(+-d/dx + W) psi-+ - (E / hbar v_F) psi+-|."""
    x = np.linspace(*profile.interval, 2001)[1:-1] if grid is None else np.asarray(grid, dtype=float)
    w = superpotential(profile, units)(x)
    s = solution.energy / (units.hbar * units.v_F)
    jp, jm = solution.psi_plus.jet(x, 1), solution.psi_minus.jet(x, 1)
    r1 = jm[1] + w * jm[0] - s * jp[0]
    r2 = -jp[1] + w * jp[0] - s * jm[0]
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


def dirac_residual(profile: MagneticProfile, solution: DiracSolution, units: Units = NATURAL,
                   grid=None) -> float:
    """max of the H+ psi+ = calE psi+ and H- psi- = calE psi- residuals."""
    x = np.linspace(*profile.interval, 2001)[1:-1] if grid is None else np.asarray(grid, dtype=float)
    v_plus, v_minus = partner_potentials(superpotential(profile, units))
    return max(schrodinger_residual(v_plus, solution.psi_plus, solution.calE, x),
               schrodinger_residual(v_minus, solution.psi_minus, solution.calE, x))


def fd_pairing(profile: MagneticProfile, n_levels: int = 5, units: Units = NATURAL,
               n_points: int = 2000) -> tuple[np.ndarray, np.ndarray]:
    """FD levels of H+ and H- (the oracle for spectral pairing)."""
    v_plus, v_minus = partner_potentials(superpotential(profile, units))
    plus = solve_spectrum_fd(v_plus, profile.interval, n_points, n_levels).eigenvalues
    minus = solve_spectrum_fd(v_minus, profile.interval, n_points, n_levels).eigenvalues
    return plus, minus


def spectrum_csv(solutions: list[DiracSolution]) -> str:
    lines = ["n,branch,calE,E"]
    lines += [f"{s.n:d},{s.branch:d},{s.calE:.17e},{s.energy:.17e}" for s in solutions]
    return "\n".join(lines) + "\n"


def spinor_csv(solutions: list[DiracSolution], x) -> str:
    x = np.asarray(x, dtype=float)
    cols = ["x"]
    data = [x]
    for s in solutions:
        if s.branch == -1:
            continue
        cols += [f"psi_plus_{s.n}", f"psi_minus_{s.n}"]
        data += [s.psi_plus(x), s.psi_minus(x)]
    rows = np.column_stack(data)
    lines = [",".join(cols)] + [",".join(f"{v:.17e}" for v in r) for r in rows]
    return "\n".join(lines) + "\n"

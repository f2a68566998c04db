"""Ladder algebras and coherent states for H and its SUSY partners.

Intrinsic ladder operators act as a- psi_n = r(n) psi_{n-1}; the natural
ones of the partner carry the extra factor prod_i [(E_n - eps_i)(E_{n-1} - eps_i)]^(1/2).
Coherent states are eigenstates of the annihilators written in the energy
basis, so most checks reduce to identities between coefficient vectors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import lgamma, log
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import CutoffError, InvalidParameterError
from .schrodinger import oscillator_eigenfunction, working_grid
from .specfun import hyper_0fq, pochhammer
from .susy import SusyTransform, transform_eigenfunction

TAIL_TOL = 1e-16
MAX_CUTOFF = 4000


def oscillator_energy(n):
    return n + 0.5


@dataclass(frozen=True)
class LadderSpec:
    E_of_n: Callable[[int], float] = oscillator_energy
    tau: float = 0.0
    epsilons: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        levels = [self.E_of_n(n) for n in range(200)]
        for e in self.epsilons:
            if any(np.isclose(e, level) for level in levels):
                raise InvalidParameterError(f"eps = {e} coincides with a level of H")

    @property
    def k(self) -> int:
        return len(self.epsilons)


@dataclass
class CoherentState:
    z: complex
    coefficients: np.ndarray
    basis: str
    moments: np.ndarray
    tau: float = 0.0
    tail: float = field(default=0.0, repr=False)

    @property
    def cutoff(self) -> int:
        return len(self.coefficients)


def intrinsic_r(n: int, spec: LadderSpec = LadderSpec()) -> complex:
    if n < 0:
        raise InvalidParameterError("n must be non-negative")
    if n == 0:
        return 0j
    E = spec.E_of_n
    return np.exp(1j * spec.tau * (E(n) - E(n - 1))) * np.sqrt(E(n) - E(0))


def _natural_factor(n: int, spec: LadderSpec) -> float:
    E = spec.E_of_n
    prod = 1.0
    for e in spec.epsilons:
        prod *= (E(n) - e) * (E(n - 1) - e)
    if prod < 0:
        raise InvalidParameterError(f"negative radicand {prod} in the natural ladder factor at n={n}")
    return prod


def natural_r_tilde(n: int, spec: LadderSpec) -> complex:
    if n <= 0:
        if n < 0:
            raise InvalidParameterError("n must be non-negative")
        return 0j
    return np.sqrt(_natural_factor(n, spec)) * intrinsic_r(n, spec)


def moments(spec: LadderSpec, m: int, partner: bool = False) -> float:
    """rho_m (or the partner rho~_m) as the product of |r(j)|^2, j = 1..m."""
    return float(np.exp(log_moments(spec, m, partner)[-1]))


def log_moments(spec: LadderSpec, m_max: int, partner: bool = False) -> np.ndarray:
    out = np.zeros(m_max + 1)
    E = spec.E_of_n
    for j in range(1, m_max + 1):
        step = np.log(E(j) - E(0))
        if partner:
            step += np.log(_natural_factor(j, spec))
        out[j] = out[j - 1] + step
    return out


def oscillator_moments(m: int, epsilons: Sequence[float] = ()) -> float:
    """m! prod_i (1/2 - eps_i)_m (3/2 - eps_i)_m."""
    val = float(np.exp(lgamma(m + 1)))
    for e in epsilons:
        val *= float(pochhammer(0.5 - e, m) * pochhammer(1.5 - e, m))
    return val


def coherent_coefficients(z: complex, spec: LadderSpec = LadderSpec(), partner: bool = False,
                          cutoff: int | None = None, tau: float | None = None) -> CoherentState:
    """Normalized coefficients e^{-i tau (E_m - E_0)} z^m / sqrt(rho_m).

    Without ``cutoff`` the vector grows until |z|^{2M}/rho_M falls below
    TAIL_TOL times the partial norm.
    """
    tau = spec.tau if tau is None else tau
    z = complex(z)
    E = spec.E_of_n
    if cutoff is None and z == 0:
        cutoff = 1
    if cutoff is None:
        m = 16
        while True:
            logrho = log_moments(spec, m, partner)
            lw = 2 * np.arange(m + 1) * log(abs(z)) - logrho
            lw[0] = 0.0
            top = np.max(lw)
            partial = np.sum(np.exp(lw - top))
            if lw[-1] - top - np.log(partial) < np.log(TAIL_TOL) and lw[-1] < lw[-2]:
                break
            m *= 2
            if m > MAX_CUTOFF:
                raise CutoffError(f"|z| = {abs(z):g} needs more than {MAX_CUTOFF} terms")
        cutoff = m + 1
    logrho = log_moments(spec, cutoff - 1, partner)
    ms = np.arange(cutoff)
    with np.errstate(divide="ignore", invalid="ignore"):
        logmag = ms * (np.log(abs(z)) if z != 0 else -np.inf) - 0.5 * logrho
    logmag[0] = 0.0
    phase = np.exp(1j * (ms * np.angle(z) - tau * np.array([E(m) - E(0) for m in ms])))
    c = np.exp(logmag - np.max(logmag)) * phase
    norm2 = float(np.sum(np.abs(c) ** 2))
    tail = 0.0
    if z != 0:  # weight of the first dropped term
        nxt = log_moments(spec, cutoff, partner)[-1]
        tail = float(np.exp(2 * cutoff * np.log(abs(z)) - nxt - 2 * np.max(logmag)) / norm2)
    c = c / np.sqrt(norm2)
    return CoherentState(z, c, "partner" if partner else "initial", np.exp(logrho), tau, tail)


def apply_annihilator(coefficients: np.ndarray, spec: LadderSpec, partner: bool = False) -> np.ndarray:
    """Coefficients of a- (or a~-) acting on the vector; drops the top entry."""
    r = natural_r_tilde if partner else intrinsic_r
    rs = np.array([r(m, spec) for m in range(1, len(coefficients))])
    return coefficients[1:] * rs


def evolve(state: CoherentState, t: float, spec: LadderSpec) -> np.ndarray:
    """Coefficients of exp(-i t H) applied to the state."""
    energies = np.array([spec.E_of_n(m) for m in range(state.cutoff)])
    return state.coefficients * np.exp(-1j * t * energies)


def reproducing_kernel(z1: complex, z2: complex, spec: LadderSpec = LadderSpec(),
                       partner: bool = False) -> complex:
    """<z1|z2> from the moment series."""
    a = coherent_coefficients(z1, spec, partner)
    b = coherent_coefficients(z2, spec, partner)
    n = max(a.cutoff, b.cutoff)
    a = coherent_coefficients(z1, spec, partner, cutoff=n)
    b = coherent_coefficients(z2, spec, partner, cutoff=n)
    return complex(np.vdot(a.coefficients, b.coefficients))


def oscillator_kernel(z1: complex, z2: complex, epsilons: Sequence[float] = ()) -> complex:
    """Closed forms: a Gaussian for H, a ratio of 0F_{2k} for the partner."""
    z1, z2 = complex(z1), complex(z2)
    if not epsilons:
        return complex(np.exp(-0.5 * (abs(z1) ** 2 + abs(z2) ** 2 - 2 * np.conj(z1) * z2)))
    denoms = [d for e in epsilons for d in (0.5 - e, 1.5 - e)]
    num = hyper_0fq(denoms, np.conj(z1) * z2)
    den = np.sqrt(hyper_0fq(denoms, abs(z1) ** 2) * hyper_0fq(denoms, abs(z2) ** 2))
    return complex(num / den)


def measure_check_initial(m: int) -> float:
    """Quadrature value of int_0^inf y^m e^{-y} dy, to compare with rho_m = m!."""
    if m > 20:
        raise InvalidParameterError("m <= 20")
    val, _ = integrate.quad(lambda y: y**m * np.exp(-y), 0, np.inf, epsabs=0, epsrel=1e-12, limit=200)
    return val


def _xi1(r):
    f = hyper_0fq([1, 2], r**2)
    return 2 * (hyper_0fq([2, 2], r**2) / f) ** 2 - hyper_0fq([2, 3], r**2) / f


def _xi2(r):
    f = hyper_0fq([1, 2, 2, 3], r**2)
    return 0.5 * (hyper_0fq([2, 2, 3, 3], r**2) / f) ** 2 - hyper_0fq([2, 3, 3, 4], r**2) / (6 * f)


def uncertainty_formula(z: complex, case: str = "k1") -> float:
    """(Delta X)(Delta P) in the partner coherent state, oscillator limit.

    ``k1``: eps = -1/2, nu = 0.  ``k2``: eps = (-1/2, -3/2), nu = (0, inf).
    Vectorized over ``z``; a scalar input gives a float.
    """
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    if case == "k1":
        base, xi = 1.5, _xi1(r)
    elif case == "k2":
        base, xi = 2.5, _xi2(r)
    else:
        raise InvalidParameterError(f"unknown case {case!r}")
    out = np.sqrt((base - z.real**2 * xi) * (base - z.imag**2 * xi))
    return float(out) if out.ndim == 0 else out


class MatrixTables:
    """x, x^2, d/dx and -d^2/dx^2 matrix elements in an eigenbasis, grown on demand."""

    def __init__(self, transform: SusyTransform | None = None, interval=(-12.0, 12.0),
                 n_points: int = 6001):
        self.transform = transform
        self.x = working_grid(interval, n_points)
        self.interval = interval
        self._vals = np.zeros((0, n_points))
        self._ders = np.zeros((0, n_points))

    def _grow(self, m: int):
        while len(self._vals) < m:
            n = len(self._vals)
            psi = oscillator_eigenfunction(n)
            if self.transform is not None and self.transform.order:
                psi = transform_eigenfunction(self.transform, psi, interval=self.interval)
            jet = psi.jet(self.x, 1)
            self._vals = np.vstack([self._vals, jet[0]])
            self._ders = np.vstack([self._ders, jet[1]])

    def tables(self, m: int):
        self._grow(m)
        f, d, x = self._vals[:m], self._ders[:m], self.x

        def gram(a, b):
            return integrate.simpson(a[:, None, :] * b[None, :, :], x=x, axis=-1)

        return gram(f, f * x), gram(f, f * x**2), gram(f, d), gram(d, d)


def uncertainty_numeric(z: complex, transform: SusyTransform | None = None, cutoff: int | None = None,
                        tables: MatrixTables | None = None, tail_tol: float = 1e-12) -> float:
    """(Delta X)(Delta P) by quadrature in the (transformed) oscillator basis.

    ``transform=None`` gives the standard coherent states of H.  P is -i d/dx,
    so <P> = -i c^H D c and <P^2> = c^H T c with T_mn = int psi_m' psi_n'.
    """
    eps = transform.energies if transform is not None else ()
    spec = LadderSpec(epsilons=eps)
    state = coherent_coefficients(z, spec, partner=bool(eps), cutoff=cutoff)
    if state.tail > tail_tol:
        raise CutoffError(f"cutoff {state.cutoff} leaves tail weight {state.tail:.3g}")
    tables = tables or MatrixTables(transform)
    X, X2, D, T = tables.tables(state.cutoff)
    c = state.coefficients
    ex = np.vdot(c, X @ c).real
    ex2 = np.vdot(c, X2 @ c).real
    ep = (-1j * np.vdot(c, D @ c)).real
    ep2 = np.vdot(c, T @ c).real
    return float(np.sqrt(max(ex2 - ex**2, 0.0) * max(ep2 - ep**2, 0.0)))


def commutator_values(spec: LadderSpec, n_max: int, partner: bool = False) -> np.ndarray:
    """|r(n+1)|^2 - |r(n)|^2 for n = 0..n_max."""
    r = natural_r_tilde if partner else intrinsic_r
    return np.array([abs(r(n + 1, spec)) ** 2 - abs(r(n, spec)) ** 2 for n in range(n_max + 1)])


def commutator_polynomial_fit(spec: LadderSpec) -> tuple[np.ndarray, float]:
    """Degree-2k polynomial in E_n through n = 0..2k+2 and its max residual."""
    deg = 2 * spec.k
    n = np.arange(deg + 3)
    energies = np.array([spec.E_of_n(i) for i in n], dtype=float)
    values = commutator_values(spec, int(n[-1]), partner=True)
    coeffs = np.polynomial.polynomial.polyfit(energies, values, deg)
    resid = np.polynomial.polynomial.polyval(energies, coeffs) - values
    return coeffs, float(np.max(np.abs(resid)) / max(1.0, np.max(np.abs(values))))

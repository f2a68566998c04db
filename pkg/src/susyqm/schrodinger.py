"""Potentials, wavefunctions with analytic derivative chains, node counting and
a finite-difference spectral oracle.

Hamiltonians are ``H = -c d^2/dx^2 + V(x)`` with the convention factor
``c = 1/2`` (hbar = m = 1) unless a potential says otherwise.
"""
from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass, field
from math import factorial, pi, sqrt
from typing import Callable, Optional

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import eigh_tridiagonal
from scipy.special import digamma, pbdv

from . import _jet
from .errors import ConvergenceError, InvalidParameterError, ResolutionError
from .specfun import gamma_ratio, hermite, kummer_1f1, kummer_1f1_da

JetFn = Callable[[np.ndarray, int], np.ndarray]

DEFAULT_BOX = (-10.0, 10.0)
DEFAULT_POINTS = 4001

_EXTENDED = contextvars.ContextVar("extended_precision", default=False)


@contextlib.contextmanager
def extended_precision(enabled: bool = True):
    """Evaluate oscillator seeds and their jets in numpy.longdouble.

    Used by the residual suites, where Wronskians of exp(x^2/2)-type seeds
    lose several digits to cancellation.
    """
    token = _EXTENDED.set(enabled)
    try:
        yield
    finally:
        _EXTENDED.reset(token)


@dataclass(frozen=True)
class Potential:
    """A real potential V(x).

    ``jet_fn`` is optional; when present it returns Taylor coefficients of V and
    lets seed solutions carry derivative chains of any order.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    name: str = ""
    domain: tuple[float, float] = (-np.inf, np.inf)
    convention_factor: float = 0.5
    jet_fn: Optional[JetFn] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=float))

    def jet(self, x, k: int) -> np.ndarray:
        if self.jet_fn is None:
            raise NotImplementedError(f"potential {self.name!r} has no analytic jet")
        return self.jet_fn(np.asarray(x, dtype=float), k)

    def shifted(self, c: float, name: str | None = None) -> "Potential":
        jet_fn = None
        if self.jet_fn is not None:
            def jet_fn(x, k, _f=self.jet_fn):
                out = _f(x, k).copy()
                out[0] = out[0] + c
                return out
        return Potential(lambda x, _f=self.evaluator: _f(x) + c, name or f"{self.name}{c:+g}",
                         self.domain, self.convention_factor, jet_fn, dict(self.meta))


def harmonic_oscillator() -> Potential:
    def jet_fn(x, k):
        out = np.zeros((k + 1,) + x.shape, dtype=np.result_type(x, float))
        out[0] = 0.5 * x**2
        if k >= 1:
            out[1] = x
        if k >= 2:
            out[2] = 0.5
        return out

    return Potential(lambda x: 0.5 * x**2, "oscillator", jet_fn=jet_fn, meta={"E0": 0.5})


class WaveFunction:
    """A real function with an analytic Taylor jet at every point.

    ``energy`` labels the energy at which it solves a Schroedinger equation
    (None for ancillary functions); ``normalized`` is True only when the L2
    norm was fixed on the working grid.
    """

    def __init__(self, jet_fn: JetFn, energy: float | None = None, normalized: bool = False,
                 name: str = "", params: dict | None = None):
        self._jet_fn = jet_fn
        self.energy = energy
        self.normalized = normalized
        self.name = name
        # oscillator label (eps, nu) when the function is a pure 1F1 solution
        self.params = params

    @property
    def norm_status(self) -> str:
        return "normalized" if self.normalized else "formal"

    def jet(self, x, k: int = 2) -> np.ndarray:
        return self._jet_fn(np.asarray(x, dtype=float), k)

    def __call__(self, x):
        return self.jet(x, 0)[0]

    def derivative(self, order: int) -> Callable[[np.ndarray], np.ndarray]:
        return lambda x: factorial(order) * self.jet(x, order)[order]

    def scaled(self, c: float, normalized: bool | None = None) -> "WaveFunction":
        params = None if self.params is None else {**self.params, "scale": c * self.params["scale"]}
        return WaveFunction(lambda x, k: c * self._jet_fn(x, k), self.energy,
                            self.normalized if normalized is None else normalized, self.name,
                            params)

    def __repr__(self):
        return f"WaveFunction({self.name!r}, energy={self.energy}, {self.norm_status})"


def ode_chain(value_and_slope: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
              potential: Potential, energy: float,
              source: Optional[JetFn] = None) -> JetFn:
    """Jet builder for solutions of -c f'' + (V - E) f = s.

    Only f and f' are needed at each point; higher coefficients follow from
    the recursion (n+2)(n+1) f_{n+2} = [((V - E) f)_n - s_n] / c.
    """
    c = potential.convention_factor

    def jet_fn(x, k):
        if _EXTENDED.get():
            x = np.asarray(x, dtype=np.longdouble)
        f0, f1 = value_and_slope(x)
        out = np.zeros((k + 1,) + np.shape(x), dtype=np.result_type(f0, f1, float))
        out[0] = f0
        if k >= 1:
            out[1] = f1
        if k >= 2:
            q = potential.jet(x, k - 2)
            q[0] = q[0] - energy
            s = source(x, k - 2) if source is not None else None
            for n in range(k - 1):
                acc = q[0] * out[n]
                for j in range(1, n + 1):
                    acc = acc + q[j] * out[n - j]
                if s is not None:
                    acc = acc - s[n]
                out[n + 2] = acc / (c * (n + 2) * (n + 1))
        return out

    return jet_fn


def _mixing_angle(nu: float) -> float:
    return pi / 2 if np.isinf(nu) else float(np.arctan(nu))


def _oscillator_parts(eps: float):
    a_even = (1 - 2 * eps) / 4
    a_odd = (3 - 2 * eps) / 4

    def even(x):
        ext = _EXTENDED.get()
        g = np.exp(-x**2 / 2)
        f = kummer_1f1(a_even, 0.5, x**2, ext)
        df = 2 * x * (a_even / 0.5) * kummer_1f1(a_even + 1, 1.5, x**2, ext)
        return g * f, g * (df - x * f)

    def odd(x):
        ext = _EXTENDED.get()
        g = np.exp(-x**2 / 2)
        f = kummer_1f1(a_odd, 1.5, x**2, ext)
        df = 2 * x * (a_odd / 1.5) * kummer_1f1(a_odd + 1, 2.5, x**2, ext)
        return g * x * f, g * (f + x * df - x**2 * f)

    return even, odd


def _odd_weight(eps: float, nu: float) -> tuple[float, float]:
    """Coefficients (even, odd) of the projective mixing (cos t, sin t), nu = tan t."""
    theta = _mixing_angle(nu)
    if theta == pi / 2:
        return 0.0, 1.0
    if nu == 0:
        return 1.0, 0.0
    ratio = gamma_ratio((3 - 2 * eps) / 4, (1 - 2 * eps) / 4)
    return np.cos(theta), np.sin(theta) * 2 * ratio


def oscillator_general_solution(eps: float, nu: float = 0.0,
                                potential: Potential | None = None) -> WaveFunction:
    """General real solution of -u''/2 + x^2 u/2 = eps u.

    ``nu`` mixes the even and odd 1F1 solutions; ``nu = inf`` selects the pure
    odd one.  Raises InvalidParameterError at the Gamma-ratio poles when the
    odd part is requested with a finite nonzero weight.
    """
    potential = potential or harmonic_oscillator()
    ce, co = _odd_weight(eps, nu)
    even, odd = _oscillator_parts(eps)
    if abs(nu) == 1:
        # nu = -1 (+1) is the solution decaying at +inf (-inf); the 1F1 mix
        # cancels there, the parabolic cylinder function does not.
        side = -float(nu)
        scale = ce / pbdv(eps - 0.5, 0.0)[0]

        def value_and_slope(x):
            d, dd = pbdv(eps - 0.5, side * sqrt(2) * x)
            return scale * d, scale * side * sqrt(2) * dd

        return WaveFunction(ode_chain(value_and_slope, potential, eps), energy=eps,
                            name=f"u(eps={eps:g}, nu={nu:g})")

    def value_and_slope(x):
        u = np.zeros_like(x)
        du = np.zeros_like(x)
        if ce:
            v, dv = even(x)
            u, du = u + ce * v, du + ce * dv
        if co:
            v, dv = odd(x)
            u, du = u + co * v, du + co * dv
        return u, du

    params = {"eps": eps, "nu": nu, "scale": 1.0} if potential.name == "oscillator" else None
    return WaveFunction(ode_chain(value_and_slope, potential, eps), energy=eps,
                        name=f"u(eps={eps:g}, nu={nu:g})", params=params)


def oscillator_energy_derivative(eps: float, nu: float = 0.0,
                                 potential: Potential | None = None) -> WaveFunction:
    """d u / d eps of ``oscillator_general_solution`` at fixed nu.

    Solves (H - eps) f = u, which is the particular solution used by the
    differential confluent algorithm.
    """
    potential = potential or harmonic_oscillator()
    u = oscillator_general_solution(eps, nu, potential)
    theta = _mixing_angle(nu)
    a_even = (1 - 2 * eps) / 4
    a_odd = (3 - 2 * eps) / 4

    def d_even(x):
        g = np.exp(-x**2 / 2)
        z = x**2
        f = -0.5 * kummer_1f1_da(a_even, 0.5, z)
        # d/dz of d/da 1F1(a; b; z) = [1F1(a+1; b+1; z) + a d/da 1F1(a+1; b+1; z)] / b
        dfz = -0.5 * (kummer_1f1(a_even + 1, 1.5, z) + a_even * kummer_1f1_da(a_even + 1, 1.5, z)) / 0.5
        return g * f, g * (2 * x * dfz - x * f)

    def d_odd_core(x):
        g = np.exp(-x**2 / 2)
        z = x**2
        f = -0.5 * kummer_1f1_da(a_odd, 1.5, z)
        dfz = -0.5 * (kummer_1f1(a_odd + 1, 2.5, z) + a_odd * kummer_1f1_da(a_odd + 1, 2.5, z)) / 1.5
        return g * x * f, g * (f + 2 * x**2 * dfz - x**2 * f)

    _, odd = _oscillator_parts(eps)

    def value_and_slope(x):
        if theta == pi / 2:
            return d_odd_core(x)
        v, dv = d_even(x)
        v, dv = np.cos(theta) * v, np.cos(theta) * dv
        if nu != 0:
            ratio = gamma_ratio(a_odd, a_even)
            dratio = ratio * (-0.5) * (digamma(a_odd) - digamma(a_even))
            o, do = odd(x)
            c, dc = d_odd_core(x)
            s = np.sin(theta) * 2
            v = v + s * (dratio * o + ratio * c)
            dv = dv + s * (dratio * do + ratio * dc)
        return v, dv

    return WaveFunction(ode_chain(value_and_slope, potential, eps, source=u.jet),
                        energy=None, name=f"du/deps(eps={eps:g}, nu={nu:g})")


def oscillator_eigenfunction(n: int, potential: Potential | None = None) -> WaveFunction:
    """Normalized psi_n = (2^n n! sqrt(pi))^(-1/2) H_n(x) e^{-x^2/2}."""
    if n < 0:
        raise InvalidParameterError("oscillator level must be non-negative")
    potential = potential or harmonic_oscillator()
    c = 1.0 / sqrt(2.0**n * factorial(n) * sqrt(pi))

    def value_and_slope(x):
        g = np.exp(-x**2 / 2)
        h = hermite(n, x)
        dh = 2 * n * hermite(n - 1, x) if n > 0 else np.zeros_like(x)
        return c * h * g, c * g * (dh - x * h)

    return WaveFunction(ode_chain(value_and_slope, potential, n + 0.5), energy=n + 0.5,
                        normalized=True, name=f"psi_{n}")


def _parity_ladder(f: WaveFunction, sign: int) -> WaveFunction | None:
    """Exact image of a parity-definite oscillator solution under a (-1) or a+ (+1).

    (x f -+ f') / sqrt(2) cancels badly where f grows like exp(x^2/2); the image
    is the opposite-parity solution at eps +- 1, fixed by its data at x = 0.
    """
    p = f.params
    if p is None or p["nu"] not in (0.0, np.inf, -np.inf):
        return None
    eps = p["eps"] + sign
    j = f.jet(np.zeros(1), 2)[:, 0]
    if p["nu"] == 0:
        # even f: image is odd, slope at 0 is (f - sign f'') / sqrt(2)
        slope = (j[0] - sign * 2 * j[2]) / sqrt(2)
        if slope == 0:
            return None
        g = oscillator_general_solution(eps, np.inf)
        return g.scaled(slope / g.jet(np.zeros(1), 1)[1, 0])
    value = -sign * j[1] / sqrt(2)
    if value == 0:
        return None
    g = oscillator_general_solution(eps, 0.0)
    return g.scaled(value / g.jet(np.zeros(1), 0)[0, 0])


def ladder_down(f: WaveFunction, shift: float = -1.0) -> WaveFunction:
    """a f = (x f + f') / sqrt(2); energy label lowered by one."""
    energy = None if f.energy is None else f.energy + shift
    exact = _parity_ladder(f, -1) if shift == -1.0 else None
    if exact is not None:
        return WaveFunction(exact.jet, energy, name=f"a {f.name}", params=exact.params)

    def jet_fn(x, k):
        fj = f.jet(x, k + 1)
        return (_jet.mul(_jet.identity(x, k), fj[: k + 1]) + _jet.diff(fj)) / sqrt(2)

    return WaveFunction(jet_fn, energy, name=f"a {f.name}")


def ladder_up(f: WaveFunction) -> WaveFunction:
    """a+ f = (x f - f') / sqrt(2); energy label raised by one."""
    energy = None if f.energy is None else f.energy + 1
    exact = _parity_ladder(f, 1)
    if exact is not None:
        return WaveFunction(exact.jet, energy, name=f"a+ {f.name}", params=exact.params)

    def jet_fn(x, k):
        fj = f.jet(x, k + 1)
        return (_jet.mul(_jet.identity(x, k), fj[: k + 1]) - _jet.diff(fj)) / sqrt(2)

    return WaveFunction(jet_fn, energy, name=f"a+ {f.name}")


def working_grid(interval=DEFAULT_BOX, n_points: int = DEFAULT_POINTS) -> np.ndarray:
    return np.linspace(interval[0], interval[1], n_points)


def norm(f: WaveFunction, interval=DEFAULT_BOX, n_points: int = DEFAULT_POINTS) -> float:
    x = working_grid(interval, n_points)
    return float(np.sqrt(simpson(f(x) ** 2, x=x)))


def normalized(f: WaveFunction, interval=DEFAULT_BOX, n_points: int = DEFAULT_POINTS,
               positive_tail: bool = True) -> WaveFunction:
    """L2-normalize on the working grid; fix the sign so the rightmost
    non-negligible lobe is positive."""
    x = working_grid(interval, n_points)
    v = f(x)
    nrm = np.sqrt(simpson(v**2, x=x))
    if not np.isfinite(nrm) or nrm == 0:
        raise InvalidParameterError(f"cannot normalize {f.name}: norm {nrm}")
    sign = 1.0
    if positive_tail:
        big = np.nonzero(np.abs(v) > 1e-8 * np.max(np.abs(v)))[0]
        sign = float(np.sign(v[big[-1]])) or 1.0
    g = f.scaled(sign / nrm, normalized=True)
    return g


def count_nodes(f, interval=DEFAULT_BOX, grid_points: int = 2001) -> int:
    """Number of sign changes of f on the open interval.

    Each bracketed sign change is confirmed by bisection; a cell whose
    midpoint disagrees in sign with both (equal-signed) endpoints hides two
    nodes and raises ResolutionError.
    """
    fn = f if callable(f) else None
    x = np.linspace(interval[0], interval[1], grid_points)
    v = np.asarray(fn(x), dtype=float)
    if not np.all(np.isfinite(v)):
        raise InvalidParameterError("function is not finite on the interval")
    scale = np.max(np.abs(v))
    s = np.sign(v)
    # grazing zeros: inherit the sign of the next nonzero sample
    for i in np.nonzero(s == 0)[0]:
        j = i + 1
        while j < len(s) and s[j] == 0:
            j += 1
        s[i] = s[j] if j < len(s) else (s[i - 1] if i > 0 else 1.0)
    mid = 0.5 * (x[:-1] + x[1:])
    vm = np.sign(np.asarray(fn(mid), dtype=float))
    same = s[:-1] == s[1:]
    hidden = same & (vm != 0) & (vm != s[:-1]) & (np.abs(v[:-1]) > 1e-14 * scale)
    if np.any(hidden):
        raise ResolutionError(f"two nodes in one grid cell near x = {mid[np.argmax(hidden)]:g}")
    nodes = 0
    for i in np.nonzero(~same)[0]:
        a, b = x[i], x[i + 1]
        fa = s[i]
        for _ in range(60):
            c = 0.5 * (a + b)
            fc = np.sign(fn(np.array([c]))[0])
            if fc == 0:
                break
            if fc == fa:
                a = c
            else:
                b = c
        nodes += 1
    return nodes


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: np.ndarray
    grid: tuple[float, float, int]
    method: str
    extrapolated: np.ndarray | None = None
    vectors: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if np.any(np.diff(self.eigenvalues) <= 0):
            raise ConvergenceError("eigenvalues are not strictly increasing")


def _fd_levels(potential: Potential, interval, n_points: int, n_levels: int, vectors=False):
    a, b = interval
    x = np.linspace(a, b, n_points + 2)[1:-1]
    h = (b - a) / (n_points + 1)
    c = potential.convention_factor
    d = 2 * c / h**2 + potential(x)
    e = np.full(n_points - 1, -c / h**2)
    if not np.all(np.isfinite(d)):
        raise InvalidParameterError(f"potential {potential.name!r} is not finite on the grid")
    if vectors:
        w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, n_levels - 1))
    else:
        w = eigh_tridiagonal(d, e, select="i", select_range=(0, n_levels - 1), eigvals_only=True)
        v = None
    return x, w, v


def solve_spectrum_fd(potential: Potential, interval=(-10.0, 10.0), n_points: int = 2000,
                      n_levels: int = 5, tolerance: float = 1e-3,
                      return_vectors: bool = False) -> SpectralReport:
    """Lowest levels of the three-point discretization with Dirichlet ends.

    The grid is doubled once; any level moving by more than ``tolerance``
    raises ConvergenceError.  ``extrapolated`` holds the h^2 Richardson value.
    """
    if n_points < 200:
        raise InvalidParameterError("n_points must be at least 200")
    x, coarse, vecs = _fd_levels(potential, interval, n_points, n_levels, return_vectors)
    _, fine, _ = _fd_levels(potential, interval, 2 * n_points + 1, n_levels)
    drift = np.abs(fine - coarse)
    if np.any(drift > tolerance):
        raise ConvergenceError(f"grid doubling moved levels by {drift.max():.3g} > {tolerance:g}")
    extrapolated = fine + (fine - coarse) / 3.0
    if vecs is not None:
        h = x[1] - x[0]
        vecs = vecs / np.sqrt(h)
    return SpectralReport(coarse, (interval[0], interval[1], n_points), "fd3-dirichlet",
                          extrapolated, vecs)


def schrodinger_residual(potential: Potential, psi: WaveFunction, energy: float, grid) -> float:
    """max |-c psi'' + (V - E) psi| / (1 + |psi|) over the grid."""
    x = np.asarray(grid, dtype=float)
    j = psi.jet(x, 2)
    lhs = -potential.convention_factor * 2 * j[2] + (potential(x) - energy) * j[0]
    return float(np.max(np.abs(lhs) / (1 + np.abs(j[0]))))


def decays(f, interval=DEFAULT_BOX, side: str = "both", rel: float = 1e-6) -> bool:
    """Whether |f| at the chosen edge(s) is negligible against its maximum."""
    x = working_grid(interval, 2001)
    v = np.abs(f(x))
    peak = np.max(v)
    left = v[0] <= rel * peak
    right = v[-1] <= rel * peak
    return {"both": left and right, "left": left, "right": right, "any": left or right}[side]


def potential_csv(potential: Potential, x) -> str:
    x = np.asarray(x, dtype=float)
    lines = ["x,V"]
    lines += [f"{xi:.17e},{vi:.17e}" for xi, vi in zip(x, potential(x))]
    return "\n".join(lines) + "\n"

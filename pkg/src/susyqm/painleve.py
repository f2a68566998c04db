"""Painleve IV and V transcendents from systems with third- and fourth-order
ladder operators.

A system is a Hamiltonian plus its extremal states.  In the rescaled
variable y = sqrt(l) x (energies divided by l, so the level spacing is 1)

    PIV:  g(y) = -y - d/dy ln psi_3,            alpha = E1 + E2 - 2 E3 - 1,  beta = -2 (E1 - E2)^2
    PV:   g(y) = -y - d/dy ln W(psi_3, psi_4),  w(z) = 1 + sqrt(z)/g(sqrt(z)),  z = y^2

with alpha = (E1 - E2)^2/2, beta = -(E3 - E4)^2/2,
gamma = (E1 + E2)/2 - (E3 + E4 + 1)/2, delta = -1/8 for PV.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import sqrt
from typing import Callable

import numpy as np
import sympy as sp

from . import _jet
from .errors import DegenerateSeedError, InvalidParameterError
from .schrodinger import (extended_precision, Potential, WaveFunction, harmonic_oscillator, ladder_down, ladder_up,
                          oscillator_eigenfunction, oscillator_general_solution, schrodinger_residual)
from .susy import SusyTransform, apply_bplus, missing_state, partner_potential, ratio_function

PV_DELTA = Fraction(-1, 8)
PIV_GRID = (-4.0, 4.0, 1601)
PV_GRID = (0.5, 20.0, 1951)
EXCLUSION_RADIUS = 0.05


@dataclass(frozen=True)
class PhaSystem:
    name: str
    hamiltonian: Potential
    states: tuple  # WaveFunctions in the initial order
    energies: tuple  # Fractions, already divided by ell
    ell: int = 1
    ladder_power: int = 1

    @property
    def scale(self) -> float:
        return sqrt(self.ell)

    @property
    def raw_energies(self) -> tuple:
        return tuple(e * self.ell for e in self.energies)


def rescale_system(system: PhaSystem, ell: int) -> PhaSystem:
    """Divide energies by ``ell``; the variable becomes y = sqrt(ell) x."""
    if ell < 1:
        raise InvalidParameterError("ell >= 1")
    return replace(system, energies=tuple(e / ell for e in system.energies), ell=system.ell * ell)


def table_system(name: str, **kw) -> PhaSystem:
    """Catalogue system rescaled by its natural ladder power."""
    raw = extremal_catalogue(name, **kw)
    return rescale_system(raw, raw.ladder_power)


@dataclass
class PivSolution:
    g_jet: Callable
    alpha: Fraction
    beta: Fraction
    provenance: tuple
    singular_x: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def g(self, y):
        return self.g_jet(np.asarray(y, dtype=float), 0)[0]


@dataclass
class PvSolution:
    w_jet: Callable  # jet in y = sqrt(z)
    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    provenance: tuple
    delta: Fraction = PV_DELTA

    def w(self, z):
        return self.w_jet(np.sqrt(np.asarray(z, dtype=float)), 0)[0]

    def derivatives(self, z):
        """w, dw/dz, d^2w/dz^2 through y = sqrt(z)."""
        y = np.sqrt(np.asarray(z, dtype=float))
        d = _jet.derivatives(self.w_jet(y, 2))
        w, wy, wyy = d[0], d[1], d[2]
        return w, wy / (2 * y), (wyy - wy / y) / (4 * y**2)


def _g_jet(func: WaveFunction, scale: float):
    """Jet in y of -y - d/dy ln f(y/scale)."""

    def jet(y, k):
        x = y / scale
        logd = _jet.log_derivative(func.jet(x, k + 1))
        return -_jet.identity(y, k) - _jet.rescale(logd, 1.0 / scale) / scale

    return jet


def piv_from_extremals(system: PhaSystem, third: int = 0) -> PivSolution:
    """Transcendent with the extremal state ``third`` (0-based, initial order)
    playing psi_E3; the other two follow cyclically as E1, E2."""
    if len(system.states) != 3:
        raise InvalidParameterError("PIV needs exactly three extremal states")
    i1, i2 = (third + 1) % 3, (third + 2) % 3
    e1, e2, e3 = system.energies[i1], system.energies[i2], system.energies[third]
    alpha = e1 + e2 - 2 * e3 - 1
    beta = -2 * (e1 - e2) ** 2
    sol = PivSolution(_g_jet(system.states[third], system.scale), alpha, beta, (system.name, third))
    return sol


def parse_permutation(code: str) -> tuple[int, int, int, int]:
    """'4231' -> initial indices (0-based) placed at positions 1..4."""
    if sorted(code) != ["1", "2", "3", "4"]:
        raise InvalidParameterError(f"bad permutation code {code!r}")
    return tuple(int(c) - 1 for c in code)


PV_PERMUTATIONS = ("1234", "4231", "1432", "3241", "3142", "3412")


def pv_from_extremals(system: PhaSystem, permutation: str = "1234") -> PvSolution:
    if len(system.states) != 4:
        raise InvalidParameterError("PV needs exactly four extremal states")
    p = parse_permutation(permutation)
    e1, e2, e3, e4 = (system.energies[i] for i in p)
    alpha = (e1 - e2) ** 2 / 2
    beta = -((e3 - e4) ** 2) / 2
    gamma = (e1 + e2) / 2 - (e3 + e4 + 1) / 2
    wr = ratio_function((system.states[p[2]], system.states[p[3]]), ())
    g = _g_jet(wr, system.scale)

    def w_jet(y, k):
        return _jet.constant(1.0, y, k) + _jet.div(_jet.identity(y, k), g(y, k))

    return PvSolution(w_jet, alpha, beta, gamma, (system.name, permutation))


def enumerate_pv_permutations(system: PhaSystem) -> list[PvSolution]:
    return [pv_from_extremals(system, code) for code in PV_PERMUTATIONS]


def piv_rhs(y, g, g1, alpha, beta):
    return g1**2 / (2 * g) + 1.5 * g**3 + 4 * y * g**2 + 2 * (y**2 - alpha) * g + beta / g


def pv_rhs(z, w, w1, alpha, beta, gamma, delta, sign=1):
    return ((1 / (2 * w) + sign / (w - 1)) * w1**2 - w1 / z
            + (w - 1) ** 2 / z**2 * (alpha * w + beta / w) + gamma * w / z
            + delta * w * (w + 1) / (w - 1))


def _sign_changes(x, v):
    s = np.sign(v)
    idx = np.nonzero(s[:-1] * s[1:] <= 0)[0]
    return 0.5 * (x[idx] + x[idx + 1])


def _keep_mask(x, singular, radius):
    keep = np.ones_like(x, dtype=bool)
    for s in singular:
        keep &= np.abs(x - s) > radius
    return keep


def piv_residual_profile(sol: PivSolution, grid=None, alpha=None, beta=None,
                         radius: float = EXCLUSION_RADIUS, extended: bool = True):
    """(y, g, pointwise |g'' - RHS|); the residual is NaN within ``radius`` of a
    zero or pole of g.  ``extended`` evaluates the jets in longdouble."""
    y = np.linspace(*PIV_GRID) if grid is None else np.asarray(grid, dtype=float)
    alpha = float(sol.alpha if alpha is None else alpha)
    beta = float(sol.beta if beta is None else beta)
    fine = np.linspace(y.min(), y.max(), 20 * len(y) + 1)
    with np.errstate(all="ignore"):
        g_fine = sol.g(fine)
        sing = np.concatenate([_sign_changes(fine, g_fine), _sign_changes(fine, 1 / g_fine)])
    keep = _keep_mask(y, sing, radius)
    res = np.full(y.shape, np.nan)
    with extended_precision(extended):
        d = _jet.derivatives(sol.g_jet(y[keep], 2))
    res[keep] = np.abs(d[2] - piv_rhs(y[keep], d[0], d[1], alpha, beta))
    with np.errstate(all="ignore"):
        g = sol.g(y)
    return y, g, res


def piv_residual(sol: PivSolution, grid=None, alpha=None, beta=None,
                 radius: float = EXCLUSION_RADIUS, extended: bool = True) -> float:
    """max |g'' - RHS| on the grid minus neighbourhoods of zeros and poles of g."""
    return float(np.nanmax(piv_residual_profile(sol, grid, alpha, beta, radius, extended)[2]))


def pv_residual_profile(sol: PvSolution, z_grid=None, params=None, radius: float = EXCLUSION_RADIUS,
                        extended: bool = True):
    """(z, w, pointwise |w'' - RHS|) in z, NaN near poles of w and the w = 1 loci."""
    z = np.linspace(*PV_GRID) if z_grid is None else np.asarray(z_grid, dtype=float)
    if np.any(z <= 0):
        raise InvalidParameterError("z grid must be positive (positive branch of sqrt z)")
    alpha, beta, gamma, delta = (float(v) for v in (params or (sol.alpha, sol.beta, sol.gamma, sol.delta)))
    fine = np.linspace(z.min(), z.max(), 20 * len(z) + 1)
    with np.errstate(all="ignore"):
        w_fine = sol.w(fine)
        sing = np.concatenate([_sign_changes(fine, 1 / w_fine), _sign_changes(fine, w_fine - 1),
                               _sign_changes(fine, 1 / (w_fine - 1))])
    keep = _keep_mask(z, sing, radius)
    res = np.full(z.shape, np.nan)
    with extended_precision(extended):
        w, w1, w2 = sol.derivatives(z[keep])
    res[keep] = np.abs(w2 - pv_rhs(z[keep], w, w1, alpha, beta, gamma, delta))
    with np.errstate(all="ignore"):
        wz = sol.w(z)
    return z, wz, res


def pv_residual(sol: PvSolution, z_grid=None, params=None, radius: float = EXCLUSION_RADIUS,
                extended: bool = True) -> float:
    """max |w'' - RHS| in z, excluding poles of w and the w = 1 loci."""
    return float(np.nanmax(pv_residual_profile(sol, z_grid, params, radius, extended)[2]))


def connect_seeds_for_reduction(u1: WaveFunction, k: int, check_grid=None) -> list[WaveFunction]:
    """Seeds u_{j+1} = a u_j at eps_{j+1} = eps_j - 1."""
    grid = np.linspace(-5, 5, 201) if check_grid is None else check_grid
    seeds = [u1]
    osc = harmonic_oscillator()
    for _ in range(k - 1):
        nxt = ladder_down(seeds[-1])
        v, ref = np.abs(nxt(grid)), np.abs(seeds[-1](grid))
        if np.max(v) <= 1e-12 * np.max(ref):
            raise DegenerateSeedError(f"a annihilates {seeds[-1].name}")
        res = schrodinger_residual(osc, nxt, nxt.energy, grid)
        if res > 1e-8:
            raise DegenerateSeedError(f"connected seed fails its equation (residual {res:.2e})")
        seeds.append(nxt)
    return seeds


def _frac(x) -> Fraction:
    return Fraction(x).limit_denominator(10**6)


def extremal_catalogue(system_id: str, eps1: float = -2.5, nu1: float = 0.0) -> PhaSystem:
    """Raw (unrescaled) systems; ``ladder_power`` records the spacing to divide out."""
    osc = harmonic_oscillator()
    if system_id == "osc_a3":
        states = tuple(oscillator_eigenfunction(n) for n in range(3))
        return PhaSystem(system_id, osc, states, tuple(Fraction(2 * n + 1, 2) for n in range(3)),
                         ladder_power=3)
    if system_id == "osc_a4":
        states = tuple(oscillator_eigenfunction(n) for n in (2, 3, 0, 1))
        return PhaSystem(system_id, osc, states, tuple(Fraction(2 * n + 1, 2) for n in (2, 3, 0, 1)),
                         ladder_power=4)
    u1 = oscillator_general_solution(eps1, nu1)
    e1 = _frac(eps1)
    if system_id == "susy1_piv":
        t = SusyTransform((u1,))
        states = (missing_state(t, 1), apply_bplus(t, oscillator_eigenfunction(0)),
                  apply_bplus(t, ladder_up(u1)))
        return PhaSystem(system_id, partner_potential(t), states, (e1, Fraction(1, 2), e1 + 1))
    if system_id == "susy2_reduced_piv":
        seeds = connect_seeds_for_reduction(u1, 2)
        t = SusyTransform(tuple(seeds))
        states = (missing_state(t, 2), apply_bplus(t, oscillator_eigenfunction(0)),
                  apply_bplus(t, ladder_up(u1)))
        return PhaSystem(system_id, partner_potential(t), states, (e1 - 1, Fraction(1, 2), e1 + 1))
    if system_id == "susy1_pv":
        t = SusyTransform((u1,))
        states = (ratio_function((u1, oscillator_eigenfunction(0)), (u1,)),
                  ratio_function((u1, oscillator_eigenfunction(1)), (u1,)),
                  missing_state(t, 1),
                  apply_bplus(t, ladder_up(ladder_up(u1))))
        return PhaSystem(system_id, partner_potential(t), states,
                         (Fraction(1, 2), Fraction(3, 2), e1, e1 + 2), ladder_power=2)
    raise InvalidParameterError(f"unknown system {system_id!r}")


# Printed table rows.  PIV rows: (system, index of psi_E3, g, alpha, beta).
# PV rows: (system, permutation, w, alpha, beta, gamma).
F = Fraction
PIV_TABLES = {
    1: [("osc_a3", 0, "-2*y/3", F(0), F(-2, 9)),
        ("osc_a3", 1, "-2*y/3 - 1/y", F(-1), F(-8, 9)),
        ("osc_a3", 2, "-2*y/3 - 4*y/(2*y**2 - 3)", F(-2), F(-2, 9))],
    2: [("susy1_piv", 0, "4*y/(1 + 2*y**2)", F(3), F(-8)),
        ("susy1_piv", 1, "-(4*y**4 + 3)/(4*y**5 + 8*y**3 + 3*y)", F(-6), F(-2)),
        ("susy1_piv", 2, "(8*y**5 + 6*y)/(1 - 4*y**4)", F(0), F(-18))],
    3: [("susy2_reduced_piv", 0, "4*y*(4*y**4 + 4*y**2 - 3)/(8*y**6 + 4*y**4 + 6*y**2 + 3)", F(5), F(-8)),
        ("susy2_reduced_piv", 1,
         "-4*y*(16*y**8 + 72*y**2 + 27)/(32*y**10 + 48*y**8 + 96*y**6 + 54*y**2 - 27)", F(-7), F(-8)),
        ("susy2_reduced_piv", 2,
         "(-16*y**8 + 32*y**6 - 48*y**4 + 9)/(y*(2*y**2 - 3)*(4*y**4 + 3))", F(-1), F(-32))],
}
PV_TABLES = {
    4: [("osc_a4", "1234", "-1", F(1, 32), F(-1, 32), F(0)),
        ("osc_a4", "4231", "(2 - z)/(z + 2)", F(1, 8), F(-1, 8), F(-1, 4)),
        ("osc_a4", "1432", "(6 - z)/(z + 2)", F(1, 32), F(-9, 32), F(-1, 2)),
        ("osc_a4", "3241", "(2 - z)/(z + 6)", F(9, 32), F(-1, 32), F(-1, 2)),
        ("osc_a4", "3142", "(6 - z)/(z + 6)", F(1, 8), F(-1, 8), F(-3, 4)),
        ("osc_a4", "3412", "-(z - 6)*(z - 2)/((z + 2)*(z + 6))", F(1, 32), F(-1, 32), F(-1))],
    5: [("susy1_pv", "1234", "-2/(z - 1)", F(1, 8), F(-1, 2), F(3, 4)),
        ("susy1_pv", "4231", "(z + 3)/2", F(1, 2), F(-9, 8), F(1, 4)),
        ("susy1_pv", "1432", "(z**2 + 2*z - 1)/(z - 1)", F(1, 8), F(-2), F(-1, 4)),
        ("susy1_pv", "3241", "(z + 3)/(z**2 + 2*z + 3)", F(2), F(-1, 8), F(-3, 4)),
        ("susy1_pv", "3142", "2*(z**2 + 2*z - 1)/(z**3 + z**2 + z - 3)", F(9, 8), F(-1, 2), F(-5, 4)),
        ("susy1_pv", "3412", "-(z**3 + 5*z**2 + 5*z - 3)/(2*(z**2 + 2*z + 3))", F(1, 2), F(-1, 8), F(-7, 4))],
}

_y, _z = sp.symbols("y z", positive=True)


def printed_expression(row) -> sp.Expr:
    expr = row[2]
    return sp.sympify(expr, locals={"y": _y, "z": _z})


def symbolic_piv_residual(g_expr, alpha, beta) -> sp.Expr:
    g = g_expr
    return sp.simplify(sp.diff(g, _y, 2) - piv_rhs(_y, g, sp.diff(g, _y), sp.Rational(alpha), sp.Rational(beta)))


def symbolic_pv_residual(w_expr, alpha, beta, gamma, delta=PV_DELTA) -> sp.Expr:
    w = w_expr
    rhs = pv_rhs(_z, w, sp.diff(w, _z), *(sp.Rational(v) for v in (alpha, beta, gamma, delta)))
    return sp.simplify(sp.diff(w, _z, 2) - rhs)


@dataclass
class TableCheck:
    table: int
    label: str
    parameters_match: bool
    max_deviation: float  # constructed transcendent vs printed form
    residual: float


def _printed_deviation(numeric, printed, grid, loci, radius: float = EXCLUSION_RADIUS) -> float:
    """max |f - f_printed| / (1 + |f_printed|) away from the poles of the printed form."""
    fine = np.linspace(grid.min(), grid.max(), 20 * len(grid) + 1)
    with np.errstate(all="ignore"):
        p_fine = np.broadcast_to(printed(fine), fine.shape)
        sing = np.concatenate([_sign_changes(fine, h(p_fine)) for h in loci])
    t = grid[_keep_mask(grid, sing, radius)]
    with extended_precision():
        f = numeric(t)
    p = np.broadcast_to(printed(t), t.shape)
    return float(np.max(np.abs(f - p) / (1 + np.abs(p))))


def verify_tables(tables=None) -> list[TableCheck]:
    """Rebuild every printed row and compare parameters (exactly) and values."""
    out = []
    systems: dict = {}
    for number, rows in PIV_TABLES.items():
        if tables and number not in tables:
            continue
        for row in rows:
            sys_ = systems.setdefault(row[0], table_system(row[0]))
            sol = piv_from_extremals(sys_, row[1])
            printed = sp.lambdify(_y, printed_expression(row), "numpy")
            dev = _printed_deviation(sol.g, printed, np.linspace(*PIV_GRID), [lambda v: 1 / v])
            out.append(TableCheck(number, f"col{row[1] + 1}", (sol.alpha, sol.beta) == (row[3], row[4]),
                                  dev, piv_residual(sol)))
    for number, rows in PV_TABLES.items():
        if tables and number not in tables:
            continue
        for row in rows:
            sys_ = systems.setdefault(row[0], table_system(row[0]))
            sol = pv_from_extremals(sys_, row[1])
            printed = sp.lambdify(_z, printed_expression(row), "numpy")
            dev = _printed_deviation(sol.w, printed, np.linspace(*PV_GRID),
                                     [lambda v: 1 / v, lambda v: v - 1, lambda v: 1 / (v - 1)])
            match = (sol.alpha, sol.beta, sol.gamma, sol.delta) == (row[3], row[4], row[5], PV_DELTA)
            out.append(TableCheck(number, row[1], match, dev, pv_residual(sol)))
    return out

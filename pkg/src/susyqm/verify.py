"""The seven acceptance checks, shared by the CLI (``verify-all``) and the test suite.

Every check reports a value against a tolerance; a check passes when
value <= tolerance.  Boolean facts are reported as a count of failures with
tolerance 0.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import factorial

import numpy as np
from scipy.integrate import simpson

from . import coherent, confluent, graphene, painleve, susy
from .schrodinger import (oscillator_eigenfunction, oscillator_energy_derivative,
                          oscillator_general_solution, solve_spectrum_fd)

FD_INTERVAL = (-10.0, 10.0)
FD_POINTS = 2000


@dataclass
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)

    def as_dict(self) -> dict:
        return {"check": self.name, "value": float(self.value), "tolerance": float(self.tolerance),
                "pass": self.passed}


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[Check] = field(default_factory=list)
    runtime: float = 0.0
    error: str = ""

    @property
    def passed(self) -> bool:
        return not self.error and all(c.passed for c in self.checks)

    def failing(self) -> list[str]:
        out = [c.name for c in self.checks if not c.passed]
        return out + ([f"error: {self.error}"] if self.error else [])


def _levels_error(potential, expected) -> float:
    report = solve_spectrum_fd(potential, FD_INTERVAL, FD_POINTS, len(expected))
    return float(np.max(np.abs(report.eigenvalues - np.asarray(expected))))


def catalogue_partners() -> list[Check]:
    x = np.linspace(-5, 5, 1001)
    out = []
    for key in susy.CATALOGUE:
        _, dev = susy.compare_with_catalogue(key, x)
        out.append(Check(f"catalogue {key}", dev, 1e-9))
    return out


def spectral_design() -> list[Check]:
    cases = {
        "create eps1 (k=1, eps=-5/2)": ("1susy-m52", [-2.5, 0.5, 1.5, 2.5, 3.5]),
        "create two levels (-7/2, -5/2)": ("2susy-m5272", [-3.5, -2.5, 0.5, 1.5, 2.5]),
        "delete E3, E4 (psi3, psi4)": ("2susy-p7292", [0.5, 1.5, 2.5, 5.5, 6.5, 7.5]),
    }
    out = []
    for name, (key, expected) in cases.items():
        potential = susy.partner_potential(susy.catalogue_transform(key))
        out.append(Check(f"FD levels {name}", _levels_error(potential, expected), 1e-3))
    return out


def confluent_family() -> list[Check]:
    out = []
    # integral vs differential u2 on a nodeless seed decaying on the left
    domain = (-6.0, 6.0)
    u1 = oscillator_general_solution(-0.5, 1.0)
    du1 = oscillator_energy_derivative(-0.5, 1.0)
    mesh_x = np.linspace(domain[0], 0.0, 4001)
    left_mass = float(simpson(u1(mesh_x) ** 2, x=mesh_x))
    chain = confluent.chain_integral(u1, 2, 0.0, [(0.2, left_mass + 0.5)], domain)
    c2, d2 = confluent.match_constants(chain, du1, 0.0, domain=domain)
    diff = confluent.chain_differential(u1, du1, c2, d2, 0.0, domain)
    x = np.linspace(-5, 5, 1001)
    v_int = confluent.confluent_partner(chain, domain)(x)
    v_diff = confluent.confluent_partner(diff, domain)(x)
    out.append(Check("integral vs differential potential", float(np.max(np.abs(v_int - v_diff))), 1e-6))

    worst = 0.0
    for b2 in (0.25, 1.0, 3.0, -2.0):
        numeric = confluent.confluent_partner(confluent.psi1_family(b2))(x)
        printed = confluent.isospectral_closed_form(b2)(x)
        worst = max(worst, float(np.max(np.abs(numeric - printed))))
    out.append(Check("psi1 family vs printed closed form", worst, 1e-8))

    deleted = confluent.confluent_partner(confluent.psi1_family(0.0))
    out.append(Check("b2=0 deletes 3/2", _levels_error(deleted, [0.5, 2.5, 3.5, 4.5]), 1e-3))
    iso = confluent.confluent_partner(confluent.psi1_family(1.0))
    out.append(Check("b2=1 isospectral", _levels_error(iso, [0.5, 1.5, 2.5, 3.5]), 1e-3))
    return out


def painleve_tables() -> list[Check]:
    rows = painleve.verify_tables()
    mismatched = sum(not r.parameters_match for r in rows)
    out = [Check(f"parameters exact ({len(rows)} entries)", mismatched, 0)]
    out.append(Check("entries reproduced", abs(len(rows) - 21), 0))
    out.append(Check("max deviation from printed forms", max(r.max_deviation for r in rows), 1e-12))
    out.append(Check("max PIV/PV residual", max(r.residual for r in rows), 1e-9))
    return out


def coherent_states() -> list[Check]:
    out = []
    spec0 = coherent.LadderSpec()
    rho_err = max(abs(coherent.moments(spec0, m) / factorial(m) - 1) for m in range(0, 16))
    out.append(Check("rho_m = m!", rho_err, 1e-10))
    poch_err = 0.0
    for eps in ((-0.5,), (-0.5, -1.5), (-2.5,)):
        spec = coherent.LadderSpec(epsilons=eps)
        for m in range(0, 12):
            ref = coherent.oscillator_moments(m, eps)
            poch_err = max(poch_err, abs(coherent.moments(spec, m, partner=True) / ref - 1))
    out.append(Check("rho~_m Pochhammer form", poch_err, 1e-10))
    meas = max(abs(coherent.measure_check_initial(m) / factorial(m) - 1) for m in range(11))
    out.append(Check("int y^m e^-y dy = m!, m <= 10", meas, 1e-6))

    eig_err = 0.0
    for eps, partner in (((), False), ((-0.5,), True), ((-0.5, -1.5), True)):
        spec = coherent.LadderSpec(tau=0.3, epsilons=eps)
        for z in (0.7 + 0.2j, -1.5j, 2.0):
            st = coherent.coherent_coefficients(z, spec, partner)
            lowered = coherent.apply_annihilator(st.coefficients, spec, partner)
            eig_err = max(eig_err, float(np.max(np.abs(lowered - z * st.coefficients[:-1]))))
    out.append(Check("a- |z> = z |z> (initial and partner)", eig_err, 1e-10))

    kern = 0.0
    for eps, partner in (((), False), ((-0.5,), True)):
        spec = coherent.LadderSpec(epsilons=eps)
        for z in (0.0, 1.2 - 0.4j, 3.0j):
            kern = max(kern, abs(coherent.reproducing_kernel(z, z, spec, partner) - 1))
    out.append(Check("kernel <z|z> = 1", kern, 1e-12))

    out.append(Check("Delta X Delta P (z=0, k=1) = 3/2", abs(coherent.uncertainty_formula(0, "k1") - 1.5), 1e-12))
    out.append(Check("Delta X Delta P (z=0, k=2) = 5/2", abs(coherent.uncertainty_formula(0, "k2") - 2.5), 1e-12))
    zs = (0.0, 1.0, 1.0j, 1.0 + 1.0j, 2.0, -1.2 + 0.9j, 2.0j)
    for case, seeds in (("k1", [(-0.5, 0.0)]), ("k2", [(-0.5, 0.0), (-1.5, np.inf)])):
        t = susy.transform(seeds)
        tables = coherent.MatrixTables(t)
        dev = max(abs(coherent.uncertainty_numeric(z, t, tables=tables) - coherent.uncertainty_formula(z, case))
                  for z in zs)
        out.append(Check(f"uncertainty oracle vs formula ({case}, |z| <= 2)", dev, 1e-3))
    return out


def heisenberg_algebra() -> list[Check]:
    out = []
    for eps in ((-0.5,), (-0.5, -1.5)):
        _, resid = coherent.commutator_polynomial_fit(coherent.LadderSpec(epsilons=eps))
        out.append(Check(f"commutator polynomial degree {2 * len(eps)}", resid, 1e-8))
    for seeds in ([(-0.5, 0.0)], [(-2.5, 0.0), (-3.5, np.inf)]):
        t = susy.transform(seeds)
        worst = 0.0
        for n in range(4):
            fc = susy.factorization_check(t, oscillator_eigenfunction(n))
            worst = max(worst, abs(fc.scaling - fc.expected) / abs(fc.expected))
        out.append(Check(f"B+B = prod(E_n - eps_j), k={len(seeds)}, n <= 3", worst, 1e-6))
    return out


def graphene_checks() -> list[Check]:
    out = []
    b0 = 1.0
    prof = graphene.constant_field(b0)
    sols = graphene.dirac_spectrum(prof, 6)
    levels = np.array([s.calE for s in sols if s.branch >= 0])
    out.append(Check("constant field calE spacing 2 B0", float(np.max(np.abs(np.diff(levels) - 2 * b0))), 1e-3))
    plus, minus = graphene.fd_pairing(prof, 5)
    zero_plus, zero_minus = abs(plus[0]) < 1e-3, abs(minus[0]) < 1e-3
    out.append(Check("zero mode in exactly one partner", float(zero_plus == zero_minus), 0))
    out.append(Check("nonzero levels of H+ and H- coincide", float(np.max(np.abs(plus[:4] - minus[1:5]))), 1e-3))
    res = max(graphene.intertwine_residual(prof, s) for s in sols if s.n <= 3)
    out.append(Check("intertwining residual n <= 3", res, 1e-6))
    return out


CRITERIA = {
    1: ("closed-form partner catalogue", catalogue_partners, 10.0),
    2: ("spectral design", spectral_design, 30.0),
    3: ("confluent equivalence and family", confluent_family, None),
    4: ("Painleve table reproduction", painleve_tables, 20.0),
    5: ("coherent states", coherent_states, None),
    6: ("polynomial Heisenberg algebra", heisenberg_algebra, None),
    7: ("graphene", graphene_checks, 10.0),
}


def run_criterion(number: int) -> CriterionResult:
    title, fn, limit = CRITERIA[number]
    result = CriterionResult(number, title)
    start = time.perf_counter()
    try:
        result.checks = fn()
    except Exception as exc:  # a crash is a failed criterion, reported by name
        result.error = f"{type(exc).__name__}: {exc}"
    result.runtime = time.perf_counter() - start
    if limit is not None:
        result.checks.append(Check("runtime [s]", result.runtime, limit))
    return result


def run_all(numbers=None) -> list[CriterionResult]:
    return [run_criterion(n) for n in (numbers or sorted(CRITERIA))]


def summary_line(result: CriterionResult) -> str:
    status = "PASS" if result.passed else "FAIL"
    line = f"{status} criterion {result.number}: {result.title} ({result.runtime:.2f} s)"
    if not result.passed:
        line += " -- failing: " + "; ".join(result.failing())
    return line


def report(results) -> list[dict]:
    out = []
    for r in results:
        for c in r.checks:
            out.append({"criterion": r.number, **c.as_dict()})
        if r.error:
            out.append({"criterion": r.number, "check": "error", "value": r.error, "tolerance": None,
                        "pass": False})
    return out

from fractions import Fraction as F

import numpy as np
import pytest
import sympy as sp

from susyqm import painleve
from susyqm.errors import DegenerateSeedError, InvalidParameterError
from susyqm.schrodinger import (harmonic_oscillator, oscillator_eigenfunction,
                                oscillator_general_solution, schrodinger_residual)

Y = np.linspace(-4, 4, 1601)
Z = np.linspace(0.5, 20, 1951)
PIV_ROWS = [(t, row) for t, rows in painleve.PIV_TABLES.items() for row in rows]
PV_ROWS = [(t, row) for t, rows in painleve.PV_TABLES.items() for row in rows]


def test_rescale_identity_and_energies():
    raw = painleve.extremal_catalogue("osc_a3")
    same = painleve.rescale_system(raw, 1)
    assert same.energies == raw.energies and same.scale == 1.0
    sys3 = painleve.table_system("osc_a3")
    assert sys3.energies == (F(1, 6), F(1, 2), F(5, 6))
    assert sys3.scale == pytest.approx(np.sqrt(3))
    assert sys3.raw_energies == raw.energies
    with pytest.raises(InvalidParameterError):
        painleve.rescale_system(raw, 0)


def test_catalogue_systems():
    a3 = painleve.extremal_catalogue("osc_a3")
    assert a3.energies == (F(1, 2), F(3, 2), F(5, 2))
    a4 = painleve.extremal_catalogue("osc_a4")
    assert sorted(a4.energies) == [F(1, 2), F(3, 2), F(5, 2), F(7, 2)]
    pv = painleve.extremal_catalogue("susy1_pv")
    assert sorted(pv.energies) == sorted([F(1, 2), F(3, 2), F(-5, 2), F(-1, 2)])
    with pytest.raises(InvalidParameterError):
        painleve.extremal_catalogue("osc_a9")


@pytest.mark.parametrize("name", ["osc_a3", "osc_a4", "susy1_piv", "susy2_reduced_piv", "susy1_pv"])
def test_extremal_states_are_formal_eigenstates(name):
    system = painleve.extremal_catalogue(name)
    grid = np.linspace(-4, 4, 161)
    for state, energy in zip(system.states, system.energies):
        assert schrodinger_residual(system.hamiltonian, state, float(energy), grid) < 1e-8
    assert len(set(system.energies)) == len(system.energies)


def test_piv_first_column_oscillator():
    sol = painleve.piv_from_extremals(painleve.table_system("osc_a3"), 0)
    assert (sol.alpha, sol.beta) == (0, F(-2, 9))
    assert np.allclose(sol.g(Y), -2 * Y / 3, atol=1e-13)
    assert painleve.piv_residual(sol, Y) < 1e-12


def test_piv_first_order_partner():
    sol = painleve.piv_from_extremals(painleve.table_system("susy1_piv"), 0)
    assert (sol.alpha, sol.beta) == (3, -8)
    assert np.allclose(sol.g(Y), 4 * Y / (1 + 2 * Y**2), atol=1e-12)
    assert painleve.piv_residual(sol, Y) < 1e-9


def test_piv_reduced_second_order():
    sol = painleve.piv_from_extremals(painleve.table_system("susy2_reduced_piv"), 0)
    assert (sol.alpha, sol.beta) == (5, -8)
    printed = painleve.printed_expression(painleve.PIV_TABLES[3][0])
    f = sp.lambdify(sp.Symbol("y", positive=True), printed)
    assert np.allclose(sol.g(Y), f(Y), atol=1e-11)


def test_piv_negative_control():
    sol = painleve.piv_from_extremals(painleve.table_system("susy1_piv"), 0)
    assert painleve.piv_residual(sol, Y, alpha=sol.alpha + F(1, 10)) > 1e-2


@pytest.mark.parametrize("name", ["osc_a3", "susy1_piv", "susy2_reduced_piv"])
def test_cyclic_labels_give_three_transcendents(name):
    system = painleve.table_system(name)
    sols = [painleve.piv_from_extremals(system, i) for i in range(3)]
    assert len({(s.alpha, s.beta) for s in sols}) == 3
    for s in sols:
        assert painleve.piv_residual(s, Y) < 1e-9


def test_piv_needs_three_states():
    with pytest.raises(InvalidParameterError):
        painleve.piv_from_extremals(painleve.table_system("osc_a4"))


def test_pv_oscillator_rows():
    system = painleve.table_system("osc_a4")
    sol = painleve.pv_from_extremals(system, "1234")
    assert (sol.alpha, sol.beta, sol.gamma, sol.delta) == (F(1, 32), F(-1, 32), 0, F(-1, 8))
    assert np.allclose(sol.w(Z), -1.0, atol=1e-13)
    assert painleve.pv_residual(sol, Z) < 1e-12
    sol = painleve.pv_from_extremals(system, "4231")
    assert (sol.alpha, sol.beta, sol.gamma) == (F(1, 8), F(-1, 8), F(-1, 4))
    assert np.allclose(sol.w(Z), (2 - Z) / (Z + 2), atol=1e-12)


def test_pv_first_order_partner_row():
    sol = painleve.pv_from_extremals(painleve.table_system("susy1_pv"), "1234")
    assert (sol.alpha, sol.beta, sol.gamma) == (F(1, 8), F(-1, 2), F(3, 4))
    mask = np.abs(Z - 1) > 0.05
    assert np.allclose(sol.w(Z[mask]), -2 / (Z[mask] - 1), rtol=1e-11)


@pytest.mark.parametrize("table,code", [(4, "3412"), (5, "3142")])
def test_pv_residual_rows(table, code):
    name = "osc_a4" if table == 4 else "susy1_pv"
    sol = painleve.pv_from_extremals(painleve.table_system(name), code)
    assert painleve.pv_residual(sol, Z) < 1e-9


def test_pv_negative_control():
    sol = painleve.pv_from_extremals(painleve.table_system("susy1_pv"), "3142")
    params = (sol.alpha + F(1, 10), sol.beta, sol.gamma, sol.delta)
    assert painleve.pv_residual(sol, Z, params=params) > 1e-2


def test_enumerate_six_permutations():
    for name, table in (("osc_a4", 4), ("susy1_pv", 5)):
        sols = painleve.enumerate_pv_permutations(painleve.table_system(name))
        assert [s.provenance[1] for s in sols] == [r[1] for r in painleve.PV_TABLES[table]]
        for s, row in zip(sols, painleve.PV_TABLES[table]):
            assert (s.alpha, s.beta, s.gamma) == row[3:6]


def test_swapping_third_and_fourth_keeps_beta():
    system = painleve.table_system("susy1_pv")
    for code in painleve.PV_PERMUTATIONS:
        swapped = code[:2] + code[3] + code[2]
        a = painleve.pv_from_extremals(system, code)
        b = painleve.pv_from_extremals(system, swapped)
        assert a.beta == b.beta


def test_bad_permutation_code():
    with pytest.raises(InvalidParameterError):
        painleve.parse_permutation("1224")


@pytest.mark.parametrize("table,row", PIV_ROWS, ids=[f"T{t}-{r[1]}" for t, r in PIV_ROWS])
def test_printed_piv_rows_solve_piv_exactly(table, row):
    g = painleve.printed_expression(row)
    assert painleve.symbolic_piv_residual(g, row[3], row[4]) == 0


@pytest.mark.parametrize("table,row", PV_ROWS, ids=[f"T{t}-{r[1]}" for t, r in PV_ROWS])
def test_printed_pv_rows_solve_pv_exactly(table, row):
    w = painleve.printed_expression(row)
    assert painleve.symbolic_pv_residual(w, *row[3:6]) == 0


def test_pv_sign_convention():
    # with +1/(w-1) replaced by -1/(w-1) a non-constant printed row stops solving PV
    row = painleve.PV_TABLES[4][1]
    w = painleve.printed_expression(row)
    z = sp.Symbol("z", positive=True)
    args = [sp.Rational(v) for v in (*row[3:6], painleve.PV_DELTA)]
    res = sp.simplify(sp.diff(w, z, 2) - painleve.pv_rhs(z, w, sp.diff(w, z), *args, sign=-1))
    assert res != 0


def test_verify_tables_all_entries():
    rows = painleve.verify_tables()
    assert len(rows) == 21
    assert all(r.parameters_match for r in rows)
    assert max(r.max_deviation for r in rows) < 1e-12
    assert max(r.residual for r in rows) < 1e-9


def test_residual_profile_excludes_poles():
    sol = painleve.piv_from_extremals(painleve.table_system("osc_a3"), 1)  # g = -2y/3 - 1/y
    y, g, res = painleve.piv_residual_profile(sol, Y)
    assert np.all(np.isnan(res[np.abs(y) < 0.05]))
    assert np.nanmax(res) < 1e-9


def test_connected_seeds():
    u1 = oscillator_general_solution(-2.5, 0.0)
    seeds = painleve.connect_seeds_for_reduction(u1, 2)
    assert seeds[1].energy == pytest.approx(-3.5)
    grid = np.linspace(-5, 5, 201)
    assert schrodinger_residual(harmonic_oscillator(), seeds[1], -3.5, grid) < 1e-8
    assert painleve.connect_seeds_for_reduction(u1, 1) == [u1]
    with pytest.raises(DegenerateSeedError):
        painleve.connect_seeds_for_reduction(oscillator_eigenfunction(0), 2)


def test_delta_fixed():
    for s in painleve.enumerate_pv_permutations(painleve.table_system("osc_a4")):
        assert s.delta == F(-1, 8)

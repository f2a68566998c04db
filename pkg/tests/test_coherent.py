import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from susyqm import coherent, susy
from susyqm.coherent import LadderSpec
from susyqm.errors import CutoffError, InvalidParameterError

OSC = LadderSpec()
K1 = LadderSpec(epsilons=(-0.5,))
K2 = LadderSpec(epsilons=(-0.5, -1.5))

complex_z = st.builds(lambda r, t: r * cmath.exp(1j * t), st.floats(0.0, 4.0), st.floats(0.0, 2 * math.pi))


def test_intrinsic_r():
    assert coherent.intrinsic_r(0, OSC) == 0
    assert coherent.intrinsic_r(1, OSC) == pytest.approx(1.0)
    assert coherent.intrinsic_r(4, OSC) == pytest.approx(2.0)
    spec = LadderSpec(tau=0.4)
    assert abs(coherent.intrinsic_r(3, spec)) == pytest.approx(math.sqrt(3))
    assert cmath.phase(coherent.intrinsic_r(3, spec)) == pytest.approx(0.4)


def test_natural_r_tilde():
    assert coherent.natural_r_tilde(0, K1) == 0
    assert coherent.natural_r_tilde(1, K1) == pytest.approx(math.sqrt(2))
    # direct substitution for k = 2, n = 3
    n, e = 3, (-0.5, -1.5)
    factor = math.prod((n + 0.5 - x) * (n - 0.5 - x) for x in e)
    assert coherent.natural_r_tilde(n, K2) == pytest.approx(math.sqrt(factor * n))


def test_natural_r_tilde_rejects_energy_inside_spectrum():
    with pytest.raises(InvalidParameterError):
        coherent.natural_r_tilde(1, LadderSpec(epsilons=(1.0,)))


def test_moments():
    assert coherent.moments(OSC, 3) == pytest.approx(6.0)
    assert coherent.moments(K1, 1, partner=True) == pytest.approx(2.0)
    assert coherent.moments(OSC, 0) == 1.0
    assert coherent.moments(K1, 0, partner=True) == 1.0
    for m in range(15):
        assert coherent.moments(OSC, m) == pytest.approx(math.factorial(m), rel=1e-12)
        for spec in (K1, K2):
            assert coherent.moments(spec, m, partner=True) == pytest.approx(
                coherent.oscillator_moments(m, spec.epsilons), rel=1e-12)


def test_moments_from_r_products():
    # rho_m = |r(1)...r(m)|^2
    for m in range(1, 8):
        prod = math.prod(abs(coherent.natural_r_tilde(j, K2)) ** 2 for j in range(1, m + 1))
        assert coherent.moments(K2, m, partner=True) == pytest.approx(prod, rel=1e-12)


def test_ground_state_at_origin():
    st0 = coherent.coherent_coefficients(0, OSC)
    assert st0.coefficients[0] == 1 and np.all(st0.coefficients[1:] == 0)
    st1 = coherent.coherent_coefficients(0, K1, partner=True)
    assert abs(st1.coefficients[0]) == 1.0


@settings(max_examples=40, deadline=None)
@given(z=complex_z, tau=st.floats(-2.0, 2.0))
def test_normalization_and_eigenvalue_property(z, tau):
    for spec, partner in ((LadderSpec(tau=tau), False), (LadderSpec(tau=tau, epsilons=(-0.5,)), True),
                          (LadderSpec(tau=tau, epsilons=(-0.5, -1.5)), True)):
        state = coherent.coherent_coefficients(z, spec, partner)
        c = state.coefficients
        assert np.sum(np.abs(c) ** 2) == pytest.approx(1.0, abs=1e-10)
        lowered = coherent.apply_annihilator(c, spec, partner)
        assert np.all(np.abs(lowered - z * c[:-1]) < 1e-10)


def test_coefficient_structure():
    z, tau = 1.3 - 0.4j, 0.25
    spec = LadderSpec(tau=tau, epsilons=(-0.5,))
    state = coherent.coherent_coefficients(z, spec, partner=True)
    m = np.arange(6)
    expected = np.exp(-1j * tau * m) * z**m / np.sqrt([coherent.moments(spec, k, True) for k in m])
    ratio = state.coefficients[:6] / expected
    assert np.allclose(ratio, ratio[0], rtol=1e-12)


def test_cutoff_error_for_huge_z():
    with pytest.raises(CutoffError):
        coherent.coherent_coefficients(1e6, OSC)


def test_kernel_examples():
    for z in (0.0, 1.0 + 1.0j, 3.0j):
        assert coherent.reproducing_kernel(z, z, OSC) == pytest.approx(1.0, abs=1e-12)
        assert coherent.reproducing_kernel(z, z, K1, True) == pytest.approx(1.0, abs=1e-12)
    z = 1.4 - 0.6j
    assert coherent.reproducing_kernel(0, z, OSC) == pytest.approx(math.exp(-abs(z) ** 2 / 2), abs=1e-12)


@pytest.mark.parametrize("z1,z2", [(0.3, 1.2j), (1 + 1j, -0.5 + 2j), (2.0, 2.5)])
def test_kernel_series_against_closed_forms(z1, z2):
    assert coherent.reproducing_kernel(z1, z2, OSC) == pytest.approx(coherent.oscillator_kernel(z1, z2), abs=1e-12)
    for spec in (K1, K2):
        assert abs(coherent.reproducing_kernel(z1, z2, spec, True)
                   - coherent.oscillator_kernel(z1, z2, spec.epsilons)) < 1e-9


@settings(max_examples=10, deadline=None)
@given(zs=st.lists(complex_z, min_size=5, max_size=5))
def test_kernel_gram_matrix_positive(zs):
    gram = np.array([[coherent.reproducing_kernel(a, b, K1, True) for b in zs] for a in zs])
    assert np.allclose(gram, gram.conj().T, atol=1e-12)
    assert np.min(np.linalg.eigvalsh(gram)) >= -1e-10


def test_time_evolution_law():
    z, tau, t = 0.9 + 0.7j, 0.2, 1.35
    for spec, partner in ((LadderSpec(tau=tau), False), (LadderSpec(tau=tau, epsilons=(-0.5,)), True)):
        state = coherent.coherent_coefficients(z, spec, partner)
        moved = coherent.coherent_coefficients(z, spec, partner, cutoff=state.cutoff, tau=tau + t)
        e0 = spec.E_of_n(0)
        assert np.max(np.abs(coherent.evolve(state, t, spec) - np.exp(-1j * t * e0) * moved.coefficients)) < 1e-14


def test_measure_moments():
    assert coherent.measure_check_initial(0) == pytest.approx(1.0, rel=1e-12)
    assert coherent.measure_check_initial(5) == pytest.approx(120.0, rel=1e-6)
    assert coherent.measure_check_initial(10) == pytest.approx(3628800.0, rel=1e-6)
    with pytest.raises(InvalidParameterError):
        coherent.measure_check_initial(21)


def test_uncertainty_formula_values():
    assert coherent.uncertainty_formula(0, "k1") == pytest.approx(1.5)
    assert coherent.uncertainty_formula(0, "k2") == pytest.approx(2.5)
    # direction dependence: real axis against the diagonal at equal |z|
    r = 3.0
    assert coherent.uncertainty_formula(r, "k1") != pytest.approx(
        coherent.uncertainty_formula(r * cmath.exp(1j * math.pi / 4), "k1"), rel=1e-3)
    # the formula is symmetric under z -> i z (swaps the two factors)
    assert coherent.uncertainty_formula(r, "k1") == pytest.approx(coherent.uncertainty_formula(1j * r, "k1"))
    with pytest.raises(InvalidParameterError):
        coherent.uncertainty_formula(1.0, "k3")


@pytest.fixture(scope="module")
def k1_tables():
    t = susy.transform([(-0.5, 0.0)])
    return t, coherent.MatrixTables(t)


def test_uncertainty_oracle_k1(k1_tables):
    t, tables = k1_tables
    for z in (0.0, 1.0, 0.6 - 1.1j):
        num = coherent.uncertainty_numeric(z, t, tables=tables)
        assert num == pytest.approx(coherent.uncertainty_formula(z, "k1"), abs=1e-3)


@pytest.mark.parametrize("z", [0.0, 1.0 + 0.5j, -2.0, 3.0j])
def test_standard_coherent_states_minimize_uncertainty(z):
    assert coherent.uncertainty_numeric(z) == pytest.approx(0.5, abs=1e-6)


def test_oscillator_commutator():
    vals = coherent.commutator_values(LadderSpec(tau=0.7), 10)
    assert np.allclose(vals, 1.0, atol=1e-12)


@pytest.mark.parametrize("spec", [K1, K2, LadderSpec(epsilons=(-2.5,)), LadderSpec(epsilons=(-2.5, -3.5))])
def test_natural_commutator_is_polynomial_of_degree_2k(spec):
    coeffs, resid = coherent.commutator_polynomial_fit(spec)
    assert resid < 1e-8
    assert len(coeffs) == 2 * spec.k + 1
    assert abs(coeffs[-1]) > 1e-6  # genuinely of degree 2k
    # one degree lower does not interpolate
    n = np.arange(2 * spec.k + 3)
    e = n + 0.5
    vals = coherent.commutator_values(spec, int(n[-1]), partner=True)
    low = np.polynomial.polynomial.polyfit(e, vals, 2 * spec.k - 1)
    assert np.max(np.abs(np.polynomial.polynomial.polyval(e, low) - vals)) > 1e-3

import numpy as np
import pytest
import sympy as sp

from susyqm import graphene
from susyqm.errors import InvalidParameterError
from susyqm.graphene import MagneticProfile, Units

X = np.linspace(-5, 5, 201)


def test_superpotential_constant_field():
    w = graphene.superpotential(graphene.constant_field(2.0))
    assert np.allclose(w(X), 2.0 * X)
    assert np.allclose(w.derivative(X), 2.0)


def test_superpotential_without_field():
    prof = MagneticProfile(lambda x: np.zeros_like(x), k_y=0.7)
    w = graphene.superpotential(prof)
    assert np.allclose(w(X), 0.7, atol=1e-14)
    vp, vm = graphene.partner_potentials(w)
    assert np.allclose(vp(X), 0.49) and np.allclose(vm(X), 0.49)


def test_vector_potential_by_quadrature():
    b0, k = 1.7, -0.3
    prof = MagneticProfile(lambda x: b0 / np.cosh(x) ** 2, k_y=k, interval=(-8.0, 8.0))
    w = graphene.superpotential(prof)
    x = np.linspace(-7.5, 7.5, 151)
    assert np.allclose(w(x), b0 * np.tanh(x) + k, atol=1e-10)
    # A' = B, by central differences of the quadrature result
    h = 1e-4
    assert np.allclose((prof.A(x + h) - prof.A(x - h)) / (2 * h), prof.B(x), atol=1e-8)


def test_partner_potentials_shifted_oscillators():
    b0 = 1.5
    vp, vm = graphene.partner_potentials(graphene.superpotential(graphene.constant_field(b0)))
    assert np.allclose(vp(X), b0**2 * X**2 + b0)
    assert np.allclose(vm(X), b0**2 * X**2 - b0)
    assert vp.convention_factor == vm.convention_factor == 1.0


def test_partner_potentials_tanh_symbolic():
    s = sp.Symbol("x")
    w = sp.tanh(s)
    vm_expr = sp.expand(w**2 - sp.diff(w, s))
    vp_expr = sp.expand(w**2 + sp.diff(w, s))
    vp, vm = graphene.partner_potentials(graphene.superpotential(graphene.sech2_field(1.0)))
    for x in (0.0, 1.0):
        assert vm(np.array(x)) == pytest.approx(float(vm_expr.subs(s, x)), abs=1e-14)
        assert vp(np.array(x)) == pytest.approx(float(vp_expr.subs(s, x)), abs=1e-14)
        # 1 - 2 sech^2 form of V-
        assert vm(np.array(x)) == pytest.approx(1 - 2 / np.cosh(x) ** 2, abs=1e-14)


def test_landau_levels():
    b0 = 1.0
    sols = graphene.dirac_spectrum(graphene.constant_field(b0), 6)
    pos = [s for s in sols if s.branch >= 0]
    levels = np.array([s.calE for s in pos])
    assert np.allclose(levels, 2 * b0 * np.arange(6), atol=1e-8)
    energies = np.array([s.energy for s in pos])
    assert np.allclose(energies, np.sqrt(2 * b0 * np.arange(6)), atol=1e-8)
    # both signs emitted for every nonzero level
    neg = sorted(s.energy for s in sols if s.branch < 0)
    assert np.allclose(sorted(-e for e in neg), energies[1:], atol=1e-12)


@pytest.mark.parametrize("b0", [0.5, 2.0])
def test_landau_spacing_scales_with_field(b0):
    levels = np.array([s.calE for s in graphene.dirac_spectrum(graphene.constant_field(b0), 5) if s.branch >= 0])
    assert np.max(np.abs(np.diff(levels) - 2 * b0)) < 1e-3


def test_zero_mode_component():
    prof = graphene.constant_field(1.0)
    zero = graphene.dirac_spectrum(prof, 2)[0]
    assert zero.calE == 0.0 and zero.energy == 0.0
    x = np.linspace(-4, 4, 81)
    assert np.allclose(zero.psi_plus(x), 0.0)
    psi = zero.psi_minus(x)
    gauss = np.exp(-x**2 / 2)  # exp(-int W) with W = x
    assert np.allclose(psi / psi[40], gauss, atol=1e-9)
    assert graphene.intertwine_residual(prof, zero) < 1e-9


def test_zero_mode_sector_follows_field_sign():
    assert graphene.zero_mode_sector(graphene.constant_field(1.0)) == "-"
    assert graphene.zero_mode_sector(graphene.constant_field(-1.0)) == "+"
    assert graphene.zero_mode_sector(graphene.linear_field()) is None
    sols = graphene.dirac_spectrum(graphene.constant_field(-1.0), 3)
    assert sols[0].calE == 0.0
    x = np.linspace(-4, 4, 9)
    assert np.allclose(sols[0].psi_minus(x), 0.0)
    levels = sorted({round(s.calE, 8) for s in sols})
    assert np.allclose(levels, [0.0, 2.0, 4.0], atol=1e-8)


@pytest.mark.parametrize("make", [lambda: graphene.constant_field(1.0), lambda: graphene.sech2_field(3.0),
                                  lambda: graphene.linear_field(1.0), lambda: graphene.constant_field(-1.3, 0.4)])
def test_intertwining_and_dirac_residuals(make):
    prof = make()
    sols = graphene.dirac_spectrum(prof, 3)
    for s in sols:
        assert graphene.intertwine_residual(prof, s) < 1e-6
        assert graphene.dirac_residual(prof, s) < 1e-6


def test_intertwining_negative_control():
    prof = graphene.constant_field(1.0)
    sol = [s for s in graphene.dirac_spectrum(prof, 3) if s.n == 1][0]
    assert graphene.intertwine_residual(prof, sol) < 1e-6
    assert graphene.intertwine_residual(prof.with_ky(0.1), sol) > 1e-2


def test_poeschl_teller_levels():
    b0 = 3.0
    sols = graphene.dirac_spectrum(graphene.sech2_field(b0), 3)
    levels = sorted({s.calE for s in sols})
    expected = [b0**2 - (b0 - n) ** 2 for n in range(3)]
    assert np.allclose(levels, expected, atol=1e-7)


def test_unconfined_level_rejected():
    with pytest.raises(InvalidParameterError):
        graphene.dirac_spectrum(graphene.sech2_field(3.0), 5)


def test_fd_pairing():
    plus, minus = graphene.fd_pairing(graphene.constant_field(1.0), 5)
    assert abs(minus[0]) < 1e-3 and abs(plus[0]) > 1.0
    assert np.max(np.abs(plus[:4] - minus[1:5])) < 1e-3
    plus, minus = graphene.fd_pairing(graphene.linear_field(1.0), 4)
    assert np.max(np.abs(plus - minus)) < 1e-3  # no zero mode: full pairing


def test_translation_in_ky():
    base = np.array([s.calE for s in graphene.dirac_spectrum(graphene.constant_field(1.0), 5)])
    moved = np.array([s.calE for s in graphene.dirac_spectrum(graphene.constant_field(1.0, k_y=1.5), 5)])
    assert np.max(np.abs(base - moved)) < 1e-3
    # the eigenfunction is translated by -k/B0
    s0 = graphene.dirac_spectrum(graphene.constant_field(1.0), 2)[0]
    s1 = graphene.dirac_spectrum(graphene.constant_field(1.0, k_y=1.5), 2)[0]
    x = np.linspace(-3, 3, 31)
    assert np.allclose(s1.psi_minus(x - 1.5), s0.psi_minus(x), atol=1e-6)


def test_units_enter_through_coupling_and_readout():
    units = Units(hbar=2.0, c=1.0, e=4.0, v_F=3.0)  # coupling e / (c hbar) = 2
    sols = graphene.dirac_spectrum(graphene.constant_field(1.0), 3, units)
    pos = [s for s in sols if s.branch >= 0]
    assert np.allclose([s.calE for s in pos], [0.0, 4.0, 8.0], atol=1e-8)
    assert np.allclose([s.energy for s in pos], [0.0, 6 * 2.0, 6 * np.sqrt(8.0)], atol=1e-7)
    for s in sols:
        assert graphene.intertwine_residual(graphene.constant_field(1.0), s, units) < 1e-6


def test_profile_lookup_and_negative_calE():
    assert graphene.profile_by_name("linear", b1=2.0).params == {"b1": 2.0}
    with pytest.raises(InvalidParameterError):
        graphene.profile_by_name("dipole")
    with pytest.raises(InvalidParameterError):
        graphene.DiracSolution(0, 0.0, None, None, -1.0)


def test_csv_outputs():
    sols = graphene.dirac_spectrum(graphene.constant_field(1.0), 2)
    text = graphene.spectrum_csv(sols)
    assert text.splitlines()[0] == "n,branch,calE,E"
    assert len(text.splitlines()) == 1 + len(sols)
    spin = graphene.spinor_csv(sols, np.linspace(-1, 1, 5))
    assert len(spin.splitlines()) == 6


import pytest
from hypothesis import given, strategies as st

from fgsim.errors import ParameterError
from fgsim.model import (CODATA, FGParams, PhysicalConstants, calibrated_mass, derive,
                         reference_params, scale_params)


def test_gamma_identity():
    c = CODATA
    assert c.gamma == pytest.approx(c.g_e * c.mu_B / c.hbar, rel=1e-12)
    assert c.gamma == pytest.approx(1.76085963e11, rel=1e-8)


def test_constants_positive():
    with pytest.raises(ParameterError):
        PhysicalConstants(hbar=0.0)
    with pytest.raises(ParameterError):
        CODATA.with_gravity(-1.0)
    assert CODATA.with_gravity(4.9).g_grav == 4.9


def test_reference_sphere(ref, ref_d):
    assert ref.mass == pytest.approx(8.594e-10, rel=1e-3)
    assert ref.density == pytest.approx(7.6e3, rel=0.01)
    assert ref_d.omega_I == pytest.approx(1.193, rel=1e-12)
    assert ref_d.omega_star == ref_d.omega_I
    assert ref_d.B_star * ref_d.gamma == pytest.approx(ref_d.omega_I, rel=1e-12)
    assert ref_d.B_star == pytest.approx(6.775e-12, rel=1e-3)


def test_derived_formulas(ref, ref_d):
    assert ref_d.inertia == pytest.approx(2 * ref.mass * ref.radius ** 2 / 5, rel=1e-15)
    assert ref_d.spin == pytest.approx(7e15 * CODATA.hbar / 2, rel=1e-15)
    assert ref_d.moment == pytest.approx(7e15 * CODATA.mu_B, rel=1e-15)


def test_calibrated_mass_inverts_omega_I():
    m = calibrated_mass(1e-5, 1e14, 7.0)
    assert derive(FGParams(1e-5, 1e14, m)).omega_I == pytest.approx(7.0, rel=1e-13)


@pytest.mark.parametrize("field,value", [("radius", 0.0), ("spin_count", -1.0),
                                         ("mass", float("nan")), ("radius", True)])
def test_params_rejected(field, value):
    kw = dict(radius=1e-6, spin_count=1e10, mass=1e-14)
    kw[field] = value
    with pytest.raises(ParameterError) as err:
        FGParams(**kw)
    assert err.value.key == field


def test_scale_identity_and_cubic(ref):
    assert scale_params(ref, ref.radius) == ref
    small = scale_params(ref, 1e-6)
    assert small.spin_count == pytest.approx(2.593e11, rel=1e-3)
    assert small.spin_count == pytest.approx(7e15 / 27000, rel=1e-12)
    big = scale_params(ref, 60e-6)
    assert big.mass == pytest.approx(8 * ref.mass, rel=1e-12)
    assert big.spin_count == pytest.approx(8 * ref.spin_count, rel=1e-12)
    with pytest.raises(ParameterError):
        scale_params(ref, -1e-6)


def test_micro_omega_I(micro_d, ref_d):
    assert micro_d.omega_I == pytest.approx(900 * ref_d.omega_I, rel=1e-12)
    assert micro_d.omega_I == pytest.approx(1074, rel=1e-3)


@given(st.floats(1e-8, 1e-3))
def test_omega_I_r2_constant(r):
    ref = reference_params()
    d = derive(scale_params(ref, r))
    assert d.omega_I * r ** 2 == pytest.approx(1.193 * ref.radius ** 2, rel=1e-10)


@given(st.floats(1e10, 1e18), st.floats(1.01, 10.0))
def test_B_star_monotone(n, k):
    base = FGParams(1e-5, n, 1e-11)
    more_spins = FGParams(1e-5, n * k, 1e-11)
    heavier = FGParams(1e-5, n, 1e-11 * k)
    assert derive(more_spins).B_star > derive(base).B_star
    assert derive(heavier).B_star < derive(base).B_star


def test_derive_requires_params():
    with pytest.raises(ParameterError):
        derive("not params")

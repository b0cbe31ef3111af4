import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fgsim.errors import LevitationError, ParameterError
from fgsim.levitation import (TiltConfig, effective_precession, equilibrium_height, log_radii,
                              sc_threshold, suppression_curve, suppression_factor,
                              tilt_precession_rate, vertical_force)
from fgsim.model import CODATA, FGParams, derive


def potential(z, params, consts=CODATA):
    """Image plus gravitational energy for horizontal n, written out directly."""
    mu = params.spin_count * params.moment_per_spin
    K = consts.mu_0 * mu / (32 * math.pi * z ** 3)
    return 0.5 * mu * K + params.mass * consts.g_grav * z


def test_residual_and_fd_oracle(micro, micro_d):
    eq = equilibrium_height(micro, micro_d)
    mg = micro.mass * CODATA.g_grav
    assert 10e-6 < eq.z_eq < 100e-6
    assert eq.residual_force < 1e-6 * mg
    h = eq.z_eq * 1e-5
    fd = -(potential(eq.z_eq + h, micro) - potential(eq.z_eq - h, micro)) / (2 * h)
    assert abs(fd) < 1e-6 * mg


def test_closed_form_height(micro, micro_d):
    mu = micro_d.moment
    z4 = 3 * CODATA.mu_0 * mu ** 2 / (64 * math.pi * micro.mass * CODATA.g_grav)
    eq = equilibrium_height(micro, micro_d)
    assert eq.z_eq == pytest.approx(z4 ** 0.25, rel=1e-10)
    assert eq.B_image_mag == pytest.approx(CODATA.mu_0 * mu / (32 * math.pi * eq.z_eq ** 3))
    assert eq.B_image_eq17 == pytest.approx(8 * eq.B_image_mag, rel=1e-12)


def test_moment_doubling(micro):
    base = equilibrium_height(micro).z_eq
    doubled = replace(micro, moment_per_spin=2 * micro.moment_per_spin)
    assert equilibrium_height(doubled).z_eq == pytest.approx(math.sqrt(2) * base, rel=1e-9)


def test_gravity_halving(micro):
    base = equilibrium_height(micro).z_eq
    half = CODATA.with_gravity(CODATA.g_grav / 2)
    assert equilibrium_height(micro, consts=half).z_eq == pytest.approx(2 ** 0.25 * base, rel=1e-9)


def test_infeasible():
    heavy = FGParams(1e-6, 1.0, 1e-9)
    with pytest.raises(LevitationError):
        equilibrium_height(heavy)
    points = suppression_curve([1e-6], heavy)
    assert math.isnan(points[0].ratio) and points[0].error


def test_vertical_force_sign(micro):
    z = equilibrium_height(micro).z_eq
    assert vertical_force(0.9 * z, micro) > 0 > vertical_force(1.1 * z, micro)


def test_effective_precession(micro_d):
    assert effective_precession(1e-9, 0.0, micro_d) == pytest.approx(micro_d.gamma * 1e-9)
    with pytest.raises(ParameterError):
        effective_precession(-1.0, 0.0, micro_d)
    with pytest.raises(ParameterError):
        suppression_factor(-1.0, micro_d)


def test_threshold(micro, micro_d):
    assert sc_threshold(0.0, micro_d) == pytest.approx(micro_d.B_star, rel=1e-15)
    assert sc_threshold(1.0, micro_d) == pytest.approx(1.0, rel=1e-6)
    B = equilibrium_height(micro, micro_d).B_image_mag
    assert sc_threshold(B, micro_d) / micro_d.B_star == pytest.approx(
        suppression_factor(B, micro_d), rel=1e-12)


@given(st.floats(0, 1e-3))
def test_threshold_identity(micro_d, B):
    ratio = sc_threshold(B, micro_d) / micro_d.B_star
    assert ratio == pytest.approx(1 + micro_d.gamma * B / micro_d.omega_I, rel=1e-12)


def test_tilt(ref_d):
    assert tilt_precession_rate(TiltConfig(0.0), ref_d) == 0.0
    one = tilt_precession_rate(TiltConfig.degrees(1), ref_d)
    assert one == pytest.approx(2.082e-2, rel=1e-3)
    assert math.pi / (2 * one) == pytest.approx(75.4, rel=1e-3)
    two = tilt_precession_rate(TiltConfig.degrees(2), ref_d)
    assert two / one == pytest.approx(1.9996, abs=1e-4)
    with pytest.raises(ParameterError):
        TiltConfig(math.pi / 2)
    assert TiltConfig(0.3).n_z0 == math.sin(0.3)


def test_suppression_curve(ref):
    radii = log_radii(1e-8, 1e-4, 10)
    pts = suppression_curve(radii, ref)
    ratios = np.array([p.ratio for p in pts])
    assert np.all(np.diff(ratios) >= 0)
    assert all(p.ratio < 1.01 for p in pts if p.radius < 1e-8 * 1.01)
    at_ref = [p for p in pts if p.radius == pytest.approx(30e-6, rel=1e-9)]
    d = derive(ref)
    eq = equilibrium_height(ref, d)
    assert not at_ref or at_ref[0].ratio == pytest.approx(suppression_factor(eq.B_image_mag, d))
    with pytest.raises(ParameterError):
        suppression_curve([1e-6, 1e-7], ref)
    with pytest.raises(ParameterError):
        suppression_curve([0.0], ref)

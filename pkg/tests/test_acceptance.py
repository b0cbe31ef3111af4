"""One check per acceptance criterion, each printing a PASS/FAIL line."""

import json
import math
import subprocess
import sys
from dataclasses import replace

import numpy as np
import pytest
from scipy.special import ellipk

from conftest import record
from fgsim.dynamics import (IntegratorConfig, ModelKind, energy_drift, free_state, integrate,
                            levitated_state)
from fgsim.exotic import BosonCoupling, SpinSource, exclusion_curve, mass_grid, v_pp
from fgsim.levitation import (effective_precession, equilibrium_height, log_radii,
                              suppression_curve)
from fgsim.model import CODATA, derive, reference_params, scale_params
from fgsim.pickup import SQUIDParams
from fgsim.sensitivity import (GasParams, collision_noise, collision_prefactor, detection_noise,
                               fg_flux_amplitude, levitated_suppression)
from fgsim.spectral import log_grid, precession_rate, sweep_frequencies

REF = reference_params()
REF_D = derive(REF)
MICRO = scale_params(REF, 1e-6)
MICRO_D = derive(MICRO)
W_I = REF_D.omega_I


# ------------------------------------------------------------------ 1, 2

def test_criterion_01_edh_frequency():
    rel = abs(REF_D.omega_I / 1.193 - 1)
    assert record(1, "omega_I of the 30 um sphere", rel < 1e-3,
                  f"{REF_D.omega_I:.6g} rad/s vs 1.193 (rel {rel:.2e}, tol 1e-3)")


def test_criterion_02_threshold_field():
    rel = abs(REF_D.B_star / 7e-12 - 1)
    assert record(2, "threshold field B*", rel < 0.05,
                  f"{REF_D.B_star:.4g} T vs 7e-12 T (rel {rel:.3f}, tol 0.05)")


# ------------------------------------------------------------------ 3

@pytest.fixture(scope="module")
def sweep():
    values = [W_I * x for x in log_grid(1e-3, 1e3, 7)]
    rows = sweep_frequencies(REF, values)
    assert all(not r.error and len(r.fg_peaks) == 2 and r.brick_peak for r in rows)
    return rows


def _lines(r):
    return r.fg_peaks[0][0], r.fg_peaks[1][0], r.brick_peak[0]


def test_criterion_03a_product_above_threshold(sweep):
    errs = [abs(lo * hi / (r.omega_L * W_I) - 1) for r in sweep if r.omega_L > W_I
            for lo, hi, _ in [_lines(r)]]
    worst = max(errs)
    assert record("3a", "FG peak product above threshold", worst < 0.04,
                  f"worst |p1 p2 / (wL wI) - 1| = {worst:.3f} over {len(errs)} points (tol 0.04)")


def test_criterion_03b_asymptotes_below_threshold(sweep):
    below = [r for r in sweep if r.omega_L < W_I / 10]
    lo_err = max(abs(_lines(r)[0] / r.omega_L - 1) for r in below)
    hi_err = max(abs(_lines(r)[1] / W_I - 1) for r in below)
    ok = lo_err < 0.05 and hi_err < 0.05
    assert record("3b", "lower -> omega_L, upper -> omega_I below threshold", ok,
                  f"worst lower {lo_err:.3f}, worst upper {hi_err:.3f} over {len(below)} points "
                  f"with omega_L < omega_I/10 (tol 0.05)")


def test_criterion_03c_brick_geometric(sweep):
    worst = max(abs(_lines(r)[2] / math.sqrt(r.omega_L * W_I) - 1) for r in sweep)
    assert record("3c", "brick line at sqrt(wL wI)", worst < 0.02,
                  f"worst rel error {worst:.4f} over {len(sweep)} points (tol 0.02)")


def test_criterion_03d_brick_between_and_mean(sweep):
    # diagnostic companions to 3a-3c: ordering and the geometric mean of the FG lines
    between = all(lo < b < hi for lo, hi, b in map(_lines, sweep))
    worst = max(abs(b / math.sqrt(lo * hi) - 1) for lo, hi, b in map(_lines, sweep))
    high = [r for r in sweep if r.omega_L > 10 * W_I]
    worst_high = max(abs(_lines(r)[2] / math.sqrt(_lines(r)[0] * _lines(r)[1]) - 1) for r in high)
    # a pendulum released at 90 degrees runs at pi / (2 K(1/2)) of its small-angle frequency
    pend = math.pi / (2 * ellipk(0.5))
    pend_err = max(abs(_lines(r)[2] / math.sqrt(r.omega_L * W_I) / pend - 1) for r in sweep)
    ok = between and worst_high < 0.01 and pend_err < 0.01
    assert record("3d", "brick between FG lines, at their geometric mean", ok,
                  f"between={between}, worst mean mismatch {worst:.3f} (all) {worst_high:.4f} "
                  f"(wL > 10 wI); brick / 90-degree pendulum {1 + pend_err:.4f}")


# ------------------------------------------------------------------ 4

def _tilt_rate(deg):
    eq = equilibrium_height(REF, REF_D)
    s = levitated_state(eq.z_eq, math.radians(deg))
    tr = integrate(s, ModelKind.levitated(frozen_com=True), REF_D,
                   IntegratorConfig(sample_interval=0.1), 80.0)
    return abs(precession_rate(tr))


def test_criterion_04_tilt_precession():
    rates = {deg: _tilt_rate(deg) for deg in (1, 2, 3)}
    quarter = (math.pi / 2) / rates[1]
    q_err = abs(quarter / 75.4 - 1)
    s_err = max(abs(rates[k] / rates[1] / (math.sin(math.radians(k)) / math.sin(math.radians(1)))
                    - 1) for k in (2, 3))
    ok = q_err < 0.02 and s_err < 0.02
    assert record(4, "tilt-driven precession of the levitated 30 um FG", ok,
                  f"quarter period {quarter:.2f} s (rel {q_err:.4f}); sin-beta scaling "
                  f"worst {s_err:.2e} (tol 0.02)")


# ------------------------------------------------------------------ 5, 7

def _levitated_rate(params, d, consts, B, frozen):
    eq = equilibrium_height(params, d, consts)
    expected = effective_precession(B, eq.B_image_mag, d)
    period = 2 * math.pi / expected
    s = levitated_state(eq.z_eq)
    tr = integrate(s, ModelKind.levitated((0, 0, B), consts.g_grav, frozen), d,
                   IntegratorConfig(sample_interval=period / 200), 10 * period, consts)
    return abs(precession_rate(tr)), expected


def test_criterion_05_suppressed_precession():
    errs = []
    for B in (1e-9, 1e-8, 1e-7):
        for frozen in (True, False):
            got, expected = _levitated_rate(MICRO, MICRO_D, CODATA, B, frozen)
            errs.append(abs(got / expected - 1))
    worst = max(errs)
    assert record(5, "1 um levitated precession vs gamma B / (1 + gamma B_img / omega_I)",
                  worst < 0.05, f"worst rel error {worst:.2e} over B = 1e-9..1e-7 T, "
                                f"frozen and free CoM (tol 0.05)")


def test_criterion_07_gravity_scaling():
    base = equilibrium_height(MICRO, MICRO_D).z_eq
    z_err, p_err = [], []
    for k in (0.25, 0.5, 2.0):
        consts = CODATA.with_gravity(k * CODATA.g_grav)
        z = equilibrium_height(MICRO, MICRO_D, consts).z_eq
        z_err.append(abs(z / base / k ** -0.25 - 1))
        got, expected = _levitated_rate(MICRO, MICRO_D, consts, 1e-8, False)
        p_err.append(abs(got / expected - 1))
    ok = max(z_err) < 0.01 and max(p_err) < 0.05
    assert record(7, "gravity scaling of height and suppressed precession", ok,
                  f"z_eq vs g^-1/4 worst {max(z_err):.2e} (tol 0.01); precession worst "
                  f"{max(p_err):.2e} (tol 0.05)")


# ------------------------------------------------------------------ 6

def test_criterion_06_suppression_anchors():
    s1 = levitated_suppression(MICRO)
    s30 = levitated_suppression(REF)
    pts = suppression_curve(log_radii(1e-8, 1e-4, 10), REF)
    ratios = np.array([p.ratio for p in pts])
    radii = np.array([p.radius for p in pts])
    finite = np.isfinite(ratios)
    monotone = bool(np.all(np.diff(ratios[finite]) > 0))
    # saturation on the log plot: below 0.1 um the correction never doubles the period
    # and it has faded below 1% by 10 nm
    small = ratios[finite & (radii < 1e-7)] - 1
    tiny = ratios[finite & (radii <= 1e-8 * (1 + 1e-9))] - 1
    saturates = small.size > 0 and tiny.size > 0 and small.max() < 1 and tiny.max() < 0.01
    ok = (1 / 2 < s1 / 340 < 2) and (1 / 3 < s30 / 4e6 < 3) and monotone and saturates
    assert record(6, "suppression factor anchors and curve shape", ok,
                  f"1 um: {s1:.4g} (vs 340, x2); 30 um: {s30:.4g} (vs 4e6, x3); monotone="
                  f"{monotone}; ratio-1 below 0.1 um <= {small.max():.3g}, at 10 nm "
                  f"{tiny.max():.2e}")


# ------------------------------------------------------------------ 8

def test_criterion_08_noise_budget():
    gas = GasParams()
    det = [detection_noise(SQUIDParams(), 1e-12, t) / (1e-9 * t ** -1.5) for t in (1, 10, 1e4)]
    det_ok = max(abs(x - 1) for x in det) < 1e-12
    # independent term-by-term evaluation of the collision formula
    m, R, N = gas.species_mass, MICRO.radius, MICRO.spin_count
    v = math.sqrt(8 * CODATA.k_B * gas.temperature / (math.pi * m))
    oracle = m * R ** 2 / (6 * N * CODATA.hbar) * math.sqrt(gas.number_density * v ** 3 / math.pi)
    formula_ok = abs(collision_prefactor(MICRO, gas) / oracle - 1) < 1e-12
    supp = levitated_suppression(MICRO)
    col = collision_noise(MICRO, gas, 1.0, supp)
    ratio = col / 1e-5
    mag_ok = 0.1 < ratio < 10
    flux = fg_flux_amplitude(MICRO, SQUIDParams())
    ok = det_ok and formula_ok and mag_ok
    assert record(8, "detection and collision noise", ok,
                  f"detection exact={det_ok}; collision formula={formula_ok}; levitated "
                  f"collision {col:.3g}/sqrt(t) vs 1e-5 (ratio {ratio:.3g}, need 0.1..10; "
                  f"free FG {col * supp:.3g}); flux {flux:.3g} T m^2")


# ------------------------------------------------------------------ 9

def test_criterion_09_exotic_properties():
    rng = np.random.default_rng(1)
    sym = True
    for _ in range(20):
        a, b, r = rng.normal(size=(3, 3))
        bc = BosonCoupling(rng.uniform(0, 1e-3), 1.0)
        r = r * 1e-4
        sym &= math.isclose(v_pp(a, b, r, bc), v_pp(b, a, r, bc), rel_tol=1e-12)
    r0 = 1e-4
    k = 1.0 / r0
    mass = k * CODATA.hbar * CODATA.c / CODATA.e_charge
    decay = True
    for f in (1.0, 10.0, 100.0, 1000.0):
        r = f * r0
        light = v_pp((1, 0, 0), (1, 0, 0), (0, 0, r), BosonCoupling(0.0, 1.0))
        heavy = v_pp((1, 0, 0), (1, 0, 0), (0, 0, r), BosonCoupling(mass, 1.0))
        decay &= math.isclose(heavy / light, (1 + k * r) * math.exp(-k * r), rel_tol=1e-9)
    src = SpinSource()
    masses = mass_grid(1e-8, 1e-2, 10)
    curve = exclusion_curve(masses, src, MICRO, 1e-10, 345.0)
    g = curve.min_coupling
    flat = abs(g[masses < 1e-6].max() / g[0] - 1) < 1e-3
    cutoff = CODATA.hbar * CODATA.c / (src.center_distance(MICRO.radius) * CODATA.e_charge)
    heavy = masses > 10 * cutoff
    # ln g must grow at least linearly in mass past the cutoff
    slope = np.diff(np.log(g[heavy])) / np.diff(masses[heavy])
    expo = heavy.sum() >= 3 and bool(np.all(slope > 0.5 / cutoff))
    twice = exclusion_curve(masses[:5], replace(src, spin_count=2 * src.spin_count), MICRO,
                            1e-10, 345.0).min_coupling
    floor = exclusion_curve(masses[:5], src, MICRO, 3e-10, 345.0).min_coupling
    scal = np.allclose(twice, g[:5] / 2, rtol=1e-12) and np.allclose(floor, 3 * g[:5], rtol=1e-12)
    ok = sym and decay and flat and expo and scal
    assert record(9, "pseudoscalar coupling properties", ok,
                  f"symmetry={sym}, Yukawa decay over 3 decades={decay}, flat={flat}, "
                  f"exponential past {cutoff:.3g} eV={expo}, 1/spins and floor scaling={scal}")


# ------------------------------------------------------------------ 10

def _fixed_step_error(h, s, m, exact, T):
    tr = integrate(s, m, REF_D, IntegratorConfig(rel_tol=0.9, abs_tol=0.9, max_step=h,
                                                 sample_interval=T, renormalize_n=False), T)
    return np.linalg.norm(np.r_[tr.n[-1] - exact.n[-1], tr.j[-1] - exact.j[-1]])


def test_criterion_10_integrator_gates():
    nut = 2 * math.pi / W_I
    T = 1000 * nut
    B = REF_D.B_star / 100
    raw = integrate(free_state(), ModelKind.free((0, 0, B)), REF_D,
                    IntegratorConfig(renormalize_n=False, sample_interval=nut / 4), T)
    norm = np.max(np.abs(np.linalg.norm(raw.n, axis=1) - 1))
    jz = np.max(np.abs(raw.j[:, 2] - raw.j[0, 2]))
    e = []
    for b in (REF_D.B_star / 100, REF_D.B_star, 100 * REF_D.B_star):
        tr = integrate(free_state(), ModelKind.free((0, 0, b)), REF_D,
                       IntegratorConfig(sample_interval=nut / 4), T)
        e.append(energy_drift(tr))
    # convergence: fixed steps give the method order, tolerance halving the step growth
    s, m = free_state((1, 0, 0), (0, 0.1, 0.2)), ModelKind.free((0, 0, REF_D.B_star))
    exact = integrate(s, m, REF_D, IntegratorConfig(rel_tol=1e-14, abs_tol=1e-16,
                                                    sample_interval=20.0, renormalize_n=False), 20.0)
    e1, e2 = (_fixed_step_error(h, s, m, exact, 20.0) for h in (0.1, 0.05))
    order = math.log2(e1 / e2)
    steps = [integrate(s, m, REF_D, IntegratorConfig(rel_tol=t, abs_tol=t, sample_interval=20.0),
                       20.0).n_accepted for t in (1e-8, 5e-9)]
    growth = steps[1] / steps[0]
    ok = (norm < 1e-9 and jz < 1e-8 and max(e) < 1e-6 and 4.5 < order < 5.5
          and abs(growth / 2 ** 0.2 - 1) < 0.05)
    assert record(10, "integrator quality", ok,
                  f"|n| drift {norm:.2e} (B*/100, no projection), j_z drift {jz:.2e}, energy "
                  f"drift {max(e):.2e} worst of B*/100, B*, 100 B*; fixed-step order {order:.2f}; "
                  f"step growth per tolerance halving {growth:.3f} vs 2^(1/5)")


# ------------------------------------------------------------------ 11

def test_criterion_11_determinism(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "levitated", "radius_m": 1e-6, "tilt_deg": 1.0,
                               "B_ext_T": [0, 0, 1e-8], "duration_s": 0.05,
                               "sample_interval_s": 1e-4}))
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        subprocess.run([sys.executable, "-m", "fgsim.cli", "simulate", "--config", str(cfg),
                        "--out", str(out)], check=True, capture_output=True)
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    assert record(11, "byte-identical CLI output", ok,
                  f"two runs, {len(outs[0])} bytes each, identical={outs[0] == outs[1]}")

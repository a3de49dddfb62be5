import numpy as np
import pytest
from scipy.constants import pi

from levisense import dynamics as dyn
from levisense import presets, sensing
from levisense.errors import InvalidConfigurationError

from conftest import make_signal


def test_min_detectable_force_scalings(particle):
    env = presets.default_environment(10.0, "kinetic")
    f1 = sensing.min_detectable_force(env, particle, tau=1.0)
    f4 = sensing.min_detectable_force(env, particle, tau=4.0)
    assert f4 == pytest.approx(f1 / 2, rel=1e-12)
    # kinetic damping at 0.1 mbar: ~5.15 zN*1000 = 5.15 aN in one second
    assert f1 == pytest.approx(5.15e-18, rel=0.01)
    # measurement-anchored damping reproduces the 18.5 aN/sqrt(Hz) floor
    env_ref = presets.default_environment(10.0, "reference")
    assert sensing.min_detectable_force(env_ref, particle, tau=1.0) == pytest.approx(
        18.5e-18, rel=1e-6
    )


def test_kappa_empirical_anchor_value():
    # 145 aN at 493 nW of signal power
    assert presets.KAPPA_EMPIRICAL == pytest.approx(2.0651e-13, rel=1e-4)


def test_model_kappa_against_empirical(tweezer, particle):
    """Model residual: the quarter-prefactor potential at the default offset
    transduces ~0.18x the measured anchor (documented, order-of-magnitude)."""
    kappa_model = sensing.transduction_kappa(tweezer, make_signal(), particle)
    ratio = kappa_model / presets.KAPPA_EMPIRICAL
    assert 0.1 < ratio < 0.3
    assert ratio == pytest.approx(0.176, rel=0.02)


def test_kappa_counter_exceeds_co_everywhere(tweezer, particle):
    for frac in (0.01, 0.04, 0.1, 0.3, 0.6, 0.99):
        co = sensing.transduction_kappa(tweezer, make_signal(direction="co",
                                                             offset_zr=frac), particle)
        ct = sensing.transduction_kappa(tweezer, make_signal(direction="counter",
                                                             offset_zr=frac), particle)
        assert ct > co
        if frac <= 0.2:  # the >= 50x margin is claimed within a fifth of z_r
            assert ct / co >= 50.0


def test_kappa_counter_enhancement_at_defaults(tweezer, particle):
    co = sensing.transduction_kappa(tweezer, make_signal(direction="co"), particle)
    ct = sensing.transduction_kappa(tweezer, make_signal(direction="counter"), particle)
    assert ct / co == pytest.approx(524.3, rel=0.01)


def test_light_power_sensitivity_chain(particle):
    env = presets.default_environment(10.0, "reference")
    p_min = sensing.light_power_sensitivity(env, particle, presets.KAPPA_EMPIRICAL, 1.0)
    # (18.5 aN / 145 aN)^2 * 493 nW = 8.0 nW per Hz
    assert p_min == pytest.approx((18.5 / 145) ** 2 * 493e-9, rel=1e-6)
    assert p_min == pytest.approx(8.0e-9, rel=0.02)


def test_sensitivity_linear_in_pressure_and_tau(particle):
    kappa = presets.KAPPA_EMPIRICAL
    env = presets.default_environment(10.0, "kinetic")
    base = sensing.light_power_sensitivity(env, particle, kappa, 1.0)
    for c in (0.1, 3.0, 250.0):
        scaled = sensing.light_power_sensitivity(env.with_pressure(10.0 * c),
                                                 particle, kappa, 1.0)
        assert scaled == pytest.approx(c * base, rel=1e-9)
    for tau in (0.25, 2.0, 100.0):
        assert sensing.light_power_sensitivity(env, particle, kappa, tau) == pytest.approx(
            base / tau, rel=1e-12
        )


def test_projection_curve_square_root_law(tweezer, particle):
    env = presets.default_environment(presets.REF_PRESSURE_PROJECTION, "kinetic")
    grid = np.geomspace(1e-21, 1e-13, 33)
    sig = make_signal(direction="counter")
    p, f_si, f_min = sensing.projection_curve(tweezer, sig, particle, env, grid, 1.0)
    slopes = np.diff(np.log(f_si)) / np.diff(np.log(p))
    assert np.allclose(slopes, 0.5, atol=1e-12)
    # quadrupling the power doubles the force
    _, f4, _ = sensing.projection_curve(tweezer, sig, particle, env, 4 * grid, 1.0)
    assert np.allclose(f4, 2 * f_si, rtol=1e-12)
    assert f_min > 0
    # co curve sits below the counter curve by the kappa ratio, uniformly
    _, f_co, _ = sensing.projection_curve(tweezer, make_signal(direction="co"),
                                          particle, env, grid, 1.0)
    ratio = f_si / f_co
    assert np.allclose(ratio, ratio[0], rtol=1e-12)
    with pytest.raises(InvalidConfigurationError):
        sensing.projection_curve(tweezer, sig, particle, env, grid[::-1], 1.0)


def test_report_internal_consistency(particle):
    env = presets.default_environment(10.0, "reference")
    rep = sensing.sensitivity_report(env, particle, presets.KAPPA_EMPIRICAL, 1.0, "co")
    assert rep.p_min == (rep.f_min / rep.kappa) ** 2  # bit-exact by construction
    assert rep.pressure == 10.0 and rep.tau == 1.0
    with pytest.raises(InvalidConfigurationError):
        sensing.sensitivity_report(env, particle, -1.0, 1.0, "co")


def test_photon_flux():
    # 3.8 zW at 1064 nm: about 0.02 photons per second
    assert sensing.photon_flux(3.8e-21, 1064e-9) == pytest.approx(0.0204, rel=0.01)


def test_projection_threshold_crossings(particle):
    result = presets.run_fig5()
    m = result.metrics
    # co-propagating crossing reproduces the 608 aW/Hz projection
    assert m["crossing_power_co_w"] == pytest.approx(608e-18, rel=0.05)
    # counter-propagating crossing lands within x3 of the 3.8 zW projection
    assert m["crossing_power_counter_w"] <= 10e-21
    ratio = m["reference_crossing_counter_w"] / m["crossing_power_counter_w"]
    assert 1 / 3 <= ratio <= 3
    # photon-flux annotation at the 3.8 zW reference point
    assert sensing.photon_flux(m["reference_crossing_counter_w"], 1064e-9) == pytest.approx(
        0.02, rel=0.05
    )


def test_scaled_low_pressure_prediction_vs_measured():
    s = presets.sensitivity_summary()
    m = s.metrics
    assert m["p_min_low_pressure_scaled_w"] == pytest.approx(54.6e-12, rel=0.01)
    # consistent with the measured 37.2 pW/Hz once both pressure-gauge
    # readings carry their stated 30% accuracy
    bound = (1 + m["gauge_accuracy"]) / (1 - m["gauge_accuracy"])
    assert 1 / bound <= m["scaled_to_measured_ratio"] <= bound


def test_fig5_threshold_uses_kinetic_floor(particle):
    env = presets.default_environment(presets.REF_PRESSURE_PROJECTION, "kinetic")
    f_min = sensing.min_detectable_force(env, particle, 1.0)
    assert f_min == pytest.approx(5.15e-21, rel=0.01)
    m = presets.run_fig5().metrics
    assert m["f_min_n"] == pytest.approx(f_min, rel=1e-12)

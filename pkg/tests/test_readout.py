import numpy as np
import pytest
from scipy.constants import Boltzmann, pi
from scipy.signal import welch

from levisense import dynamics as dyn
from levisense import presets, readout
from levisense.errors import CalibrationFailedError, InvalidConfigurationError

FS = 400e3
SEG = presets.SEGMENT_SAMPLES  # 13200 samples = 33 ms at 400 kHz
RB = FS / SEG


def _trace(samples, fs=FS):
    return dyn.TraceRecord(sample_rate=fs, samples=np.asarray(samples, float),
                           seed=0, config_digest="test")


def test_detect_identity_and_gain():
    rng = np.random.default_rng(0)
    z = 1e-9 * rng.standard_normal(4096)
    tr = _trace(z)
    out = readout.detect(tr, readout.ReadoutConfig(gain=1.0, sample_rate=FS), rng)
    assert np.array_equal(out.samples, z)
    g = readout.detect(tr, readout.ReadoutConfig(gain=250.0, sample_rate=FS), rng)
    assert np.allclose(g.samples, 250.0 * z)


def test_detect_noise_floor_psd():
    tr = _trace(np.zeros(SEG * 20))
    cfg = readout.ReadoutConfig(gain=1.0, noise_floor_psd=2.5e-10, sample_rate=FS)
    out = readout.detect(tr, cfg, np.random.default_rng(1))
    est = readout.psd_average(out, SEG)
    assert np.mean(est.psd) == pytest.approx(cfg.noise_floor_psd, rel=0.02)
    # doubling gain quadruples the signal-band PSD
    z = 2e-9 * np.sin(2 * pi * 86e3 * np.arange(SEG * 4) / FS)
    one = readout.detect(_trace(z), readout.ReadoutConfig(gain=1e6, sample_rate=FS),
                         np.random.default_rng(2))
    two = readout.detect(_trace(z), readout.ReadoutConfig(gain=2e6, sample_rate=FS),
                         np.random.default_rng(2))
    p1 = readout.psd_average(one, SEG)
    p2 = readout.psd_average(two, SEG)
    k = int(round(86e3 / p1.resolution_bw))
    assert p2.psd[k] == pytest.approx(4 * p1.psd[k], rel=1e-12)


def test_detect_sample_rate_mismatch():
    tr = _trace(np.zeros(100))
    with pytest.raises(InvalidConfigurationError):
        readout.detect(tr, readout.ReadoutConfig(gain=1.0, sample_rate=FS / 2),
                       np.random.default_rng(0))


def test_psd_parseval_rectangular():
    rng = np.random.default_rng(3)
    t = np.arange(SEG * 4) / FS
    x = 2e-9 * np.sin(2 * pi * 86e3 * t + 0.3) + 1e-9 * rng.standard_normal(t.size)
    est = readout.psd_average(_trace(x), SEG)
    mean_square = np.mean(x**2)
    assert np.sum(est.psd) * est.resolution_bw == pytest.approx(mean_square, rel=1e-9)
    assert est.resolution_bw == pytest.approx(30.303, abs=0.01)
    assert est.n_segments == 4


def test_psd_matches_scipy_welch_oracle():
    rng = np.random.default_rng(4)
    x = rng.standard_normal(SEG * 6)
    est = readout.psd_average(_trace(x), SEG)
    f_ref, p_ref = welch(x, fs=FS, window="boxcar", nperseg=SEG, noverlap=0,
                         detrend=False)
    assert np.allclose(est.freq_bins, f_ref)
    assert np.allclose(est.psd, p_ref, rtol=1e-12)


@pytest.mark.parametrize("window", ["rectangular", "hann"])
def test_tone_band_power_exact(window):
    t = np.arange(SEG * 4) / FS
    amp = 2e-9
    x = amp * np.sin(2 * pi * 86e3 * t + 0.3)  # 86 kHz is bin-centered
    est = readout.psd_average(_trace(x), SEG, window=window)
    peak = readout.extract_peak(est, 86e3, 4 * est.resolution_bw)
    assert peak.band_power == pytest.approx(amp**2 / 2, rel=1e-9)


def test_white_noise_flat_and_scatter_shrinks():
    rng = np.random.default_rng(5)
    sigma2 = 2.5e-18
    x = np.sqrt(sigma2) * rng.standard_normal(SEG * 64)
    scatters = {}
    for n in (4, 16, 64):
        est = readout.psd_average(_trace(x), SEG, n_segments=n)
        level = sigma2 / (FS / 2)  # variance spread over the Nyquist band
        assert np.mean(est.psd[1:-1]) == pytest.approx(level, rel=5 / np.sqrt(n * SEG))
        scatters[n] = np.std(est.psd[1:-1]) / np.mean(est.psd[1:-1])
    # chi^2 scatter ~ 1/sqrt(n_segments)
    assert scatters[16] == pytest.approx(scatters[4] / 2, rel=0.2)
    assert scatters[64] == pytest.approx(scatters[16] / 2, rel=0.2)


def test_psd_insufficient_samples_error():
    with pytest.raises(InvalidConfigurationError) as err:
        readout.psd_average(_trace(np.zeros(SEG * 2)), SEG, n_segments=3)
    assert str(SEG * 3) in str(err.value)


def test_extract_peak_no_tone_consistent_with_zero():
    rng = np.random.default_rng(6)
    sigma2 = 1e-18
    x = np.sqrt(sigma2) * rng.standard_normal(SEG * 35)
    est = readout.psd_average(_trace(x), SEG)
    peak = readout.extract_peak(est, 86e3, 3 * RB)
    level = sigma2 / (FS / 2)
    n_band = 7
    sigma_bp = level * RB * np.sqrt(n_band / est.n_segments)
    assert peak.band_power < 3 * sigma_bp
    assert peak.snr >= 0


def test_extract_peak_band_range_errors():
    est = readout.psd_average(_trace(np.zeros(SEG)), SEG)
    with pytest.raises(InvalidConfigurationError):
        readout.extract_peak(est, 199.99e3, 3 * RB)  # upper edge out of range
    with pytest.raises(InvalidConfigurationError):
        readout.extract_peak(est, 86e3, 0.2 * RB)  # band narrower than one bin


def _thermal_run(particle, omega_z, env, seed, n_segments, gain=3.3e6, noise=1e-12):
    sim = dyn.SimConfig(dt=presets.DEFAULT_DT, duration=n_segments * SEG / FS,
                        rng_seed=seed, decimate=presets.DEFAULT_DECIMATE)
    tr = dyn.simulate(particle, env, omega_z, sim)
    cfg = readout.ReadoutConfig(gain=gain, noise_floor_psd=noise, sample_rate=FS)
    volt = readout.detect(tr, cfg, np.random.default_rng(seed + 1000))
    return volt


def test_calibration_round_trip_three_gain_decades(particle, omega_z, env_moderate):
    gamma = dyn.gas_damping_rate(env_moderate, particle)
    sim = dyn.SimConfig(dt=presets.DEFAULT_DT, duration=560 * SEG / FS,
                        rng_seed=31, decimate=presets.DEFAULT_DECIMATE)
    tr = dyn.simulate(particle, env_moderate, omega_z, sim)
    for gain in (1e4, 3.3e5, 1e7):
        cfg = readout.ReadoutConfig(gain=gain, sample_rate=FS)
        volt = readout.detect(tr, cfg, np.random.default_rng(0))
        est = readout.psd_average(volt, SEG, window="hann")
        c_cal, psd_m = readout.calibrate_displacement(est, omega_z, gamma,
                                                      particle, env_moderate)
        assert c_cal == pytest.approx(gain, rel=0.03)
        # calibrated spectrum integrates back to the displacement variance scale
        target = Boltzmann * 300.0 / (particle.mass * omega_z**2)
        assert np.sum(psd_m.psd) * psd_m.resolution_bw == pytest.approx(target, rel=0.05)


def test_calibration_temperature_scaling(particle, omega_z):
    gain = 2.2e6
    cals, variances = [], []
    for temp, seed in ((300.0, 41), (600.0, 42)):
        env = dyn.Environment(pressure=10.0, temperature=temp)
        gamma = dyn.gas_damping_rate(env, particle)
        sim = dyn.SimConfig(dt=presets.DEFAULT_DT, duration=280 * SEG / FS,
                            rng_seed=seed, decimate=presets.DEFAULT_DECIMATE)
        tr = dyn.simulate(particle, env, omega_z, sim)
        volt = readout.detect(tr, readout.ReadoutConfig(gain=gain, sample_rate=FS),
                              np.random.default_rng(seed))
        est = readout.psd_average(volt, SEG, window="hann")
        c_cal, psd_m = readout.calibrate_displacement(est, omega_z, gamma, particle, env)
        cals.append(c_cal)
        variances.append(np.sum(psd_m.psd) * psd_m.resolution_bw)
    assert cals[1] == pytest.approx(cals[0], rel=0.05)      # gain is temperature-blind
    assert variances[1] / variances[0] == pytest.approx(2.0, rel=0.08)


def test_calibration_unresolvable_peak(particle, omega_z, env_moderate):
    gamma = dyn.gas_damping_rate(env_moderate, particle)
    rng = np.random.default_rng(8)
    flat = _trace(1e-6 * rng.standard_normal(SEG * 35))
    est = readout.psd_average(flat, SEG, window="hann")
    with pytest.raises(CalibrationFailedError):
        readout.calibrate_displacement(est, omega_z, gamma, particle, env_moderate)


def test_force_from_peak_limits(particle, omega_z, env_moderate):
    gamma = dyn.gas_damping_rate(env_moderate, particle)
    z_rms = 3.9e-9
    peak = readout.PeakReport(center_freq=83.8e3, band_power=z_rms**2,
                              local_background_psd=0.0, snr=10.0)
    on_res = readout.force_from_peak(peak, omega_z, omega_z, gamma, particle)
    assert on_res == pytest.approx(z_rms * particle.mass * gamma * omega_z, rel=1e-12)
    half = readout.PeakReport(center_freq=83.8e3, band_power=(z_rms / 2) ** 2,
                              local_background_psd=0.0, snr=10.0)
    assert readout.force_from_peak(half, omega_z, omega_z, gamma, particle) == pytest.approx(
        on_res / 2, rel=1e-12
    )


def test_pipeline_linearity_synthetic():
    """Tones of amplitude ~ sqrt(P) in white noise: band power slope 1 in P."""
    rng = np.random.default_rng(9)
    powers = np.geomspace(66e-9, 493e-9, 5)
    t = np.arange(SEG * 35) / FS
    noise_scale = 2e-11
    band = []
    for p in powers:
        amp = 1e-3 * np.sqrt(p)
        x = amp * np.sin(2 * pi * 86e3 * t) + noise_scale * rng.standard_normal(t.size)
        est = readout.psd_average(_trace(x), SEG)
        band.append(readout.extract_peak(est, 86e3, 3 * RB).band_power)
    slope = np.polyfit(np.log(powers), np.log(band), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.05)


def test_band_power_significance_grows_with_averaging():
    """Background-estimate scatter shrinks as 1/sqrt(n_segments)."""
    rng = np.random.default_rng(10)
    x = 1e-9 * rng.standard_normal(SEG * 64)
    sig = {}
    for n in (4, 16, 64):
        est = readout.psd_average(_trace(x), SEG, n_segments=n)
        sel = np.abs(est.freq_bins - 86e3) < 150 * RB
        sig[n] = np.std(est.psd[sel])
    assert sig[64] < sig[16] < sig[4]
    assert sig[64] == pytest.approx(sig[4] / 4, rel=0.35)

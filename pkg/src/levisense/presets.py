"""Reference operating points and the packaged demonstration scenarios.

The constants below anchor the presets to a reference measurement campaign
on a levitated 142-nm silica sphere in a 414-mW, 1064-nm tweezer (axial
frequency 83.8 kHz), probed by a weak co-propagating beam amplitude-
modulated at 86 kHz. Scenarios regenerate the campaign's four showcase
datasets at desk scale:

  fig2  thermal + driven power spectra at 0.1 mbar, displacement calibration
  fig3  driven band power versus signal power (linearity check)
  fig4  low-pressure detection of a 58.2-pW beam with feedback cooling
  fig5  co/counter sensitivity projection curves at high vacuum

Desk scaling: runs last seconds, and segment counts are chosen so estimator
error fits the documented tolerances; each preset notes its choices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import Boltzmann, pi

from . import dynamics, optics, readout, sensing
from .errors import InvalidConfigurationError

# --- reference campaign values the presets are anchored to -----------------
REF_WAVELENGTH = 1064e-9          # m
REF_NA = 0.8
REF_TWEEZER_POWER = 0.414         # W
REF_PARTICLE_DIAMETER = 142e-9    # m
REF_SILICA_DENSITY = 1850.0       # kg/m^3
REF_SILICA_PERMITTIVITY = 2.1
REF_TRAP_FREQ_HZ = 83.8e3         # measured axial frequency
REF_AM_FREQ_HZ = 86.0e3
REF_PRESSURE_MODERATE = 10.0      # Pa (0.1 mbar)
REF_PRESSURE_LOW = 6.8e-2         # Pa (6.8e-4 mbar)
REF_PRESSURE_PROJECTION = 1e-5    # Pa (1e-7 mbar)
REF_SIGNAL_POWER = 493e-9         # W
REF_SIGNAL_POWER_SWEEP_MIN = 66e-9
REF_SIGNAL_POWER_LOW = 58.2e-12   # W
REF_FORCE_NOISE_SQRT = 18.5e-18   # N/sqrt(Hz) measured at 0.1 mbar
REF_FORCE_RMS = 145e-18           # N at REF_SIGNAL_POWER
REF_DISPLACEMENT_RMS = 3.9e-9     # m at REF_SIGNAL_POWER
REF_SENSITIVITY_MODERATE = 8e-9   # W/Hz at 0.1 mbar
REF_SENSITIVITY_LOW = 37.2e-12    # W/Hz measured at 6.8e-4 mbar
REF_SENSITIVITY_PROJECTION_CO = 608e-18  # W/Hz projected at 1e-7 mbar
REF_POWER_MIN_COUNTER = 3.8e-21   # W projected, counter-propagating
REF_SNR_LOW = 2.6
REF_PRESSURE_GAUGE_ACCURACY = 0.30

#: measured force per sqrt of signal power (RMS), N/sqrt(W)
KAPPA_EMPIRICAL = REF_FORCE_RMS / np.sqrt(REF_SIGNAL_POWER)

#: default signal focus offset as a fraction of the Rayleigh range
DEFAULT_FOCUS_OFFSET_ZR = 0.04

# integrator grid: 6.4 MHz stepping, stored at 400 kHz; 33-ms segments give
# a 30.3-Hz resolution bandwidth with the 86-kHz drive exactly bin-centered
DEFAULT_DT = 1.5625e-7
DEFAULT_DECIMATE = 16
SEGMENT_SAMPLES = 13200


def default_particle() -> optics.ParticleParams:
    return optics.ParticleParams(
        radius=REF_PARTICLE_DIAMETER / 2.0,
        density=REF_SILICA_DENSITY,
        rel_permittivity=REF_SILICA_PERMITTIVITY,
    )


def default_waist() -> float:
    """Diffraction-limited focal waist 0.61 lambda / NA."""
    return 0.61 * REF_WAVELENGTH / REF_NA


def default_tweezer() -> optics.BeamParams:
    return optics.BeamParams(
        power=REF_TWEEZER_POWER, wavelength=REF_WAVELENGTH, waist_w0=default_waist()
    )


def default_signal(
    power: float,
    direction: str = "co",
    focus_offset_zr: float = DEFAULT_FOCUS_OFFSET_ZR,
    phase_phis: float = 0.0,
) -> optics.BeamParams:
    w0 = default_waist()
    z_r = pi * w0**2 / REF_WAVELENGTH
    return optics.BeamParams(
        power=power,
        wavelength=REF_WAVELENGTH,
        waist_w0=w0,
        focus_offset_zs=focus_offset_zr * z_r,
        phase_phis=phase_phis,
        direction=direction,
    )


def anchored_gamma_ref(particle: optics.ParticleParams, temperature: float = 300.0) -> float:
    """Damping rate at 0.1 mbar implied by the reference force noise floor.

    Inverts S_F = 4 k_B T m gamma at the measured 18.5 aN/sqrt(Hz). The
    kinetic free-molecular model gives ~13x less at the same pressure; the
    reference background at that pressure was evidently not purely
    gas-limited, so both damping anchors are kept available.
    """
    return float(
        REF_FORCE_NOISE_SQRT**2 / (4.0 * Boltzmann * temperature * particle.mass)
    )


def default_environment(pressure: float, anchor: str = "kinetic") -> dynamics.Environment:
    """Gas environment with either kinetic or measurement-anchored damping."""
    if anchor == "kinetic":
        return dynamics.Environment(pressure=pressure)
    if anchor == "reference":
        return dynamics.Environment(
            pressure=pressure,
            gamma_ref=anchored_gamma_ref(default_particle()),
            gamma_ref_pressure=REF_PRESSURE_MODERATE,
        )
    raise InvalidConfigurationError(f"unknown damping anchor '{anchor}'")


def am_fundamental_coefficient(modulation_depth: float) -> float:
    """Fourier coefficient of sqrt(1 + depth cos(u)) at the fundamental."""
    u = np.linspace(0.0, 2.0 * pi, 4097)[:-1]
    return float(2.0 * np.mean(np.sqrt(1.0 + modulation_depth * np.cos(u)) * np.cos(u)))


def drive_band_rms_factor(
    modulation_depth: float, phase_mode: str, cos_phase: float = 1.0
) -> float:
    """Fraction of kappa_peak sqrt(P_mean) appearing as RMS force at the AM line.

    The modulation waveform concentrates c1(depth) of the field envelope at
    the AM frequency; phase sweeping/randomization halves the power there
    (time-averaged cos^2 = 1/2), a fixed phase keeps cos^2 of its value.
    """
    c1 = am_fundamental_coefficient(modulation_depth)
    if phase_mode == "fixed":
        return c1 * abs(cos_phase) / np.sqrt(2.0)
    return c1 / 2.0


def anchored_kappa_peak(modulation_depth: float, phase_mode: str = "swept") -> float:
    """Peak transduction factor that reproduces the measured band-RMS force.

    Chosen so a swept/randomized-phase drive at REF_SIGNAL_POWER produces a
    band-RMS force of exactly KAPPA_EMPIRICAL sqrt(P_mean).
    """
    return KAPPA_EMPIRICAL / drive_band_rms_factor(modulation_depth, "swept")


@dataclass
class ScenarioResult:
    """Tables, metrics and the resolved parameter set of one scenario run."""

    name: str
    tables: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)


def _child_seed(master: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence((int(master),) + tuple(int(k) for k in key))


def _run_driven_trace(
    particle,
    env,
    omega_z,
    drive,
    kappa_pk,
    geometric_phase,
    feedback,
    n_segments,
    seed_seq,
    cfg,
):
    """Simulate, detect and spectrally analyze one operating point.

    Returns (rect PSD of the detected voltage, hann PSD, displacement trace).
    """
    duration = n_segments * SEGMENT_SAMPLES * DEFAULT_DECIMATE * DEFAULT_DT
    seeds = seed_seq.spawn(2)
    sim = dynamics.SimConfig(
        dt=DEFAULT_DT,
        duration=duration,
        rng_seed=seeds[0].generate_state(1)[0],
        decimate=DEFAULT_DECIMATE,
    )
    trace = dynamics.simulate(
        particle,
        env,
        omega_z,
        sim,
        drive=drive,
        transduction_kappa=kappa_pk,
        geometric_phase=geometric_phase,
        feedback=feedback,
    )
    volt = readout.detect(trace, cfg, np.random.default_rng(seeds[1]))
    est_rect = readout.psd_average(volt, SEGMENT_SAMPLES, window="rectangular")
    est_hann = readout.psd_average(volt, SEGMENT_SAMPLES, window="hann")
    return est_rect, est_hann, trace


def _default_readout(sample_rate: float) -> readout.ReadoutConfig:
    return readout.ReadoutConfig(gain=1e7, noise_floor_psd=1e-9, sample_rate=sample_rate)


def run_fig2(seed: int = 1, n_segments: int = 140) -> ScenarioResult:
    """Thermal and driven spectra at 0.1 mbar; calibrated displacement metrics.

    Desk scaling: 140 averaged segments (reference used 35) tighten the
    calibration estimator to ~1.5%; the drive phase is swept by two
    resolution bandwidths, splitting the AM line into two clean sidebands
    whose summed power is phase-averaged exactly.
    """
    particle = default_particle()
    env = default_environment(REF_PRESSURE_MODERATE, "kinetic")
    omega_z = 2.0 * pi * REF_TRAP_FREQ_HZ
    gamma = dynamics.gas_damping_rate(env, particle)
    tweezer = default_tweezer()
    signal = default_signal(REF_SIGNAL_POWER)
    geometric_phase = optics.cross_term_phase(0.0, tweezer, signal)
    rb = 1.0 / (SEGMENT_SAMPLES * DEFAULT_DECIMATE * DEFAULT_DT)
    drive = dynamics.DriveConfig(
        am_frequency=2.0 * pi * REF_AM_FREQ_HZ,
        signal_power_mean=REF_SIGNAL_POWER,
        modulation_depth=1.0,
        phase_mode="swept",
        sweep_rate_hz=2.0 * rb,
    )
    kappa_pk = anchored_kappa_peak(1.0)
    sample_rate = 1.0 / (DEFAULT_DT * DEFAULT_DECIMATE)
    cfg = _default_readout(sample_rate)

    est_on, est_on_hann, _ = _run_driven_trace(
        particle, env, omega_z, drive, kappa_pk, geometric_phase,
        None, n_segments, _child_seed(seed, 0), cfg,
    )
    est_off, est_off_hann, _ = _run_driven_trace(
        particle, env, omega_z, None, 0.0, 0.0,
        None, n_segments, _child_seed(seed, 1), cfg,
    )

    c_cal, _ = readout.calibrate_displacement(est_off_hann, omega_z, gamma, particle, env)
    psd_on_m = est_on.scaled(1.0 / c_cal**2)
    psd_off_m = est_off.scaled(1.0 / c_cal**2)
    peak = readout.extract_peak(psd_on_m, REF_AM_FREQ_HZ, 3.0 * rb)
    z_si_rms = float(np.sqrt(peak.band_power))
    f_si_rms = readout.force_from_peak(
        peak, 2.0 * pi * REF_AM_FREQ_HZ, omega_z, gamma, particle
    )
    thermal_peak = readout.extract_peak(psd_off_m, REF_TRAP_FREQ_HZ, 8.0 * gamma / (2.0 * pi))

    return ScenarioResult(
        name="fig2",
        tables={
            "psd": {
                "frequency_hz": psd_on_m.freq_bins,
                "psd_beam_on_m2_per_hz": psd_on_m.psd,
                "psd_beam_off_m2_per_hz": psd_off_m.psd,
            }
        },
        metrics={
            "seed": seed,
            "n_segments": n_segments,
            "resolution_bw_hz": rb,
            "gamma_s^-1": gamma,
            "calibration_v_per_m": c_cal,
            "readout_gain_v_per_m": cfg.gain,
            "z_si_rms_m": z_si_rms,
            "f_si_rms_n": f_si_rms,
            "reference_z_si_rms_m": REF_DISPLACEMENT_RMS,
            "reference_f_si_rms_n": REF_FORCE_RMS,
            "drive_snr": peak.snr,
            "thermal_peak_snr": thermal_peak.snr,
        },
    )


def run_fig3(
    seed: int = 7,
    n_segments: int = 560,
    powers_w: np.ndarray | None = None,
) -> ScenarioResult:
    """Driven band power versus signal power over the reference sweep range.

    Each power owns an RNG derived from (master seed, point index), so a
    parallel evaluation of the grid would reproduce the serial outputs.
    Desk scaling: 560 segments per point keep the weakest point's band-power
    error near 5%, giving a slope uncertainty well inside +-0.05.
    """
    if powers_w is None:
        powers_w = np.geomspace(REF_SIGNAL_POWER_SWEEP_MIN, REF_SIGNAL_POWER, 5)
    powers_w = np.asarray(powers_w, dtype=float)
    particle = default_particle()
    env = default_environment(REF_PRESSURE_MODERATE, "kinetic")
    omega_z = 2.0 * pi * REF_TRAP_FREQ_HZ
    gamma = dynamics.gas_damping_rate(env, particle)
    tweezer = default_tweezer()
    rb = 1.0 / (SEGMENT_SAMPLES * DEFAULT_DECIMATE * DEFAULT_DT)
    kappa_pk = anchored_kappa_peak(1.0)
    sample_rate = 1.0 / (DEFAULT_DT * DEFAULT_DECIMATE)
    cfg = _default_readout(sample_rate)

    band_powers = np.empty(powers_w.size)
    snrs = np.empty(powers_w.size)
    for i, p_s in enumerate(powers_w):
        signal = default_signal(p_s)
        geometric_phase = optics.cross_term_phase(0.0, tweezer, signal)
        drive = dynamics.DriveConfig(
            am_frequency=2.0 * pi * REF_AM_FREQ_HZ,
            signal_power_mean=float(p_s),
            modulation_depth=1.0,
            phase_mode="swept",
            sweep_rate_hz=2.0 * rb,
        )
        est_rect, est_hann, _ = _run_driven_trace(
            particle, env, omega_z, drive, kappa_pk, geometric_phase,
            None, n_segments, _child_seed(seed, i), cfg,
        )
        peak = readout.extract_peak(est_rect, REF_AM_FREQ_HZ, 3.0 * rb)
        band_powers[i] = peak.band_power
        snrs[i] = peak.snr

    log_p = np.log(powers_w)
    log_b = np.log(band_powers)
    slope, intercept = np.polyfit(log_p, log_b, 1)
    fitted = slope * log_p + intercept
    ss_res = float(np.sum((log_b - fitted) ** 2))
    ss_tot = float(np.sum((log_b - log_b.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot

    return ScenarioResult(
        name="fig3",
        tables={
            "power_sweep": {
                "signal_power_w": powers_w,
                "band_power_v2": band_powers,
                "snr": snrs,
            }
        },
        metrics={
            "seed": seed,
            "n_segments": n_segments,
            "gamma_s^-1": gamma,
            "loglog_slope": float(slope),
            "r_squared": r_squared,
        },
    )


def run_fig4(seed: int = 3, n_segments: int = 105) -> ScenarioResult:
    """Detection of a 58.2-pW beam at 6.8e-4 mbar with feedback cooling on.

    The drive phase is held at the interference maximum (the swept average
    would halve the line) and a modest cold-damping gain stabilizes the
    motion as in the reference protocol. Background damping is the kinetic
    model, so the quoted SNR reflects a purely gas-limited floor.
    """
    particle = default_particle()
    env = default_environment(REF_PRESSURE_LOW, "kinetic")
    omega_z = 2.0 * pi * REF_TRAP_FREQ_HZ
    gamma = dynamics.gas_damping_rate(env, particle)
    feedback = dynamics.FeedbackConfig(enabled=True, velocity_gain=2.0 * pi * 500.0)
    tweezer = default_tweezer()
    signal = default_signal(REF_SIGNAL_POWER_LOW)
    geometric_phase = optics.cross_term_phase(0.0, tweezer, signal)
    rb = 1.0 / (SEGMENT_SAMPLES * DEFAULT_DECIMATE * DEFAULT_DT)
    # fixed phase at the interference maximum: cancel the geometric offset
    drive = dynamics.DriveConfig(
        am_frequency=2.0 * pi * REF_AM_FREQ_HZ,
        signal_power_mean=REF_SIGNAL_POWER_LOW,
        modulation_depth=1.0,
        phase_mode="fixed",
        phase_phis=-geometric_phase,
    )
    kappa_pk = anchored_kappa_peak(1.0)
    sample_rate = 1.0 / (DEFAULT_DT * DEFAULT_DECIMATE)
    cfg = _default_readout(sample_rate)

    est_on, est_on_hann, _ = _run_driven_trace(
        particle, env, omega_z, drive, kappa_pk, geometric_phase,
        feedback, n_segments, _child_seed(seed, 0), cfg,
    )
    est_off, est_off_hann, _ = _run_driven_trace(
        particle, env, omega_z, None, 0.0, 0.0,
        feedback, n_segments, _child_seed(seed, 1), cfg,
    )
    gamma_eff = gamma + feedback.gain
    c_cal, _ = readout.calibrate_displacement(
        est_off_hann, omega_z, gamma, particle, env, feedback_gain=feedback.gain
    )
    psd_on_m = est_on.scaled(1.0 / c_cal**2)
    psd_off_m = est_off.scaled(1.0 / c_cal**2)
    peak = readout.extract_peak(psd_on_m, REF_AM_FREQ_HZ, 2.0 * rb)
    f_si_rms = readout.force_from_peak(
        peak, 2.0 * pi * REF_AM_FREQ_HZ, omega_z, gamma_eff, particle
    )
    return ScenarioResult(
        name="fig4",
        tables={
            "psd": {
                "frequency_hz": psd_on_m.freq_bins,
                "psd_beam_on_m2_per_hz": psd_on_m.psd,
                "psd_beam_off_m2_per_hz": psd_off_m.psd,
            }
        },
        metrics={
            "seed": seed,
            "n_segments": n_segments,
            "gamma_s^-1": gamma,
            "feedback_gain_s^-1": feedback.gain,
            "signal_power_w": REF_SIGNAL_POWER_LOW,
            "drive_snr": peak.snr,
            "reference_snr": REF_SNR_LOW,
            "f_si_rms_n": f_si_rms,
            "calibration_v_per_m": c_cal,
        },
    )


def run_fig5(tau: float = 1.0, n_points: int = 61) -> ScenarioResult:
    """Sensitivity projection: expected force versus signal power at 1e-7 mbar.

    The co-propagating curve uses the measured transduction anchor; the
    counter-propagating curve scales it by the model enhancement ratio at
    the default focus offset. The threshold is the kinetic thermal force
    floor for the given measurement time.
    """
    particle = default_particle()
    env = default_environment(REF_PRESSURE_PROJECTION, "kinetic")
    tweezer = default_tweezer()
    sig_co = default_signal(1.0, "co")
    sig_counter = default_signal(1.0, "counter")
    kappa_co_model = sensing.transduction_kappa(tweezer, sig_co, particle)
    kappa_counter_model = sensing.transduction_kappa(tweezer, sig_counter, particle)
    enhancement = kappa_counter_model / kappa_co_model
    kappa_co = KAPPA_EMPIRICAL
    kappa_counter = KAPPA_EMPIRICAL * enhancement

    power_grid = np.geomspace(1e-22, 1e-12, n_points)
    _, f_co, f_min = sensing.projection_curve(
        tweezer, sig_co, particle, env, power_grid, tau, kappa=kappa_co
    )
    _, f_counter, _ = sensing.projection_curve(
        tweezer, sig_counter, particle, env, power_grid, tau, kappa=kappa_counter
    )
    p_cross_co = sensing.threshold_crossing_power(kappa_co, f_min)
    p_cross_counter = sensing.threshold_crossing_power(kappa_counter, f_min)

    return ScenarioResult(
        name="fig5",
        tables={
            "projection": {
                "signal_power_w": power_grid,
                "force_co_n": f_co,
                "force_counter_n": f_counter,
                "force_min_n": np.full(power_grid.size, f_min),
                "counter_co_ratio": np.full(power_grid.size, enhancement),
            }
        },
        metrics={
            "tau_s": tau,
            "pressure_pa": env.pressure,
            "f_min_n": f_min,
            "kappa_co_n_per_sqrt_w": kappa_co,
            "kappa_counter_n_per_sqrt_w": kappa_counter,
            "kappa_co_model_n_per_sqrt_w": kappa_co_model,
            "kappa_counter_model_n_per_sqrt_w": kappa_counter_model,
            "counter_co_ratio": enhancement,
            "crossing_power_co_w": p_cross_co,
            "crossing_power_counter_w": p_cross_counter,
            "reference_crossing_co_w": REF_SENSITIVITY_PROJECTION_CO,
            "reference_crossing_counter_w": REF_POWER_MIN_COUNTER,
            "photon_flux_at_counter_crossing_per_s": sensing.photon_flux(
                p_cross_counter, REF_WAVELENGTH
            ),
        },
    )


def run_custom(cfg: dict) -> ScenarioResult:
    """Single simulate/detect/analyze pass over a resolved configuration.

    Emits the (decimated) trace and its PSD; attempts displacement
    calibration and, when the drive is enabled, extracts the AM peak.
    """
    from . import config as config_mod

    particle = optics.ParticleParams(
        radius=cfg["particle"]["diameter_m"] / 2.0,
        density=cfg["particle"]["density_kg_per_m3"],
        rel_permittivity=cfg["particle"]["rel_permittivity"],
    )
    waist = cfg["tweezer"]["waist_m"] or (
        0.61 * cfg["tweezer"]["wavelength_m"] / cfg["tweezer"]["numerical_aperture"]
    )
    tweezer = optics.BeamParams(
        power=cfg["tweezer"]["power_w"],
        wavelength=cfg["tweezer"]["wavelength_m"],
        waist_w0=waist,
    )
    z_r = tweezer.rayleigh_range
    signal = optics.BeamParams(
        power=cfg["signal"]["power_w"],
        wavelength=cfg["tweezer"]["wavelength_m"],
        waist_w0=waist,
        focus_offset_zs=cfg["signal"]["focus_offset_zr"] * z_r,
        phase_phis=cfg["signal"]["phase_rad"],
        direction=cfg["signal"]["direction"],
    )
    env_kwargs = dict(
        pressure=cfg["environment"]["pressure"],
        temperature=cfg["environment"]["temperature_k"],
        gas_molar_mass=cfg["environment"]["gas_molar_mass_kg_per_mol"],
        gas_viscosity_ref=cfg["environment"]["gas_viscosity_pa_s"],
    )
    if cfg["environment"]["damping_anchor"] == "reference":
        env_kwargs["gamma_ref"] = anchored_gamma_ref(
            particle, cfg["environment"]["temperature_k"]
        )
        env_kwargs["gamma_ref_pressure"] = REF_PRESSURE_MODERATE
    env = dynamics.Environment(**env_kwargs)
    gamma = dynamics.gas_damping_rate(env, particle)

    if cfg["trap"]["frequency_mode"] == "calibrated":
        omega_z = 2.0 * pi * cfg["trap"]["frequency_hz"]
    else:
        omega_z, _ = optics.trap_stiffness(tweezer, particle)

    drive = None
    kappa_pk = 0.0
    geometric_phase = optics.cross_term_phase(0.0, tweezer, signal)
    if cfg["drive"]["enabled"] and cfg["signal"]["power_w"] > 0:
        drive = dynamics.DriveConfig(
            am_frequency=2.0 * pi * cfg["drive"]["am_frequency_hz"],
            signal_power_mean=cfg["signal"]["power_w"],
            modulation_depth=cfg["drive"]["modulation_depth"],
            phase_mode=cfg["drive"]["phase_mode"],
            phase_phis=cfg["drive"]["phase_rad"],
            phase_correlation_time=cfg["drive"]["correlation_time_s"],
            phase_sigma=cfg["drive"]["phase_sigma_rad"],
            sweep_rate_hz=cfg["drive"]["sweep_rate_hz"],
        )
        if cfg["drive"]["kappa_anchor"] == "empirical":
            kappa_pk = anchored_kappa_peak(cfg["drive"]["modulation_depth"])
        else:
            kappa_pk, _ = optics.interference_force_phase_extrema(
                tweezer, optics.BeamParams(
                    power=1.0, wavelength=signal.wavelength, waist_w0=waist,
                    focus_offset_zs=signal.focus_offset_zs, direction=signal.direction,
                ), particle,
            )
    feedback = dynamics.FeedbackConfig(
        enabled=cfg["feedback"]["enabled"],
        velocity_gain=cfg["feedback"]["velocity_gain_per_s"],
    )
    digest = config_mod.config_digest(cfg)
    seed = cfg["scenario"]["seed"]
    seeds = _child_seed(seed, 0).spawn(2)
    sim = dynamics.SimConfig(
        dt=cfg["sim"]["dt_s"],
        duration=cfg["sim"]["duration_s"],
        rng_seed=seeds[0].generate_state(1)[0],
        decimate=cfg["sim"]["decimate"],
        store_velocity=cfg["sim"]["store_velocity"],
    )
    trace = dynamics.simulate(
        particle, env, omega_z, sim,
        drive=drive, transduction_kappa=kappa_pk, geometric_phase=geometric_phase,
        feedback=feedback, config_digest=digest,
    )
    cfg_ro = readout.ReadoutConfig(
        gain=cfg["readout"]["gain_v_per_m"],
        noise_floor_psd=cfg["readout"]["noise_floor_v2_per_hz"],
        sample_rate=trace.sample_rate,
    )
    volt = readout.detect(trace, cfg_ro, np.random.default_rng(seeds[1]))
    n_seg = cfg["analysis"]["n_segments"] or None
    est = readout.psd_average(
        volt, cfg["analysis"]["segment_samples"], window=cfg["analysis"]["window"],
        n_segments=n_seg,
    )
    metrics = {
        "seed": seed,
        "config_digest": digest,
        "gamma_s^-1": gamma,
        "omega_z_rad_per_s": omega_z,
        "kappa_peak_n_per_sqrt_w": kappa_pk,
        "resolution_bw_hz": est.resolution_bw,
        "n_segments": est.n_segments,
    }
    tables = {
        "trace": {
            "time_s": trace.times,
            "position_m": trace.samples,
            "voltage_v": volt.samples,
        },
        "psd": {"frequency_hz": est.freq_bins, "psd_v2_per_hz": est.psd},
    }
    try:
        est_hann = readout.psd_average(
            volt, cfg["analysis"]["segment_samples"], window="hann", n_segments=n_seg
        )
        c_cal, _ = readout.calibrate_displacement(
            est_hann, omega_z, gamma, particle, env,
            feedback_gain=feedback.gain,
        )
        metrics["calibration_v_per_m"] = c_cal
    except Exception as exc:  # calibration is best-effort here
        metrics["calibration_v_per_m"] = None
        metrics["calibration_note"] = str(exc)
    if drive is not None:
        rb = est.resolution_bw
        f_am = cfg["drive"]["am_frequency_hz"]
        half = 3.0 * rb
        if drive.phase_mode == "randomized":
            linewidth = drive.phase_sigma**2 / drive.phase_correlation_time / (2.0 * pi)
            half = max(half, 3.0 * linewidth)
        try:
            peak = readout.extract_peak(est, f_am, half)
            metrics["drive_band_power_v2"] = peak.band_power
            metrics["drive_snr"] = peak.snr
        except Exception as exc:
            metrics["drive_peak_note"] = str(exc)
    return ScenarioResult(name="custom", tables=tables, metrics=metrics, params=cfg)


def sensitivity_summary(tau: float = 1.0) -> ScenarioResult:
    """Sensitivity chain at the three reference pressures, both anchors.

    The empirical chain scales the measured floor (18.5 aN/sqrt(Hz) at
    0.1 mbar) linearly in pressure; the kinetic chain evaluates the gas
    model directly. Both are emitted side by side: the empirical chain
    reproduces the 8 nW/Hz figure and its 6.8e-4-mbar extrapolation, the
    kinetic chain the high-vacuum projections.
    """
    particle = default_particle()
    rows = {
        "pressure_pa": [],
        "damping_anchor": [],
        "geometry": [],
        "s_f_sqrt_n_per_sqrt_hz": [],
        "f_min_n": [],
        "kappa_n_per_sqrt_w": [],
        "p_min_w": [],
        "photon_flux_per_s": [],
    }
    tweezer = default_tweezer()
    sig_co = default_signal(1.0, "co")
    sig_counter = default_signal(1.0, "counter")
    enhancement = sensing.transduction_kappa(
        tweezer, sig_counter, particle
    ) / sensing.transduction_kappa(tweezer, sig_co, particle)

    for pressure in (REF_PRESSURE_MODERATE, REF_PRESSURE_LOW, REF_PRESSURE_PROJECTION):
        for anchor in ("reference", "kinetic"):
            env = default_environment(pressure, anchor)
            for geometry, kappa in (
                ("co", KAPPA_EMPIRICAL),
                ("counter", KAPPA_EMPIRICAL * enhancement),
            ):
                rep = sensing.sensitivity_report(env, particle, kappa, tau, geometry)
                rows["pressure_pa"].append(pressure)
                rows["damping_anchor"].append(anchor)
                rows["geometry"].append(geometry)
                rows["s_f_sqrt_n_per_sqrt_hz"].append(rep.s_f_sqrt)
                rows["f_min_n"].append(rep.f_min)
                rows["kappa_n_per_sqrt_w"].append(rep.kappa)
                rows["p_min_w"].append(rep.p_min)
                rows["photon_flux_per_s"].append(
                    sensing.photon_flux(rep.p_min, REF_WAVELENGTH)
                )

    env_ref_mod = default_environment(REF_PRESSURE_MODERATE, "reference")
    p_min_moderate = sensing.light_power_sensitivity(
        env_ref_mod, particle, KAPPA_EMPIRICAL, tau
    )
    p_min_low_scaled = p_min_moderate * (REF_PRESSURE_LOW / REF_PRESSURE_MODERATE)
    metrics = {
        "tau_s": tau,
        "p_min_moderate_w": p_min_moderate,
        "reference_p_min_moderate_w": REF_SENSITIVITY_MODERATE,
        "p_min_low_pressure_scaled_w": p_min_low_scaled,
        "reference_p_min_low_w": REF_SENSITIVITY_LOW,
        "scaled_to_measured_ratio": p_min_low_scaled / REF_SENSITIVITY_LOW,
        "gauge_accuracy": REF_PRESSURE_GAUGE_ACCURACY,
        "counter_co_ratio": enhancement,
    }
    return ScenarioResult(name="sensitivity", tables={"sensitivity": rows}, metrics=metrics)

"""Homodyne readout model and spectral-analysis pipeline.

The detector is modeled as a linear transducer (gain, V/m) plus additive
white noise. Spectral estimation averages one-sided periodograms of
consecutive non-overlapping segments; with the rectangular window the
estimate is Parseval-exact (sum of PSD times bin width equals the mean
square of the trace), which the tone-power and calibration contracts rely
on. Displacement calibration references the integrated thermal peak to the
equipartition variance k_B T / (m Omega_z^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import Boltzmann, pi

from .dynamics import Environment, TraceRecord
from .errors import CalibrationFailedError, InvalidConfigurationError
from .optics import ParticleParams

# Calibration integrates the thermal Lorentzian over +-4 linewidths, which
# carries (2/pi) arctan(8) ~ 92% of the total variance; the rest is restored
# by an analytic tail correction.
_CAL_BAND_LINEWIDTHS = 4.0
_FLANK_OFFSET_BINS = 10
_FLANK_WIDTH_BINS = 20


@dataclass(frozen=True)
class ReadoutConfig:
    """Linear detection: v = gain * z + white noise of the given PSD."""

    gain: float
    noise_floor_psd: float = 0.0
    sample_rate: float = 0.0

    def __post_init__(self):
        if self.gain <= 0:
            raise InvalidConfigurationError("readout gain must be > 0")
        if self.noise_floor_psd < 0:
            raise InvalidConfigurationError("noise_floor_psd must be >= 0")


@dataclass(frozen=True, eq=False)
class PsdEstimate:
    """Averaged one-sided power spectral density on a uniform frequency grid."""

    freq_bins: np.ndarray
    psd: np.ndarray
    n_segments: int
    resolution_bw: float
    window: str

    def __post_init__(self):
        if np.any(np.diff(self.freq_bins) <= 0):
            raise InvalidConfigurationError("frequency bins must increase monotonically")

    def scaled(self, factor: float) -> "PsdEstimate":
        return PsdEstimate(
            freq_bins=self.freq_bins,
            psd=self.psd * factor,
            n_segments=self.n_segments,
            resolution_bw=self.resolution_bw,
            window=self.window,
        )


@dataclass(frozen=True)
class PeakReport:
    """Background-subtracted band power around one spectral peak."""

    center_freq: float
    band_power: float
    local_background_psd: float
    snr: float


def detect(trace: TraceRecord, cfg: ReadoutConfig, rng) -> TraceRecord:
    """Convert a displacement trace to detector voltage, adding white noise.

    The noise has one-sided PSD cfg.noise_floor_psd (V^2/Hz), i.e. a
    per-sample standard deviation sqrt(noise_floor_psd * fs / 2).
    Deterministic for a given rng state.
    """
    if cfg.sample_rate and not np.isclose(cfg.sample_rate, trace.sample_rate, rtol=1e-12):
        raise InvalidConfigurationError(
            f"readout sample rate {cfg.sample_rate} Hz does not match the "
            f"trace rate {trace.sample_rate} Hz"
        )
    volts = cfg.gain * trace.samples
    if cfg.noise_floor_psd > 0:
        sigma = np.sqrt(cfg.noise_floor_psd * trace.sample_rate / 2.0)
        volts = volts + sigma * rng.standard_normal(volts.size)
    return TraceRecord(
        sample_rate=trace.sample_rate,
        samples=volts,
        seed=trace.seed,
        config_digest=trace.config_digest,
    )


def psd_average(
    trace: TraceRecord,
    segment_length: int,
    window: str = "rectangular",
    n_segments: int | None = None,
) -> PsdEstimate:
    """Average one-sided periodograms of consecutive segments.

    Density normalization: for the rectangular window,
    sum(psd) * resolution_bw equals the mean square of the analyzed samples
    to floating-point accuracy; a tone of amplitude A centered on a bin
    carries band power A^2 / 2. The hann window trades Parseval exactness
    for sidelobe suppression (display use).
    """
    if segment_length < 2:
        raise InvalidConfigurationError("segment_length must be >= 2 samples")
    available = len(trace.samples) // segment_length
    if n_segments is None:
        n_segments = available
    if n_segments < 1 or available < n_segments:
        raise InvalidConfigurationError(
            f"trace too short: {n_segments} segments of {segment_length} samples "
            f"need {n_segments * segment_length}, trace has {len(trace.samples)}"
        )
    fs = trace.sample_rate
    x = trace.samples[: n_segments * segment_length].reshape(n_segments, segment_length)
    if window == "rectangular":
        w = None
        norm = fs * segment_length
    elif window == "hann":
        # periodic variant: an integer-cycle tone occupies exactly 3 bins
        w = 0.5 - 0.5 * np.cos(2.0 * pi * np.arange(segment_length) / segment_length)
        norm = fs * np.sum(w**2)
        x = x * w
    else:
        raise InvalidConfigurationError(f"unknown window '{window}'")
    spec = np.fft.rfft(x, axis=1)
    psd = (spec.real**2 + spec.imag**2) / norm
    psd[:, 1:] *= 2.0
    if segment_length % 2 == 0:
        psd[:, -1] /= 2.0
    psd = psd.mean(axis=0)
    freqs = np.fft.rfftfreq(segment_length, d=1.0 / fs)
    return PsdEstimate(
        freq_bins=freqs,
        psd=psd,
        n_segments=n_segments,
        resolution_bw=fs / segment_length,
        window=window,
    )


def _flank_background(
    psd: PsdEstimate,
    lo: int,
    hi: int,
    offset_bins: int = _FLANK_OFFSET_BINS,
    width_bins: int = _FLANK_WIDTH_BINS,
):
    """Local background under bins [lo, hi] from the two flanking bands.

    Each flank contributes its median; the background is interpolated
    linearly between the flank centers so a sloped shoulder (e.g. the wing
    of the thermal resonance) cancels to first order. Returns (per-bin
    background array over [lo, hi], background at the band center).
    """
    n = psd.psd.size
    left = np.arange(
        max(lo - offset_bins - width_bins, 0),
        max(lo - offset_bins, 0),
    )
    right = np.arange(
        min(hi + 1 + offset_bins, n),
        min(hi + 1 + offset_bins + width_bins, n),
    )
    if left.size == 0 and right.size == 0:
        raise InvalidConfigurationError("no flanking bins available for background estimate")
    band = np.arange(lo, hi + 1)
    if left.size == 0 or right.size == 0:
        flank = left if right.size == 0 else right
        level = float(np.median(psd.psd[flank]))
        return np.full(band.size, level), level
    med_l = float(np.median(psd.psd[left]))
    med_r = float(np.median(psd.psd[right]))
    x_l = float(np.mean(left))
    x_r = float(np.mean(right))
    if med_l > 0 and med_r > 0:
        # Interpolate in 1/sqrt(S): linear there both for a flat floor and for
        # the 1/(Omega_z^2 - Omega^2)^2 wing of a distant resonance, so the
        # convex shoulder under a detuned tone is not overestimated.
        inv_l, inv_r = med_l**-0.5, med_r**-0.5
        slope = (inv_r - inv_l) / (x_r - x_l)
        bg = (inv_l + slope * (band - x_l)) ** -2.0
        center = float((inv_l + slope * (0.5 * (lo + hi) - x_l)) ** -2.0)
    else:
        slope = (med_r - med_l) / (x_r - x_l)
        bg = med_l + slope * (band - x_l)
        center = float(med_l + slope * (0.5 * (lo + hi) - x_l))
    return bg, center


def extract_peak(psd: PsdEstimate, center: float, half_band: float) -> PeakReport:
    """Background-subtracted power in a band around `center`.

    The local background is the median PSD of two flanking bands offset by
    10 resolution bandwidths from the integration band (20 bins each),
    robust against nearby broad features. snr is the highest in-band PSD
    bin over the background. band_power is clipped at zero.
    """
    rb = psd.resolution_bw
    if half_band < rb:
        raise InvalidConfigurationError("half_band must be at least one resolution bandwidth")
    f = psd.freq_bins
    if center - half_band < f[0] or center + half_band > f[-1]:
        raise InvalidConfigurationError(
            f"band {center - half_band:.6g}..{center + half_band:.6g} Hz falls outside "
            f"the PSD range {f[0]:.6g}..{f[-1]:.6g} Hz"
        )
    in_band = np.flatnonzero(np.abs(f - center) <= half_band)
    lo, hi = int(in_band[0]), int(in_band[-1])
    bg_bins, bg_center = _flank_background(psd, lo, hi)
    band_power = float(np.sum(psd.psd[lo : hi + 1] - bg_bins) * rb)
    snr = float(np.max(psd.psd[lo : hi + 1]) / bg_center) if bg_center > 0 else np.inf
    return PeakReport(
        center_freq=float(center),
        band_power=max(band_power, 0.0),
        local_background_psd=bg_center,
        snr=max(snr, 0.0),
    )


def calibrate_displacement(
    psd: PsdEstimate,
    omega_z: float,
    gamma: float,
    particle: ParticleParams,
    env: Environment,
    feedback_gain: float = 0.0,
) -> tuple[float, PsdEstimate]:
    """Equipartition calibration of the detector against the thermal peak.

    Integrates the background-subtracted thermal Lorentzian over +-4
    effective linewidths around the resonance, corrects for the excluded
    Lorentzian tails, and equates the result to the thermal variance
    k_B T / (m Omega_z^2), reduced by gamma/(gamma + g_fb) when cold
    damping is active. gamma is the gas damping rate; pass the feedback
    gain separately. Sharp lines (a few bins wide) are best estimated with
    a hann PSD: rectangular-window leakage skims roughly 2/(pi^2 n_bins)
    of a narrow line out of the band.

    Returns
    -------
    (c_cal, psd_m) : calibration factor in V/m and the PSD rescaled to m^2/Hz.

    Raises
    ------
    CalibrationFailedError
        If the thermal peak does not stand at least 5x above the local
        background.
    """
    gamma_eff = gamma + feedback_gain
    f_z = omega_z / (2.0 * pi)
    rb = psd.resolution_bw
    half_band = max(_CAL_BAND_LINEWIDTHS * gamma_eff / (2.0 * pi), 3.0 * rb)
    f = psd.freq_bins
    if f_z - half_band < f[0] or f_z + half_band > f[-1]:
        raise CalibrationFailedError(
            f"thermal band around {f_z:.6g} Hz falls outside the PSD range"
        )
    in_band = np.flatnonzero(np.abs(f - f_z) <= half_band)
    lo, hi = int(in_band[0]), int(in_band[-1])
    # Flanks sit several band widths out so the Lorentzian tail they carry is
    # negligible against the in-band power they are subtracted from.
    n_band = hi - lo + 1
    bg_bins, bg_center = _flank_background(
        psd, lo, hi, offset_bins=max(_FLANK_OFFSET_BINS, 3 * n_band)
    )
    peak = float(np.max(psd.psd[lo : hi + 1]))
    if bg_center > 0 and peak / bg_center < 5.0:
        raise CalibrationFailedError(
            f"thermal peak only {peak / bg_center:.2f}x above background (need >= 5)"
        )
    band_variance = float(np.sum(psd.psd[lo : hi + 1] - bg_bins) * rb)
    if band_variance <= 0:
        raise CalibrationFailedError("non-positive thermal band power")
    # Lorentzian tail correction for the band actually covered by whole bins.
    covered_half = 0.5 * (f[hi] - f[lo] + rb)
    in_band_fraction = (2.0 / pi) * np.arctan(4.0 * pi * covered_half / gamma_eff)
    variance_v = band_variance / in_band_fraction
    variance_m = Boltzmann * env.temperature / (particle.mass * omega_z**2)
    if feedback_gain > 0:
        variance_m *= gamma / gamma_eff
    c_cal = float(np.sqrt(variance_v / variance_m))
    return c_cal, psd.scaled(1.0 / c_cal**2)


def force_from_peak(
    peak: PeakReport,
    omega_drive: float,
    omega_z: float,
    gamma: float,
    particle: ParticleParams,
) -> float:
    """RMS force behind a displacement peak via the inverse susceptibility.

    F_rms = z_rms m sqrt((Omega_z^2 - Omega^2)^2 + (gamma Omega)^2) with
    z_rms = sqrt(band_power); peak.band_power must already be calibrated to
    m^2. On resonance this reduces to F = z_rms m gamma Omega_z.
    """
    z_rms = np.sqrt(peak.band_power)
    chi_inv = particle.mass * np.sqrt(
        (omega_z**2 - omega_drive**2) ** 2 + (gamma * omega_drive) ** 2
    )
    return float(z_rms * chi_inv)

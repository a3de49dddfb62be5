"""Gaussian-beam interference optics for a trapped dielectric nanosphere.

Implements the on-axis (z) field model of a strong tweezer beam superposed
with a weak signal beam that either co- or counter-propagates, the resulting
dipole potential, and the optical forces at the trap focus.

Conventions
-----------
* Fields are real envelope amplitudes E (V/m); the time-averaged dipole
  potential of the superposed field is U(z) = -(alpha/4) |E_tot(z)|^2, so a
  positive-polarizability particle is attracted to the intensity maximum.
* The on-axis propagation phase of a forward (+z) beam is
  Phi(u) = -k u + psi(u) with Gouy phase psi(u) = arctan(u / z_r); reversing
  the propagation direction flips the sign of the whole phase,
  Phi(u) = +k u - psi(u), since the Gouy advance follows the beam.
* All quantities are SI.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.constants import epsilon_0 as EPS0
from scipy.constants import pi

from .errors import InvalidConfigurationError, OutOfValidityError

# Fraction of the Rayleigh range up to which the small-offset force expansion
# is advertised as accurate; beyond it force_analytic_origin refuses.
EXPANSION_VALIDITY_FRACTION = 0.05


class Direction(str, enum.Enum):
    """Propagation sense of a beam relative to the tweezer (+z)."""

    CO = "co"
    COUNTER = "counter"


@dataclass(frozen=True)
class BeamParams:
    """One coherent Gaussian beam.

    Parameters
    ----------
    power : float
        Optical power at the focus, W.
    wavelength : float
        Vacuum wavelength, m.
    waist_w0 : float
        1/e^2 intensity radius at the focus, m.
    focus_offset_zs : float
        Axial position of this beam's focus relative to the tweezer focus, m.
    phase_phis : float
        Additional phase offset relative to the tweezer, rad.
    direction : Direction
        Propagation sense relative to the tweezer.
    """

    power: float
    wavelength: float
    waist_w0: float
    focus_offset_zs: float = 0.0
    phase_phis: float = 0.0
    direction: Direction = Direction.CO

    def __post_init__(self):
        if self.power < 0:
            raise InvalidConfigurationError(f"beam power must be >= 0, got {self.power}")
        if self.wavelength <= 0:
            raise InvalidConfigurationError("beam wavelength must be > 0")
        if self.waist_w0 <= 0:
            raise InvalidConfigurationError("beam waist must be > 0")
        object.__setattr__(self, "direction", Direction(self.direction))

    @property
    def rayleigh_range(self) -> float:
        """z_r = pi w0^2 / lambda, m."""
        return pi * self.waist_w0**2 / self.wavelength

    @property
    def wavenumber(self) -> float:
        """k = 2 pi / lambda, rad/m."""
        return 2.0 * pi / self.wavelength

    @property
    def field_amplitude(self) -> float:
        """Peak on-axis focal amplitude, V/m (see field_amplitude_from_power)."""
        return field_amplitude_from_power(self)


@dataclass(frozen=True)
class ParticleParams:
    """Dielectric nanosphere: geometry and material response.

    The point-dipole polarizability follows Clausius-Mossotti,
    alpha = 3 eps0 V (eps - 1) / (eps + 2).
    """

    radius: float
    density: float = 1850.0
    rel_permittivity: float = 2.1

    def __post_init__(self):
        if self.radius <= 0 or self.density <= 0:
            raise InvalidConfigurationError("particle radius and density must be > 0")
        if self.rel_permittivity <= 1.0:
            raise InvalidConfigurationError(
                "rel_permittivity must exceed 1 for a positive polarizability"
            )

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * pi * self.radius**3

    @property
    def mass(self) -> float:
        """kg."""
        return self.density * self.volume

    @property
    def polarizability(self) -> float:
        """Clausius-Mossotti polarizability, C m^2 / V."""
        eps = self.rel_permittivity
        return 3.0 * EPS0 * self.volume * (eps - 1.0) / (eps + 2.0)


@dataclass(frozen=True)
class FieldSample:
    """Real envelope amplitude and accumulated phase of one beam at a point."""

    amplitude: float
    phase: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise InvalidConfigurationError("field amplitude must be >= 0")


def envelope(z, beam: BeamParams):
    """Normalized on-axis envelope a(z) = w0 / w(z) of a beam focused at z=0.

    w(z) = w0 sqrt(1 + (z/z_r)^2), so a(z) lies in (0, 1] and is even in z.
    """
    u = np.asarray(z, dtype=float) / beam.rayleigh_range
    out = 1.0 / np.sqrt(1.0 + u * u)
    return out if out.ndim else float(out)


def gouy_phase(z, beam: BeamParams):
    """Gouy phase psi(z) = arctan(z / z_r) of a beam focused at z=0, rad."""
    out = np.arctan(np.asarray(z, dtype=float) / beam.rayleigh_range)
    return out if out.ndim else float(out)


def field_amplitude_from_power(beam: BeamParams) -> float:
    """Peak on-axis focal field amplitude of a Gaussian beam, V/m.

    The focal peak intensity is I0 = 2 P / (pi w0^2) and E = sqrt(2 I0 /
    (eps0 c)), i.e. E = sqrt(4 P / (pi w0^2 eps0 c)).
    """
    return float(np.sqrt(4.0 * beam.power / (pi * beam.waist_w0**2 * EPS0 * C_LIGHT)))


def propagation_phase(z, beam: BeamParams):
    """On-axis propagation phase Phi of a beam focused at z=0, rad.

    Forward beams accumulate Phi(z) = -k z + psi(z); counter-propagating
    beams accumulate the sign-flipped Phi(z) = +k z - psi(z).
    """
    z = np.asarray(z, dtype=float)
    phi = -beam.wavenumber * z + np.arctan(z / beam.rayleigh_range)
    if beam.direction is Direction.COUNTER:
        phi = -phi
    return phi if phi.ndim else float(phi)


def field_at(z, beam: BeamParams) -> FieldSample:
    """Sample one beam's envelope amplitude and total phase at axial position z.

    z is measured from the tweezer focus; the beam's own focus offset and
    static phase offset are applied here.
    """
    u = float(z) - beam.focus_offset_zs
    return FieldSample(
        amplitude=beam.field_amplitude * envelope(u, beam),
        phase=propagation_phase(u, beam) + beam.phase_phis,
    )


def _check_pair(tweezer: BeamParams, signal: BeamParams) -> None:
    if tweezer.direction is not Direction.CO:
        raise InvalidConfigurationError("the tweezer beam defines +z and must be co-directed")
    if not np.isclose(tweezer.wavelength, signal.wavelength, rtol=1e-12, atol=0.0):
        raise InvalidConfigurationError(
            f"beams must share one wavelength (tweezer {tweezer.wavelength}, "
            f"signal {signal.wavelength})"
        )


def cross_term_phase(z, tweezer: BeamParams, signal: BeamParams):
    """Phase argument of the two-beam interference term at axial position z.

    Co-propagating signal:    k z_s + phi_s + psi(z - z_s) - psi(z)
    Counter-propagating one:  2 k z - k z_s + phi_s - psi(z) - psi(z - z_s)

    The counter case follows from flipping the propagation sign of the
    signal beam's full phase (k and Gouy terms together); the fast 2 k z
    dependence is what carries the large force enhancement.
    """
    z = np.asarray(z, dtype=float)
    zs = signal.focus_offset_zs
    k = tweezer.wavenumber
    psi_tw = np.arctan(z / tweezer.rayleigh_range)
    psi_s = np.arctan((z - zs) / signal.rayleigh_range)
    if signal.direction is Direction.CO:
        theta = k * zs + signal.phase_phis + psi_s - psi_tw
    else:
        theta = 2.0 * k * z - k * zs + signal.phase_phis - psi_tw - psi_s
    return theta if theta.ndim else float(theta)


def total_potential(z, tweezer: BeamParams, signal: BeamParams, particle: ParticleParams):
    """Dipole potential U(z) of the superposed tweezer + signal field, J.

    U(z) = -(alpha/4) [E_tw^2 a(z)^2 + E_s^2 a(z-z_s)^2
                       + 2 E_tw E_s a(z) a(z-z_s) cos(theta(z))]

    where theta is cross_term_phase. Vectorized over z.
    """
    _check_pair(tweezer, signal)
    z = np.asarray(z, dtype=float)
    e_tw = tweezer.field_amplitude
    e_s = signal.field_amplitude
    a_tw = envelope(z, tweezer)
    a_s = envelope(z - signal.focus_offset_zs, signal)
    alpha = particle.polarizability
    intensity_sq = (
        e_tw**2 * a_tw**2
        + e_s**2 * a_s**2
        + 2.0 * e_tw * e_s * a_tw * a_s * np.cos(cross_term_phase(z, tweezer, signal))
    )
    out = -(alpha / 4.0) * intensity_sq
    return out if out.ndim else float(out)


def force_numeric(
    z, tweezer: BeamParams, signal: BeamParams, particle: ParticleParams, step_h: float
):
    """Independent force oracle: F = -dU/dz by central difference, N.

    Second-order accurate in step_h; the truncation error scales with the
    third derivative of U, so counter-propagating configurations (fast 2kz
    oscillation) want step_h well below 1/k.
    """
    if step_h <= 0:
        raise InvalidConfigurationError("step_h must be > 0")
    z = np.asarray(z, dtype=float)
    up = total_potential(z + step_h, tweezer, signal, particle)
    dn = total_potential(z - step_h, tweezer, signal, particle)
    out = -(np.asarray(up) - np.asarray(dn)) / (2.0 * step_h)
    return out if out.ndim else float(out)


def _envelope_terms(signal: BeamParams):
    """a(-z_s), a'(-z_s) and Gouy slope psi'(-z_s) of the signal envelope."""
    zr = signal.rayleigh_range
    u = -signal.focus_offset_zs / zr
    one = 1.0 + u * u
    a = one**-0.5
    a_prime = -(u / zr) * one**-1.5
    psi_prime = (1.0 / zr) / one
    return a, a_prime, psi_prime


def _cross_term_origin(tweezer: BeamParams, signal: BeamParams):
    """theta(0) and theta'(0) of the interference phase at the tweezer focus."""
    k = tweezer.wavenumber
    zs = signal.focus_offset_zs
    psi_s0 = np.arctan(-zs / signal.rayleigh_range)
    psi_tw_prime0 = 1.0 / tweezer.rayleigh_range
    _, _, psi_s_prime = _envelope_terms(signal)
    if signal.direction is Direction.CO:
        theta0 = k * zs + signal.phase_phis + psi_s0
        dtheta0 = psi_s_prime - psi_tw_prime0
    else:
        theta0 = -k * zs + signal.phase_phis - psi_s0
        dtheta0 = 2.0 * k - psi_tw_prime0 - psi_s_prime
    return theta0, dtheta0


def force_analytic_origin(
    tweezer: BeamParams,
    signal: BeamParams,
    particle: ParticleParams,
    leading_order: bool = False,
) -> tuple[float, float]:
    """Axial optical force terms at the tweezer focus (z = 0), N.

    Returns ``(F_s0, F_si)``: the signal beam's standalone gradient force and
    the tweezer-signal interference force. By default both are the exact
    derivatives of the two-beam potential evaluated at the focus, which agree
    with force_numeric to finite-difference truncation error. With
    ``leading_order=True`` the small-offset expansions are returned instead:

        F_s0 = (alpha/2) (z_s / z_r^2) E_s^2
        F_si = (alpha/2) (z_s / z_r^2) cos(k z_s + phi(z_s)) E_tw E_s   (co)
        F_si = -alpha k a(-z_s) sin(theta(0)) E_tw E_s                  (counter)

    whose ratio obeys F_si / F_s0 = cos(k z_s + phi(z_s)) E_tw / E_s exactly
    in the co-propagating expansion.

    Raises OutOfValidityError when |z_s| exceeds 5% of the signal Rayleigh
    range; use force_numeric for larger offsets.
    """
    _check_pair(tweezer, signal)
    zs = signal.focus_offset_zs
    zr = signal.rayleigh_range
    if abs(zs) >= EXPANSION_VALIDITY_FRACTION * zr:
        raise OutOfValidityError(
            f"|z_s| = {abs(zs):.3e} m exceeds {EXPANSION_VALIDITY_FRACTION:.0%} of the "
            f"Rayleigh range {zr:.3e} m; use force_numeric"
        )
    alpha = particle.polarizability
    e_tw = tweezer.field_amplitude
    e_s = signal.field_amplitude
    theta0, dtheta0 = _cross_term_origin(tweezer, signal)
    a, a_prime, _ = _envelope_terms(signal)

    if leading_order:
        f_s0 = 0.5 * alpha * (zs / zr**2) * e_s**2
        if signal.direction is Direction.CO:
            f_si = 0.5 * alpha * (zs / zr**2) * np.cos(theta0) * e_tw * e_s
        else:
            f_si = -alpha * tweezer.wavenumber * a * np.sin(theta0) * e_tw * e_s
        return float(f_s0), float(f_si)

    f_s0 = 0.5 * alpha * e_s**2 * a * a_prime
    f_si = 0.5 * alpha * e_tw * e_s * (a_prime * np.cos(theta0) - a * dtheta0 * np.sin(theta0))
    return float(f_s0), float(f_si)


def counter_force_origin(
    tweezer: BeamParams, signal: BeamParams, particle: ParticleParams
) -> float:
    """Interference force at the focus for a counter-propagating signal, N.

    Exact derivative of the counter-propagating cross term at z = 0; its
    leading magnitude is alpha k E_tw E_s a(-z_s) |sin(theta(0))|, a factor
    ~ 2 k z_r^2 / z_s above the co-propagating interference force.
    """
    _check_pair(tweezer, signal)
    if signal.direction is not Direction.COUNTER:
        raise InvalidConfigurationError("counter_force_origin requires a counter-propagating signal")
    alpha = particle.polarizability
    e_tw = tweezer.field_amplitude
    e_s = signal.field_amplitude
    theta0, dtheta0 = _cross_term_origin(tweezer, signal)
    a, a_prime, _ = _envelope_terms(signal)
    return float(0.5 * alpha * e_tw * e_s * (a_prime * np.cos(theta0) - a * dtheta0 * np.sin(theta0)))


def interference_force_phase_extrema(
    tweezer: BeamParams, signal: BeamParams, particle: ParticleParams
) -> tuple[float, float]:
    """(peak, rms) of the interference force at z=0 over a uniform phase phi_s.

    The cross-term force is a single harmonic of phi_s,
    F_si(phi_s) = R cos(phi_s + delta), so the peak is R and the uniform-phase
    RMS is R / sqrt(2). Uses the exact origin derivative (no small-z_s guard).
    """
    _check_pair(tweezer, signal)
    alpha = particle.polarizability
    e_tw = tweezer.field_amplitude
    e_s = signal.field_amplitude
    _, dtheta0 = _cross_term_origin(tweezer, signal)
    a, a_prime, _ = _envelope_terms(signal)
    peak = 0.5 * alpha * e_tw * e_s * np.hypot(a_prime, a * dtheta0)
    return float(peak), float(peak / np.sqrt(2.0))


def trap_stiffness(tweezer: BeamParams, particle: ParticleParams) -> tuple[float, float]:
    """Axial trap frequency and stiffness of the tweezer alone.

    Harmonic expansion of the single-beam potential about the focus:
    kappa_z = d2U/dz2|_0 = alpha E_tw^2 / (2 z_r^2) and
    Omega_z = sqrt(kappa_z / m).

    Returns
    -------
    (omega_z, kappa_z) : rad/s, N/m

    Notes
    -----
    The paraxial envelope underestimates the stiffness of a tightly focused
    (NA ~ 0.8) beam; scenario presets therefore support calibrating Omega_z
    to a measured value instead of using this model figure.
    """
    if tweezer.power <= 0:
        raise InvalidConfigurationError("trap stiffness needs tweezer power > 0")
    kappa_z = particle.polarizability * tweezer.field_amplitude**2 / (2.0 * tweezer.rayleigh_range**2)
    omega_z = float(np.sqrt(kappa_z / particle.mass))
    return omega_z, float(kappa_z)

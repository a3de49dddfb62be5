"""Stochastic axial dynamics of the levitated particle.

The particle's z motion obeys the Langevin equation

    m z'' = -m Omega_z^2 z - m (gamma + g_fb) z' + F_th(t) + F_drive(t)

with gas damping gamma, optional velocity feedback g_fb (cold damping: no
added noise), a thermal force of one-sided PSD S_F = 4 k_B T m gamma, and an
amplitude-modulated interference drive from the weak beam.

Integration uses a BAOAB splitting whose O step applies the exact
Ornstein-Uhlenbeck velocity update; for a harmonic trap its stationary
position variance is exactly k_B T / (m Omega_z^2) at any stable time step.
For the default harmonic mode the per-step map is linear, so long traces are
generated by an equivalent second-order recursion evaluated with
scipy.signal.lfilter; the fall-back Python loop handles arbitrary force
fields (full-potential mode) and is draw-for-draw identical to the fast path.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.constants import Avogadro, Boltzmann, pi
from scipy.signal import lfilter, lfiltic

from .errors import InvalidConfigurationError, IntegrationDivergedError
from .optics import ParticleParams

# Free-molecular drag coefficient: the Kn >> 1 limit of the slip-corrected
# Stokes formula gamma = (6 pi eta r / m) * 0.619 / (0.619 + Kn) * (1 + c_K),
# in which the viscosity cancels against the mean free path.
_FM_COEFF = 6.0 * pi * 0.619

_CHUNK_STEPS = 1 << 20


@dataclass(frozen=True)
class Environment:
    """Residual gas environment of the trap.

    pressure is stored in Pa (the config layer accepts mbar). The damping
    model is free-molecular kinetic drag, exactly linear in pressure; a
    measured damping rate can be anchored instead via gamma_ref at
    gamma_ref_pressure, preserving the linear scaling.
    """

    pressure: float
    temperature: float = 300.0
    gas_molar_mass: float = 28.97e-3
    gas_viscosity_ref: float = 1.85e-5
    gamma_ref: float | None = None
    gamma_ref_pressure: float | None = None

    def __post_init__(self):
        if self.pressure <= 0 or self.temperature <= 0:
            raise InvalidConfigurationError("pressure and temperature must be > 0")
        if (self.gamma_ref is None) != (self.gamma_ref_pressure is None):
            raise InvalidConfigurationError(
                "gamma_ref and gamma_ref_pressure must be given together"
            )

    def with_pressure(self, pressure: float) -> "Environment":
        """Same gas model at a different pressure."""
        return Environment(
            pressure=pressure,
            temperature=self.temperature,
            gas_molar_mass=self.gas_molar_mass,
            gas_viscosity_ref=self.gas_viscosity_ref,
            gamma_ref=self.gamma_ref,
            gamma_ref_pressure=self.gamma_ref_pressure,
        )


def gas_damping_rate(env: Environment, particle: ParticleParams) -> float:
    """Velocity damping rate gamma from residual-gas collisions, 1/s.

    Free-molecular (Epstein) regime:

        gamma = 6 pi 0.619 r^2 p / (m sqrt(pi k_B T / (2 m_gas)))

    which is exactly linear in pressure. With a gamma_ref anchor the measured
    rate is rescaled linearly instead.
    """
    if env.gamma_ref is not None:
        return env.gamma_ref * (env.pressure / env.gamma_ref_pressure)
    m_gas = env.gas_molar_mass / Avogadro
    v_scale = np.sqrt(pi * Boltzmann * env.temperature / (2.0 * m_gas))
    return float(_FM_COEFF * particle.radius**2 * env.pressure / (particle.mass * v_scale))


def knudsen_number(env: Environment, particle: ParticleParams) -> float:
    """Mean free path over particle radius; the drag model assumes Kn >> 1."""
    m_gas = env.gas_molar_mass / Avogadro
    mfp = (env.gas_viscosity_ref / env.pressure) * np.sqrt(
        pi * Boltzmann * env.temperature / (2.0 * m_gas)
    )
    return float(mfp / particle.radius)


def thermal_force_psd(env: Environment, particle: ParticleParams) -> tuple[float, float]:
    """One-sided thermal force PSD S_F = 4 k_B T m gamma and its square root.

    Returns
    -------
    (s_f, sqrt_s_f) : N^2/Hz, N/sqrt(Hz)
    """
    gamma = gas_damping_rate(env, particle)
    s_f = 4.0 * Boltzmann * env.temperature * particle.mass * gamma
    return float(s_f), float(np.sqrt(s_f))


@dataclass(frozen=True)
class DriveConfig:
    """Amplitude-modulated weak-beam drive.

    The interference force is F(t) = kappa sqrt(P_s(t)) cos(phase(t)) with
    P_s(t) = P_mean (1 + depth cos(Omega_AM t)); kappa is the peak (cos = 1)
    transduction factor in N per sqrt(W).

    phase_mode:
      * "fixed":       phase(t) = geometric_phase + phase_phis
      * "randomized":  adds a wrapped Ornstein-Uhlenbeck phase of stationary
                       std phase_sigma and correlation time phase_correlation_time
      * "swept":       adds a linear ramp 2 pi sweep_rate_hz t, the
                       deterministic analogue of slow phase sweeping; the
                       time average of cos^2 is exactly 1/2
    """

    am_frequency: float
    signal_power_mean: float
    modulation_depth: float = 1.0
    phase_mode: str = "randomized"
    phase_phis: float = 0.0
    phase_correlation_time: float = 1e-3
    phase_sigma: float = pi
    sweep_rate_hz: float = 60.0

    def __post_init__(self):
        if self.am_frequency <= 0:
            raise InvalidConfigurationError("am_frequency must be > 0")
        if self.signal_power_mean < 0:
            raise InvalidConfigurationError("signal_power_mean must be >= 0")
        if not 0.0 <= self.modulation_depth <= 1.0:
            raise InvalidConfigurationError("modulation_depth must lie in [0, 1]")
        if self.phase_mode not in ("fixed", "randomized", "swept"):
            raise InvalidConfigurationError(f"unknown phase_mode '{self.phase_mode}'")
        if self.phase_mode == "randomized" and self.phase_correlation_time <= 0:
            raise InvalidConfigurationError("phase_correlation_time must be > 0")


@dataclass(frozen=True)
class FeedbackConfig:
    """Linear velocity feedback (cold damping): adds -g_fb v with no noise."""

    enabled: bool = False
    velocity_gain: float = 0.0

    def __post_init__(self):
        if self.velocity_gain < 0:
            raise InvalidConfigurationError("velocity_gain must be >= 0")

    @property
    def gain(self) -> float:
        return self.velocity_gain if self.enabled else 0.0


@dataclass(frozen=True)
class SimConfig:
    """Integration grid, seeding and storage policy."""

    dt: float
    duration: float
    rng_seed: int = 0
    initial_state: tuple[float, float] | None = None  # None -> thermal sample
    decimate: int = 1
    store_velocity: bool = False

    def __post_init__(self):
        if self.dt <= 0:
            raise InvalidConfigurationError("dt must be > 0")
        if self.duration < self.dt:
            raise InvalidConfigurationError("duration must be >= dt")
        if self.decimate < 1 or int(self.decimate) != self.decimate:
            raise InvalidConfigurationError("decimate must be a positive integer")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass(frozen=True, eq=False)
class TraceRecord:
    """Uniformly sampled time series with seed and configuration provenance."""

    sample_rate: float
    samples: np.ndarray
    seed: int
    config_digest: str
    velocities: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return (1.0 + np.arange(len(self.samples))) / self.sample_rate


class _PhaseProcess:
    """Stochastic/deterministic drive phase sampled on the integrator grid."""

    def __init__(self, drive: DriveConfig, geometric_phase: float, dt: float, rng):
        self.drive = drive
        self.base = geometric_phase + drive.phase_phis
        self.dt = dt
        if drive.phase_mode == "randomized":
            self.rho = float(np.exp(-dt / drive.phase_correlation_time))
            self.step_sigma = drive.phase_sigma * np.sqrt(1.0 - self.rho**2)
            self.state = drive.phase_sigma * rng.standard_normal()
        else:
            self.state = 0.0

    def take(self, t: np.ndarray, rng) -> np.ndarray:
        """Phase values at consecutive grid times t (continues the process)."""
        if self.drive.phase_mode == "fixed":
            return np.full(t.shape, self.base)
        if self.drive.phase_mode == "swept":
            return self.base + 2.0 * pi * self.drive.sweep_rate_hz * t
        innovations = self.step_sigma * rng.standard_normal(t.size)
        # phi_n = rho phi_{n-1} + innovation_n, seeded by the carried state
        phi = lfilter([1.0], [1.0, -self.rho], innovations, zi=[self.rho * self.state])[0]
        self.state = float(phi[-1])
        return self.base + phi


def drive_force(
    t: np.ndarray,
    drive: DriveConfig,
    transduction_kappa: float,
    rng,
    geometric_phase: float = 0.0,
) -> np.ndarray:
    """Evaluate the weak-beam drive force on a uniform time grid, N.

    For the randomized phase mode t must be uniformly spaced (the OU phase is
    generated recursively along the grid); fixed and swept modes accept any
    grid. The mean optical power over a modulation period equals
    drive.signal_power_mean.
    """
    if transduction_kappa < 0:
        raise InvalidConfigurationError("transduction_kappa must be >= 0")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if drive.phase_mode == "randomized":
        if t.size > 1:
            dts = np.diff(t)
            if not np.allclose(dts, dts[0], rtol=1e-9, atol=0.0):
                raise InvalidConfigurationError("randomized phase needs a uniform time grid")
            dt = float(dts[0])
        else:
            dt = 1.0
        process = _PhaseProcess(drive, geometric_phase, dt, rng)
        phase = process.take(t, rng)
    else:
        process = _PhaseProcess(drive, geometric_phase, t[0] if t.size else 0.0, rng)
        phase = process.take(t, rng)
    power = drive.signal_power_mean * (
        1.0 + drive.modulation_depth * np.cos(drive.am_frequency * t)
    )
    return transduction_kappa * np.sqrt(power) * np.cos(phase)


class LangevinIntegrator:
    """BAOAB stepper for the damped, thermally driven trap mode.

    The O step uses the exact OU decay c = exp(-(gamma + g_fb) dt) and a
    noise variance (k_B T / m) (gamma / (gamma + g_fb)) (1 - c^2), so the
    undriven harmonic oscillator samples position variance
    k_B T/(m Omega_z^2) * gamma/(gamma + g_fb) in its stationary state; for
    small dt the thermal velocity kick variance per step approaches
    2 gamma k_B T dt / m (momentum variance 2 m gamma k_B T dt).
    """

    def __init__(
        self,
        particle: ParticleParams,
        omega_z: float,
        gamma: float,
        temperature: float,
        dt: float,
        feedback_gain: float = 0.0,
        force_field=None,
    ):
        if omega_z <= 0:
            raise InvalidConfigurationError("omega_z must be > 0")
        if dt * omega_z >= 0.1:
            raise InvalidConfigurationError(
                f"dt too coarse: dt * Omega_z = {dt * omega_z:.3f} must stay below 0.1"
            )
        if gamma < 0 or feedback_gain < 0:
            raise InvalidConfigurationError("gamma and feedback_gain must be >= 0")
        self.mass = particle.mass
        self.omega_z = omega_z
        self.gamma = gamma
        self.feedback_gain = feedback_gain
        self.temperature = temperature
        self.dt = dt
        self.force_field = force_field
        gamma_total = gamma + feedback_gain
        self.ou_decay = float(np.exp(-gamma_total * dt))
        kT = Boltzmann * temperature
        if gamma_total > 0 and temperature > 0 and gamma > 0:
            self.ou_sigma = float(
                np.sqrt((kT / self.mass) * (gamma / gamma_total) * (1.0 - self.ou_decay**2))
            )
        else:
            self.ou_sigma = 0.0

    def _force_over_mass(self, z):
        if self.force_field is None:
            return -self.omega_z**2 * z
        return self.force_field(z) / self.mass

    def step(self, state, drive_begin=0.0, drive_end=0.0, noise=None, rng=None, step_index=-1):
        """One BAOAB update of (z, v).

        drive_begin/drive_end are the state-independent drive force (N) at
        the start and end of the step; noise is the unit normal for the O
        step (drawn from rng when omitted).
        """
        z, v = state
        h2 = 0.5 * self.dt
        v = v + h2 * (self._force_over_mass(z) + drive_begin / self.mass)
        z = z + h2 * v
        if noise is None:
            noise = rng.standard_normal() if rng is not None else 0.0
        v = self.ou_decay * v + self.ou_sigma * noise
        z = z + h2 * v
        v = v + h2 * (self._force_over_mass(z) + drive_end / self.mass)
        if not (np.isfinite(z) and np.isfinite(v)):
            raise IntegrationDivergedError(step_index)
        return z, v

    def linear_map(self):
        """One-step transition matrix and input weights of the harmonic mode.

        Returns (M, wq) with state' = M state + q and
        q_x = wq[0] u_a + wq[1] xi,  q_v = wq[2] u_a + wq[3] u_b + wq[4] xi,
        where u = drive/m at the step's start (a) and end (b) and xi ~ N(0,1).
        """
        h2 = 0.5 * self.dt
        c = self.ou_decay
        s = self.ou_sigma
        a_ = h2 * self.omega_z**2
        m_xx = 1.0 - h2 * a_ * (1.0 + c)
        m_xv = h2 * (1.0 + c)
        m_vx = -a_ * (c + m_xx)
        m_vv = c - a_ * m_xv
        M = np.array([[m_xx, m_xv], [m_vx, m_vv]])
        wq = np.array(
            [
                h2 * h2 * (1.0 + c),          # q_x <- u_a
                h2 * s,                        # q_x <- xi
                c * h2 - a_ * h2 * h2 * (1.0 + c),  # q_v <- u_a
                h2,                            # q_v <- u_b
                s * (1.0 - a_ * h2),           # q_v <- xi
            ]
        )
        return M, wq


def _config_digest(payload: str) -> str:
    return hashlib.sha256(payload.encode()).hexdigest()


def _thermal_initial_state(particle, omega_z, temperature, rng):
    kT = Boltzmann * temperature
    z0 = np.sqrt(kT / (particle.mass * omega_z**2)) * rng.standard_normal()
    v0 = np.sqrt(kT / particle.mass) * rng.standard_normal()
    return float(z0), float(v0)


def simulate(
    particle: ParticleParams,
    env: Environment,
    omega_z: float,
    sim: SimConfig,
    drive: DriveConfig | None = None,
    transduction_kappa: float = 0.0,
    geometric_phase: float = 0.0,
    feedback: FeedbackConfig | None = None,
    force_field=None,
    method: str = "auto",
    config_digest: str | None = None,
) -> TraceRecord:
    """Integrate the trap dynamics and return the sampled trace.

    Deterministic for a fixed sim.rng_seed: the noise stream, drive
    realization and outputs are bit-identical across runs. The stored trace
    is decimated by sim.decimate (thermal spectral content above the stored
    Nyquist is negligible past the resonance rolloff).

    method: "auto" picks the fast linear path for the harmonic mode and the
    step loop when a force_field is given; "fast"/"loop" force the choice.
    """
    gamma = gas_damping_rate(env, particle)
    g_fb = feedback.gain if feedback is not None else 0.0
    integ = LangevinIntegrator(
        particle, omega_z, gamma, env.temperature, sim.dt,
        feedback_gain=g_fb, force_field=force_field,
    )
    if method == "auto":
        method = "loop" if force_field is not None else "fast"
    if method == "fast" and force_field is not None:
        raise InvalidConfigurationError("fast path handles the harmonic mode only")
    if drive is not None and transduction_kappa <= 0 and drive.signal_power_mean > 0:
        raise InvalidConfigurationError("a drive needs transduction_kappa > 0")

    if config_digest is None:
        config_digest = _config_digest(
            repr((particle, env, omega_z, sim, drive, transduction_kappa,
                  geometric_phase, feedback, method))
        )

    rng = np.random.default_rng(np.random.SeedSequence(sim.rng_seed))
    if sim.initial_state is None:
        state = _thermal_initial_state(particle, omega_z, env.temperature, rng)
    else:
        state = (float(sim.initial_state[0]), float(sim.initial_state[1]))

    phase_proc = None
    if drive is not None and drive.signal_power_mean > 0:
        phase_proc = _PhaseProcess(drive, geometric_phase, sim.dt, rng)

    n_steps = sim.n_steps
    dec = sim.decimate
    n_store = n_steps // dec
    out_z = np.empty(n_store)
    out_v = np.empty(n_store) if sim.store_velocity else None

    M, wq = integ.linear_map()
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]

    drive_last = _drive_at(0.0, drive, transduction_kappa, phase_proc, rng)

    done = 0
    store_ptr = 0
    while done < n_steps:
        length = min(_CHUNK_STEPS, n_steps - done)
        t_new = (done + 1.0 + np.arange(length)) * sim.dt
        u = np.empty(length + 1)
        u[0] = drive_last
        u[1:] = _drive_at(t_new, drive, transduction_kappa, phase_proc, rng)
        drive_last = u[-1]
        u /= particle.mass
        xi = rng.standard_normal(length)

        if method == "fast":
            x_rel, state = _advance_linear(state, u, xi, M, wq, tr, det)
            v_rel = None
        else:
            x_rel, v_rel, state = _advance_loop(state, u, xi, integ, done)

        bad = ~np.isfinite(x_rel[1:])
        if bad.any():
            raise IntegrationDivergedError(done + 1 + int(np.argmax(bad)))

        # store global steps that are multiples of dec within (done, done+length]
        first = (done // dec + 1) * dec
        idx = np.arange(first, done + length + 1, dec) - done
        out_z[store_ptr : store_ptr + idx.size] = x_rel[idx]
        if out_v is not None:
            if v_rel is not None:
                out_v[store_ptr : store_ptr + idx.size] = v_rel[idx]
            else:
                out_v[store_ptr : store_ptr + idx.size] = _velocities_at(
                    idx, x_rel, u, xi, M, wq, state
                )
        store_ptr += idx.size
        done += length

    return TraceRecord(
        sample_rate=1.0 / (sim.dt * dec),
        samples=out_z,
        seed=sim.rng_seed,
        config_digest=config_digest,
        velocities=out_v,
    )


def _drive_at(t, drive, kappa, phase_proc, rng):
    """Drive force at grid times t (scalar or array), consuming phase draws."""
    if drive is None or drive.signal_power_mean == 0 or kappa == 0:
        return np.zeros_like(np.asarray(t, dtype=float)) if np.ndim(t) else 0.0
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    phase = phase_proc.take(t_arr, rng)
    power = drive.signal_power_mean * (
        1.0 + drive.modulation_depth * np.cos(drive.am_frequency * t_arr)
    )
    f = kappa * np.sqrt(power) * np.cos(phase)
    return f if np.ndim(t) else float(f[0])


def _advance_linear(state, u, xi, M, wq, tr, det):
    """Advance `length` steps of the harmonic BAOAB map via an AR(2) filter.

    u has length+1 entries (drive/m at step boundaries), xi has length unit
    normals. Returns (x_rel, end_state): x_rel[0] is the entry position and
    x_rel[1:] the new positions.
    """
    length = xi.size
    q_x = wq[0] * u[:-1] + wq[1] * xi
    q_v = wq[2] * u[:-1] + wq[3] * u[1:] + wq[4] * xi
    x0, v0 = state
    x_rel = np.empty(length + 1)
    x_rel[0] = x0
    x_rel[1] = M[0, 0] * x0 + M[0, 1] * v0 + q_x[0]
    if length > 1:
        g = (M[0, 0] - tr) * q_x[:-1] + M[0, 1] * q_v[:-1] + q_x[1:]
        zi = lfiltic([1.0], [1.0, -tr, det], [x_rel[1], x_rel[0]])
        x_rel[2:], _ = lfilter([1.0], [1.0, -tr, det], g, zi=zi)
    # end-state velocity from the last step's update
    if length == 1:
        v_prev = v0
    else:
        v_prev = (x_rel[-1] - M[0, 0] * x_rel[-2] - q_x[-1]) / M[0, 1]
    v_end = M[1, 0] * x_rel[-2] + M[1, 1] * v_prev + q_v[-1]
    return x_rel, (float(x_rel[-1]), float(v_end))


def _velocities_at(idx, x_rel, u, xi, M, wq, end_state):
    """Velocities at chunk-relative step indices idx (1-based within chunk)."""
    q_x = wq[0] * u[:-1] + wq[1] * xi
    v = np.empty(idx.size)
    interior = idx < (x_rel.size - 1)
    ii = idx[interior]
    v[interior] = (x_rel[ii + 1] - M[0, 0] * x_rel[ii] - q_x[ii]) / M[0, 1]
    if (~interior).any():
        v[~interior] = end_state[1]
    return v


def _advance_loop(state, u, xi, integ, base_index):
    """Reference step-by-step path (also used for full-potential force fields)."""
    length = xi.size
    x_rel = np.empty(length + 1)
    v_rel = np.empty(length + 1)
    x_rel[0], v_rel[0] = state
    z, v = state
    m = integ.mass
    for j in range(length):
        z, v = integ.step(
            (z, v),
            drive_begin=u[j] * m,
            drive_end=u[j + 1] * m,
            noise=xi[j],
            step_index=base_index + j + 1,
        )
        x_rel[j + 1] = z
        v_rel[j + 1] = v
    return x_rel, v_rel, (float(z), float(v))

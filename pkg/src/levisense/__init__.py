"""levisense: interference-enhanced weak-light detection with a levitated nanoparticle.

A numpy/scipy library covering the full measurement chain: two-beam
interference optics and dipole forces, stochastic trap dynamics, homodyne
readout with averaged-periodogram spectral analysis, and the analytic
sensitivity budget down to zeptowatt-scale signal powers.
"""

from .dynamics import (
    DriveConfig,
    Environment,
    FeedbackConfig,
    LangevinIntegrator,
    SimConfig,
    TraceRecord,
    drive_force,
    gas_damping_rate,
    knudsen_number,
    simulate,
    thermal_force_psd,
)
from .errors import (
    CalibrationFailedError,
    ConfigParseError,
    IntegrationDivergedError,
    InvalidConfigurationError,
    LevisenseError,
    OutOfValidityError,
)
from .optics import (
    BeamParams,
    Direction,
    FieldSample,
    ParticleParams,
    counter_force_origin,
    cross_term_phase,
    envelope,
    field_amplitude_from_power,
    field_at,
    force_analytic_origin,
    force_numeric,
    gouy_phase,
    interference_force_phase_extrema,
    total_potential,
    trap_stiffness,
)
from .readout import (
    PeakReport,
    PsdEstimate,
    ReadoutConfig,
    calibrate_displacement,
    detect,
    extract_peak,
    force_from_peak,
    psd_average,
)
from .sensing import (
    SensitivityReport,
    light_power_sensitivity,
    min_detectable_force,
    photon_flux,
    projection_curve,
    sensitivity_report,
    threshold_crossing_power,
    transduction_kappa,
)

__version__ = "0.1.0"

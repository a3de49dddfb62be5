import numpy as np
import pytest

from levisense import dynamics, optics, presets


@pytest.fixture(scope="session")
def particle():
    return presets.default_particle()


@pytest.fixture(scope="session")
def tweezer():
    return presets.default_tweezer()


@pytest.fixture(scope="session")
def env_moderate():
    """0.1 mbar, kinetic damping."""
    return dynamics.Environment(pressure=10.0)


@pytest.fixture(scope="session")
def omega_z():
    """Calibrated trap frequency, rad/s."""
    return 2.0 * np.pi * presets.REF_TRAP_FREQ_HZ


def make_signal(power=493e-9, direction="co", offset_zr=0.04, phase=0.0):
    return presets.default_signal(power, direction, offset_zr, phase)


@pytest.fixture(scope="session")
def cold_env(particle, env_moderate):
    """Noiseless environment with the 0.1-mbar damping rate pinned."""
    gamma = dynamics.gas_damping_rate(env_moderate, particle)
    return dynamics.Environment(
        pressure=10.0, temperature=1e-25, gamma_ref=gamma, gamma_ref_pressure=10.0
    )

"""Noise temperature and SNR arithmetic for a paramp followed by a HEMT."""

from dataclasses import dataclass
import math

import numpy as np
from scipy import constants

from .errors import DivisionDomain, DomainError, Unphysical


@dataclass(frozen=True)
class NoiseChain:
    t_first_stage: float
    t_second_stage: float
    gain: float

    def __post_init__(self):
        if self.t_first_stage < 0 or self.t_second_stage < 0:
            raise DomainError("noise temperatures must be non-negative")
        if not self.gain >= 1:
            raise DomainError("gain must be >= 1")


def snr_improvement(chain):
    """(T_paramp / T_hemt + 1 / G)^-1."""
    tc, th, g = chain.t_first_stage, chain.t_second_stage, chain.gain
    if not th > 0:
        raise DomainError("second-stage temperature must be positive")
    if tc == 0 and math.isinf(g):
        raise DivisionDomain("noiseless first stage with infinite gain")
    return 1.0 / (tc / th + 1.0 / g)


def noise_temperature_from_snr(snr, t_second, gain):
    """First-stage noise temperature that explains a measured SNR improvement."""
    if not snr > 0:
        raise DomainError("SNR improvement must be positive")
    if not gain >= 1:
        raise DomainError("gain must be >= 1")
    excess = 1.0 / snr - 1.0 / gain
    if excess <= 0:
        raise Unphysical("SNR improvement at or above the gain implies negative noise temperature")
    return t_second * excess


def noise_temperature_interval(snr, t_second_range, gain):
    """(T_min, T_max) for a HEMT temperature known only as a range."""
    lo, hi = sorted(t_second_range)
    return noise_temperature_from_snr(snr, lo, gain), noise_temperature_from_snr(snr, hi, gain)


def quantum_limit_temperature(f):
    """Half-photon added noise h f / (2 k_B), K."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise DomainError("frequency must be positive")
    out = constants.h * f / (2 * constants.k)
    return float(out) if out.ndim == 0 else out


def photon_flux_power(omega_r, kappa_r, n_bar):
    """Power leaving a resonator holding n_bar photons: hbar w_r kappa_r n_bar."""
    if not (omega_r > 0 and kappa_r > 0) or n_bar < 0:
        raise DomainError("frequency and linewidth must be positive, photon number non-negative")
    return constants.hbar * omega_r * kappa_r * n_bar


def watts_to_dbm(p):
    return 10 * np.log10(np.asarray(p, dtype=float) / 1e-3)


def dbm_to_watts(p_dbm):
    return 1e-3 * 10 ** (np.asarray(p_dbm, dtype=float) / 10)

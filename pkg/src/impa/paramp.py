"""Flux-pumped SQUID resonator: tuning, pump coupling and parametric gain.

Two gain models live here:

* the lumped rotating-wave model, parameterized by the coupling rate kappa,
  the pump strength lambda and the detuning delta;
* an embedded circuit model that solves the signal/idler phasor equations at
  the resonator node against an arbitrary environment impedance Z_env(w).

The pump is described by ``pump_amplitude``, the fractional modulation of the
SQUID inverse inductance: 1/L(t) = (1 + eps cos w_p t) / L_J.  The two models
correspond through lambda = eps * w0 / 8.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy import constants
from scipy.optimize import brentq

from . import network
from .errors import (BelowThreshold, DivergentInductance, DomainError, IdlerOutOfRange,
                     InvalidGeometry, InvalidSpec, InvalidTarget, NearInstability)

FLUX_QUANTUM = constants.h / (2 * constants.e)
HBAR = constants.hbar


@dataclass(frozen=True)
class PumpedResonator:
    """Physical state of the amplifier.

    Attributes
    ----------
    capacitance : float
        Shunt capacitance, F.
    josephson_inductance : float
        Zero-flux effective SQUID inductance L_J,eff, H.
    geometric_inductance : float
        Series lead inductance, H.
    asymmetry : float
        SQUID junction asymmetry d in [0, 1).
    flux : float
        Static flux bias in units of the flux quantum.
    pump_frequency : float or None
        Pump frequency in Hz.
    pump_amplitude : float
        Fractional inverse-inductance modulation eps in [0, 1).
    """

    capacitance: float
    josephson_inductance: float
    geometric_inductance: float = 0.0
    asymmetry: float = 0.0
    flux: float = 0.0
    pump_frequency: float = None
    pump_amplitude: float = 0.0

    def __post_init__(self):
        if not (self.capacitance > 0 and self.josephson_inductance > 0):
            raise InvalidSpec("capacitance and Josephson inductance must be positive")
        if self.geometric_inductance < 0:
            raise InvalidSpec("geometric inductance must be non-negative")
        if not 0 <= self.asymmetry < 1:
            raise InvalidSpec("asymmetry must lie in [0, 1)")
        if not 0 <= self.pump_amplitude < 1:
            raise InvalidSpec("pump amplitude must lie in [0, 1)")
        if self.pump_frequency is not None and not self.pump_frequency > 0:
            raise InvalidSpec("pump frequency must be positive")

    @property
    def josephson_energy(self):
        return (FLUX_QUANTUM / (2 * math.pi)) ** 2 / self.josephson_inductance

    @property
    def charging_energy(self):
        return constants.e ** 2 / (2 * self.capacitance)

    @property
    def pump_omega(self):
        if self.pump_frequency is None:
            raise InvalidSpec("pump frequency not set")
        return 2 * math.pi * self.pump_frequency

    def replace(self, **changes):
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return PumpedResonator(**fields)


def squid_inductance(r, flux=None):
    """L_J(flux) = L_J,eff / sqrt(cos^2(pi f) + d^2 sin^2(pi f))."""
    flux = r.flux if flux is None else flux
    F = np.pi * np.asarray(flux, dtype=float)
    factor = np.sqrt(np.cos(F) ** 2 + r.asymmetry ** 2 * np.sin(F) ** 2)
    if np.any(factor < 1e-12):
        raise DivergentInductance("SQUID inductance diverges at half flux with zero asymmetry")
    out = r.josephson_inductance / factor
    return float(out) if out.ndim == 0 else out


def resonant_frequency(r, flux=None):
    """Angular resonance frequency [C (L_J(flux) + L_geo)]^(-1/2), rad/s."""
    lj = squid_inductance(r, flux)
    return 1.0 / np.sqrt(r.capacitance * (lj + r.geometric_inductance))


def pump_coupling_lambda(r, flux_modulation=None):
    """Pump strength lambda (rad/s) for a flux modulation depth delta_f.

    lambda = delta_f E_J sqrt(sin F tan F E_c / (8 E_J)) / hbar with
    F = pi * flux.  When ``flux_modulation`` is omitted it is taken from the
    resonator's ``pump_amplitude`` via eps = delta_f tan F.
    """
    F = math.pi * r.flux
    if F == 0.0:
        return 0.0
    if not 0.0 < F < math.pi / 2:
        raise DomainError("flux bias must satisfy 0 < pi*flux < pi/2")
    if flux_modulation is None:
        flux_modulation = r.pump_amplitude / math.tan(F)
    ej, ec = r.josephson_energy, r.charging_energy
    return flux_modulation * ej * math.sqrt(math.sin(F) * math.tan(F) * ec / (8 * ej)) / HBAR


def lambda_from_modulation(r):
    """Rotating-wave pump strength for the resonator's eps: eps * w0 / 8."""
    return r.pump_amplitude * resonant_frequency(r) / 8.0


def modulation_from_flux(r, flux_modulation):
    """Fractional inverse-inductance modulation produced by a flux swing delta_f."""
    return flux_modulation * math.tan(math.pi * r.flux)


# ---------------------------------------------------------------------------
# environments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantImpedance:
    z0: float

    def __post_init__(self):
        if not self.z0 > 0:
            raise InvalidGeometry("environment impedance must be positive")

    def impedance(self, f):
        return np.full(np.shape(f), complex(self.z0))


@dataclass(frozen=True)
class TabulatedImpedance:
    frequencies: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        z = np.asarray(self.values, dtype=complex)
        if f.shape != z.shape or f.ndim != 1 or f.size < 2:
            raise InvalidSpec("tabulated impedance needs matching 1-D arrays")
        if np.any(np.diff(f) <= 0):
            raise InvalidSpec("frequencies must be strictly increasing")
        if np.any(z.real <= 0):
            raise InvalidSpec("environment must be passive: Re Z > 0")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "values", z)

    def impedance(self, f):
        f = np.asarray(f, dtype=float)
        if np.any(f < self.frequencies[0]) or np.any(f > self.frequencies[-1]):
            raise IdlerOutOfRange("frequency outside the tabulated environment grid")
        return np.interp(f, self.frequencies, self.values.real) + 1j * np.interp(f, self.frequencies, self.values.imag)


@dataclass(frozen=True)
class TaperEnvironment:
    """Resonator looking through a taper into a matched source."""

    profile: object
    eps_eff: float = None
    source_impedance: float = 50.0
    n_segments: int = network.DEFAULT_SEGMENTS

    def abcd(self, f):
        return network.taper_abcd(self.profile, np.ravel(f), self.n_segments, self.eps_eff)

    def impedance(self, f):
        f = np.asarray(f, dtype=float)
        z = network.input_impedance(self.abcd(f).reversed(), self.source_impedance)
        return z.reshape(f.shape)

    def tabulate(self, frequencies):
        return TabulatedImpedance(np.asarray(frequencies, dtype=float), self.impedance(frequencies))


def kappa_from_environment(r, env):
    """kappa = 1 / (C Z0) for a real environment, rad/s."""
    z0 = env.z0 if isinstance(env, ConstantImpedance) else float(env)
    if not z0 > 0:
        raise InvalidGeometry("environment impedance must be positive")
    return 1.0 / (r.capacitance * z0)


# ---------------------------------------------------------------------------
# rotating-wave gain
# ---------------------------------------------------------------------------

def rwa_gain(omega, kappa, lam, delta=0.0):
    """Signal and idler power gain of the degenerate rotating-wave model.

    ``omega`` is the signal offset from half the pump frequency and ``delta``
    the coefficient of a^dagger a in the rotating frame (w0 - w_p/2), both in
    rad/s.  The denominator is (kappa/2 - i w)^2 + delta^2 - 4 lambda^2, which
    keeps G_s - G_i = 1 exact.
    """
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    w = np.asarray(omega, dtype=float)
    u = kappa / 2 - 1j * w
    den = u * u + delta * delta - 4 * abs(lam) ** 2
    if np.any(np.abs(den) < 1e-9 * kappa * kappa):
        warnings.warn("operating point is at the parametric instability", NearInstability, stacklevel=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        gs = np.abs(kappa * (u - 1j * delta) / den - 1) ** 2
        gi = np.abs(2 * kappa * lam / den) ** 2
    if gs.ndim == 0:
        return float(gs), float(gi)
    return gs, gi


def pump_strength_for_gain(target_peak_gain, kappa):
    """lambda giving a peak power gain ``target_peak_gain`` at w = delta = 0."""
    if not target_peak_gain >= 1:
        raise InvalidTarget("target gain must be >= 1")
    g = math.sqrt(target_peak_gain)
    return 0.25 * kappa * math.sqrt((g - 1) / (g + 1))


@dataclass(frozen=True)
class GainProfile:
    frequencies: np.ndarray
    gain: np.ndarray
    idler_gain: np.ndarray

    @property
    def peak_gain(self):
        return float(np.max(self.gain))

    @property
    def peak_frequency(self):
        return float(self.frequencies[int(np.argmax(self.gain))])

    @property
    def gain_db(self):
        return 10 * np.log10(self.gain)

    @property
    def idler_gain_db(self):
        with np.errstate(divide="ignore"):
            return 10 * np.log10(self.idler_gain)


def gain_bandwidth(profile, threshold_db):
    """Width of the contiguous band around the peak where gain >= threshold.

    Band edges are interpolated linearly in dB between grid points; a band
    that reaches the end of the grid stops there.
    """
    f = np.asarray(profile.frequencies, dtype=float)
    if f.size == 0:
        raise InvalidSpec("empty gain profile")
    g = 10 * np.log10(np.asarray(profile.gain, dtype=float))
    i = int(np.argmax(g))
    if g[i] < threshold_db:
        raise BelowThreshold(f"peak gain {g[i]:.3f} dB below {threshold_db} dB")

    def edge(j, step):
        while 0 <= j + step < f.size and g[j + step] >= threshold_db:
            j += step
        k = j + step
        if not 0 <= k < f.size:
            return f[j]
        t = (g[j] - threshold_db) / (g[j] - g[k])
        return f[j] + t * (f[k] - f[j])

    return float(edge(i, 1) - edge(i, -1))


def rwa_profile(r, kappa, frequencies, lam=None, delta=None):
    """Rotating-wave gain over signal frequencies (Hz) for a pumped resonator."""
    f = np.asarray(frequencies, dtype=float)
    half_pump = r.pump_omega / 2
    if lam is None:
        lam = lambda_from_modulation(r)
    if delta is None:
        delta = resonant_frequency(r) - half_pump
    gs, gi = rwa_gain(2 * np.pi * f - half_pump, kappa, lam, delta)
    return GainProfile(f, np.atleast_1d(gs), np.atleast_1d(gi))


# ---------------------------------------------------------------------------
# embedded model
# ---------------------------------------------------------------------------

def _resonator_admittance(r, w, l_total):
    return 1j * w * r.capacitance + 1.0 / (1j * w * l_total)


def _embedding_terms(r, env, signal_f):
    """Pump-independent pieces of the embedded solution for ``signal_f``."""
    fs = np.asarray(signal_f, dtype=float)
    ws = 2 * np.pi * fs
    wi = r.pump_omega - ws
    if np.any(wi <= 0):
        raise IdlerOutOfRange("idler frequency w_p - w_s must be positive")
    lj = squid_inductance(r)
    lt = lj + r.geometric_inductance
    z_s = env.impedance(fs)
    z_i = env.impedance(wi / (2 * np.pi))
    terms = {
        "shape": fs.shape, "ws": ws, "wi": wi, "lj": lj, "z_s": z_s, "z_i": z_i,
        "y_res_s": _resonator_admittance(r, ws, lt),
        "y_total_i": _resonator_admittance(r, wi, lt) + 1.0 / z_i,
        "abcd": None,
    }
    if isinstance(env, TaperEnvironment):
        terms["abcd"] = env.abcd(fs).matrices
        terms["z0"] = env.source_impedance
    return terms


def _embedded_from_terms(t, eps):
    ws, z_s, z_i = t["ws"], t["z_s"], t["z_i"]
    mix = eps / (2 * t["lj"])
    y_eff = t["y_res_s"] - mix * mix / (ws * t["wi"] * np.conj(t["y_total_i"]))
    if t["abcd"] is not None:
        # carry the terminating admittance back to the source plane
        m = t["abcd"]
        z_in = (m[:, 0, 0] + m[:, 0, 1] * np.ravel(y_eff)) / (m[:, 1, 0] + m[:, 1, 1] * np.ravel(y_eff))
        gamma = ((z_in - t["z0"]) / (z_in + t["z0"])).reshape(t["shape"])
    else:
        gamma = (1 - y_eff * np.conj(z_s)) / (1 + y_eff * z_s)
    # idler power into the environment over available signal power
    v_ratio = mix / (ws * np.abs(t["y_total_i"]) * np.abs(1 + z_s * y_eff))
    idler = 4 * np.real(1.0 / z_i) * np.real(z_s) * v_ratio ** 2
    return np.abs(gamma) ** 2, idler


def embedded_response(r, env, signal_f):
    """Signal reflection gain and idler conversion gain against ``env``.

    Returns ``(signal_gain, idler_gain)`` as power ratios referred to the
    available power of the incoming signal.
    """
    gain, idler = _embedded_from_terms(_embedding_terms(r, env, signal_f), r.pump_amplitude)
    if gain.ndim == 0:
        return float(gain), float(idler)
    return gain, idler


def embedded_gain(r, env, signal_f):
    return embedded_response(r, env, signal_f)[0]


def embedded_profile(r, env, frequencies):
    f = np.asarray(frequencies, dtype=float)
    gs, gi = embedded_response(r, env, f)
    return GainProfile(f, gs, gi)


def tune_pump_amplitude(r, env, frequencies, target_peak_db, eps_max=0.99, n_scan=2000):
    """Pump amplitude for which the embedded peak gain over ``frequencies`` hits the target.

    Scans eps upward on a uniform grid and refines the first crossing, so the
    result sits below the oscillation threshold.
    """
    terms = _embedding_terms(r, env, frequencies)

    def excess(eps):
        g = _embedded_from_terms(terms, eps)[0]
        return 10 * np.log10(np.max(g)) - target_peak_db

    lo = 0.0
    if excess(lo) >= 0:
        return 0.0
    for hi in np.linspace(0.0, eps_max, n_scan + 1)[1:]:
        if excess(hi) >= 0:
            return brentq(excess, lo, hi, xtol=1e-14, rtol=1e-13)
        lo = hi
    raise InvalidTarget("target gain not reached below eps_max")


def saturation_scaling(c1, z1, c2, z2):
    """Relative saturation power of design 2 over design 1, dB (P_sat ~ C/Z0)."""
    if min(c1, z1, c2, z2) <= 0:
        raise InvalidGeometry("capacitances and impedances must be positive")
    return 10 * math.log10((c2 / z2) / (c1 / z1))


def tuning_curve(r, fluxes):
    """Resonance frequency in Hz for each flux bias (units of the flux quantum)."""
    return resonant_frequency(r, np.asarray(fluxes, dtype=float)) / (2 * np.pi)

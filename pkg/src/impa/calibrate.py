"""Parameter extraction from measured or synthetic data."""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from . import noise
from .errors import DegenerateData, DomainError, NoCompression, NonConvergence, NonMonotonic, PoorFit
from .lm import levenberg_marquardt


@dataclass
class FitResult:
    params: dict
    units: dict
    residual_norm: float
    converged: bool
    iterations: int
    gradient_norm: float = float("nan")
    stderr: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.params[name]

    def to_dict(self):
        out = {
            "params": dict(self.params),
            "units": dict(self.units),
            "residual_norm": self.residual_norm,
            "converged": self.converged,
            "iterations": self.iterations,
            "gradient_norm": self.gradient_norm,
        }
        if self.stderr:
            out["stderr"] = dict(self.stderr)
        if self.extras:
            out["extras"] = dict(self.extras)
        return out


@dataclass(frozen=True)
class FluxSweepData:
    """Resonance frequency (Hz) against coil bias (any unit).

    ``linewidth`` optionally carries the measured total linewidth kappa/2pi
    (Hz) at each point.  It is what makes the capacitance identifiable.
    """

    bias: np.ndarray
    frequency: np.ndarray
    linewidth: np.ndarray = None
    sigma: np.ndarray = None

    def __post_init__(self):
        b = np.asarray(self.bias, dtype=float)
        f = np.asarray(self.frequency, dtype=float)
        if b.shape != f.shape or b.ndim != 1:
            raise DegenerateData("bias and frequency columns must match")
        if b.size < 6:
            raise DegenerateData("tuning-curve fit needs at least 6 rows")
        object.__setattr__(self, "bias", b)
        object.__setattr__(self, "frequency", f)
        for name in ("linewidth", "sigma"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=float)
                if v.shape != f.shape:
                    raise DegenerateData(f"{name} column length mismatch")
                object.__setattr__(self, name, v)


@dataclass(frozen=True)
class StarkDephasingData:
    """Stark shift (rad/s) and dephasing rate (1/s) per probe power (dBm)."""

    power_dbm: np.ndarray
    delta_ac: np.ndarray
    gamma_phi: np.ndarray

    def __post_init__(self):
        arrs = [np.asarray(a, dtype=float) for a in (self.power_dbm, self.delta_ac, self.gamma_phi)]
        if len({a.shape for a in arrs}) != 1 or arrs[0].ndim != 1:
            raise DegenerateData("Stark table columns must match")
        if arrs[0].size < 3:
            raise DegenerateData("Stark calibration needs at least 3 rows")
        if np.any(arrs[1] < 0) or np.any(arrs[2] < 0):
            raise DomainError("Stark shift and dephasing rate must be non-negative")
        for name, a in zip(("power_dbm", "delta_ac", "gamma_phi"), arrs):
            object.__setattr__(self, name, a)


# ---------------------------------------------------------------------------
# tuning curve
# ---------------------------------------------------------------------------

TUNING_PARAMS = ("josephson_inductance", "capacitance", "geometric_inductance",
                 "flux_scale", "flux_offset", "asymmetry")
TUNING_UNITS = {"josephson_inductance": "H", "capacitance": "F", "geometric_inductance": "H",
                "flux_scale": "flux quanta per bias unit", "flux_offset": "flux quanta",
                "asymmetry": "dimensionless"}
# internal units: pH, pF, pH, -, -, -
_TUNING_SCALE = np.array([1e-12, 1e-12, 1e-12, 1.0, 1.0, 1.0])


def _tuning_model_ghz(p, bias):
    lj, c, lgeo, a, b, d = p
    F = np.pi * (a * bias + b)
    factor = np.sqrt(np.cos(F) ** 2 + d * d * np.sin(F) ** 2)
    # pH * pF = 1e-24 s^2
    return 1e3 / (2 * np.pi * np.sqrt(c * (lj / factor + lgeo)))


def fit_tuning_curve(data, initial_guess, environment_impedance=None, fixed=None, max_iter=500):
    """Fit the flux-tuning relation with an affine bias-to-flux map.

    ``initial_guess`` maps parameter names (SI) to starting values; at least
    ``flux_scale`` and ``flux_offset`` and the inductance are needed.  The
    curve fixes only the products C*L_J and C*L_geo, so the capacitance must
    come either from linewidth data (kappa = 1/(C Z0), with
    ``environment_impedance`` = Z0) or from ``fixed``.
    """
    fixed = dict(fixed or {})
    unknown = (set(initial_guess) | set(fixed)) - set(TUNING_PARAMS)
    if unknown:
        raise DomainError(f"unknown tuning parameters: {sorted(unknown)}")
    use_linewidth = data.linewidth is not None and environment_impedance is not None
    if not use_linewidth and "capacitance" not in fixed:
        raise DegenerateData(
            "frequency data alone fixes only C*L_J: give linewidths with an environment "
            "impedance, or fix the capacitance")
    defaults = {"geometric_inductance": 0.0, "asymmetry": 0.01}
    start = {**defaults, **initial_guess, **fixed}
    missing = [n for n in TUNING_PARAMS if n not in start]
    if missing:
        raise DomainError(f"initial guess lacks {missing}")
    p_all = np.array([start[n] for n in TUNING_PARAMS], dtype=float) / _TUNING_SCALE
    free = np.array([n not in fixed for n in TUNING_PARAMS])

    bias = data.bias
    span = np.ptp(bias)
    if abs(p_all[3]) * span < 0.5:
        raise DegenerateData("sweep covers less than half a flux period at the initial flux scale")
    f_ghz = data.frequency / 1e9
    weights = 1.0 / (data.sigma / 1e9) if data.sigma is not None else np.ones_like(f_ghz)
    if use_linewidth:
        kappa_ghz = data.linewidth / 1e9
        z0 = float(environment_impedance)

    def full(x):
        p = p_all.copy()
        p[free] = x
        return p

    def residual(x):
        p = full(x)
        res = (_tuning_model_ghz(p, bias) - f_ghz) * weights
        if use_linewidth:
            model_kappa = 1e3 / (2 * np.pi * p[1] * z0)
            res = np.concatenate([res, (model_kappa - kappa_ghz) * weights])
        return res

    result = levenberg_marquardt(residual, p_all[free], max_iter=max_iter)
    p = full(result.x)
    if abs(p[3]) * span < 0.5:
        raise DegenerateData("fitted sweep covers less than half a flux period")
    if not result.converged:
        raise NonConvergence(f"tuning-curve fit did not converge: {result.message}")
    p[5] = abs(p[5])
    values = p * _TUNING_SCALE
    cov = result.covariance()
    err = np.zeros(len(TUNING_PARAMS))
    err[free] = np.sqrt(np.clip(np.diag(cov), 0, None))
    err *= _TUNING_SCALE
    return FitResult(
        params=dict(zip(TUNING_PARAMS, values.tolist())),
        units=dict(TUNING_UNITS),
        residual_norm=float(np.linalg.norm(result.residual)),
        converged=True,
        iterations=result.iterations,
        gradient_norm=result.gradient_norm,
        stderr=dict(zip(TUNING_PARAMS, err.tolist())),
        extras={"fixed": sorted(fixed)},
    )


def tuning_normal_matrix_condition(bias, params):
    """Condition number of the column-normalized normal matrix for the core
    tuning parameters (L_J, a, b, L_geo) at ``params`` (SI dict)."""
    p = np.array([params[n] for n in TUNING_PARAMS], dtype=float) / _TUNING_SCALE
    idx = [0, 2, 3, 4]
    cols = []
    for j in idx:
        h = 1e-6 * max(abs(p[j]), 1e-3)
        pp, pm = p.copy(), p.copy()
        pp[j] += h
        pm[j] -= h
        cols.append((_tuning_model_ghz(pp, bias) - _tuning_model_ghz(pm, bias)) / (2 * h))
    J = np.column_stack(cols)
    J = J / np.linalg.norm(J, axis=0)
    return float(np.linalg.cond(J.T @ J))


# ---------------------------------------------------------------------------
# reflection resonance
# ---------------------------------------------------------------------------

def reflection_model(f, f_r, kappa_ext, kappa_int):
    """S11 = 1 - k_ext / (i (f - f_r) + (k_ext + k_int)/2), all in the same frequency unit."""
    return 1 - kappa_ext / (1j * (np.asarray(f) - f_r) + 0.5 * (kappa_ext + kappa_int))


def fit_reflection_resonance(freq_hz, s11, max_iter=500):
    """Fit a single-port reflection resonance; returns angular quantities."""
    f = np.asarray(freq_hz, dtype=float)
    s = np.asarray(s11, dtype=complex)
    if f.shape != s.shape or f.size < 5:
        raise PoorFit("reflection trace needs at least 5 matching points")
    if np.ptp(f) == 0:
        raise PoorFit("reflection trace has zero frequency span")
    order = np.argsort(f)
    f, s = f[order], s[order]

    depth = np.abs(1 - s) ** 2
    i = int(np.argmax(depth))
    f0 = f[i]
    above = np.nonzero(depth >= 0.5 * depth[i])[0]
    kappa0 = max(f[above[-1]] - f[above[0]], 2 * np.min(np.diff(f)))
    kext0 = min(0.5 * kappa0 * np.sqrt(depth[i]), kappa0)
    kint0 = max(kappa0 - kext0, 0.05 * kappa0)

    # fit in MHz relative to the initial resonance guess
    x_mhz = (f - f0) / 1e6

    def residual(p):
        d = reflection_model(x_mhz, p[0], p[1], p[2]) - s
        return np.concatenate([d.real, d.imag])

    p0 = np.array([0.0, kext0 / 1e6, kint0 / 1e6])
    result = levenberg_marquardt(residual, p0, max_iter=max_iter, typical=[kappa0 / 1e6, kappa0 / 1e6, kappa0 / 1e6])
    if not result.converged:
        raise NonConvergence(f"reflection fit did not converge: {result.message}")
    df, kext, kint = result.x
    kappa = kext + kint
    scale = np.linalg.norm(1 - s)
    rel = np.linalg.norm(result.residual) / scale if scale > 0 else np.inf
    if rel > 0.1:
        raise PoorFit(f"relative residual {rel:.3g} exceeds 10%")
    if np.ptp(f) < 5 * abs(kappa) * 1e6:
        raise PoorFit("trace spans fewer than 5 linewidths")
    two_pi = 2 * np.pi
    err = np.sqrt(np.clip(np.diag(result.covariance()), 0, None)) * 1e6 * two_pi
    params = {
        "omega_r": two_pi * (f0 + df * 1e6),
        "kappa_ext": two_pi * kext * 1e6,
        "kappa_int": two_pi * kint * 1e6,
        "kappa_r": two_pi * kappa * 1e6,
    }
    return FitResult(
        params=params,
        units={k: "rad/s" for k in params},
        residual_norm=float(np.linalg.norm(result.residual)),
        converged=True,
        iterations=result.iterations,
        gradient_norm=result.gradient_norm,
        stderr={"omega_r": err[0], "kappa_ext": err[1], "kappa_int": err[2]},
        extras={"relative_residual": rel},
    )


# ---------------------------------------------------------------------------
# photon-number calibration
# ---------------------------------------------------------------------------

def chi_nbar_from_stark_dephasing(delta_ac, gamma_phi, kappa_r):
    """Invert Delta_ac = 2 chi n and Gamma_phi = 8 chi^2 n / kappa_r."""
    d = np.asarray(delta_ac, dtype=float)
    g = np.asarray(gamma_phi, dtype=float)
    if np.any(d <= 0) or np.any(g <= 0) or not kappa_r > 0:
        raise DomainError("Stark shift, dephasing rate and linewidth must be positive")
    chi = g * kappa_r / (4 * d)
    n_bar = d / (2 * chi)
    if chi.ndim == 0:
        return float(chi), float(n_bar)
    return chi, n_bar


def fit_stark_dephasing(data, kappa_r, omega_r=None):
    """Common dispersive shift from all rows; photon number per row.

    Gamma_phi / Delta_ac = 4 chi / kappa_r, so chi follows from the slope of
    a line through the origin.  With ``omega_r`` the photon numbers are also
    converted to power arriving at the device.
    """
    d, g = data.delta_ac, data.gamma_phi
    if not kappa_r > 0:
        raise DomainError("kappa_r must be positive")
    if np.all(d == 0):
        raise DomainError("all Stark shifts are zero")
    slope = float(d @ g / (d @ d))
    if slope <= 0:
        raise DomainError("dephasing does not grow with the Stark shift")
    chi = slope * kappa_r / 4
    n_bar = d / (2 * chi)
    resid = g - slope * d
    extras = {"power_dbm": data.power_dbm.tolist(), "n_bar": n_bar.tolist()}
    if omega_r is not None:
        with np.errstate(divide="ignore"):
            p = noise.watts_to_dbm([noise.photon_flux_power(omega_r, kappa_r, n) for n in n_bar])
        extras["p_device_dbm"] = p.tolist()
    return FitResult(
        params={"chi": chi},
        units={"chi": "rad/s"},
        residual_norm=float(np.linalg.norm(resid)),
        converged=True,
        iterations=1,
        extras=extras,
    )


def fit_attenuation(pairs):
    """Constant line attenuation A in P_device = P_source - A (dB)."""
    pairs = np.asarray(list(pairs), dtype=float)
    if pairs.ndim != 2 or pairs.shape[0] < 2:
        raise DegenerateData("attenuation fit needs at least 2 power pairs")
    diff = pairs[:, 0] - pairs[:, 1]
    att = float(np.mean(diff))
    resid = diff - att
    n = diff.size
    return FitResult(
        params={"attenuation": att},
        units={"attenuation": "dB"},
        residual_norm=float(np.linalg.norm(resid)),
        converged=True,
        iterations=1,
        stderr={"attenuation": float(np.std(diff, ddof=1) / math.sqrt(n))},
    )


def compression_point(gain_vs_power):
    """Input power (dBm) where gain falls 1 dB below its small-signal value.

    The small-signal gain is the mean over the lowest-power tenth of the
    sweep, so the sweep should start well below compression.  The crossing
    is interpolated linearly between the bracketing samples.
    """
    data = np.asarray(list(gain_vs_power), dtype=float)
    if data.ndim != 2 or data.shape[0] < 4:
        raise DegenerateData("compression extraction needs at least 4 points")
    data = data[np.argsort(data[:, 0])]
    p, g = data[:, 0], data[:, 1]
    # small-signal gain from the lowest-power tenth of the sweep
    g0 = float(np.mean(g[:max(1, len(g) // 10)]))
    if np.any(g > g0 + 0.25):
        warnings.warn("gain rises above its small-signal value mid-sweep", NonMonotonic, stacklevel=2)
    target = g0 - 1.0
    below = np.nonzero(g <= target)[0]
    if below.size == 0:
        raise NoCompression("gain never drops 1 dB within the sweep")
    k = int(below[0])
    if g[k] == target or k == 0:
        return float(p[k])
    t = (g[k - 1] - target) / (g[k - 1] - g[k])
    return float(p[k - 1] + t * (p[k] - p[k - 1]))

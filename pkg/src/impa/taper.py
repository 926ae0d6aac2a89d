"""Klopfenstein taper synthesis and its coplanar-waveguide realization.

The taper is described by the log-impedance profile

    ln Z(z) = 0.5 ln(Z1 Z2) + (G0 / cosh A) A^2 phi(2z/L - 1, A)

with G0 = 0.5 ln(Z2/Z1), A = acosh(|G0| / Gmax) and the line length chosen so
that beta*L = A at the cutoff frequency.  The classic form is kept, including
the small impedance steps at both ends.
"""

from dataclasses import dataclass, field
import json
import math

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from . import _kernels
from .errors import (BracketError, DesignInfeasible, DomainError, InvalidGeometry,
                     InvalidSpec, WidthSolveFailure)

DEFAULT_SUBSTRATE_EPS_R = 11.9
DEFAULT_GAP = 3e-6
DEFAULT_N_SAMPLES = 401
DEFAULT_WIDTH_BRACKET = (1e-7, 1e-2)


@dataclass(frozen=True)
class TaperDesignSpec:
    """Inputs of a Klopfenstein design, SI units.

    ``eps_eff`` defaults to the quasi-static CPW value ``(eps_r + 1) / 2``.
    """

    z_source: float
    z_load: float
    gamma_max: float
    f_cutoff: float
    eps_eff: float = None
    gap: float = DEFAULT_GAP
    substrate_eps_r: float = DEFAULT_SUBSTRATE_EPS_R

    def __post_init__(self):
        if not (self.z_source > 0 and self.z_load > 0):
            raise InvalidSpec("impedances must be positive")
        if self.z_source == self.z_load:
            raise InvalidSpec("source and load impedance are equal; no taper needed")
        if not self.gamma_max > 0:
            raise InvalidSpec("gamma_max must be positive")
        if not self.f_cutoff > 0:
            raise InvalidSpec("f_cutoff must be positive")
        if not self.gap > 0:
            raise InvalidSpec("gap must be positive")
        if not self.substrate_eps_r >= 1:
            raise InvalidSpec("substrate_eps_r must be >= 1")
        if self.eps_eff is None:
            object.__setattr__(self, "eps_eff", 0.5 * (self.substrate_eps_r + 1.0))
        if not self.eps_eff > 1:
            raise InvalidSpec("eps_eff must exceed 1")

    @property
    def gamma0(self):
        return 0.5 * math.log(self.z_load / self.z_source)

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise InvalidSpec(f"unknown taper keys: {sorted(unknown)}")
        try:
            return cls(**{k: float(v) for k, v in data.items() if v is not None})
        except TypeError as exc:
            raise InvalidSpec(str(exc)) from None

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class TaperProfile:
    """Sampled taper: position, impedance and centre-trace width per sample."""

    z: np.ndarray
    impedance: np.ndarray
    width: np.ndarray
    length: float
    ripple: float
    gamma0: float
    spec: TaperDesignSpec = field(default=None, compare=False)

    def __post_init__(self):
        if self.z.ndim != 1 or self.z.size < 2:
            raise InvalidSpec("profile needs at least two samples")
        if np.any(np.diff(self.z) <= 0):
            raise InvalidSpec("sample positions must be strictly increasing")
        if np.any(self.impedance <= 0):
            raise InvalidSpec("impedances must be positive")

    @property
    def samples(self):
        return list(zip(self.z.tolist(), self.impedance.tolist(), self.width.tolist()))

    def impedance_at(self, z):
        """Impedance at arbitrary positions.

        Uses the closed-form profile when the design is attached, otherwise
        interpolates ln Z between samples.
        """
        z = np.asarray(z, dtype=float)
        if self.spec is not None:
            return _klopfenstein_impedance(z / self.length, self.spec, self.ripple)
        return np.exp(np.interp(z, self.z, np.log(self.impedance)))


def ripple_parameter(spec):
    """A = acosh(|G0| / gamma_max)."""
    g0 = abs(spec.gamma0)
    # a ratio within rounding of 1 gives a vanishing taper, treated as the boundary
    if g0 / spec.gamma_max <= 1 + 1e-12:
        raise DesignInfeasible(
            f"gamma_max={spec.gamma_max:.6g} >= |gamma0|={g0:.6g}: a step already meets the target")
    return math.acosh(g0 / spec.gamma_max)


def klopfenstein_phi(x, A, tol=1e-10):
    """phi(x, A) = integral_0^x I1(A sqrt(1-y^2)) / (A sqrt(1-y^2)) dy.

    Accepts a scalar or an array of ``x`` in [-1, 1].  Absolute error is held
    below ``tol`` by adaptive Gauss-Kronrod refinement.
    """
    if A < 0:
        raise DomainError("A must be non-negative")
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(xs) > 1.0):
        raise DomainError("|x| must not exceed 1")
    out = _kernels.klopfenstein_phi(xs, A, tol)
    return float(out[0]) if scalar else out.reshape(np.shape(x))


def taper_length(spec, A=None):
    """Physical length for which beta*L = A at the cutoff frequency."""
    if A is None:
        A = ripple_parameter(spec)
    return A * SPEED_OF_LIGHT / (2.0 * math.pi * spec.f_cutoff * math.sqrt(spec.eps_eff))


def _klopfenstein_impedance(u, spec, A):
    # u is the normalized position z/L in [0, 1]
    u = np.asarray(u, dtype=float)
    if np.any((u < -1e-12) | (u > 1 + 1e-12)):
        raise DomainError("position outside the taper")
    x = np.clip(2.0 * u - 1.0, -1.0, 1.0)
    phi = klopfenstein_phi(x, A)
    mean = 0.5 * math.log(spec.z_source * spec.z_load)
    return np.exp(mean + spec.gamma0 / math.cosh(A) * A * A * phi)


def impedance_profile(spec, n_samples=DEFAULT_N_SAMPLES, bracket=DEFAULT_WIDTH_BRACKET):
    """Sample the taper uniformly on [0, L] and realize each sample as a CPW width."""
    if n_samples < 2:
        raise InvalidSpec("n_samples must be >= 2")
    A = ripple_parameter(spec)
    length = taper_length(spec, A)
    z = np.linspace(0.0, length, int(n_samples))
    imp = _klopfenstein_impedance(z / length, spec, A)
    try:
        width = cpw_width_for_impedance(imp, spec.gap, spec.eps_eff, bracket)
    except BracketError as exc:
        raise WidthSolveFailure(f"CPW width inversion failed: {exc}") from None
    return TaperProfile(z=z, impedance=imp, width=width, length=length,
                        ripple=A, gamma0=spec.gamma0, spec=spec)


def analytic_input_reflection(spec, f):
    """Small-reflection magnitude |G(f)| of the ideal Klopfenstein taper."""
    A = ripple_parameter(spec)
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise DomainError("frequency must be non-negative")
    bl = A * f / spec.f_cutoff
    arg = bl * bl - A * A
    shape = np.where(arg >= 0, np.cos(np.sqrt(np.abs(arg))), np.cosh(np.sqrt(np.abs(arg))))
    out = np.abs(spec.gamma0 * shape / math.cosh(A))
    return float(out) if out.ndim == 0 else out


def cpw_impedance(width, gap, eps_eff):
    """Quasi-static CPW impedance, zero metal thickness, infinite substrate.

    Z0 = 30 pi / sqrt(eps_eff) * K(k') / K(k) with k = w / (w + 2 s).
    """
    width = np.asarray(width, dtype=float)
    gap = np.asarray(gap, dtype=float)
    if np.any(width <= 0) or np.any(gap <= 0):
        raise InvalidGeometry("width and gap must be positive")
    if np.any(np.asarray(eps_eff) < 1):
        raise InvalidGeometry("eps_eff must be >= 1")
    k = width / (width + 2.0 * gap)
    # (1 - k)(1 + k) avoids cancellation for wide traces
    kp = np.sqrt(2.0 * gap / (width + 2.0 * gap) * (1.0 + k))
    K, Kp = _kernels.ellipk_pair(k, kp)
    out = 30.0 * math.pi / np.sqrt(eps_eff) * np.asarray(Kp) / np.asarray(K)
    return float(out) if out.ndim == 0 else out


def cpw_width_for_impedance(target_z, gap, eps_eff, bracket=DEFAULT_WIDTH_BRACKET, rtol=1e-10):
    """Centre width giving ``target_z`` at fixed gap, by bisection in log width.

    ``target_z`` may be an array; all targets are bisected together.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0 < lo < hi:
        raise BracketError("bracket must satisfy 0 < lo < hi")
    target = np.asarray(target_z, dtype=float)
    z_hi = cpw_impedance(lo, gap, eps_eff)
    z_lo = cpw_impedance(hi, gap, eps_eff)
    outside = (target < z_lo) | (target > z_hi) | ~np.isfinite(target)
    if np.any(outside):
        bad = target[outside].flat[0] if target.ndim else float(target)
        raise BracketError(
            f"target {bad:.6g} ohm outside [{z_lo:.6g}, {z_hi:.6g}] ohm spanned by the bracket")
    a = np.full(target.shape, math.log(lo))
    b = np.full(target.shape, math.log(hi))
    m = 0.5 * (a + b)
    for _ in range(200):
        m = 0.5 * (a + b)
        zm = cpw_impedance(np.exp(m), gap, eps_eff)
        if np.all(np.abs(zm - target) <= rtol * target):
            break
        # impedance falls as the trace widens
        high = zm > target
        a = np.where(high, m, a)
        b = np.where(high, b, m)
    out = np.exp(m)
    return float(out) if out.ndim == 0 else out

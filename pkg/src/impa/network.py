"""Two-port algebra for lossless nonuniform lines.

ABCD matrices are stored as complex arrays of shape ``(n_freq, 2, 2)`` with
port 1 on the left.  For the taper, port 1 is the 50 ohm source side and
port 2 the low-impedance side where the resonator sits.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from . import _kernels
from .errors import GridMismatch, InvalidGeometry, IoError, SingularConversion

DEFAULT_GRID = (0.1e9, 12e9, 2001)
DEFAULT_SEGMENTS = 400


@dataclass(frozen=True)
class FrequencyGrid:
    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=float))
        if pts.ndim != 1:
            raise GridMismatch("frequency grid must be one-dimensional")
        if pts.size and (np.any(pts <= 0) or np.any(np.diff(pts) <= 0)):
            raise GridMismatch("frequencies must be positive and strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def linspace(cls, start=DEFAULT_GRID[0], stop=DEFAULT_GRID[1], n=DEFAULT_GRID[2]):
        return cls(np.linspace(start, stop, int(n)))

    def __len__(self):
        return self.points.size

    @property
    def omega(self):
        return 2.0 * math.pi * self.points


@dataclass(frozen=True)
class TwoPortABCD:
    matrices: np.ndarray
    frequencies: np.ndarray = None

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=complex)
        if m.ndim == 2:
            m = m[None]
        if m.shape[1:] != (2, 2):
            raise GridMismatch("ABCD data must have shape (n, 2, 2)")
        object.__setattr__(self, "matrices", m)

    @property
    def determinant(self):
        m = self.matrices
        return m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]

    def reversed(self):
        """Same network seen from port 2 (valid for reciprocal networks)."""
        m = self.matrices
        det = self.determinant
        out = np.empty_like(m)
        out[:, 0, 0] = m[:, 1, 1] / det
        out[:, 0, 1] = m[:, 0, 1] / det
        out[:, 1, 0] = m[:, 1, 0] / det
        out[:, 1, 1] = m[:, 0, 0] / det
        return TwoPortABCD(out, self.frequencies)


@dataclass(frozen=True)
class ScatteringData:
    frequencies: np.ndarray
    s: np.ndarray
    port_refs: tuple = (50.0, 50.0)

    def __post_init__(self):
        z1, z2 = (float(z) for z in self.port_refs)
        if not (z1 > 0 and z2 > 0):
            raise InvalidGeometry("reference impedances must be real and positive")
        object.__setattr__(self, "port_refs", (z1, z2))
        object.__setattr__(self, "frequencies", np.asarray(self.frequencies, dtype=float))
        object.__setattr__(self, "s", np.asarray(self.s, dtype=complex))

    @property
    def s11(self):
        return self.s[:, 0, 0]

    @property
    def s21(self):
        return self.s[:, 1, 0]

    @property
    def s12(self):
        return self.s[:, 0, 1]

    @property
    def s22(self):
        return self.s[:, 1, 1]


def segment_abcd(z0, beta_l, frequencies=None):
    """Uniform lossless line of impedance ``z0`` and electrical length ``beta_l``."""
    if not z0 > 0:
        raise InvalidGeometry("line impedance must be positive")
    bl = np.atleast_1d(np.asarray(beta_l, dtype=float))
    c, s = np.cos(bl), np.sin(bl)
    m = np.empty(bl.shape + (2, 2), dtype=complex)
    m[:, 0, 0] = c
    m[:, 0, 1] = 1j * z0 * s
    m[:, 1, 0] = 1j * s / z0
    m[:, 1, 1] = c
    return TwoPortABCD(m, frequencies)


def cascade(chain):
    """Matrix product in port order, port-1 side first."""
    chain = list(chain)
    if not chain:
        raise GridMismatch("cannot cascade an empty chain")
    out = chain[0].matrices.copy()
    freqs = chain[0].frequencies
    for item in chain[1:]:
        if item.matrices.shape != out.shape:
            raise GridMismatch("two-ports have different frequency counts")
        if freqs is not None and item.frequencies is not None and not np.array_equal(freqs, item.frequencies):
            raise GridMismatch("two-ports are defined on different frequency grids")
        if freqs is None:
            freqs = item.frequencies
        out = out @ item.matrices
    return TwoPortABCD(out, freqs)


def abcd_to_s(m, z_ref1, z_ref2):
    """ABCD to S with real, possibly unequal, reference impedances."""
    if not (z_ref1 > 0 and z_ref2 > 0):
        raise InvalidGeometry("reference impedances must be positive")
    a, b = m.matrices[:, 0, 0], m.matrices[:, 0, 1]
    c, d = m.matrices[:, 1, 0], m.matrices[:, 1, 1]
    z1, z2 = float(z_ref1), float(z_ref2)
    den = a * z2 + b + c * z1 * z2 + d * z1
    if np.any(np.abs(den) < 1e-300):
        raise SingularConversion("ABCD to S denominator vanishes")
    root = 2.0 * math.sqrt(z1 * z2)
    s = np.empty_like(m.matrices)
    s[:, 0, 0] = (a * z2 + b - c * z1 * z2 - d * z1) / den
    s[:, 0, 1] = root * (a * d - b * c) / den
    s[:, 1, 0] = root / den
    s[:, 1, 1] = (-a * z2 + b - c * z1 * z2 + d * z1) / den
    freqs = m.frequencies if m.frequencies is not None else np.arange(len(s), dtype=float)
    return ScatteringData(freqs, s, (z1, z2))


def s_to_abcd(sdata):
    """Inverse of :func:`abcd_to_s`."""
    z1, z2 = sdata.port_refs
    s11, s12, s21, s22 = sdata.s11, sdata.s12, sdata.s21, sdata.s22
    if np.any(np.abs(s21) < 1e-300):
        raise SingularConversion("S21 vanishes; no ABCD representation")
    root = 2.0 * s21 * math.sqrt(z1 * z2)
    m = np.empty_like(sdata.s)
    m[:, 0, 0] = ((1 + s11) * (1 - s22) + s12 * s21) * z1 / root
    m[:, 0, 1] = ((1 + s11) * (1 + s22) - s12 * s21) * z1 * z2 / root
    m[:, 1, 0] = ((1 - s11) * (1 - s22) - s12 * s21) / root
    m[:, 1, 1] = ((1 - s11) * (1 + s22) + s12 * s21) * z2 / root
    return TwoPortABCD(m, sdata.frequencies)


def renormalize(sdata, z_ref=50.0):
    """Re-reference both ports to a single real impedance."""
    return abcd_to_s(s_to_abcd(sdata), z_ref, z_ref)


def propagation_constant(frequencies, eps_eff):
    """Dispersionless beta = 2 pi f sqrt(eps_eff) / c."""
    return 2.0 * math.pi * np.asarray(frequencies, dtype=float) * math.sqrt(eps_eff) / SPEED_OF_LIGHT


def segment_impedances(profile, n_segments):
    """Midpoint impedance of each of ``n_segments`` equal-length pieces."""
    mids = (np.arange(n_segments) + 0.5) * profile.length / n_segments
    return profile.impedance_at(mids)


def taper_abcd(profile, grid, n_segments=DEFAULT_SEGMENTS, eps_eff=None):
    if n_segments < 10:
        raise InvalidGeometry("n_segments must be >= 10")
    if eps_eff is None:
        if profile.spec is None:
            raise InvalidGeometry("eps_eff required for a profile without a design spec")
        eps_eff = profile.spec.eps_eff
    freqs = _grid_points(grid)
    theta = propagation_constant(freqs, eps_eff) * profile.length / n_segments
    m = _kernels.cascade_segments(segment_impedances(profile, n_segments), theta)
    return TwoPortABCD(m, freqs)


def taper_sparams(profile, grid, n_segments=DEFAULT_SEGMENTS, eps_eff=None, port_refs=None):
    """S-parameters of the discretized taper.

    ``port_refs`` defaults to the design's source and load impedances, so the
    end steps of the profile show up as reference mismatch.
    """
    if port_refs is None:
        if profile.spec is None:
            raise InvalidGeometry("port_refs required for a profile without a design spec")
        port_refs = (profile.spec.z_source, profile.spec.z_load)
    return abcd_to_s(taper_abcd(profile, grid, n_segments, eps_eff), *port_refs)


def input_impedance(m, termination):
    """Z_in = (A Zt + B) / (C Zt + D) looking into port 1 with port 2 terminated."""
    a, b = m.matrices[:, 0, 0], m.matrices[:, 0, 1]
    c, d = m.matrices[:, 1, 0], m.matrices[:, 1, 1]
    zt = np.asarray(termination)
    return (a * zt + b) / (c * zt + d)


def environment_impedance(profile, grid, termination=50.0, eps_eff=None, n_segments=DEFAULT_SEGMENTS):
    """Impedance seen by the resonator, looking from port 2 into the taper."""
    if not np.all(np.real(termination) > 0):
        raise InvalidGeometry("termination must have a positive real part")
    m = taper_abcd(profile, grid, n_segments, eps_eff).reversed()
    return input_impedance(m, termination)


def _grid_points(grid):
    if isinstance(grid, FrequencyGrid):
        return grid.points
    pts = np.atleast_1d(np.asarray(grid, dtype=float))
    if np.any(pts <= 0):
        raise GridMismatch("frequencies must be positive")
    return pts


# ---------------------------------------------------------------------------
# file output
# ---------------------------------------------------------------------------

def _fmt(x):
    return f"{x:.12g}"


def touchstone_text(sdata, z_ref=50.0):
    if len(sdata.frequencies) == 0:
        raise IoError("refusing to write a Touchstone file with no frequency points")
    if sdata.port_refs != (z_ref, z_ref):
        sdata = renormalize(sdata, z_ref)
    lines = ["! two-port S-parameters, real/imaginary", f"# GHz S RI R {_fmt(z_ref)}"]
    order = ((0, 0), (1, 0), (0, 1), (1, 1))
    for f, s in zip(sdata.frequencies, sdata.s):
        vals = [_fmt(f / 1e9)]
        for i, j in order:
            vals += [_fmt(s[i, j].real), _fmt(s[i, j].imag)]
        lines.append(" ".join(vals))
    return "\n".join(lines) + "\n"


def write_touchstone(sdata, path, z_ref=50.0):
    from .io import atomic_write_text

    atomic_write_text(path, touchstone_text(sdata, z_ref))


def read_touchstone(path):
    """Parse a v1 ``.s2p`` file (RI, MA or DB data; Hz to GHz units)."""
    scale = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
    unit, fmt, z_ref = 1e9, "MA", 50.0
    rows = []
    try:
        with open(path) as fh:
            for raw in fh:
                line = raw.split("!", 1)[0].strip()
                if not line:
                    continue
                if line.startswith("#"):
                    tokens = line[1:].upper().split()
                    for i, tok in enumerate(tokens):
                        if tok in scale:
                            unit = scale[tok]
                        elif tok in ("RI", "MA", "DB"):
                            fmt = tok
                        elif tok == "R":
                            z_ref = float(tokens[i + 1])
                    continue
                rows.extend(float(t) for t in line.split())
    except (OSError, ValueError) as exc:
        raise IoError(str(exc)) from None
    if not rows or len(rows) % 9:
        raise IoError("malformed two-port Touchstone data")
    data = np.array(rows).reshape(-1, 9)
    p, q = data[:, 1::2], data[:, 2::2]
    if fmt == "RI":
        vals = p + 1j * q
    elif fmt == "MA":
        vals = p * np.exp(1j * np.deg2rad(q))
    else:
        vals = 10 ** (p / 20) * np.exp(1j * np.deg2rad(q))
    s = np.empty((len(data), 2, 2), dtype=complex)
    s[:, 0, 0], s[:, 1, 0], s[:, 0, 1], s[:, 1, 1] = vals.T
    return ScatteringData(data[:, 0] * unit, s, (z_ref, z_ref))


def sparams_db_csv(sdata):
    lines = ["freq_hz,s11_db,s21_db"]
    with np.errstate(divide="ignore"):
        s11 = 20 * np.log10(np.abs(sdata.s11))
        s21 = 20 * np.log10(np.abs(sdata.s21))
    for f, a, b in zip(sdata.frequencies, s11, s21):
        lines.append(f"{_fmt(f)},{_fmt(a)},{_fmt(b)}")
    return "\n".join(lines) + "\n"

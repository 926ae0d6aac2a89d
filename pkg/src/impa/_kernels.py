"""Hot numeric kernels.

Each kernel has a numba implementation (``*_nb``) and a pure-numpy
implementation (``*_np``).  The public wrappers at the bottom dispatch on
:data:`impa._accel.USE_NUMBA`.  The two Klopfenstein quadratures use
different refinement strategies on purpose so they can cross-check each other.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, jit, prange

# Gauss-Kronrod 7/15 nodes on [-1, 1], positive half incl. centre.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_ASYMPTOTIC_SWITCH = 30.0
_MAX_INTERVALS = 4096


# ---------------------------------------------------------------------------
# I1(z)/z
# ---------------------------------------------------------------------------

@jit
def i1_over_x_nb(z):
    z = abs(z)
    if z < _ASYMPTOTIC_SWITCH:
        q = 0.25 * z * z
        term = 0.5
        total = 0.5
        k = 0
        while term > 1e-17 * total:
            k += 1
            term *= q / (k * (k + 1.0))
            total += term
        return total
    # I1(z) ~ e^z / sqrt(2 pi z) * sum_k (-1)^k a_k / z^k, mu = 4
    s = 1.0
    term = 1.0
    for k in range(1, 25):
        term *= -(4.0 - (2.0 * k - 1.0) ** 2) / (8.0 * k * z)
        s += term
        if abs(term) < 1e-17 * abs(s):
            break
    return math.exp(z) / math.sqrt(2.0 * math.pi * z) * s / z


def i1_over_x_np(z):
    z = np.abs(np.asarray(z, dtype=float))
    out = np.empty_like(z)
    small = z < _ASYMPTOTIC_SWITCH
    if np.any(small):
        zs = z[small]
        q = 0.25 * zs * zs
        term = np.full_like(zs, 0.5)
        total = term.copy()
        k = 0
        while np.any(term > 1e-17 * total):
            k += 1
            term = term * q / (k * (k + 1.0))
            total += term
        out[small] = total
    if np.any(~small):
        zl = z[~small]
        s = np.ones_like(zl)
        term = np.ones_like(zl)
        for k in range(1, 25):
            term = term * (-(4.0 - (2.0 * k - 1.0) ** 2) / (8.0 * k * zl))
            s += term
        out[~small] = np.exp(zl) / np.sqrt(2.0 * np.pi * zl) * s / zl
    return out


# ---------------------------------------------------------------------------
# Klopfenstein phi(x, A) = int_0^x I1(A sqrt(1-y^2)) / (A sqrt(1-y^2)) dy
# ---------------------------------------------------------------------------

@jit
def _klop_integrand_nb(y, a):
    return i1_over_x_nb(a * math.sqrt(max(0.0, 1.0 - y * y)))


@jit
def _gk15_nb(lo, hi, a, xgk, wgk, wg):
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    fc = _klop_integrand_nb(c, a)
    rk = fc * wgk[7]
    rg = fc * wg[3]
    for j in range(7):
        dx = h * xgk[j]
        f1 = _klop_integrand_nb(c - dx, a)
        f2 = _klop_integrand_nb(c + dx, a)
        rk += wgk[j] * (f1 + f2)
        if j % 2 == 1:
            rg += wg[j // 2] * (f1 + f2)
    return rk * h, abs((rk - rg) * h)


@jit
def _phi_scalar_nb(x, a, tol, xgk, wgk, wg):
    if x == 0.0:
        return 0.0
    sign = 1.0 if x > 0 else -1.0
    top = abs(x)
    # the integrand peaks at y = 0, so this makes tol relative for large A
    budget = tol * max(1.0, i1_over_x_nb(a)) / top
    los = np.empty(_MAX_INTERVALS)
    his = np.empty(_MAX_INTERVALS)
    los[0] = 0.0
    his[0] = top
    n = 1
    total = 0.0
    while n > 0:
        n -= 1
        lo = los[n]
        hi = his[n]
        val, err = _gk15_nb(lo, hi, a, xgk, wgk, wg)
        # error budget proportional to interval length keeps the sum below tol
        if err <= budget * (hi - lo) or hi - lo < 1e-13 * top or n + 2 >= _MAX_INTERVALS:
            total += val
        else:
            mid = 0.5 * (lo + hi)
            los[n] = lo
            his[n] = mid
            los[n + 1] = mid
            his[n + 1] = hi
            n += 2
    return sign * total


@jit(parallel=True)
def klopfenstein_phi_nb(xs, a, tol):
    out = np.empty(xs.shape[0])
    for i in prange(xs.shape[0]):
        out[i] = _phi_scalar_nb(xs[i], a, tol, _XGK, _WGK, _WG)
    return out


def _gk15_np(lo, hi, a):
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    nodes = np.concatenate([-_XGK[:7], [0.0], _XGK[6::-1]])
    y = c[:, None] + h[:, None] * nodes[None, :]
    f = i1_over_x_np(a * np.sqrt(np.clip(1.0 - y * y, 0.0, None)))
    wk = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[6::-1]])
    wg = np.zeros(15)
    wg[[1, 3, 5]] = _WG[:3]
    wg[7] = _WG[3]
    wg[[9, 11, 13]] = _WG[2::-1]
    rk = f @ wk
    rg = f @ wg
    return rk * h, np.abs(rk - rg) * h


def klopfenstein_phi_np(xs, a, tol):
    """Vectorized cumulative quadrature over the sorted set of |x| breakpoints."""
    xs = np.asarray(xs, dtype=float)
    mags = np.abs(xs)
    top = mags.max() if mags.size else 0.0
    if top == 0.0:
        return np.zeros_like(xs)
    breaks = np.unique(np.concatenate([[0.0], mags]))
    lo_all, hi_all = breaks[:-1], breaks[1:]
    owner = np.arange(lo_all.size)
    pieces = np.zeros(lo_all.size)
    lo, hi, idx = lo_all, hi_all, owner
    budget = tol * max(1.0, float(i1_over_x_np(a))) / top
    while lo.size:
        val, err = _gk15_np(lo, hi, a)
        done = (err <= budget * (hi - lo)) | (hi - lo < 1e-13 * top)
        np.add.at(pieces, idx[done], val[done])
        lo, hi, idx = lo[~done], hi[~done], idx[~done]
        mid = 0.5 * (lo + hi)
        lo, hi, idx = np.concatenate([lo, mid]), np.concatenate([mid, hi]), np.concatenate([idx, idx])
    cumulative = np.concatenate([[0.0], np.cumsum(pieces)])
    return np.sign(xs) * cumulative[np.searchsorted(breaks, mags)]


# ---------------------------------------------------------------------------
# complete elliptic integral of the first kind by the AGM
# ---------------------------------------------------------------------------

@jit
def _agm_nb(a, b):
    for _ in range(64):
        if abs(a - b) <= 1e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


@jit
def ellipk_pair_nb(k, kp):
    """Return (K(k), K(k')) with the complementary modulus supplied explicitly."""
    return math.pi / (2.0 * _agm_nb(1.0, kp)), math.pi / (2.0 * _agm_nb(1.0, k))


def ellipk_pair_np(k, kp):
    a = np.ones(np.broadcast(k, kp).shape)
    b = np.asarray(kp, dtype=float) * a
    c = np.ones_like(a)
    d = np.asarray(k, dtype=float) * a
    for _ in range(64):
        if np.all(np.abs(a - b) <= 1e-16 * a) and np.all(np.abs(c - d) <= 1e-16 * c):
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        c, d = 0.5 * (c + d), np.sqrt(c * d)
    return np.pi / (a + b), np.pi / (c + d)


# ---------------------------------------------------------------------------
# ABCD cascade of uniform lossless segments
# ---------------------------------------------------------------------------

@jit(parallel=True)
def cascade_segments_nb(z_seg, theta):
    """Product of lossless line ABCD matrices, port-1 side first.

    ``z_seg`` holds one impedance per segment, ``theta`` one electrical length
    per frequency (all segments share it).
    """
    nf = theta.shape[0]
    out = np.empty((nf, 2, 2), dtype=np.complex128)
    for i in prange(nf):
        c = math.cos(theta[i])
        s = math.sin(theta[i])
        a = 1.0 + 0j
        b = 0j
        cc = 0j
        d = 1.0 + 0j
        for z in z_seg:
            sb = 1j * z * s
            sc = 1j * s / z
            a, b, cc, d = a * c + b * sc, a * sb + b * c, cc * c + d * sc, cc * sb + d * c
        out[i, 0, 0] = a
        out[i, 0, 1] = b
        out[i, 1, 0] = cc
        out[i, 1, 1] = d
    return out


def cascade_segments_np(z_seg, theta):
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)
    s = np.sin(theta)
    a = np.ones(theta.shape, dtype=complex)
    b = np.zeros(theta.shape, dtype=complex)
    cc = np.zeros(theta.shape, dtype=complex)
    d = np.ones(theta.shape, dtype=complex)
    for z in np.asarray(z_seg, dtype=float):
        sb = 1j * z * s
        sc = 1j * s / z
        a, b, cc, d = a * c + b * sc, a * sb + b * c, cc * c + d * sc, cc * sb + d * c
    out = np.empty(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = cc
    out[..., 1, 1] = d
    return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def klopfenstein_phi(xs, a, tol=1e-10):
    xs = np.ascontiguousarray(np.atleast_1d(np.asarray(xs, dtype=float)))
    if USE_NUMBA:
        return klopfenstein_phi_nb(xs, float(a), float(tol))
    return klopfenstein_phi_np(xs, float(a), float(tol))


def ellipk_pair(k, kp):
    if USE_NUMBA and np.ndim(k) == 0 and np.ndim(kp) == 0:
        return ellipk_pair_nb(float(k), float(kp))
    return ellipk_pair_np(k, kp)


def cascade_segments(z_seg, theta):
    z_seg = np.ascontiguousarray(np.asarray(z_seg, dtype=float))
    theta = np.ascontiguousarray(np.atleast_1d(np.asarray(theta, dtype=float)))
    if USE_NUMBA:
        return cascade_segments_nb(z_seg, theta)
    return cascade_segments_np(z_seg, theta)


def i1_over_x(z):
    return i1_over_x_np(z)

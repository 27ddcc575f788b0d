"""Hot inner loops.

Each kernel exists twice: a numba-compiled loop and a vectorised numpy
version. The public names resolve to one of them according to
``lattc._accel.USE_NUMBA``; both stay importable so they can be
benchmarked and cross-checked against each other.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = [
    "pohst_factor",
    "enumerate_ball",
    "sequence_exp_over_r",
    "sequence_power_over_gamma",
]


def pohst_factor(gram: np.ndarray) -> np.ndarray:
    """Return the quadratic-form factor used by sphere enumeration.

    The result ``q`` satisfies
    ``z G z^T = sum_i q[i, i] * (z_i + sum_{j>i} q[i, j] z_j)**2``.
    """
    u = np.linalg.cholesky(gram).T  # upper, G = u^T u
    d = gram.shape[0]
    q = np.zeros((d, d))
    for i in range(d):
        q[i, i] = u[i, i] ** 2
        for j in range(i + 1, d):
            q[i, j] = u[i, j] / u[i, i]
    return q


# ---------------------------------------------------------------- enumeration


@njit(cache=True)
def _pohst_walk(q, r2, out, fill):
    d = q.shape[0]
    x = np.zeros(d, dtype=np.int64)
    hi = np.zeros(d, dtype=np.int64)
    rem = np.zeros(d + 1)
    cen = np.zeros(d)
    slack = 1e-10 * (1.0 + r2)

    i = d - 1
    rem[i] = r2
    cen[i] = 0.0
    half = math.sqrt(r2 / q[i, i])
    x[i] = int(math.ceil(-half - 1e-9)) - 1
    hi[i] = int(math.floor(half + 1e-9))
    count = 0
    while True:
        x[i] += 1
        if x[i] > hi[i]:
            i += 1
            if i == d:
                break
            continue
        diff = x[i] - cen[i]
        left = rem[i] - q[i, i] * diff * diff
        if left < -slack:
            continue
        if i == 0:
            nz = False
            for k in range(d):
                if x[k] != 0:
                    nz = True
                    break
            if nz:
                if fill:
                    for k in range(d):
                        out[count, k] = x[k]
                count += 1
            continue
        i -= 1
        rem[i] = left if left > 0.0 else 0.0
        c = 0.0
        for j in range(i + 1, d):
            c -= q[i, j] * x[j]
        cen[i] = c
        half = math.sqrt(rem[i] / q[i, i])
        x[i] = int(math.ceil(c - half - 1e-9)) - 1
        hi[i] = int(math.floor(c + half + 1e-9))
    return count


def _enumerate_ball_numba(q: np.ndarray, r2: float) -> np.ndarray:
    d = q.shape[0]
    dummy = np.zeros((1, d), dtype=np.int64)
    n = _pohst_walk(q, r2, dummy, False)
    out = np.zeros((n, d), dtype=np.int64)
    if n:
        _pohst_walk(q, r2, out, True)
    return out


def _enumerate_ball_numpy(q: np.ndarray, r2: float) -> np.ndarray:
    d = q.shape[0]
    chunks = []
    slack = 1e-10 * (1.0 + r2)

    def level(i, prefix, rem):
        # prefix holds coordinates i+1..d-1
        c = -sum(q[i, j] * prefix[j - i - 1] for j in range(i + 1, d))
        half = math.sqrt(max(rem, 0.0) / q[i, i])
        lo = math.ceil(c - half - 1e-9)
        hi = math.floor(c + half + 1e-9)
        if hi < lo:
            return
        xs = np.arange(lo, hi + 1, dtype=np.int64)
        left = rem - q[i, i] * (xs - c) ** 2
        keep = left >= -slack
        xs, left = xs[keep], left[keep]
        if i == 0:
            block = np.empty((xs.size, d), dtype=np.int64)
            block[:, 0] = xs
            if d > 1:
                block[:, 1:] = prefix
            chunks.append(block)
            return
        for xi, li in zip(xs.tolist(), left.tolist()):
            level(i - 1, (xi,) + prefix, li)

    level(d - 1, (), r2)
    if not chunks:
        return np.zeros((0, d), dtype=np.int64)
    pts = np.concatenate(chunks)
    return pts[np.any(pts != 0, axis=1)]


def enumerate_ball(q: np.ndarray, r2: float) -> np.ndarray:
    """Integer coordinates ``z != 0`` with ``z G z^T <= r2`` (up to rounding slack)."""
    if USE_NUMBA:
        return _enumerate_ball_numba(q, float(r2))
    return _enumerate_ball_numpy(q, float(r2))


# ----------------------------------------------------------- periodic sequences


@njit(cache=True)
def _seq_exp_over_r_numba(pts, period, kappa, n_max, min_gap):
    # sum_i sum_{j != i} exp(-kappa r_ij) / r_ij over the periodic extension
    npts = pts.shape[0]
    total = 0.0
    closest = np.inf
    for i in range(npts):
        for k in range(npts):
            base = pts[k] - pts[i]
            for n in range(-n_max, n_max + 1):
                if n == 0 and k == i:
                    continue
                r = abs(base + n * period)
                if r < closest:
                    closest = r
                if r < min_gap:
                    continue
                total += math.exp(-kappa * r) / r
    return total, closest


def _seq_exp_over_r_numpy(pts, period, kappa, n_max, min_gap):
    ns = np.arange(-n_max, n_max + 1)
    r = np.abs(pts[None, :, None] - pts[:, None, None] + period * ns[None, None, :])
    npts = pts.size
    self_mask = np.zeros_like(r, dtype=bool)
    self_mask[np.arange(npts), np.arange(npts), n_max] = True
    r = r[~self_mask]
    closest = r.min() if r.size else np.inf
    r = r[r >= min_gap]
    return float(np.sum(np.exp(-kappa * r) / r)), float(closest)


def sequence_exp_over_r(pts, period, kappa, n_max, min_gap=1e-12):
    """Periodic double sum of ``exp(-kappa r) / r`` and the closest pair distance."""
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    if USE_NUMBA:
        return _seq_exp_over_r_numba(pts, float(period), float(kappa), int(n_max), float(min_gap))
    return _seq_exp_over_r_numpy(pts, float(period), float(kappa), int(n_max), float(min_gap))


@njit(cache=True)
def _seq_power_over_gamma_numba(pts, period, logx, n_max):
    npts = pts.shape[0]
    total = 0.0
    for i in range(npts):
        for k in range(npts):
            base = pts[k] - pts[i]
            for n in range(-n_max, n_max + 1):
                if n == 0 and k == i:
                    continue
                r = abs(base + n * period)
                total += math.exp(r * logx - math.lgamma(r + 1.0))
    return total


def _seq_power_over_gamma_numpy(pts, period, logx, n_max):
    from scipy.special import gammaln

    ns = np.arange(-n_max, n_max + 1)
    r = np.abs(pts[None, :, None] - pts[:, None, None] + period * ns[None, None, :])
    npts = pts.size
    mask = np.ones_like(r, dtype=bool)
    mask[np.arange(npts), np.arange(npts), n_max] = False
    r = r[mask]
    return float(np.sum(np.exp(r * logx - gammaln(r + 1.0))))


def sequence_power_over_gamma(pts, period, logx, n_max):
    """Periodic double sum of ``x**r / Gamma(r + 1)`` with ``logx = ln x``."""
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    if USE_NUMBA:
        return _seq_power_over_gamma_numba(pts, float(period), float(logx), int(n_max))
    return _seq_power_over_gamma_numpy(pts, float(period), float(logx), int(n_max))

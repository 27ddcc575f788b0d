"""Lattice-logarithm, periodic-sequence logarithm/exponential, two-lattice energy.

All logarithm sums are written with the decay rate ``kappa = -ln(1 - x)``
so that ``(1 - x)^r = exp(-kappa r)`` stays accurate when ``1 - x``
underflows or ``x`` sits next to 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import CoincidentPoints, DomainError, NonConvergence
from .lattice import Lattice, PeriodicSequence
from .special import SumResult, _as_vectorized, _shells, theta
from .tails import Envelope, exp_over_r, gaussian, radius_for, tail_bound


@dataclass(frozen=True)
class LogArgument:
    """A point ``x`` of ``(0, 1)``; ``kappa = -ln(1 - x)`` is kept alongside."""

    x: float
    kappa: float

    def __init__(self, x: float, kappa: float | None = None):
        if kappa is None:
            x = float(x)
            if not 0.0 < x < 1.0:
                raise DomainError(f"x must lie strictly inside (0, 1), got {x}")
            kappa = -math.log1p(-x)
        object.__setattr__(self, "x", float(x))
        object.__setattr__(self, "kappa", float(kappa))

    @classmethod
    def from_rate(cls, kappa: float) -> "LogArgument":
        """The argument with ``1 - x = exp(-kappa)``."""
        if not kappa > 0 or not math.isfinite(kappa):
            raise DomainError(f"decay rate must be positive and finite, got {kappa}")
        return cls(-math.expm1(-kappa), kappa)

    @property
    def base_decay(self) -> float:
        return math.exp(-self.kappa)


def _as_arg(x) -> LogArgument:
    return x if isinstance(x, LogArgument) else LogArgument(x)


def log_lattice(lat: Lattice, x, tol: float = 1e-12) -> SumResult:
    """``log_L(x) = -1/2 sum_{p != 0} (1 - x)^|p| / |p|``; the remainder is below ``tol``."""
    arg = _as_arg(x)
    g = exp_over_r(arg.kappa, 0.5)
    env = Envelope(lat)
    R = radius_for(g, env, tol, r_min=lat.first_minimum())
    if not math.isfinite(R):
        raise NonConvergence(f"log_lattice: no finite cutoff for x={arg.x}")
    s = _shells(lat, R)
    r = np.sqrt(s.norm_sq)
    value = -0.5 * float(np.sum(s.multiplicity * np.exp(-arg.kappa * r) / r))
    tb = tail_bound(g, R, env, n_inside=s.n_vectors)
    return SumResult(value, tb, s.n_vectors, R)


def _sequence_cutoff(N: int, bound, tol: float) -> int:
    n = 2
    while bound((n - 1) * N) > tol:
        n *= 2
        if n > 1 << 40:
            raise NonConvergence("sequence sum does not decay")
    lo = n // 2
    while lo + 1 < n:
        mid = (lo + n) // 2
        if bound((mid - 1) * N) > tol:
            lo = mid
        else:
            n = mid
    return n


def log_sequence(seq: PeriodicSequence, x, tol: float = 1e-12, multiplier: float = 1.0) -> SumResult:
    """``-1/(4N) sum_{i=1..N} sum_{j != i} (1-x)^|t_j - t_i| / |t_j - t_i|``, taken literally.

    ``multiplier`` rescales the result (default 1); the equidistant value
    of the literal sum is ``ln(x) / 2``.
    """
    arg = _as_arg(x)
    N = seq.period
    pts = np.asarray(seq.points)
    k = arg.kappa
    # points beyond R on either side, N per unit period, each term <= e^{-kR}/R
    scale = abs(multiplier) * N / (2.0 * (-math.expm1(-k * N)))

    def bound(R):
        return scale * math.exp(-k * R) / R if R > 0 else math.inf

    n_max = _sequence_cutoff(N, bound, tol)
    total, closest = kernels.sequence_exp_over_r(pts, N, k, n_max)
    if closest < 1e-12:
        raise CoincidentPoints(f"two points of the periodic sequence are {closest:.3g} apart")
    value = -multiplier * total / (4.0 * N)
    return SumResult(value, bound((n_max - 1) * N), int(N * N * (2 * n_max + 1) - N), (n_max - 1) * N)


def exp_sequence(seq: PeriodicSequence, x: float, tol: float = 1e-12, multiplier: float = 1.0) -> SumResult:
    """``1/(2N) sum_i sum_{j != i} x^|t_j - t_i| / Gamma(|t_j - t_i| + 1)``, as printed."""
    if not x > 0:
        raise DomainError("x must be positive")
    N = seq.period
    if not seq.is_strict():
        raise CoincidentPoints("periodic sequence has coincident points")
    pts = np.asarray(seq.points)
    logx = math.log(x)
    r_floor = 2.0 * x + 2.0  # terms decrease and shrink by 2^-N per period beyond here

    def bound(R):
        if R < r_floor:
            return math.inf
        psi = math.exp(R * logx - math.lgamma(R + 1.0))
        return abs(multiplier) * N * psi / (1.0 - 2.0 ** (-N))

    n_max = _sequence_cutoff(N, bound, tol)
    total = kernels.sequence_power_over_gamma(pts, N, logx, n_max)
    value = multiplier * total / (2.0 * N)
    return SumResult(value, bound((n_max - 1) * N), int(N * N * (2 * n_max + 1) - N), (n_max - 1) * N)


@dataclass(frozen=True)
class AffineGrowth:
    """Truncation hint for ``f``: ``f(r) >= f0 + slope * r`` for all ``r >= 0``."""

    f0: float
    slope: float


def affine(a: float, b: float):
    """``f(r) = a + b r`` together with its exact growth hint."""
    return (lambda r: a + b * np.asarray(r, dtype=float)), AffineGrowth(a, b)


def pair_energy(lat: Lattice, lam: Lattice, f, growth: AffineGrowth, mode: str = "swapped", tol: float = 1e-10) -> SumResult:
    """``E_f[L, Lam] = sum_{q in Lam} log_L(1 - exp(-f(|q|^2)))``.

    ``mode="direct"`` evaluates one lattice-logarithm per shell of ``Lam``;
    ``mode="swapped"`` evaluates
    ``-1/2 sum_{p in L, p != 0} |p|^-1 sum_{q in Lam} exp(-|p| f(|q|^2))``.
    Both forms carry certified remainders given the growth hint.
    """
    if lat.dim != lam.dim:
        raise DomainError("lattices must have the same dimension")
    if not growth.f0 > 0 or not growth.slope > 0:
        raise DomainError("growth hint needs f(0) > 0 and a positive slope")
    fv = _as_vectorized(f)
    if mode == "swapped":
        return _pair_swapped(lat, lam, fv, growth, tol)
    if mode == "direct":
        return _pair_direct(lat, lam, fv, growth, tol)
    raise DomainError(f"unknown mode {mode!r}")


def _pair_direct(lat, lam, fv, growth, tol):
    env_q = Envelope(lam)
    lam_p = lat.first_minimum()
    # -log_L(1 - e^{-f0}) dominates every inner sum
    r0 = log_lattice(lat, LogArgument.from_rate(growth.f0), tol=tol * 1e-3)
    c0 = -r0.value + r0.tail_bound
    gq = gaussian(lam_p * growth.slope, c0)
    Rq = radius_for(gq, env_q, tol / 2)
    sq = _shells(lam, Rq)
    nq = np.concatenate(([0.0], sq.norm_sq))
    mq = np.concatenate(([1], sq.multiplicity))
    inner_tol = tol / 2 / float(mq.sum())
    value = 0.0
    inner_tail = 0.0
    used = 0
    for n, m in zip(nq, mq):
        r = log_lattice(lat, LogArgument.from_rate(float(fv(np.array([n]))[0])), tol=inner_tol)
        value += m * r.value
        inner_tail += m * r.tail_bound
        used += m * r.terms_used
    outer_tail = tail_bound(gq, Rq, env_q, n_inside=sq.n_vectors)
    return SumResult(value, inner_tail + outer_tail, used, Rq)


def _pair_swapped(lat, lam, fv, growth, tol):
    env_p, env_q = Envelope(lat), Envelope(lam)
    lam_p = lat.first_minimum()
    f0, c = growth.f0, growth.slope
    # sum_q exp(-|p| (f(|q|^2) - f0)) <= theta_Lam(lam_p c / pi) for every p != 0
    th = theta(lam, lam_p * c / math.pi, tol=1e-6)
    big_theta = th.value + th.tail_bound
    gp = exp_over_r(f0, 0.5 * big_theta)
    Rp = radius_for(gp, env_p, tol / 2, r_min=lam_p)
    sp = _shells(lat, Rp)
    rp = np.sqrt(sp.norm_sq)
    weight = 0.5 * sp.multiplicity * np.exp(-f0 * rp) / rp
    inner_target = tol / 2 / max(float(weight.sum()), 1e-300)
    # radius for the shortest |p|; longer p need proportionally less (scale 1/sqrt|p|)
    Rq0 = radius_for(gaussian(lam_p * c), env_q, inner_target)
    sq = _shells(lam, Rq0)
    nq = np.concatenate(([0.0], sq.norm_sq))
    mq = np.concatenate(([1], sq.multiplicity))
    fq = fv(nq)
    rq_max_sq = Rq0**2 * lam_p / rp
    mask = nq[None, :] <= rq_max_sq[:, None] * (1 + 1e-12)
    inner = np.where(mask, mq[None, :] * np.exp(-rp[:, None] * fq[None, :]), 0.0).sum(axis=1)
    value = -0.5 * float(np.sum(sp.multiplicity * inner / rp))
    inner_tail = tail_bound(gaussian(lam_p * c), Rq0, env_q) * float(weight.sum())
    outer_tail = tail_bound(gp, Rp, env_p, n_inside=sp.n_vectors)
    return SumResult(value, inner_tail + outer_tail, int(mask.sum()), Rp)

"""Deformed Dedekind eta of a lattice pair and its Casimir exponent.

``log E(L, Lam; m, t)`` is evaluated two ways: from the double q-product
over primitive vectors of ``Lam`` and vectors of ``L``, and from the
Casimir term plus a sum of lattice-logarithms. With the unique
factorisation ``u = n w`` of nonzero ``u`` in ``Lam`` the lattice-log sum
is exactly twice the product's second term, so the series form carries
``series_factor = 1/2`` by default. ``|L|`` in the Casimir prefactor is
read as the covolume of ``L``.
"""
from __future__ import annotations

import csv
import io
import math
import threading
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .errors import DegenerateNome, DomainError, NonConvergence, QuadratureFailure, Underflow
from .lattice import Lattice, dual, primitive_shells
from .llog import AffineGrowth, pair_energy
from .special import SumResult, _shells, theta
from .tails import Envelope, exp_over_r, gaussian, radius_for, tail_bound


@dataclass(frozen=True)
class EtaParams:
    m: float
    t: float
    tol: float = 1e-10
    quad_tol: float = 1e-10
    series_factor: float = 0.5

    def __post_init__(self):
        if not (self.m > 0 and self.t > 0):
            raise DomainError("m and t must be positive")
        if not (self.tol > 0 and self.quad_tol > 0):
            raise DomainError("tolerances must be positive")

    @property
    def q(self) -> float:
        return math.exp(-math.pi * self.t)


# ---------------------------------------------------------------- Casimir term

_delta_cache: dict = {}
_delta_lock = threading.Lock()


class _ThetaTable:
    """``theta(alpha)`` for ``alpha >= 1`` from one precomputed shell list."""

    def __init__(self, lat: Lattice, tol: float):
        env = Envelope(lat)
        R = radius_for(gaussian(math.pi), env, tol, r_min=math.sqrt(lat.dim / math.pi))
        s = _shells(lat, R)
        self.norm_sq = s.norm_sq
        self.mult = s.multiplicity.astype(float)
        self.lambda1_sq = float(s.norm_sq[0]) if len(s.norm_sq) else lat.first_minimum() ** 2

    def minus_one(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        e = np.exp(-math.pi * alpha[..., None] * self.norm_sq)
        return e @ self.mult


def _casimir_integrand(lat: Lattice, m: float, tol: float):
    d = lat.dim
    ld = dual(lat)
    th = _ThetaTable(lat, tol * 1e-3)
    thd = _ThetaTable(ld, tol * 1e-3)
    cov = lat.covolume
    a = 0.5 * (d - 1)

    def upper(s):  # s in [1, S]
        return s**a * np.exp(-math.pi * m * m / s) * thd.minus_one(s)

    def lower(u):  # s = 1/u, u in [1, U]; theta_{L*}(s) - 1 rewritten by Poisson
        poisson = cov * u ** (0.5 * d) * (1.0 + th.minus_one(u)) - 1.0
        return u ** (-a - 2.0) * np.exp(-math.pi * m * m * u) * poisson

    # s >= S: theta_{L*}(s) - 1 <= (theta_{L*}(1) - 1) exp(-pi (s - 1) lambda*^2)
    c_up = float(thd.minus_one(np.array(1.0))) * math.exp(math.pi * thd.lambda1_sq)
    rate_up = math.pi * thd.lambda1_sq

    def upper_tail(S):
        return c_up * quadrature.upper_incomplete(a, rate_up, S)

    # u >= U: integrand <= cov theta_L(1) u^{-3/2} exp(-pi m^2 u)
    c_lo = cov * (1.0 + float(th.minus_one(np.array(1.0))))
    rate_lo = math.pi * m * m

    def lower_tail(U):
        return c_lo * U**-1.5 * math.exp(-rate_lo * U) / rate_lo

    return upper, lower, upper_tail, lower_tail


def _horizon(tail, target):
    X = 2.0
    while tail(X) > target:
        X *= 1.5
        if X > 1e9:
            raise QuadratureFailure("integrand tail does not decay")
    return X


def casimir_delta(lat: Lattice, m: float, tol: float = 1e-10, scheme: str = "adaptive") -> SumResult:
    """``Delta_m(L) = -1/(8 pi covol^1/2) int_0^inf s^((d-1)/2) e^(-pi m^2/s) (theta_{L*}(s) - 1) ds``.

    The integral is split at ``s = 1``. Above, the integrand is used as is up
    to a cutoff where the exponential remainder is below ``tol``. Below,
    ``s = 1/u`` and ``theta_{L*}(1/u) - 1`` is replaced by its Poisson dual
    ``covol u^(d/2) theta_L(u) - 1``. ``tol`` is relative to the result.
    ``scheme`` selects adaptive bisection or fixed high-order panels.
    Results are cached per lattice, ``m``, ``tol`` and scheme.
    """
    if not m > 0:
        raise DomainError("m must be positive")
    key = (lat.fingerprint(), lat.dim, float(m), float(tol), scheme)
    with _delta_lock:
        hit = _delta_cache.get(key)
    if hit is not None:
        return hit
    upper, lower, upper_tail, lower_tail = _casimir_integrand(lat, m, tol)
    # scale for the relative tolerance from a cheap first pass
    S0 = _horizon(upper_tail, 1e-6)
    U0 = _horizon(lower_tail, 1e-6)
    rough = abs(quadrature.panels(upper, 1.0, S0, 16, 15)) + abs(quadrature.panels(lower, 1.0, U0, 16, 15))
    target = tol * max(rough, 1e-300)
    S = _horizon(upper_tail, target / 4)
    U = _horizon(lower_tail, target / 4)
    if scheme == "adaptive":
        hi_val, hi_err = quadrature.adaptive(upper, 1.0, S, target / 4)
        lo_val, lo_err = quadrature.adaptive(lower, 1.0, U, target / 4)
        err = hi_err + lo_err
    elif scheme == "panels":
        hi_val = quadrature.panels(upper, 1.0, S)
        lo_val = quadrature.panels(lower, 1.0, U)
        err = 0.0
    else:
        raise DomainError(f"unknown quadrature scheme {scheme!r}")
    integral = hi_val + lo_val
    pref = 1.0 / (8.0 * math.pi * math.sqrt(lat.covolume))
    bound = pref * (err + upper_tail(S) + lower_tail(U))
    res = SumResult(-pref * integral, bound, 0, S)
    with _delta_lock:
        _delta_cache.setdefault(key, res)
    return res


def casimir_delta_bessel(lat: Lattice, m: float, tol: float = 1e-12) -> float:
    """Closed-form check: each dual shell contributes ``2 (m/|y|)^((d+1)/2) K_{(d+1)/2}(2 pi m |y|)``."""
    from scipy.special import kv

    d = lat.dim
    ld = dual(lat)
    nu = 0.5 * (d + 1)
    R = 2.0 * ld.first_minimum()
    while True:
        s = _shells(ld, R)
        y = np.sqrt(s.norm_sq)
        terms = s.multiplicity * 2.0 * (m / y) ** nu * kv(nu, 2 * math.pi * m * y)
        total = float(np.sum(terms))
        outer = float(np.sum(terms[y > R / 1.5]))
        if outer <= tol * abs(total):
            break
        R *= 1.5
    return -total / (8.0 * math.pi * math.sqrt(lat.covolume))


# ------------------------------------------------------------- deformed eta


def _check_nome(params: EtaParams, lam_w: float):
    if math.exp(-math.pi * params.t * lam_w * params.m**2) >= 1.0 - 1e-15:
        raise DegenerateNome("q^(|w| m^2) is indistinguishable from 1; increase t*m^2")


def log_eta_product(lat: Lattice, lam: Lattice, params: EtaParams) -> SumResult:
    """Logarithm of the double q-product, Casimir prefactor included.

    ``pi t^((d+1)/2) Delta_m(L)`` plus
    ``sum_{w in P_Lam/+-} sum_{v in L} t^((d-1)/2) / (2|w|) ln(1 - q^(|w| (m^2 + |v|^2)))``.
    """
    if lat.dim != lam.dim:
        raise DomainError("lattices must have the same dimension")
    d, m, t, tol = lat.dim, params.m, params.t, params.tol
    lam_w = lam.first_minimum()
    _check_nome(params, lam_w)
    tau = t ** (0.5 * (d - 1))
    delta = casimir_delta(lat, m, params.quad_tol)
    first = math.pi * t ** (0.5 * (d + 1)) * delta.value

    log_factor = tau / (-math.expm1(-math.pi * t * lam_w * m * m))  # tau / (1 - q^(|w_min| m^2))
    th = theta(lat, t * lam_w, tol=1e-6)
    gw = exp_over_r(math.pi * t * m * m, 0.5 * log_factor * (th.value + th.tail_bound))
    env_w, env_v = Envelope(lam), Envelope(lat)
    Rw = radius_for(gw, env_w, tol / 3, r_min=lam_w)
    if not math.isfinite(Rw):
        raise NonConvergence("primitive-vector cutoff diverged")
    wn, wm = primitive_shells(lam, Rw)
    w = np.sqrt(wn)
    s_w = float(np.sum(wm * np.exp(-math.pi * t * m * m * w) / (2 * w)))
    inner_target = tol / 3 / max(log_factor * s_w, 1e-300)
    gv = gaussian(math.pi * t * lam_w)
    Rv0 = radius_for(gv, env_v, inner_target)
    sv = _shells(lat, Rv0)
    vn = np.concatenate(([0.0], sv.norm_sq))
    vm = np.concatenate(([1.0], sv.multiplicity))
    rv_sq = Rv0**2 * lam_w / w
    mask = vn[None, :] <= rv_sq[:, None] * (1 + 1e-12)
    expo = -math.pi * t * w[:, None] * (m * m + vn[None, :])
    terms = np.where(mask, vm[None, :] * np.log1p(-np.exp(expo)), 0.0)
    second = float(np.sum(wm * tau / (2 * w) * terms.sum(axis=1)))
    tb = (
        math.pi * t ** (0.5 * (d + 1)) * delta.tail_bound
        + tail_bound(gw, Rw, env_w)
        + log_factor * s_w * tail_bound(gv, Rv0, env_v)
    )
    return SumResult(first + second, tb, int(np.sum(wm[:, None] * mask * vm[None, :])), Rw)


def product_second_term(lat: Lattice, lam: Lattice, params: EtaParams) -> float:
    """The double-product part of :func:`log_eta_product` (Casimir term removed)."""
    d = lat.dim
    first = math.pi * params.t ** (0.5 * (d + 1)) * casimir_delta(lat, params.m, params.quad_tol).value
    return log_eta_product(lat, lam, params).value - first


def log_eta_series(lat: Lattice, lam: Lattice, params: EtaParams) -> SumResult:
    """``pi t^((d+1)/2) Delta_m(L) + series_factor t^((d-1)/2) sum_{p in L} log_Lam(1 - q^(m^2 + |p|^2))``.

    The lattice-log sum is the two-lattice energy with ``f(r) = pi t (m^2 + r)``,
    ``p = 0`` included.
    """
    if lat.dim != lam.dim:
        raise DomainError("lattices must have the same dimension")
    d, m, t = lat.dim, params.m, params.t
    _check_nome(params, lam.first_minimum())
    tau = t ** (0.5 * (d - 1))
    delta = casimir_delta(lat, m, params.quad_tol)
    first = math.pi * t ** (0.5 * (d + 1)) * delta.value
    a, b = math.pi * t * m * m, math.pi * t
    scale = abs(params.series_factor) * tau
    pe = pair_energy(lam, lat, lambda r: a + b * np.asarray(r), AffineGrowth(a, b), tol=params.tol / max(scale, 1e-300))
    value = first + params.series_factor * tau * pe.value
    tb = math.pi * t ** (0.5 * (d + 1)) * delta.tail_bound + scale * pe.tail_bound
    return SumResult(value, tb, pe.terms_used, pe.cutoff_radius)


# ------------------------------------------------------------ classical eta


def dedekind_eta(t: float, tol: float = 1e-14) -> SumResult:
    """``eta(it) = q^(1/24) prod_n (1 - q^n)`` with ``q = exp(-2 pi t)``."""
    if not t > 0:
        raise DomainError("t must be positive")
    if t < 1e-3:
        raise Underflow("eta(it) underflows for t < 1e-3")
    q = math.exp(-2 * math.pi * t)
    log_eta = -math.pi * t / 12.0
    n = 1
    while True:
        qn = q**n
        log_eta += math.log1p(-qn)
        # remaining terms: sum_{k>n} -ln(1-q^k) <= q^(n+1) / ((1-q)(1-q^(n+1)))
        rem = q ** (n + 1) / ((1 - q) * (1 - q ** (n + 1)))
        if rem < tol:
            break
        n += 1
    val = math.exp(log_eta)
    return SumResult(val, val * rem, n, float(n))


# --------------------------------------------------------------- m -> 0 probe


@dataclass(frozen=True)
class EtaLimitRow:
    m: float
    normalized_value: float
    eta_reference: float
    deviation: float


def eta_limit_experiment(t: float, m_list, tol: float = 1e-10, quad_tol: float = 1e-10) -> list[EtaLimitRow]:
    """Tabulate ``(2 pi m t)^(-1/2) E_{Z,Z}^(m)(it)`` against ``eta(it)``.

    No convergence is asserted; ``deviation`` is the signed difference.
    """
    from .lattice import named_lattice

    Z = named_lattice("zd:1")
    ref = dedekind_eta(t).value
    rows = []
    for m in m_list:
        p = EtaParams(m=float(m), t=float(t), tol=tol, quad_tol=quad_tol)
        le = log_eta_product(Z, Z, p).value
        norm = math.exp(le - 0.5 * math.log(2 * math.pi * m * t))
        rows.append(EtaLimitRow(float(m), norm, ref, norm - ref))
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "normalized_value", "eta_reference", "deviation"])
    for r in rows:
        w.writerow([repr(r.m), repr(r.normalized_value), repr(r.eta_reference), repr(r.deviation)])
    return buf.getvalue()

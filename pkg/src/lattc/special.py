"""Lattice theta function, Epstein zeta function and generic radial energies."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, EnumerationTooLarge, NonConvergence
from .lattice import Lattice, dual, unit_ball_volume
from .tails import Envelope, gaussian, radius_for, tail_bound

POISSON_THRESHOLD = 0.05


@dataclass(frozen=True)
class SumResult:
    value: float
    tail_bound: float
    terms_used: int
    cutoff_radius: float

    def to_dict(self) -> dict:
        return {k: float(v) if k != "terms_used" else int(v) for k, v in asdict(self).items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _shells(lat: Lattice, R: float):
    try:
        return lat.shells(R)
    except EnumerationTooLarge as exc:
        raise NonConvergence(str(exc)) from exc


def _theta_radius(lat: Lattice, alpha_min: float, tol: float) -> float:
    env = Envelope(lat)
    peak = math.sqrt(lat.dim / (math.pi * alpha_min))
    R = radius_for(gaussian(math.pi * alpha_min), env, tol, r_min=peak)
    if not math.isfinite(R):
        raise NonConvergence(f"no finite radius for theta at alpha={alpha_min}")
    return R


def theta_values(lat: Lattice, alphas, tol: float = 1e-12) -> np.ndarray:
    """Vectorised ``theta_L(alpha)`` over an array of ``alpha`` (direct shell sums)."""
    alphas = np.asarray(alphas, dtype=float)
    R = _theta_radius(lat, float(alphas.min()), tol)
    s = _shells(lat, R)
    terms = s.multiplicity[None, :] * np.exp(-math.pi * alphas.reshape(-1, 1) * s.norm_sq[None, :])
    return (1.0 + terms.sum(axis=1)).reshape(alphas.shape)


def theta(lat: Lattice, alpha: float, tol: float = 1e-10, poisson_threshold: float = POISSON_THRESHOLD) -> SumResult:
    """``theta_L(alpha) = sum_{p in L} exp(-pi alpha |p|^2)``.

    Shells are added in increasing norm until three consecutive shell
    terms past the Gaussian peak radius ``sqrt(d / (pi alpha))`` fall below
    ``tol * value`` and the certified remainder is below ``tol * value``.
    For ``alpha`` below ``poisson_threshold`` the dual lattice is summed
    instead.
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if not tol > 0:
        raise DomainError("tol must be positive")
    if alpha < poisson_threshold:
        ld = dual(lat)
        pref = alpha ** (-lat.dim / 2) / lat.covolume
        r = theta(ld, 1.0 / alpha, tol, poisson_threshold=0.0)
        return SumResult(pref * r.value, pref * r.tail_bound, r.terms_used, r.cutoff_radius)

    env = Envelope(lat)
    g = gaussian(math.pi * alpha)
    R = _theta_radius(lat, alpha, tol)
    peak_sq = lat.dim / (math.pi * alpha)
    for _ in range(60):
        s = _shells(lat, R)
        terms = s.multiplicity * np.exp(-math.pi * alpha * s.norm_sq)
        value = 1.0 + float(np.sum(terms))
        stop = _three_small(terms, s.norm_sq, tol * value, peak_sq)
        if stop is not None or len(terms) < 3:
            if stop is not None and stop + 1 < len(terms):
                # drop shells beyond the stopping point only if the bound allows
                R_stop = math.sqrt(s.norm_sq[stop])
                n_stop = int(s.multiplicity[: stop + 1].sum())
                tb_stop = tail_bound(g, R_stop, env, n_inside=n_stop)
                if tb_stop <= tol * value:
                    v = 1.0 + float(np.sum(terms[: stop + 1]))
                    return SumResult(v, tb_stop, n_stop, R_stop)
            tb = tail_bound(g, R, env, n_inside=s.n_vectors)
            if tb <= tol * value:
                return SumResult(value, tb, s.n_vectors, R)
        R *= 1.05
    raise NonConvergence("theta: stopping rule not met")


def _three_small(terms, norm_sq, thresh, peak_sq):
    """Index of the third of the first three consecutive shells below ``thresh`` past the peak."""
    small = (terms < thresh) & (norm_sq > peak_sq)
    run = 0
    for k, flag in enumerate(small.tolist()):
        run = run + 1 if flag else 0
        if run == 3:
            return k
    return None


def epstein_zeta(lat: Lattice, s: float, tol: float = 1e-10, max_vectors: float = 2e7) -> SumResult:
    """``zeta_L(s) = sum_{p != 0} |p|^-s`` for real ``s > d``.

    The shell sum up to ``R`` is completed by the continuum remainder
    ``d omega_d R_eff^(d-s) / ((s-d) covol)``, with ``R_eff`` the radius of
    the ball whose volume matches the number of points actually summed.
    ``tail_bound`` is the spread of this corrected estimate over
    ``[R/2, R]``, an error estimate rather than a certificate.
    """
    d = lat.dim
    if not s > d:
        raise DomainError(f"Epstein zeta needs s > d (got s={s}, d={d})")
    return _power_energy(lat, lambda r: r ** (-s / 2.0), s, tol, max_vectors)


def _power_energy(lat: Lattice, f, s: float, tol: float, max_vectors: float, scale_from_tail: bool = False) -> SumResult:
    d = lat.dim
    omega = unit_ball_volume(d)
    dens = d * omega / lat.covolume
    R = 16.0 * lat.covolume ** (1.0 / d)
    while True:
        if omega * R**d / lat.covolume > max_vectors:
            raise NonConvergence(f"power-law sum did not reach tol={tol:g} within {max_vectors:g} vectors")
        sh = _shells(lat, R)
        vals = sh.multiplicity * f(sh.norm_sq)
        partial = np.cumsum(vals)
        counts = np.cumsum(sh.multiplicity) + 1
        r_eff = (counts * lat.covolume / omega) ** (1.0 / d)
        if scale_from_tail:
            c = float(f(sh.norm_sq[-1:])[0] * sh.norm_sq[-1] ** (s / 2.0))
        else:
            c = 1.0
        corrected = partial + c * dens * r_eff ** (d - s) / (s - d)
        window = sh.norm_sq >= (R / 2.0) ** 2
        est = float(corrected[-1])
        spread = float(np.max(np.abs(corrected[window] - est))) if np.any(window) else math.inf
        if spread <= tol * abs(est):
            return SumResult(est, spread, sh.n_vectors, R)
        R *= 2.0


def _as_vectorized(f):
    def fv(x):
        x = np.asarray(x, dtype=float)
        try:
            y = np.asarray(f(x), dtype=float)
            if y.shape == x.shape:
                return y
        except Exception:
            pass
        return np.array([float(f(float(v))) for v in x.ravel()]).reshape(x.shape)

    return fv


def lattice_energy(lat: Lattice, f, decay=("exp", 1.0), tol: float = 1e-10) -> SumResult:
    """``E_f[L] = sum_{p != 0} f(|p|^2)``.

    ``decay`` only steers truncation. ``("exp", lam)`` promises
    ``|f(r)| <= C exp(-lam sqrt(r))`` eventually; ``C`` is calibrated from
    the outermost shells and the remainder bounded as for theta.
    ``("power", s)`` promises ``f(r) ~ C r^(-s/2)`` with ``s > d`` and uses
    the continuum completion of :func:`epstein_zeta`.
    """
    kind, rate = decay
    fv = _as_vectorized(f)
    if kind == "power":
        if not rate > lat.dim:
            raise DomainError("power decay needs exponent > d")
        return _power_energy(lat, fv, float(rate), tol, 2e7, scale_from_tail=True)
    if kind != "exp" or not rate > 0:
        raise DomainError(f"unknown decay hint {decay!r}")
    env = Envelope(lat)
    R = max(4.0 * lat.covolume ** (1.0 / lat.dim), 8.0 / rate)
    for _ in range(40):
        s = _shells(lat, R)
        terms = s.multiplicity * fv(s.norm_sq)
        value = float(np.sum(terms))
        outer = s.norm_sq >= (0.5 * R) ** 2
        radii = np.sqrt(s.norm_sq[outer])
        C = float(np.max(np.abs(fv(s.norm_sq[outer])) * np.exp(rate * radii))) if radii.size else 0.0
        tb = tail_bound(lambda r: C * np.exp(-rate * np.asarray(r)), R, env, n_inside=s.n_vectors)
        last = np.abs(terms[-3:])
        if tb <= tol * max(abs(value), 1e-300) and np.all(last < tol * abs(value)):
            return SumResult(value, tb, s.n_vectors, R)
        R *= 1.5
    raise NonConvergence("lattice_energy: terms do not decay as hinted")

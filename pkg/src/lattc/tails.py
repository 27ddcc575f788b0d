"""Truncation radii and remainder bounds for radial lattice sums.

For a radial weight ``g`` that is positive and non-increasing beyond ``R``,
the remainder ``sum_{|p| > R} g(|p|)`` is bounded through the point-count
envelope ``N(r) <= omega_d (r + rho)^d / covol`` (``rho`` is the radius of a
ball holding a centred fundamental cell) and integration by parts:

    tail <= (Nup(R) - N(R)) g(R) + int_R^inf Nup'(r) g(r) dr.

The integral is replaced by an upper Riemann sum, which keeps the bound
an upper bound for non-increasing ``g``.
"""
from __future__ import annotations

import math

import numpy as np

from .lattice import Lattice, unit_ball_volume

_GRID = 1024


class Envelope:
    """Point-count envelope of one lattice."""

    __slots__ = ("d", "covol", "rho", "omega")

    def __init__(self, lat: Lattice):
        self.d = lat.dim
        self.covol = lat.covolume
        self.rho = lat.packing_slack
        self.omega = unit_ball_volume(lat.dim)

    def upper(self, r):
        return self.omega * (np.asarray(r) + self.rho) ** self.d / self.covol

    def lower(self, r):
        return self.omega * np.maximum(np.asarray(r) - self.rho, 0.0) ** self.d / self.covol

    def upper_density(self, r):
        return self.d * self.omega * (np.asarray(r) + self.rho) ** (self.d - 1) / self.covol


def tail_bound(g, R: float, env: Envelope, n_inside: int | None = None) -> float:
    """Upper bound for ``sum_{p in L, |p| > R} g(|p|)``.

    ``n_inside`` is the number of nonzero lattice vectors with norm at most
    ``R``; without it a rigorous lower count is used instead.
    """
    R = float(R)
    gR = float(g(np.array([R]))[0])
    if gR == 0.0:
        return 0.0
    inside = env.lower(R) if n_inside is None else n_inside + 1.0
    first = max(float(env.upper(R)) - inside, 0.0) * gR

    scale = max(R, env.rho, env.covol ** (1.0 / env.d))
    ref = float(env.upper_density(R)) * gR * scale
    r_max = R + scale
    for _ in range(200):
        val = float(env.upper_density(r_max) * g(np.array([r_max]))[0]) * r_max
        if val <= 1e-8 * ref or val == 0.0:
            break
        r_max = R + 2.0 * (r_max - R)
    else:  # pragma: no cover - weight does not decay
        return math.inf
    u = np.linspace(0.0, 1.0, _GRID + 1)
    r = R + (r_max - R) * u * u
    gv = g(r[:-1])
    dens = env.upper_density(r[1:])
    integral = float(np.sum(dens * gv * np.diff(r)))
    remainder = val
    return first + integral + remainder


def radius_for(g, env: Envelope, target: float, r_min: float = 0.0) -> float:
    """Smallest radius (to a few percent) whose a-priori tail bound is below ``target``."""
    if target <= 0:
        raise ValueError("target must be positive")
    lo = max(r_min, 1e-12)
    hi = max(r_min, env.covol ** (1.0 / env.d))
    while tail_bound(g, hi, env) > target:
        lo = hi
        hi *= 2.0
        if hi > 1e12:
            return math.inf
    if lo >= hi:
        return hi
    for _ in range(40):
        if hi - lo <= 0.01 * hi:
            break
        mid = 0.5 * (lo + hi)
        if tail_bound(g, mid, env) > target:
            lo = mid
        else:
            hi = mid
    return hi


def gaussian(a: float, scale: float = 1.0):
    """``scale * exp(-a r^2)``."""
    return lambda r: scale * np.exp(-a * np.asarray(r) ** 2)


def exp_over_r(kappa: float, scale: float = 1.0):
    """``scale * exp(-kappa r) / r``."""
    return lambda r: scale * np.exp(-kappa * np.asarray(r)) / np.asarray(r)

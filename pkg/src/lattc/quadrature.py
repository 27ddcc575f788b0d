"""Two independent quadrature schemes on finite intervals.

``adaptive`` bisects with a 15-point Gauss-Legendre panel, comparing each
panel against its two halves. ``panels`` is a fixed composite rule on a
geometric partition. Integrands must accept numpy arrays.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import QuadratureFailure

_X15, _W15 = np.polynomial.legendre.leggauss(15)


def _panel(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * float(np.dot(_W15, f(mid + half * _X15)))


def adaptive(f, a: float, b: float, atol: float, rtol: float = 0.0, max_depth: int = 40) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]``; returns ``(value, error_estimate)``.

    A panel is accepted once ``|whole - (left + right)|`` is below its share
    of the tolerance, scaled by the panel width. Reaching ``max_depth``
    raises :class:`QuadratureFailure`.
    """
    if b <= a:
        return 0.0, 0.0
    whole = _panel(f, a, b)
    total_width = b - a
    tol = max(atol, rtol * abs(whole))
    stack = [(a, b, whole, 0)]
    value = 0.0
    err = 0.0
    while stack:
        lo, hi, est, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _panel(f, lo, mid)
        right = _panel(f, mid, hi)
        diff = abs(left + right - est)
        share = tol * (hi - lo) / total_width
        if diff <= share or diff <= 1e-15 * abs(left + right):
            value += left + right
            err += diff / 15.0
            continue
        if depth >= max_depth:
            raise QuadratureFailure(f"no convergence on [{lo:.6g}, {hi:.6g}] after {max_depth} bisections")
        stack.append((mid, hi, right, depth + 1))
        stack.append((lo, mid, left, depth + 1))
    return value, err


def panels(f, a: float, b: float, n_panels: int = 96, order: int = 30) -> float:
    """Composite Gauss-Legendre rule on ``n_panels`` geometrically growing panels."""
    if b <= a:
        return 0.0
    x, w = np.polynomial.legendre.leggauss(order)
    if a > 0:
        edges = np.geomspace(a, b, n_panels + 1)
    else:
        edges = np.linspace(a, b, n_panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x[None, :]
    vals = f(nodes.ravel()).reshape(nodes.shape)
    return float(np.sum(0.5 * (hi - lo) * vals * w[None, :]))


def upper_incomplete(k: float, a: float, S: float) -> float:
    """``int_S^inf s^k exp(-a s) ds``."""
    from scipy.special import gammaincc

    return math.gamma(k + 1) * gammaincc(k + 1, a * S) / a ** (k + 1)

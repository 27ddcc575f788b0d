"""Shape optimisation of unit-covolume planar lattices and of 1D periodic sequences.

Planar lattice shapes are parametrised by ``(x, y)`` in the upper half
plane; ``(0, 1)`` is the square lattice and ``(1/2, sqrt(3)/2)`` the
triangular one. Every objective depends on the lattice only, so it is
invariant under ``x -> x + 1``, ``(x, y) -> (-x, y) / (x^2 + y^2)`` and
``x -> -x``.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CoincidentPoints, DomainError, MaxIterations
from .eta import EtaParams, log_eta_product
from .lattice import Lattice, PeriodicSequence, make_lattice
from .llog import AffineGrowth, LogArgument, log_lattice, log_sequence, pair_energy
from .special import theta

log = logging.getLogger(__name__)

TRIANGULAR_POINT = (0.5, math.sqrt(3.0) / 2.0)
FOLD_STEPS = 30


def default_seed() -> int:
    return int(os.environ.get("LATTC_SEED", "42"))


@dataclass(frozen=True)
class ModularPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise DomainError(f"y must be positive, got {self.y}")

    def in_fundamental_domain(self, eps: float = 1e-12) -> bool:
        return abs(self.x) <= 0.5 + eps and self.x**2 + self.y**2 >= 1 - eps


def lattice_from_modular(p: ModularPoint, V: float = 1.0) -> Lattice:
    """Rows ``sqrt(V/y) (1, 0)`` and ``sqrt(V/y) (x, y)``; covolume ``V``."""
    if not p.y > 0:
        raise DomainError("y must be positive")
    if not V > 0:
        raise DomainError("covolume must be positive")
    c = math.sqrt(V / p.y)
    return make_lattice([[c, 0.0], [c * p.x, c * p.y]])


def fold(x: float, y: float, reflect: bool = True) -> tuple[float, float]:
    """Map ``(x, y)`` into the fundamental domain (and ``x >= 0`` if ``reflect``)."""
    for _ in range(FOLD_STEPS):
        x -= math.floor(x + 0.5)
        r2 = x * x + y * y
        if r2 >= 1.0:
            break
        x, y = -x / r2, y / r2
    else:
        log.warning("fold did not settle after %d steps at (%.17g, %.17g); clamping", FOLD_STEPS, x, y)
        x = min(max(x, -0.5), 0.5)
        y = max(y, math.sqrt(max(1.0 - x * x, 0.0)))
    if reflect:
        x = abs(x)
    return x, y


# ------------------------------------------------------------------ objectives


@dataclass(frozen=True)
class Objective:
    """A lattice-shape objective ``(x, y) -> value``.

    ``kind`` is one of ``theta``, ``neg_theta``, ``llog``, ``pair_llog``,
    ``log_eta``. ``sense`` says whether the triangular point is expected
    to be a minimum or a maximum; ``scale`` multiplies the value.
    """

    kind: str
    params: dict = field(default_factory=dict)
    V: float = 1.0
    tol: float = 1e-12
    scale: float = 1.0

    @property
    def sense(self) -> str:
        return "min" if self.kind == "theta" else "max"

    def scaled(self, c: float) -> "Objective":
        return replace(self, scale=self.scale * c)

    def with_tol(self, tol: float) -> "Objective":
        return replace(self, tol=tol)

    def lattice(self, x: float, y: float) -> Lattice:
        return lattice_from_modular(ModularPoint(x, y), self.V)

    def __call__(self, x: float, y: float) -> float:
        return self.scale * self._raw(self.lattice(x, y))

    def _raw(self, L: Lattice) -> float:
        p, tol = self.params, self.tol
        if self.kind == "theta":
            return theta(L, p["alpha"], tol).value
        if self.kind == "neg_theta":
            return -theta(L, p["alpha"], tol).value
        if self.kind == "llog":
            return log_lattice(L, LogArgument(p["x"]), tol).value
        if self.kind == "pair_llog":
            a, b = p.get("a", math.pi), p.get("b", math.pi)
            f = lambda r: a + b * np.asarray(r)  # noqa: E731
            fixed = p.get("fixed")
            base = L if fixed is None else fixed
            return pair_energy(base, L, f, AffineGrowth(a, b), tol=tol).value
        if self.kind == "log_eta":
            params = EtaParams(p["m"], p["t"], tol=tol, quad_tol=p.get("quad_tol", 1e-10))
            partner = p.get("partner")
            if partner is None:
                return log_eta_product(L, L, params).value
            if p.get("moving", "lam") == "lam":
                return log_eta_product(partner, L, params).value
            return log_eta_product(L, partner, params).value
        raise DomainError(f"unknown objective {self.kind!r}")


def make_objective(kind: str, V: float = 1.0, tol: float = 1e-12, **params) -> Objective:
    if kind in ("theta", "neg_theta"):
        params.setdefault("alpha", 1.0)
    elif kind == "llog":
        params.setdefault("x", 0.5)
    elif kind == "log_eta":
        params.setdefault("m", 1.0)
        params.setdefault("t", 1.0)
    elif kind != "pair_llog":
        raise DomainError(f"unknown objective {kind!r}")
    return Objective(kind, params, V, tol)


# ---------------------------------------------------------------------- scans


@dataclass
class ScanResult:
    xs: np.ndarray  # (n,)
    ys: np.ndarray  # (n, n): ys[i, j] for column xs[i]
    values: np.ndarray  # (n, n)
    sense: str

    @property
    def best_index(self) -> tuple[int, int]:
        flat = np.argmin(self.values) if self.sense == "min" else np.argmax(self.values)
        return tuple(int(k) for k in np.unravel_index(flat, self.values.shape))

    @property
    def best_point(self) -> tuple[float, float]:
        i, j = self.best_index
        return float(self.xs[i]), float(self.ys[i, j])

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        """Grid node nearest to ``(x, y)``."""
        i = int(np.argmin(np.abs(self.xs - x)))
        j = int(np.argmin(np.abs(self.ys[i] - y)))
        return i, j

    def cell_bounds(self, i: int, j: int) -> tuple[float, float, float, float]:
        """``(x_lo, x_hi, y_lo, y_hi)`` of the box around node ``(i, j)`` reaching halfway to its neighbours."""

        def span(arr, k):
            lo = arr[k] - 0.5 * (arr[k] - arr[k - 1]) if k > 0 else arr[k]
            hi = arr[k] + 0.5 * (arr[k + 1] - arr[k]) if k + 1 < len(arr) else arr[k]
            return lo, hi

        x_lo, x_hi = span(self.xs, i)
        y_lo, y_hi = span(self.ys[i], j)
        return x_lo, x_hi, y_lo, y_hi

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "value"])
        n = len(self.xs)
        for i in range(n):
            for j in range(self.ys.shape[1]):
                w.writerow([repr(float(self.xs[i])), repr(float(self.ys[i, j])), repr(float(self.values[i, j]))])
        return buf.getvalue()


def scan_2d(objective: Objective, grid_n: int = 40, y_max: float = 2.0, workers: int = 1) -> ScanResult:
    """Evaluate ``objective`` on an ``n x n`` grid of the half fundamental domain.

    Columns ``x_i`` are equally spaced in ``[0, 1/2]``; each column runs in
    ``y`` from the unit circle ``sqrt(1 - x^2)`` to ``y_max``. The node
    ``(n-1, 0)`` is exactly the triangular point. ``workers > 1`` spreads
    grid cells over a thread pool; values do not depend on it.
    """
    if grid_n < 2:
        raise DomainError("grid_n must be at least 2")
    xs = np.linspace(0.0, 0.5, grid_n)
    ys = np.stack([np.linspace(math.sqrt(1.0 - x * x), y_max, grid_n) for x in xs])
    cells = [(i, j) for i in range(grid_n) for j in range(grid_n)]

    def one(c):
        return objective(float(xs[c[0]]), float(ys[c]))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(one, cells))
    else:
        flat = [one(c) for c in cells]
    vals = np.array(flat, dtype=float).reshape(grid_n, grid_n)
    return ScanResult(xs, ys, vals, objective.sense)


# ------------------------------------------------------------ compass search


@dataclass
class OptimizationReport:
    argpoint: object
    value: float
    iterations: int
    converged: bool
    starts: int = 1
    evaluations: int = 0
    final_step: float = 0.0

    def to_dict(self) -> dict:
        arg = self.argpoint
        if isinstance(arg, ModularPoint):
            arg = {"x": arg.x, "y": arg.y}
        elif isinstance(arg, PeriodicSequence):
            arg = {"points": list(arg.points)}
        return {
            "argpoint": arg,
            "value": self.value,
            "iterations": self.iterations,
            "converged": self.converged,
            "starts": self.starts,
            "evaluations": self.evaluations,
            "final_step": self.final_step,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _compass(f, z0: np.ndarray, step: float, tol: float, max_iter: int, renormalize=None):
    """Maximise ``f`` by coordinate compass search. Returns (z, fz, iterations, evaluations, step)."""
    dim = len(z0)
    dirs = np.vstack([np.eye(dim), -np.eye(dim)])
    z = np.array(z0, dtype=float)
    fz = f(z)
    evals = 1
    # already optimal at the final resolution: stop after one poll
    if all(f(z + tol * d) <= fz for d in dirs):
        return z, fz, 0, evals + len(dirs), 0.5 * tol
    evals += len(dirs)
    h = step
    it = 0
    last = None
    while h >= tol:
        it += 1
        if it > max_iter:
            raise MaxIterations(f"compass search exceeded {max_iter} iterations (step {h:.3g})")
        moved = False
        order = range(len(dirs)) if last is None else [last] + [k for k in range(len(dirs)) if k != last]
        for k in order:
            cand = z + h * dirs[k]
            fc = f(cand)
            evals += 1
            if fc > fz:
                z, fz, last, moved = cand, fc, k, True
                break
        if moved:
            if renormalize is not None:
                z = renormalize(z)
        else:
            h *= 0.5
            last = None
    return z, fz, it, evals, h


def maximize_2d(objective: Objective, start: ModularPoint, tol: float = 1e-6, step: float = 0.05, max_iter: int = 20000) -> OptimizationReport:
    """Compass search for the optimum of ``objective`` over the upper half plane.

    Objectives with ``sense == "min"`` are negated internally, so the
    search always climbs towards the predicted extremum; the reported
    value is the objective itself. Iterates leaving the fundamental domain
    (with a 0.25 margin) are folded back; the returned point is folded into
    ``|x| <= 1/2``, ``x >= 0``, ``x^2 + y^2 >= 1``. Converged means the
    final poll step is below ``tol``.
    """
    sign = -1.0 if objective.sense == "min" else 1.0

    def f(z):
        if z[1] <= 1e-9:
            return -math.inf
        return sign * objective(float(z[0]), float(z[1]))

    def renorm(z):
        x, y = float(z[0]), float(z[1])
        if abs(x) > 0.75 or x * x + y * y < 0.75 * 0.75:
            x, y = fold(x, y, reflect=False)
        return np.array([x, y])

    z, fz, it, evals, h = _compass(f, np.array([start.x, start.y]), step, tol, max_iter, renorm)
    x, y = fold(float(z[0]), float(z[1]))
    return OptimizationReport(ModularPoint(x, y), sign * float(fz), it, h < tol, 1, evals, h)


def random_starts(n: int, seed: int | None = None, y_max: float = 2.0) -> list[ModularPoint]:
    """``n`` seeded points of the fundamental domain with ``y <= y_max``."""
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    out = []
    for _ in range(n):
        x = float(rng.uniform(-0.5, 0.5))
        y = float(rng.uniform(math.sqrt(1.0 - x * x), y_max))
        out.append(ModularPoint(x, y))
    return out


def multistart_2d(objective: Objective, restarts: int = 10, seed: int | None = None, tol: float = 1e-6) -> list[OptimizationReport]:
    """One :func:`maximize_2d` run per seeded random start, in draw order."""
    return [maximize_2d(objective, p, tol=tol) for p in random_starts(restarts, seed)]


def optimize_sequence_1d(N: int, x, restarts: int = 10, tol: float = 1e-9, seed: int | None = None, sum_tol: float = 1e-15, max_iter: int = 200000) -> OptimizationReport:
    """Maximise the periodic-sequence logarithm over ``t_2..t_N`` with ``t_1 = 0``.

    Infeasible iterates (not strictly increasing inside ``(0, N)``) score
    ``-inf``. Each restart draws sorted uniform points; the best run wins.
    """
    if N < 1:
        raise DomainError("N must be at least 1")
    arg = x if isinstance(x, LogArgument) else LogArgument(x)
    if N == 1:
        seq = PeriodicSequence((0.0,))
        v = log_sequence(seq, arg, sum_tol).value
        return OptimizationReport(seq, v, 0, True, 0, 1, 0.0)
    rng = np.random.default_rng(default_seed() if seed is None else seed)

    def f(z):
        pts = np.concatenate(([0.0], z))
        if np.any(np.diff(pts) <= 1e-9) or pts[-1] >= N - 1e-9:
            return -math.inf
        try:
            return log_sequence(PeriodicSequence(tuple(pts)), arg, sum_tol).value
        except (CoincidentPoints, ValueError):
            return -math.inf

    best = None
    total_evals = total_it = 0
    for _ in range(max(restarts, 1)):
        z0 = np.sort(rng.uniform(0.0, N, N - 1))
        z, fz, it, evals, h = _compass(f, z0, 0.25, tol, max_iter)
        total_evals += evals
        total_it += it
        if best is None or fz > best[1]:
            best = (z, fz, h, it)
    z, fz, h, it = best
    seq = PeriodicSequence(tuple(np.concatenate(([0.0], z))))
    return OptimizationReport(seq, float(fz), total_it, h < tol, max(restarts, 1), total_evals, h)


# -------------------------------------------------------------- derivatives


@dataclass
class GradientReport:
    point: tuple[float, float]
    h: float
    gradient: tuple[float, float]
    richardson_ratio: tuple[float, float]

    @property
    def magnitude(self) -> float:
        return math.hypot(*self.gradient)

    def to_dict(self) -> dict:
        return {
            "point": list(self.point),
            "h": self.h,
            "gradient": list(self.gradient),
            "magnitude": self.magnitude,
            "richardson_ratio": list(self.richardson_ratio),
        }


def gradient_check(objective: Objective, p: ModularPoint, h: float = 1e-4, tol: float = 1e-15) -> GradientReport:
    """Central differences at ``h``, ``h/2`` and ``h/4`` along ``x`` and ``y``.

    The Richardson ratio ``(D(h) - D(h/2)) / (D(h/2) - D(h/4))`` is close to 4
    for a smooth objective; the reported gradient is the extrapolated
    ``(4 D(h/2) - D(h)) / 3``.
    """
    if not 1e-7 <= h <= 1e-3:
        raise DomainError("h must lie in [1e-7, 1e-3]")
    obj = objective.with_tol(tol)
    grads, ratios = [], []
    for e in ((1.0, 0.0), (0.0, 1.0)):
        D = []
        for step in (h, h / 2, h / 4):
            fp = obj(p.x + step * e[0], p.y + step * e[1])
            fm = obj(p.x - step * e[0], p.y - step * e[1])
            D.append((fp - fm) / (2 * step))
        num, den = D[0] - D[1], D[1] - D[2]
        ratios.append(num / den if den != 0 else math.nan)
        grads.append((4 * D[1] - D[0]) / 3)
    return GradientReport((p.x, p.y), h, tuple(grads), tuple(ratios))

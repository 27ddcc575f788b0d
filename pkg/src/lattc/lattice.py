"""Simple lattices: construction, duality, shell enumeration and primitives.

Basis vectors are the *rows* of ``basis``. Everything downstream only
touches the Gram matrix, so orientation of the embedding never matters.
"""
from __future__ import annotations

import json
import logging
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import (
    DomainError,
    EnumerationTooLarge,
    SingularBasis,
    UnknownLattice,
)

log = logging.getLogger(__name__)

SHELL_TOL = 1e-9
DEFAULT_ENUM_CAP = 10**8
CONDITION_WARN = 1e6

E8_BASIS = np.array(
    [
        [2, 0, 0, 0, 0, 0, 0, 0],
        [-1, 1, 0, 0, 0, 0, 0, 0],
        [0, -1, 1, 0, 0, 0, 0, 0],
        [0, 0, -1, 1, 0, 0, 0, 0],
        [0, 0, 0, -1, 1, 0, 0, 0],
        [0, 0, 0, 0, -1, 1, 0, 0],
        [0, 0, 0, 0, 0, -1, 1, 0],
        [0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5],
    ]
)


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@dataclass(frozen=True)
class ShellSeries:
    """Nonzero lattice vectors of norm at most ``cutoff_radius``, grouped by norm.

    ``coords`` holds the integer coordinates of every vector, sorted by norm,
    and ``shell_index[k]`` is the shell that ``coords[k]`` belongs to.
    """

    cutoff_radius: float
    norm_sq: np.ndarray
    multiplicity: np.ndarray
    coords: np.ndarray | None = None
    shell_index: np.ndarray | None = None

    @property
    def shells(self) -> list[tuple[float, int]]:
        return [(float(n), int(m)) for n, m in zip(self.norm_sq, self.multiplicity)]

    @property
    def n_vectors(self) -> int:
        return int(self.multiplicity.sum())

    @property
    def norms(self) -> np.ndarray:
        return np.sqrt(self.norm_sq)

    def vectors(self) -> list[list[tuple[int, ...]]]:
        """Integer coordinate tuples grouped per shell."""
        if self.coords is None:
            raise ValueError("shell series was built without coordinates")
        groups: list[list[tuple[int, ...]]] = [[] for _ in range(len(self.norm_sq))]
        for k, row in zip(self.shell_index.tolist(), self.coords.tolist()):
            groups[k].append(tuple(row))
        return groups

    def truncate(self, radius: float) -> "ShellSeries":
        """Restrict to shells with norm at most ``radius`` (no re-enumeration)."""
        if radius > self.cutoff_radius * (1 + 1e-12):
            raise ValueError("cannot extend a shell series by truncation")
        n = int(np.searchsorted(self.norm_sq, radius * radius * (1 + 1e-12), side="right"))
        coords = idx = None
        if self.coords is not None:
            nv = int(self.multiplicity[:n].sum())
            coords, idx = self.coords[:nv], self.shell_index[:nv]
        return ShellSeries(radius, self.norm_sq[:n], self.multiplicity[:n], coords, idx)


@dataclass(frozen=True, eq=False)
class Lattice:
    """A simple lattice ``sum_i Z v_i`` given by the rows of ``basis``."""

    basis: np.ndarray
    gram: np.ndarray = field(repr=False)
    covolume: float

    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def packing_slack(self) -> float:
        """Radius of a ball around 0 holding a fundamental domain.

        The Gram-Schmidt brick ``{sum c_i b_i^*, |c_i| <= 1/2}`` tiles space
        under lattice translations, so its circumradius works.
        """
        gs = np.diag(np.linalg.cholesky(self.gram))
        return 0.5 * float(np.sqrt(np.sum(gs**2)))

    def fingerprint(self) -> bytes:
        return np.round(self.gram, 13).tobytes()

    def to_json(self) -> str:
        return json.dumps({"dim": self.dim, "basis": self.basis.tolist()})

    def points(self, coords: np.ndarray) -> np.ndarray:
        return np.asarray(coords, dtype=float) @ self.basis

    # -- shell cache -----------------------------------------------------
    def shells(self, radius: float, cap: int = DEFAULT_ENUM_CAP) -> ShellSeries:
        """Cached :func:`enumerate_shells`; larger earlier enumerations are reused."""
        with self._lock:
            cached = self._cache.get("shells")
        if cached is not None and cached.cutoff_radius >= radius:
            return cached.truncate(radius)
        # over-enumerate a little so that nearby radii hit the cache
        grow = 1.15 if self.dim <= 3 else 1.0
        series = enumerate_shells(self, radius * grow, cap=cap)
        with self._lock:
            self._cache["shells"] = series
        return series.truncate(radius)

    def first_minimum(self) -> float:
        """Length of a shortest nonzero vector."""
        with self._lock:
            lam = self._cache.get("lambda1")
        if lam is None:
            r = float(np.sqrt(np.min(np.diag(self.gram))))
            s = self.shells(r)
            lam = float(np.sqrt(s.norm_sq[0]))
            with self._lock:
                self._cache["lambda1"] = lam
        return lam


def make_lattice(basis) -> Lattice:
    """Build a :class:`Lattice` from a square matrix whose rows span the lattice."""
    b = np.array(basis, dtype=float)
    if b.ndim == 1 and b.size == 1:
        b = b.reshape(1, 1)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError(f"basis must be a square matrix, got shape {b.shape}")
    if not np.all(np.isfinite(b)):
        raise ValueError("basis entries must be finite")
    det = abs(float(np.linalg.det(b)))
    scale = float(np.prod(np.linalg.norm(b, axis=1)))
    if scale == 0.0 or det < 1e-12 * scale:
        raise SingularBasis(f"|det| = {det:.3g} is below 1e-12 x {scale:.3g}")
    gram = b @ b.T
    gram = 0.5 * (gram + gram.T)
    b.setflags(write=False)
    gram.setflags(write=False)
    cond = np.linalg.cond(b)
    if cond > CONDITION_WARN:
        log.warning("basis condition number %.3g exceeds %.0e; enumeration may be slow", cond, CONDITION_WARN)
    return Lattice(basis=b, gram=gram, covolume=det)


def rescale_to_covolume(lat: Lattice, V: float) -> Lattice:
    if not V > 0:
        raise DomainError("covolume must be positive")
    factor = (V / lat.covolume) ** (1.0 / lat.dim)
    return make_lattice(lat.basis * factor)


def dual(lat: Lattice) -> Lattice:
    """Dual lattice; its basis is the inverse-transpose of ``lat.basis``."""
    return make_lattice(np.linalg.inv(lat.basis).T)


def predicted_count(lat: Lattice, radius: float) -> float:
    return unit_ball_volume(lat.dim) * radius**lat.dim / lat.covolume


def enumerate_shells(lat: Lattice, R: float, cap: int = DEFAULT_ENUM_CAP) -> ShellSeries:
    """All nonzero ``p`` in ``lat`` with ``|p| <= R``, grouped into shells.

    Coordinates are bounded level by level from the Cholesky factor of the
    Gram matrix (the outermost bound is ``R`` times the corresponding dual
    row norm) and filtered by their Gram norm.
    """
    if not R > 0:
        raise DomainError("radius must be positive")
    expected = predicted_count(lat, R)
    if expected > cap:
        raise EnumerationTooLarge(f"about {expected:.3g} vectors within radius {R:.4g} (cap {cap:.3g})")
    q = kernels.pohst_factor(lat.gram)
    r2 = R * R
    z = kernels.enumerate_ball(q, r2)
    if len(z) and np.abs(z).max() < 2**31 - 1:
        z = z.astype(np.int32)
    nsq = _gram_norms(z, lat.gram)
    keep = nsq <= r2 * (1 + 1e-12)
    z, nsq = z[keep], nsq[keep]
    order = np.argsort(nsq)
    z, nsq = z[order], nsq[order]
    if len(nsq) == 0:
        return ShellSeries(float(R), np.zeros(0), np.zeros(0, dtype=np.int64), z, np.zeros(0, dtype=np.int64))
    breaks = np.flatnonzero(np.diff(nsq) > SHELL_TOL) + 1
    starts = np.concatenate(([0], breaks))
    shell_index = np.zeros(len(nsq), dtype=np.int64)
    shell_index[breaks] = 1
    shell_index = np.cumsum(shell_index)
    mult = np.diff(np.concatenate((starts, [len(nsq)])))
    norm_sq = np.add.reduceat(nsq, starts) / mult
    # lexicographic inside each shell, for reproducible output
    z = z[_shell_lex_order(z, shell_index)]
    return ShellSeries(float(R), norm_sq, mult.astype(np.int64), z, shell_index)


def _shell_lex_order(z: np.ndarray, shell_index: np.ndarray) -> np.ndarray:
    d = z.shape[1]
    B = int(np.abs(z).max())
    span = 2 * B + 1
    if (int(shell_index[-1]) + 1) * span**d >= 2**62:
        return np.lexsort((*(z[:, k] for k in range(d - 1, -1, -1)), shell_index))
    # one packed int64 key: shell first, then coordinates in order
    key = shell_index.astype(np.int64)
    for k in range(d):
        key = key * span + (z[:, k].astype(np.int64) + B)
    return np.argsort(key)


def _gram_norms(z: np.ndarray, gram: np.ndarray, chunk: int = 1 << 18) -> np.ndarray:
    out = np.empty(len(z))
    for k in range(0, len(z), chunk):
        zc = z[k : k + chunk].astype(float)
        out[k : k + chunk] = np.einsum("ij,ij->i", zc @ gram, zc)
    return out


def _canonical_sign(z: np.ndarray) -> np.ndarray:
    first = np.argmax(z != 0, axis=1)
    return np.sign(z[np.arange(len(z)), first])


def primitive_representatives(lat: Lattice, R: float, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """Integer coordinates of one of ``+-w`` for every primitive ``w`` with ``|w| <= R``.

    The representative kept is the one whose first nonzero coordinate is
    positive. Rows are sorted by norm, then lexicographically.
    """
    s = lat.shells(R, cap=cap)
    z = s.coords
    g = np.gcd.reduce(np.abs(z), axis=1) if lat.dim > 1 else np.abs(z[:, 0])
    sel = (g == 1) & (_canonical_sign(z) > 0)
    return z[sel]


def primitive_shells(lat: Lattice, R: float) -> tuple[np.ndarray, np.ndarray]:
    """Norms and counts of the primitive representatives, grouped as shells."""
    z = primitive_representatives(lat, R)
    if len(z) == 0:
        return np.zeros(0), np.zeros(0, dtype=np.int64)
    nsq = np.sort(_gram_norms(z, lat.gram))
    breaks = np.flatnonzero(np.diff(nsq) > SHELL_TOL) + 1
    starts = np.concatenate(([0], breaks))
    mult = np.diff(np.concatenate((starts, [len(nsq)])))
    return np.add.reduceat(nsq, starts) / mult, mult


def named_lattice(name: str, V: float = 1.0) -> Lattice:
    """``integer(d)`` / ``zd:<d>``, ``square``, ``triangular`` or ``e8`` at covolume ``V``."""
    if not V > 0:
        raise DomainError("covolume must be positive")
    key = name.strip().lower()
    if key.startswith("integer(") and key.endswith(")"):
        key = "zd:" + key[len("integer(") : -1]
    if key.startswith("zd:"):
        try:
            d = int(key[3:])
        except ValueError:
            raise UnknownLattice(name) from None
        if d < 1:
            raise UnknownLattice(name)
        return rescale_to_covolume(make_lattice(np.eye(d)), V)
    if key == "square":
        return rescale_to_covolume(make_lattice(np.eye(2)), V)
    if key == "triangular":
        c = math.sqrt(2 * V / math.sqrt(3))
        return make_lattice([[c, 0.0], [c / 2, c * math.sqrt(3) / 2]])
    if key == "e8":
        return rescale_to_covolume(make_lattice(E8_BASIS), V)
    raise UnknownLattice(name)


def load_lattice(path) -> Lattice:
    """Read ``{"dim": d, "basis": [[...], ...]}``."""
    data = json.loads(Path(path).read_text())
    try:
        d = int(data["dim"])
        basis = data["basis"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"lattice file {path} needs 'dim' and 'basis'") from exc
    b = np.array(basis, dtype=float)
    if b.shape != (d, d):
        raise ValueError(f"lattice file {path}: basis shape {b.shape} does not match dim {d}")
    return make_lattice(b)


def save_lattice(lat: Lattice, path) -> None:
    Path(path).write_text(lat.to_json() + "\n")


@dataclass(frozen=True)
class PeriodicSequence:
    """Points ``t_1 <= ... <= t_N`` extended by ``t_{n+N} = t_n + N``."""

    points: tuple[float, ...]

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise ValueError("need at least one point")
        if any(b < a for a, b in zip(pts, pts[1:])):
            raise ValueError("points must be sorted")
        if pts[-1] - pts[0] >= len(pts):
            raise ValueError("points must span less than one period")

    @property
    def period(self) -> int:
        return len(self.points)

    @classmethod
    def equidistant(cls, N: int, shift: float = 0.0) -> "PeriodicSequence":
        return cls(tuple(shift + k for k in range(N)))

    def is_strict(self) -> bool:
        pts = self.points
        gaps = [b - a for a, b in zip(pts, pts[1:])] + [pts[0] + self.period - pts[-1]]
        return min(gaps) > 0

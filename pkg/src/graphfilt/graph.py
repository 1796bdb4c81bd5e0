"""Graphs, shift operators, perturbations and vertex permutations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AsymmetricInput,
    DimensionMismatch,
    InputError,
    IsolatedVertex,
    NormTargetInfeasible,
    PerturbationTooLarge,
)
from .linalg import spectral_norm
from .rng import make_rng

KINDS = ("unnormalized", "normalized", "normalized-translated", "adjacency")
LINEAR_KINDS = ("unnormalized", "adjacency")
MODES = ("dense-gaussian", "edge-jitter", "edge-drop")

SPARSITY_THRESHOLD = 1e-4
DEFAULT_KERNEL_WIDTH = 0.15
# relative tolerance on ||E|| for the measured (non-rescalable) perturbation modes
MEASURED_NORM_RTOL = 0.1


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected weighted graph stored as a dense symmetric weight matrix."""

    weights: np.ndarray
    coords: np.ndarray | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise DimensionMismatch(f"weights must be a nonempty square matrix, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InputError("weights must be finite")
        if not np.array_equal(w, w.T):
            raise AsymmetricInput("weight matrix is not exactly symmetric")
        if np.any(w < 0):
            raise InputError("edge weights must be nonnegative")
        if np.any(np.diag(w) != 0):
            raise InputError("self loops are not allowed (diagonal must be zero)")
        object.__setattr__(self, "weights", _frozen(w))
        if self.coords is not None:
            c = np.asarray(self.coords, dtype=float)
            if c.shape != (w.shape[0], 2):
                raise DimensionMismatch(f"coords must have shape ({w.shape[0]}, 2), got {c.shape}")
            object.__setattr__(self, "coords", _frozen(c))

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def edges(self) -> list[tuple[int, int, float]]:
        """Edges as (i, j, w) with i < j, in row-major order."""
        iu, ju = np.nonzero(np.triu(self.weights, k=1))
        return [(int(i), int(j), float(self.weights[i, j])) for i, j in zip(iu, ju)]

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        if not np.array_equal(self.weights, other.weights):
            return False
        if (self.coords is None) != (other.coords is None):
            return False
        return self.coords is None or np.array_equal(self.coords, other.coords)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ShiftOperator:
    """A real symmetric matrix tagged with how it was built.

    ``graph`` is the graph it was built from, when there is one; shifts
    produced by dense perturbations have no underlying graph.
    """

    matrix: np.ndarray
    kind: str
    graph: Graph | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown shift kind {self.kind!r}; expected one of {KINDS}")
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"shift matrix must be square, got {m.shape}")
        if not np.array_equal(m, m.T):
            raise AsymmetricInput("shift matrix is not exactly symmetric")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class Perturbation:
    E: np.ndarray
    op_norm: float
    mode: str
    seed: int
    target_norm: float


@dataclass(frozen=True)
class Permutation:
    """Vertex relabelling; ``(P f)[i] = f[perm[i]]``."""

    perm: tuple[int, ...]

    def __post_init__(self):
        p = tuple(int(i) for i in self.perm)
        if sorted(p) != list(range(len(p))):
            raise InputError("perm must be a bijection on {0, ..., n-1}")
        object.__setattr__(self, "perm", p)

    @property
    def n(self) -> int:
        return len(self.perm)

    def inverse(self) -> Permutation:
        return Permutation(tuple(int(i) for i in np.argsort(self.perm)))

    def matrix(self) -> np.ndarray:
        P = np.zeros((self.n, self.n))
        P[np.arange(self.n), self.perm] = 1.0
        return P

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(n)))

    @classmethod
    def random(cls, n: int, seed: int) -> Permutation:
        return cls(tuple(int(i) for i in make_rng(seed).permutation(n)))


def _shift_matrix(w: np.ndarray, kind: str) -> np.ndarray:
    if kind == "adjacency":
        return w.copy()
    deg = w.sum(axis=1)
    if kind == "unnormalized":
        m = -w
        m[np.diag_indices_from(m)] = deg
        return m
    zero = np.flatnonzero(deg <= 0)
    if zero.size:
        raise IsolatedVertex(int(zero[0]))
    dinv = 1.0 / np.sqrt(deg)
    # outer product first so that entry (i, j) and (j, i) are bitwise equal
    scaled = w * np.outer(dinv, dinv)
    if kind == "normalized-translated":
        return -scaled
    m = -scaled
    m[np.diag_indices_from(m)] += 1.0
    return m


def build_shift(g: Graph, kind: str = "unnormalized") -> ShiftOperator:
    if kind not in KINDS:
        raise InputError(f"unknown shift kind {kind!r}; expected one of {KINDS}")
    return ShiftOperator(_shift_matrix(np.array(g.weights), kind), kind, g)


def gen_geometric_graph(n: int, seed: int, kernel_width: float = DEFAULT_KERNEL_WIDTH) -> Graph:
    """Gaussian-kernel graph on ``n`` uniform points in the unit square.

    w_ij = exp(-|x_i - x_j|^2 / (2 kernel_width^2)), set to zero below
    ``SPARSITY_THRESHOLD``.
    """
    if int(n) != n or n < 2:
        raise InputError(f"n must be an integer >= 2, got {n}")
    if not kernel_width > 0:
        raise InputError(f"kernel_width must be positive, got {kernel_width}")
    n = int(n)
    pts = make_rng(seed).random((n, 2))
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = (diff**2).sum(axis=-1)
    w = np.exp(-d2 / (2.0 * kernel_width**2))
    w[w < SPARSITY_THRESHOLD] = 0.0
    np.fill_diagonal(w, 0.0)
    return Graph(w, pts)


def _rebuilt(g: Graph, w: np.ndarray, kind: str) -> ShiftOperator:
    """Shift of a modified weight matrix, keeping the graph when it is valid."""
    if np.all(w >= 0):
        return build_shift(Graph(w, g.coords), kind)
    return ShiftOperator(_shift_matrix(w, kind), kind)


def _require_graph(s: ShiftOperator, mode: str) -> Graph:
    if s.graph is None:
        raise InputError(f"mode {mode!r} needs the shift's underlying graph")
    return s.graph


def _dense_gaussian(s, target, rng):
    x = rng.standard_normal((s.n, s.n))
    e = 0.5 * (x + x.T)
    e *= target / spectral_norm(e)
    return ShiftOperator(s.matrix + e, s.kind), e


def _edge_jitter(s, target, rng):
    g = _require_graph(s, "edge-jitter")
    w = np.array(g.weights)
    xi = rng.standard_normal(w.shape)
    xi = np.triu(xi, 1)
    xi = xi + xi.T
    support = w > 0
    if not support.any():
        raise NormTargetInfeasible(target, None, "graph has no edges to jitter")
    if s.kind in LINEAR_KINDS:
        jitter = np.where(support, w * xi, 0.0)
        unit = _shift_matrix(jitter, s.kind)
        scale = target / spectral_norm(unit)
        e = unit * scale
        shifted = _rebuilt(g, w + scale * jitter, s.kind)
        return ShiftOperator(s.matrix + e, s.kind, shifted.graph), e

    # nonlinear in W: log-normal jitter keeps weights positive; bisect amplitude
    def attempt(alpha):
        w2 = np.where(support, w * np.exp(alpha * xi), 0.0)
        shifted = build_shift(Graph(w2, g.coords), s.kind)
        return shifted, shifted.matrix - s.matrix

    lo, hi = 0.0, target
    for _ in range(200):
        shifted, e = attempt(hi)
        if spectral_norm(e) >= target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NormTargetInfeasible(target, spectral_norm(e), "jitter amplitude search diverged")
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        _, e_mid = attempt(mid)
        if spectral_norm(e_mid) < target:
            lo = mid
        else:
            hi = mid
    shifted, e = attempt(hi)
    achieved = spectral_norm(e)
    if abs(achieved - target) > MEASURED_NORM_RTOL * target:
        raise NormTargetInfeasible(target, achieved, "bisection did not bracket the target")
    return shifted, e


def _edge_drop(s, target, rng, strict):
    g = _require_graph(s, "edge-drop")
    w0 = np.array(g.weights)
    edges = g.edges()
    if not edges:
        raise NormTargetInfeasible(target, None, "graph has no edges to drop")
    order = rng.permutation(len(edges))

    def dropped(idx):
        w = w0.copy()
        for k in idx:
            i, j, _ = edges[k]
            w[i, j] = w[j, i] = 0.0
        shifted = _rebuilt(g, w, s.kind)
        return shifted, shifted.matrix - s.matrix

    # exact single-edge norms for kinds linear in W: |w| for adjacency, 2|w| for D - W
    factor = {"adjacency": 1.0, "unnormalized": 2.0}.get(s.kind)
    accepted: list[int] = []
    current = None
    closest = None
    for k in order:
        if factor is not None and factor * edges[k][2] > (1 + MEASURED_NORM_RTOL) * target:
            continue
        try:
            shifted, e = dropped(accepted + [k])
        except IsolatedVertex:
            continue
        nrm = spectral_norm(e)
        if nrm <= (1 + MEASURED_NORM_RTOL) * target:
            accepted.append(k)
            current = (shifted, e, nrm)
            if nrm >= (1 - MEASURED_NORM_RTOL) * target:
                break
        if nrm < 1 and (closest is None or abs(nrm - target) < abs(closest[2] - target)):
            closest = (shifted, e, nrm)
    if current is not None and abs(current[2] - target) <= MEASURED_NORM_RTOL * target:
        return current[0], current[1]
    if factor is not None and closest is None:
        # nothing was light enough to be tried; fall back to the best single edge
        for k in order:
            if factor * edges[k][2] >= 1:
                continue
            shifted, e = dropped([k])
            nrm = spectral_norm(e)
            if closest is None or abs(nrm - target) < abs(closest[2] - target):
                closest = (shifted, e, nrm)
    candidates = [c for c in (current, closest) if c is not None]
    best = min(candidates, key=lambda c: abs(c[2] - target), default=None)
    if strict or best is None:
        raise NormTargetInfeasible(target, None if best is None else best[2])
    return best[0], best[1]


def perturb(
    s: ShiftOperator, mode: str, target_norm: float, seed: int, strict: bool = False
) -> tuple[ShiftOperator, Perturbation]:
    """Return ``(s + E, record)`` with ``||E||`` at (or near) ``target_norm``.

    ``dense-gaussian`` and ``edge-jitter`` on kinds linear in W hit the target
    to rounding. ``edge-jitter`` on normalized kinds bisects a log-normal
    jitter amplitude. ``edge-drop`` removes a random set of edges; when no
    set lands within 10% of the target it raises if ``strict``, otherwise
    it returns the closest achievable perturbation (always with norm < 1).
    """
    if mode not in MODES:
        raise InputError(f"unknown perturbation mode {mode!r}; expected one of {MODES}")
    if not target_norm > 0:
        raise InputError(f"target_norm must be positive, got {target_norm}")
    if target_norm >= 1:
        raise PerturbationTooLarge(f"target_norm must be < 1, got {target_norm}")
    rng = make_rng(seed)
    if mode == "dense-gaussian":
        shifted, e = _dense_gaussian(s, target_norm, rng)
    elif mode == "edge-jitter":
        shifted, e = _edge_jitter(s, target_norm, rng)
    else:
        shifted, e = _edge_drop(s, target_norm, rng, strict)
    op_norm = spectral_norm(e)
    if op_norm >= 1:
        raise NormTargetInfeasible(target_norm, op_norm, "perturbation norm must stay below 1")
    e = _frozen(e)
    return shifted, Perturbation(e, op_norm, mode, int(seed), float(target_norm))


def permute_shift(s: ShiftOperator, p: Permutation) -> ShiftOperator:
    """P D P^T, i.e. entry (i, j) becomes D[perm[i], perm[j]]."""
    if p.n != s.n:
        raise DimensionMismatch(f"permutation of size {p.n} for a {s.n}-vertex shift")
    idx = np.asarray(p.perm)
    m = s.matrix[np.ix_(idx, idx)]
    g = None
    if s.graph is not None:
        coords = None if s.graph.coords is None else s.graph.coords[idx]
        g = Graph(s.graph.weights[np.ix_(idx, idx)], coords)
    return ShiftOperator(m, s.kind, g)


def permute_signal(f, p: Permutation) -> np.ndarray:
    f = np.asarray(f)
    if f.shape[0] != p.n:
        raise DimensionMismatch(f"signal of length {f.shape[0]} for a permutation of size {p.n}")
    return f[np.asarray(p.perm)]

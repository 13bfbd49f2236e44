"""Distance matrices, Gromov products, and the triangle-shape measure.

Everything downstream works on a :class:`DistanceMatrix`: a dense symmetric
matrix of nonnegative reals in which pairs living in different connected
components carry a large finite sentinel (100x the largest true distance)
instead of infinity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

SENTINEL_FACTOR = 100.0

# side-length equality tolerance (relative) for exact integer-valued metrics
EXACT_SIDE_RTOL = 1e-9


class InputError(ValueError):
    """Malformed input data or out-of-range parameters."""


class EmptyResultError(RuntimeError):
    """A pipeline stage legitimately produced nothing to work with."""


@dataclass(frozen=True)
class Graph:
    """Weighted undirected graph as a canonical edge list.

    Edges are stored as (i, j, w) with i < j and w >= 0; zero weights are
    allowed because neighborhood graphs over point clouds may contain
    coincident points. ``params`` records how the graph was constructed.
    """

    n: int
    edges: tuple
    params: dict | None = None

    @classmethod
    def from_edges(cls, n, edges, params=None, default_weight=1.0):
        """Normalize and validate an edge iterable into a Graph.

        Accepts (i, j) or (i, j, w) items; orients every edge as i < j,
        rejects self-loops, duplicates and negative weights.
        """
        if n < 1:
            raise InputError("graph needs at least one vertex")
        seen = set()
        out = []
        for e in edges:
            if len(e) == 2:
                i, j = e
                w = default_weight
            else:
                i, j, w = e
            i, j = int(i), int(j)
            if i == j:
                raise InputError(f"self-loop at vertex {i}")
            if i > j:
                i, j = j, i
            if not (0 <= i and j < n):
                raise InputError(f"edge ({i},{j}) out of range for n={n}")
            if (i, j) in seen:
                raise InputError(f"duplicate edge ({i},{j})")
            w = float(w)
            if w < 0:
                raise InputError(f"negative edge weight {w} on ({i},{j})")
            seen.add((i, j))
            out.append((i, j, w))
        out.sort()
        return cls(n=n, edges=tuple(out), params=params)

    @property
    def is_unweighted(self):
        return all(w == 1.0 for _, _, w in self.edges)


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative distance matrix with a disconnection sentinel.

    ``sentinel`` is None for connected inputs; otherwise it equals
    ``SENTINEL_FACTOR`` times the largest finite distance and is strictly
    greater than every true distance. ``diameter`` excludes sentinel entries.
    ``integer_valued`` marks exact metrics (graph hop counts or integer
    weights) where side-length equality is exact rather than binned.
    """

    d: np.ndarray
    sentinel: float | None
    diameter: float
    integer_valued: bool

    def __post_init__(self):
        self.d.setflags(write=False)

    @property
    def n(self):
        return self.d.shape[0]

    def finite_mask(self):
        """Boolean matrix of true (non-sentinel) entries."""
        if self.sentinel is None:
            return np.ones_like(self.d, dtype=bool)
        return self.d != self.sentinel

    def is_connected_triple(self, v1, v2, v3):
        if self.sentinel is None:
            return True
        sub = self.d[np.ix_([v1, v2, v3], [v1, v2, v3])]
        return not np.any(sub == self.sentinel)

    def scaled(self, c):
        """Return a copy with every distance multiplied by c > 0."""
        if c <= 0:
            raise InputError("scale factor must be positive")
        d = self.d * c
        return DistanceMatrix(
            d=d,
            sentinel=None if self.sentinel is None else self.sentinel * c,
            diameter=self.diameter * c,
            integer_valued=bool(_all_integral(d[np.isfinite(d)])),
        )


@dataclass(frozen=True)
class GromovProducts:
    """The unique r1, r2, r3 with r_i + r_j = d(x_i, x_j)."""

    r1: float
    r2: float
    r3: float

    @property
    def all_nonnegative(self):
        # fails exactly when the three distances violate the triangle inequality
        return self.r1 >= 0 and self.r2 >= 0 and self.r3 >= 0

    def as_array(self):
        return np.array([self.r1, self.r2, self.r3])


@dataclass(frozen=True)
class TripleShape:
    """Shape measure of a metric triple: 1 = collinear, 2 = equilateral."""

    lam: float
    is_degenerate: bool
    is_equilateral: bool


def _all_integral(values):
    return np.allclose(values, np.round(values), rtol=0, atol=1e-9)


def _finalize_distance_matrix(d):
    """Replace inf by the sentinel and derive diameter / integrality flags."""
    n = d.shape[0]
    finite = np.isfinite(d)
    offdiag = ~np.eye(n, dtype=bool)
    finite_off = d[finite & offdiag]
    diameter = float(finite_off.max()) if finite_off.size else 0.0
    if finite.all():
        sentinel = None
    else:
        # degenerate edgeless graphs have diameter 0; keep the sentinel
        # strictly above every true distance anyway
        sentinel = SENTINEL_FACTOR * (diameter if diameter > 0 else 1.0)
        d = np.where(finite, d, sentinel)
    integer_valued = bool(finite_off.size == 0 or _all_integral(finite_off))
    return DistanceMatrix(
        d=np.ascontiguousarray(d, dtype=np.float64),
        sentinel=sentinel,
        diameter=diameter,
        integer_valued=integer_valued,
    )


def shortest_path_matrix(graph: Graph) -> DistanceMatrix:
    """All-pairs shortest-path distances of a weighted undirected graph.

    Unweighted graphs take the BFS specialization; weighted ones run
    Dijkstra. Disconnected pairs receive the finite sentinel
    ``SENTINEL_FACTOR * max finite distance``.
    """
    if graph.n < 1:
        raise InputError("graph has zero vertices")
    for _, _, w in graph.edges:
        if w < 0:
            raise InputError("negative edge weights are not supported")
    n = graph.n
    if not graph.edges:
        d = np.full((n, n), np.inf)
        np.fill_diagonal(d, 0.0)
        return _finalize_distance_matrix(d)
    ii = np.array([e[0] for e in graph.edges])
    jj = np.array([e[1] for e in graph.edges])
    ww = np.array([e[2] for e in graph.edges], dtype=np.float64)
    adj = coo_matrix((ww, (ii, jj)), shape=(n, n)).tocsr()
    unweighted = graph.is_unweighted
    d = shortest_path(adj, method="auto", directed=False, unweighted=unweighted)
    if unweighted:
        d = d.astype(np.float64)
    return _finalize_distance_matrix(d)


def distance_matrix_from_array(arr) -> DistanceMatrix:
    """Wrap a raw square array of distances (no sentinel detection).

    Validates symmetry, zero diagonal and nonnegativity; the caller is
    responsible for the triangle inequality.
    """
    d = np.asarray(arr, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise InputError(f"distance matrix must be square, got shape {d.shape}")
    if d.shape[0] < 1:
        raise InputError("empty distance matrix")
    if not np.isfinite(d).all():
        raise InputError("distance matrix contains NaN or Inf")
    if np.any(d < 0):
        raise InputError("distance matrix contains negative entries")
    if not np.allclose(d, d.T, rtol=1e-9, atol=1e-12):
        raise InputError("distance matrix is not symmetric")
    d = 0.5 * (d + d.T)
    if np.any(np.diag(d) != 0):
        raise InputError("distance matrix diagonal must be zero")
    return _finalize_distance_matrix(d)


def gromov_products(d12, d13, d23) -> GromovProducts:
    """Solve r_i + r_j = d(x_i, x_j) for the three ball radii.

    A negative component signals a triangle-inequality violation; it is
    reported, not raised, so the caller can decide.
    """
    if d12 < 0 or d13 < 0 or d23 < 0:
        raise InputError("distances must be nonnegative")
    r1 = 0.5 * (d12 + d13 - d23)
    r2 = 0.5 * (d12 + d23 - d13)
    r3 = 0.5 * (d13 + d23 - d12)
    return GromovProducts(r1=r1, r2=r2, r3=r3)


def lambda_measure(d12, d13, d23, rel_tol=EXACT_SIDE_RTOL) -> TripleShape:
    """Largest alpha with alpha*d(x_i,x_j) <= d(x_i,x_k) + d(x_j,x_k) for all pairs.

    Closed form: the binding constraint is the longest side, so
    lam = (perimeter - d_max) / d_max. Ranges over [1, 2] on metric triples;
    1 means collinear, 2 equilateral.
    """
    sides = (float(d12), float(d13), float(d23))
    if min(sides) <= 0:
        raise InputError("degenerate triple: zero side length (coincident points)")
    d_max = max(sides)
    lam = (sum(sides) - d_max) / d_max
    tol = rel_tol * d_max
    is_equilateral = (d_max - min(sides)) <= tol
    is_degenerate = lam <= 1.0 + rel_tol
    return TripleShape(lam=lam, is_degenerate=is_degenerate, is_equilateral=is_equilateral)


def load_edge_list(path) -> Graph:
    """Read a `u v [w]` whitespace-separated edge list.

    Lines starting with '#' are comments. 0- vs 1-based indexing is
    auto-detected from the minimum index seen.
    """
    raw = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise InputError(f"{path}:{lineno}: expected 'u v [w]', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: non-numeric field") from exc
            raw.append((u, v, w))
    if not raw:
        raise InputError(f"{path}: no edges found")
    min_idx = min(min(u, v) for u, v, _ in raw)
    offset = 1 if min_idx >= 1 else 0
    raw = [(u - offset, v - offset, w) for u, v, w in raw]
    n = max(max(u, v) for u, v, _ in raw) + 1
    return Graph.from_edges(n, raw, params={"source": str(path)})


def load_distance_csv(path) -> DistanceMatrix:
    """Read a square, header-free, comma-separated distance matrix."""
    try:
        arr = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise InputError(f"{path}: could not parse as numeric CSV: {exc}") from exc
    return distance_matrix_from_array(arr)

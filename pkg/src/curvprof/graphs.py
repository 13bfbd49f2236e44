"""Neighborhood-graph construction from point clouds or precomputed metrics.

Three rules are provided: the plain symmetric k-NN graph ("vanilla"), the
epsilon-ball graph, and a density-adaptive k-NN graph whose per-point k
interpolates between k_min and k_max according to a normalized local
density score.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist, squareform

from .metric import DistanceMatrix, Graph, InputError

logger = logging.getLogger(__name__)

# above this size pairwise matrices stop fitting comfortably in memory and
# neighbor queries go through a kd-tree instead
DENSE_LIMIT = 4096


@dataclass(frozen=True)
class PointCloud:
    """n points in an ambient Euclidean space, one row per point."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=np.float64)
        if c.ndim != 2:
            raise InputError(f"point cloud must be 2-D, got shape {c.shape}")
        if c.shape[0] < 2:
            raise InputError("point cloud needs at least 2 points")
        if not np.isfinite(c).all():
            raise InputError("point cloud contains NaN or Inf coordinates")
        object.__setattr__(self, "coords", c)
        c.setflags(write=False)

    @property
    def n(self):
        return self.coords.shape[0]

    @property
    def dim(self):
        return self.coords.shape[1]


@dataclass(frozen=True)
class DensityScores:
    """Per-point density estimates and the neighbor counts derived from them."""

    raw: np.ndarray
    normalized: np.ndarray
    k_per_point: np.ndarray


def _as_pairwise(data):
    """Dense pairwise-distance matrix for a PointCloud or precomputed input."""
    if isinstance(data, PointCloud):
        if data.n > DENSE_LIMIT:
            return None
        return squareform(pdist(data.coords))
    if isinstance(data, DistanceMatrix):
        if data.sentinel is not None:
            raise InputError("precomputed metric with disconnected pairs cannot seed a neighborhood graph")
        return np.array(data.d)
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError("precomputed input must be a square distance matrix")
    return arr


def _n_points(data):
    if isinstance(data, PointCloud):
        return data.n
    if isinstance(data, DistanceMatrix):
        return data.n
    return np.asarray(data).shape[0]


def _neighbor_lists(data, kmax):
    """Indices and distances of the kmax nearest neighbors of every point.

    Rows are sorted by (distance, index) so that rank ties always resolve
    to the smaller vertex id, independent of the query backend.
    """
    n = _n_points(data)
    if kmax >= n:
        raise InputError(f"k={kmax} must be smaller than the number of points n={n}")
    dense = _as_pairwise(data)
    if dense is not None:
        d = np.array(dense)
        np.fill_diagonal(d, np.inf)
        idx = np.argsort(d, axis=1, kind="stable")[:, :kmax]
        dist = np.take_along_axis(d, idx, axis=1)
        return idx, dist
    # large point cloud: kd-tree with an index-aware re-sort of the candidates
    tree = cKDTree(data.coords)
    dist, idx = tree.query(data.coords, k=kmax + 1)
    keep_idx = np.empty((n, kmax), dtype=np.int64)
    keep_dist = np.empty((n, kmax))
    for i in range(n):
        mask = idx[i] != i
        cand_i, cand_d = idx[i][mask][: kmax + 1], dist[i][mask][: kmax + 1]
        order = np.lexsort((cand_i, cand_d))[:kmax]
        keep_idx[i] = cand_i[order]
        keep_dist[i] = cand_d[order]
    return keep_idx, keep_dist


def knn_graph(data, k) -> Graph:
    """Symmetric k-nearest-neighbor graph (edge if either endpoint selects the other)."""
    if k < 1:
        raise InputError("k must be >= 1")
    idx, dist = _neighbor_lists(data, k)
    return _graph_from_neighbor_selection(
        idx, dist, np.full(_n_points(data), k), params={"rule": "knn", "k": int(k)}
    )


def epsilon_graph(data, eps) -> Graph:
    """Connect every pair at distance <= eps, weighted by that distance."""
    if eps <= 0:
        raise InputError("eps must be positive")
    n = _n_points(data)
    dense = _as_pairwise(data)
    edges = []
    if dense is not None:
        iu, ju = np.triu_indices(n, k=1)
        mask = dense[iu, ju] <= eps
        edges = [(int(i), int(j), float(dense[i, j])) for i, j in zip(iu[mask], ju[mask])]
    else:
        tree = cKDTree(data.coords)
        for i, j in sorted(tree.query_pairs(eps)):
            edges.append((i, j, float(np.linalg.norm(data.coords[i] - data.coords[j]))))
    return Graph.from_edges(n, edges, params={"rule": "epsilon", "eps": float(eps)})


def density_scores(data, k_min, k_max, direction="asc") -> DensityScores:
    """Local density per point and the interpolated neighbor counts.

    Density is the inverse of the mean distance to the k_max nearest
    neighbors; scores are min-max normalized (a flat 0.5 when every point
    has the same density). ``direction`` controls whether denser points get
    k nearer k_max ("asc", default) or nearer k_min ("desc").
    """
    _validate_k_range(k_min, k_max, _n_points(data))
    if direction not in ("asc", "desc"):
        raise InputError("direction must be 'asc' or 'desc'")
    _, dist = _neighbor_lists(data, k_max)
    mean_dist = dist.mean(axis=1)
    with np.errstate(divide="ignore"):
        raw = 1.0 / mean_dist
    dup = ~np.isfinite(raw)
    if dup.any():
        finite = raw[~dup]
        fill = finite.max() if finite.size else 1.0
        logger.warning("%d duplicate point(s): density set to the global maximum", int(dup.sum()))
        raw = np.where(dup, fill, raw)
    lo, hi = raw.min(), raw.max()
    if hi > lo:
        normalized = (raw - lo) / (hi - lo)
    else:
        normalized = np.full_like(raw, 0.5)
    score = normalized if direction == "asc" else 1.0 - normalized
    k_per_point = np.rint(k_min + score * (k_max - k_min)).astype(np.int64)
    return DensityScores(raw=raw, normalized=normalized, k_per_point=k_per_point)


def adaptive_graph(data, k_min, k_max, direction="asc") -> Graph:
    """Density-adaptive k-NN graph: per-point k interpolated by density score."""
    _validate_k_range(k_min, k_max, _n_points(data))
    scores = density_scores(data, k_min, k_max, direction=direction)
    idx, dist = _neighbor_lists(data, k_max)
    return _graph_from_neighbor_selection(
        idx,
        dist,
        scores.k_per_point,
        params={
            "rule": "adaptive",
            "k_min": int(k_min),
            "k_max": int(k_max),
            "direction": direction,
        },
    )


def _validate_k_range(k_min, k_max, n):
    if not (1 <= k_min <= k_max):
        raise InputError(f"need 1 <= k_min <= k_max, got ({k_min}, {k_max})")
    if k_max >= n:
        raise InputError(f"k_max={k_max} must be smaller than the number of points n={n}")


def _graph_from_neighbor_selection(idx, dist, k_per_point, params):
    """Union-symmetrized edge set from per-point neighbor selections."""
    n = idx.shape[0]
    edges = {}
    for i in range(n):
        for rank in range(int(k_per_point[i])):
            j = int(idx[i, rank])
            key = (i, j) if i < j else (j, i)
            edges.setdefault(key, float(dist[i, rank]))
    edge_list = [(i, j, w) for (i, j), w in sorted(edges.items())]
    return Graph.from_edges(n, edge_list, params=params)


def load_point_cloud(path) -> PointCloud:
    """Read a point-cloud CSV (one row per point); a header row is auto-skipped."""
    try:
        arr = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError:
        try:
            arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        except ValueError as exc:
            raise InputError(f"{path}: could not parse as numeric CSV: {exc}") from exc
    return PointCloud(coords=arr)

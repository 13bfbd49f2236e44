"""Classical MDS and Isomap embeddings, plus ingestion of external ones."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .graphs import PointCloud, knn_graph, load_point_cloud
from .metric import DistanceMatrix, Graph, InputError, distance_matrix_from_array, shortest_path_matrix


@dataclass(frozen=True)
class EmbeddingResult:
    """Coordinates plus the spectral bookkeeping of the solve.

    ``eigenvalues`` is the full descending spectrum of the doubly centered
    Gram matrix; ``n_clamped`` counts negative eigenvalues among the top d
    that were clamped to zero; ``stress`` is the fraction of absolute
    spectral mass not carried by the coordinates (0 for an exactly
    d-realizable metric). ``kept_indices`` is set when a disconnected input
    was reduced to its largest component.
    """

    points: PointCloud
    eigenvalues: np.ndarray
    d: int
    stress: float
    n_clamped: int
    kept_indices: np.ndarray | None = None


def _as_distance_array(D):
    if isinstance(D, DistanceMatrix):
        if D.sentinel is not None:
            raise InputError("distance matrix has disconnected pairs: embed components separately")
        return D.d
    arr = np.asarray(D, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError("expected a square distance matrix")
    return arr


def classical_mds(D, d) -> EmbeddingResult:
    """Classical (Torgerson) MDS of a finite metric into d dimensions.

    Double-centers the squared distances, takes the top-d eigenpairs of the
    resulting Gram matrix, clamps negative eigenvalues to zero and fixes
    each axis sign so its largest-magnitude coordinate is positive.
    """
    arr = _as_distance_array(D)
    n = arr.shape[0]
    if not (1 <= d < n):
        raise InputError(f"target dimension d={d} must satisfy 1 <= d < n={n}")
    J = np.eye(n) - np.full((n, n), 1.0 / n)
    B = -0.5 * J @ (arr**2) @ J
    B = 0.5 * (B + B.T)
    evals, evecs = np.linalg.eigh(B)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    top = evals[:d]
    clamped = np.maximum(top, 0.0)
    n_clamped = int(np.sum(top < 0))
    coords = evecs[:, :d] * np.sqrt(clamped)
    for col in range(d):
        pivot = np.argmax(np.abs(coords[:, col]))
        if coords[pivot, col] < 0:
            coords[:, col] = -coords[:, col]
    total_mass = float(np.abs(evals).sum())
    carried = float(clamped.sum())
    stress = 0.0 if total_mass == 0 else max(0.0, (total_mass - carried) / total_mass)
    return EmbeddingResult(
        points=PointCloud(coords=coords),
        eigenvalues=evals,
        d=d,
        stress=stress,
        n_clamped=n_clamped,
    )


def isomap(data, k, d) -> EmbeddingResult:
    """Geodesic MDS: kNN-graph shortest paths fed into classical MDS.

    Accepts a PointCloud (or precomputed square metric) to build the kNN
    graph from, or an already-built Graph. A disconnected graph is reduced
    to its largest component with a warning.
    """
    if isinstance(data, Graph):
        g = data
    else:
        g = knn_graph(data, k)
    Dm = shortest_path_matrix(g)
    kept = None
    if Dm.sentinel is not None:
        kept = _largest_component(g)
        warnings.warn(
            f"kNN graph is disconnected; embedding the largest component ({kept.size} of {g.n} points)",
            stacklevel=2,
        )
        sub = Dm.d[np.ix_(kept, kept)]
        Dm = distance_matrix_from_array(sub)
    res = classical_mds(Dm, d)
    if kept is None:
        return res
    return EmbeddingResult(
        points=res.points,
        eigenvalues=res.eigenvalues,
        d=res.d,
        stress=res.stress,
        n_clamped=res.n_clamped,
        kept_indices=kept,
    )


def _largest_component(g: Graph):
    from scipy.sparse import coo_matrix

    ii = np.array([e[0] for e in g.edges], dtype=np.int64)
    jj = np.array([e[1] for e in g.edges], dtype=np.int64)
    adj = coo_matrix((np.ones(ii.size), (ii, jj)), shape=(g.n, g.n))
    _, labels = connected_components(adj, directed=False)
    sizes = np.bincount(labels)
    return np.flatnonzero(labels == int(np.argmax(sizes)))


def load_external_embedding(path, expected_n=None) -> PointCloud:
    """Read an externally produced embedding CSV as a point cloud.

    ``expected_n`` guards against pairing an embedding with the wrong
    dataset; a mismatch is an explicit error.
    """
    cloud = load_point_cloud(path)
    if expected_n is not None and cloud.n != expected_n:
        raise InputError(
            f"{path}: embedding has {cloud.n} rows but the dataset has {expected_n} points"
        )
    return cloud

"""Profiles as discrete measures and exact 1-Wasserstein comparison.

A profile becomes a probability distribution over a common (r, rho) grid:
the scale axis is normalized by the profile's own largest r, every triangle
observation is snapped to its nearest grid node, and node masses are
triangle counts over the total. Two distributions on the same grid are
compared by exact optimal transport with Euclidean ground cost, solved as a
linear program on the occupied nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .metric import EmptyResultError, InputError
from .profile import CurvatureProfile

MASS_SUM_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform node lattice over the (r_norm, rho) rectangle."""

    nr: int = 50
    nrho: int = 50
    r_range: tuple = (0.0, 1.0)
    rho_range: tuple = (1.0, 2.0)

    def nodes(self):
        r_axis = np.linspace(self.r_range[0], self.r_range[1], self.nr)
        rho_axis = np.linspace(self.rho_range[0], self.rho_range[1], self.nrho)
        rr, pp = np.meshgrid(r_axis, rho_axis, indexing="ij")
        return np.column_stack([rr.ravel(), pp.ravel()])

    def to_dict(self):
        return {
            "nr": self.nr,
            "nrho": self.nrho,
            "r_range": list(self.r_range),
            "rho_range": list(self.rho_range),
        }


@dataclass(frozen=True)
class ProfileDistribution:
    """Discrete measure on occupied grid nodes; masses sum to one."""

    support: np.ndarray
    mass: np.ndarray
    grid: GridSpec
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.support.shape[0] != self.mass.shape[0]:
            raise InputError("support and mass lengths differ")
        if self.support.shape[0] == 0:
            raise EmptyResultError("empty distribution")
        if np.any(self.mass < 0):
            raise InputError("negative mass")
        if abs(float(self.mass.sum()) - 1.0) > MASS_SUM_TOL:
            raise InputError(f"masses sum to {self.mass.sum()}, not 1")
        self.support.setflags(write=False)
        self.mass.setflags(write=False)


@dataclass(frozen=True)
class TransportPlan:
    """Nonzero transport flows (source index, target index, amount)."""

    flows: tuple
    cost: float


def to_distribution(profile: CurvatureProfile, grid=None, normalize_r=True) -> ProfileDistribution:
    """Snap a profile's (r, rho) triangle observations onto the grid.

    Each triangle is one observation at (r / max_r, rho) (raw r when
    ``normalize_r`` is off); nearest-node assignment runs through a kd-tree
    and node mass is the snapped count over the total triangle count.
    """
    if profile.is_empty:
        raise EmptyResultError("cannot build a distribution from an empty profile")
    grid = grid or GridSpec()
    max_r = profile.max_r()
    obs = []
    for rec in profile.records:
        r = rec.r / max_r if normalize_r else rec.r
        for rho in rec.rho_values:
            obs.append((r, rho))
    obs = np.asarray(obs)
    nodes = grid.nodes()
    _, node_idx = cKDTree(nodes).query(obs)
    occupied, counts = np.unique(node_idx, return_counts=True)
    mass = counts / counts.sum()
    return ProfileDistribution(
        support=nodes[occupied],
        mass=mass.astype(np.float64),
        grid=grid,
        meta={"total_triangles": int(counts.sum()), "max_r": max_r, "normalize_r": normalize_r},
    )


def _dist_key(dist):
    return (dist.support.tobytes(), dist.mass.tobytes())


def _solve_transport_lp(p, q, M):
    """Exact transport LP between mass vectors p, q with cost matrix M."""
    a, b = len(p), len(q)
    nvar = a * b
    # row-sum constraints (a of them) then column sums with the redundant
    # last column dropped
    row_r = np.repeat(np.arange(a), b)
    col_r = np.arange(nvar)
    row_c = np.repeat(a + np.arange(b - 1), a)
    col_c = (np.arange(a)[None, :] * b + np.arange(b - 1)[:, None]).ravel()
    rows = np.concatenate([row_r, row_c])
    cols = np.concatenate([col_r, col_c])
    data = np.ones(rows.size)
    A_eq = coo_matrix((data, (rows, cols)), shape=(a + b - 1, nvar))
    b_eq = np.concatenate([p, q[:-1]])
    res = linprog(M.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return res.x.reshape(a, b), float(res.fun)


def wasserstein1(P: ProfileDistribution, Q: ProfileDistribution, return_plan=False):
    """Exact W1 between two distributions on the same grid.

    Euclidean ground metric on the (r_norm, rho) coordinates. The pair is
    put into a canonical order before solving, so the result is exactly
    symmetric; identical inputs short-circuit to zero.
    """
    if P.grid != Q.grid:
        raise InputError("distributions live on different grids")
    if _dist_key(P) == _dist_key(Q):
        if return_plan:
            flows = tuple((i, i, float(m)) for i, m in enumerate(P.mass))
            return 0.0, TransportPlan(flows=flows, cost=0.0)
        return 0.0
    swapped = _dist_key(Q) < _dist_key(P)
    A, B = (Q, P) if swapped else (P, Q)
    M = cdist(A.support, B.support)
    plan, cost = _solve_transport_lp(A.mass, B.mass, M)
    if not return_plan:
        return cost
    nz = np.argwhere(plan > 1e-15)
    if swapped:
        flows = tuple((int(j), int(i), float(plan[i, j])) for i, j in nz)
    else:
        flows = tuple((int(i), int(j), float(plan[i, j])) for i, j in nz)
    return cost, TransportPlan(flows=flows, cost=cost)


def estimate_dimension(original: CurvatureProfile, embedded, grid=None, normalize_r=True, on_empty="error"):
    """W1 of every candidate embedding against the original profile.

    ``embedded`` maps target dimension -> profile. Returns
    (d_best, [(d, w1), ...]) with d ascending; d_best is the argmin,
    smallest dimension on exact ties.

    An empty embedded profile raises with the offending dimension named,
    unless ``on_empty="inf"``: an embedding with no equilateral structure at
    all (e.g. a 1-D re-embedding, whose geodesics are collinear) then scores
    W1 = inf and simply cannot win the argmin.
    """
    if not embedded:
        raise InputError("no candidate dimensions supplied")
    if on_empty not in ("error", "inf"):
        raise InputError("on_empty must be 'error' or 'inf'")
    grid = grid or GridSpec()
    try:
        P0 = to_distribution(original, grid, normalize_r=normalize_r)
    except EmptyResultError as exc:
        raise EmptyResultError(f"original profile is empty: {exc}") from exc
    curve = []
    for d in sorted(embedded):
        try:
            Pd = to_distribution(embedded[d], grid, normalize_r=normalize_r)
        except EmptyResultError as exc:
            if on_empty == "inf":
                curve.append((int(d), float("inf")))
                continue
            raise EmptyResultError(f"profile for dimension {d} is empty") from exc
        curve.append((int(d), float(wasserstein1(P0, Pd))))
    if all(np.isinf(w) for _, w in curve):
        raise EmptyResultError("every candidate profile is empty")
    d_best = min(curve, key=lambda t: (t[1], t[0]))[0]
    return d_best, curve

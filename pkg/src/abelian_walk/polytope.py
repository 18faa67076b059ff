"""Polytopes of probability vectors.

The polytope of ``x`` is the convex hull of its permuted copies
``x @ M_pi``. With respect to a group only the permutations of its regular
representation are used, which gives at most ``order`` vertices. Vertices
are kept in full ``n`` coordinates; dropping the last coordinate is only a
display convention.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.optimize import linprog, nnls

from .birkhoff import probability_vector, uniform
from .errors import CapacityError, DomainError
from .group import GroupSpec, permutation_rep

DEDUP_TOL = 1e-10
CONTAIN_TOL = 1e-9
RANK_TOL = 1e-9
MAX_FULL_N = 8


@dataclass(frozen=True, eq=False)
class ProbPolytope:
    """Convex hull of ``vertices`` (one probability vector per row).

    ``provenance`` is ``"full"`` or the `GroupSpec` the vertices came from.
    """

    vertices: np.ndarray
    provenance: Union[str, GroupSpec] = "full"

    @property
    def n(self) -> int:
        return self.vertices.shape[1]

    @property
    def vertex_count(self) -> int:
        return self.vertices.shape[0]

    def projected(self) -> np.ndarray:
        """Vertices in the first ``n-1`` coordinates."""
        return self.vertices[:, :-1]


def _cluster_ids(values: np.ndarray, tol: float) -> dict:
    """Map each distinct float to a cluster id; neighbours within tol merge."""
    ids = {}
    current = -1
    prev = None
    for v in np.unique(values):
        if prev is None or v - prev > tol:
            current += 1
        ids[v] = current
        prev = v
    return ids


def _dedup(rows: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    # Coordinates of permuted copies are entries of x, so clustering the
    # scalar values decides max-norm equality of whole rows.
    ids = _cluster_ids(rows.ravel(), tol)
    seen = {}
    for row in rows:
        key = tuple(ids[v] for v in row)
        seen.setdefault(key, row)
    out = np.array(list(seen.values()))
    out.setflags(write=False)
    return out


def subgroup_polytope(x, spec: GroupSpec) -> ProbPolytope:
    """Hull of ``{x @ M(r) : r in G}``."""
    x = probability_vector(x)
    if x.size != spec.order:
        raise DomainError(f"vector length {x.size} does not match group order {spec.order}")
    rows = np.array([permutation_rep(spec, r).act(x) for r in range(spec.order)])
    return ProbPolytope(_dedup(rows), spec)


def full_polytope(x) -> ProbPolytope:
    """Hull of all permuted copies of ``x``; limited to ``n <= 8``."""
    x = probability_vector(x)
    n = x.size
    if n > MAX_FULL_N:
        raise CapacityError(f"full polytope needs {n}! permutations; limit is n <= {MAX_FULL_N}")
    ids = _cluster_ids(x, DEDUP_TOL)
    labels = [ids[v] for v in x]
    # Permute cluster labels first so duplicates collapse before materializing.
    seen = {}
    for perm in itertools.permutations(range(n)):
        key = tuple(labels[i] for i in perm)
        if key not in seen:
            seen[key] = x[list(perm)]
    rows = np.array(list(seen.values()))
    rows.setflags(write=False)
    return ProbPolytope(rows, "full")


def _residual(vertices: np.ndarray, lam: np.ndarray, y: np.ndarray) -> float:
    return float(np.abs(lam @ vertices - y).max())


def convex_weights(poly: ProbPolytope, y, tol: float = CONTAIN_TOL) -> Optional[np.ndarray]:
    """Weights ``lam >= 0`` summing to 1 with ``|lam @ V - y|_max <= tol``, or None.

    Tries nonnegative least squares first, then a Chebyshev-residual linear
    program. Any returned certificate has been re-checked against ``tol``.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (poly.n,):
        raise DomainError(f"point has shape {y.shape}, polytope lives in {poly.n} coordinates")
    V = poly.vertices
    k = V.shape[0]

    def accept(lam):
        lam = np.clip(lam, 0.0, None)
        total = lam.sum()
        if total <= 0:
            return None
        lam = lam / total
        return lam if _residual(V, lam, y) <= tol else None

    # Row of ones pins sum(lam) = 1 explicitly (vertices need not be normalized).
    A = np.vstack([V.T, np.ones((1, k))])
    b = np.concatenate([y, [1.0]])
    lam = accept(nnls(A, b)[0])
    if lam is not None:
        return lam

    # min t  s.t.  -t <= V.T lam - y <= t,  sum lam = 1,  lam >= 0
    n = poly.n
    c = np.zeros(k + 1)
    c[-1] = 1.0
    A_ub = np.block([[V.T, -np.ones((n, 1))], [-V.T, -np.ones((n, 1))]])
    b_ub = np.concatenate([y, -y])
    A_eq = np.concatenate([np.ones(k), [0.0]])[None, :]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * (k + 1), method="highs")
    if res.status != 0:
        return None
    return accept(res.x[:k])


def contains(poly: ProbPolytope, y, tol: float = CONTAIN_TOL) -> bool:
    return convex_weights(poly, y, tol) is not None


def is_subset(inner: ProbPolytope, outer: ProbPolytope, tol: float = CONTAIN_TOL) -> bool:
    """True if every vertex of ``inner`` lies in ``outer``."""
    if inner.n != outer.n:
        raise DomainError(f"ambient dimensions differ: {inner.n} vs {outer.n}")
    return all(contains(outer, v, tol) for v in inner.vertices)


def dimension(poly: ProbPolytope, tol: float = RANK_TOL) -> int:
    """Affine dimension: rank of ``{v_i - v_0}`` with singular values above tol."""
    V = poly.vertices
    if V.shape[0] == 0:
        raise DomainError("empty polytope")
    diffs = V[1:] - V[0]
    if diffs.size == 0:
        return 0
    sv = np.linalg.svd(diffs, compute_uv=False)
    return int((sv > tol).sum())


def circumradius(poly: ProbPolytope, center=None) -> float:
    """Largest Euclidean distance from ``center`` (default: uniform) to a vertex."""
    c = uniform(poly.n) if center is None else np.asarray(center, dtype=float)
    return float(np.linalg.norm(poly.vertices - c, axis=1).max())

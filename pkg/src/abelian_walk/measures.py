"""Descriptors of probability vectors: Lorenz values, majorization, Gini
index, entropy and total variation distance.

All functions take plain sequences or arrays and validate them as
probability vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .birkhoff import probability_vector
from .errors import DomainError

MAJORIZATION_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class LorenzProfile:
    """Cumulative sums of the ascending-sorted entries.

    ``order`` is the sorting permutation (ties broken by original index).
    """

    values: np.ndarray
    order: np.ndarray


def lorenz(x) -> LorenzProfile:
    x = probability_vector(x)
    order = np.argsort(x, kind="stable")
    values = np.cumsum(x[order])
    values.setflags(write=False)
    order.setflags(write=False)
    return LorenzProfile(values, order)


def _same_length(x, y):
    x = probability_vector(x)
    y = probability_vector(y)
    if x.size != y.size:
        raise DomainError(f"length mismatch: {x.size} vs {y.size}")
    return x, y


def majorizes(x, y) -> bool:
    """True if ``x`` is at least as sparse as ``y`` (every Lorenz value of
    ``x`` is <= the matching one of ``y``).

    This is a preorder: permutations of one vector majorize each other.
    """
    x, y = _same_length(x, y)
    return bool(np.all(lorenz(x).values <= lorenz(y).values + MAJORIZATION_SLACK))


def gini(x) -> float:
    """Gini index ``1 - 2/(n+1) * sum_a L(a; x)``; lies in ``[0, (n-1)/(n+1)]``."""
    x = probability_vector(x)
    n = x.size
    return float(1.0 - 2.0 / (n + 1) * lorenz(x).values.sum())


def gini_pairwise(x) -> float:
    """Equivalent form ``sum_{a,b} |x_a - x_b| / (2(n+1))``."""
    x = probability_vector(x)
    n = x.size
    return float(np.abs(x[:, None] - x[None, :]).sum() / (2.0 * (n + 1)))


def entropy(x, base: float | None = None) -> float:
    """Shannon entropy in nats (``base=2`` for bits), with ``0 log 0 = 0``."""
    x = probability_vector(x)
    nz = x[x > 0]
    h = float(-(nz * np.log(nz)).sum())
    if base is not None:
        h /= np.log(base)
    return h if h > 0 else 0.0


def tv_distance(x, y) -> float:
    """Total variation distance ``(1/2) sum_a |x_a - y_a|``."""
    x, y = _same_length(x, y)
    return float(0.5 * np.abs(x - y).sum())

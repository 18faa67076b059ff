"""Doubly stochastic walks on finite Abelian groups.

A step distribution ``p`` over the group elements defines the transition
matrix ``P[a, b] = p(-g_a + g_b)``, i.e. ``P = sum_r p(r) M(r)``. Every such
matrix lies in the Birkhoff subpolytope spanned by the permutation
representation of the group. Vectors are rows and act from the left:
``q(n) = q(0) @ P**n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, NotErgodicError
from .group import GroupSpec, add, inverse

SUM_TOL = 1e-12
RENORMALIZE_TOL = 1e-9
MEMBERSHIP_TOL = 1e-10
ERGODIC_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def probability_vector(x, *, renormalize: bool = False) -> np.ndarray:
    """Validate ``x`` as a probability vector and return a read-only copy.

    Entries must be nonnegative and sum to one within 1e-12. With
    ``renormalize=True`` violations up to 1e-9 (small negative entries or
    sum drift) are repaired; anything worse is always an error.
    """
    x = np.array(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("probability vector must be a non-empty 1-d array")
    if not np.all(np.isfinite(x)):
        raise DomainError("probability vector has non-finite entries")
    low = x.min()
    drift = abs(x.sum() - 1.0)
    if low >= 0 and drift <= SUM_TOL:
        return _frozen(x)
    if renormalize and low >= -RENORMALIZE_TOL and drift <= RENORMALIZE_TOL:
        x = np.clip(x, 0.0, None)
        return _frozen(x / x.sum())
    if low < 0:
        raise DomainError(f"probability vector has negative entry {low:.3g}")
    raise DomainError(f"probability vector sums to {x.sum():.15g}, not 1")


def uniform(n: int) -> np.ndarray:
    return _frozen(np.full(n, 1.0 / n))


def delta(n: int, index: int = 0) -> np.ndarray:
    if not 0 <= index < n:
        raise DomainError(f"delta index {index} out of range for length {n}")
    x = np.zeros(n)
    x[index] = 1.0
    return _frozen(x)


def binomial_step(spec: GroupSpec, f: float) -> np.ndarray:
    """Binomial weights ``C(l-1, v) f**v (1-f)**(l-1-v)`` over the group indices."""
    if not 0.0 <= f <= 1.0:
        raise DomainError(f"binomial parameter must lie in [0, 1], got {f}")
    m = spec.order - 1
    p = [math.comb(m, v) * f**v * (1 - f) ** (m - v) for v in range(m + 1)]
    return probability_vector(p, renormalize=True)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """A validated doubly stochastic matrix.

    ``certificate`` is the step distribution ``p`` showing membership in the
    group's Birkhoff subpolytope, when one is known; ``spec`` is its group.
    """

    entries: np.ndarray
    certificate: Optional[np.ndarray] = None
    spec: Optional[GroupSpec] = None

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"transition matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)) or m.min() < 0:
            raise DomainError("transition matrix must have finite nonnegative entries")
        rows = np.abs(m.sum(axis=1) - 1).max()
        cols = np.abs(m.sum(axis=0) - 1).max()
        if rows > SUM_TOL or cols > SUM_TOL:
            raise DomainError(
                f"matrix is not doubly stochastic (max row deviation {rows:.3g}, "
                f"max column deviation {cols:.3g})"
            )
        object.__setattr__(self, "entries", _frozen(m))
        if self.certificate is not None:
            object.__setattr__(self, "certificate", probability_vector(self.certificate))

    @classmethod
    def from_array(cls, m, *, renormalize: bool = False) -> TransitionMatrix:
        """Build from raw entries; ``renormalize`` repairs sums off by at most 1e-9."""
        m = np.array(m, dtype=float)
        if renormalize and m.ndim == 2 and m.size:
            if m.min() >= -RENORMALIZE_TOL:
                m = np.clip(m, 0.0, None)
            # Sinkhorn sweeps only touch matrices already within 1e-9.
            if (np.abs(m.sum(1) - 1).max() <= RENORMALIZE_TOL
                    and np.abs(m.sum(0) - 1).max() <= RENORMALIZE_TOL):
                for _ in range(50):
                    m = m / m.sum(axis=1, keepdims=True)
                    m = m / m.sum(axis=0, keepdims=True)
        return cls(m)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other):
        if isinstance(other, TransitionMatrix):
            prod = self.entries @ other.entries
            return TransitionMatrix.from_array(prod, renormalize=True)
        return NotImplemented


def transition_matrix(spec: GroupSpec, p) -> TransitionMatrix:
    """Group-circulant transition matrix ``P[a, b] = p(-g_a + g_b)``."""
    p = probability_vector(p)
    if p.size != spec.order:
        raise DomainError(f"step distribution has length {p.size}, group order is {spec.order}")
    el = spec.elements()
    idx = add(spec, inverse(spec, el)[:, None], el[None, :])
    return TransitionMatrix(p[idx], certificate=p, spec=spec)


def _as_entries(P) -> np.ndarray:
    return P.entries if isinstance(P, TransitionMatrix) else np.asarray(P, dtype=float)


def evolve(q0, P, n: int) -> np.ndarray:
    """Return ``q0 @ P**n`` by repeated multiplication."""
    return trajectory(q0, P, n)[-1]


def trajectory(q0, P, n: int) -> list:
    """All states ``q(0), ..., q(n)`` of the walk started at ``q0``."""
    if n < 0:
        raise DomainError("number of steps must be >= 0")
    q = probability_vector(q0)
    m = _as_entries(P)
    if m.shape != (q.size, q.size):
        raise DomainError(f"dimension mismatch: vector {q.size}, matrix {m.shape}")
    out = [q]
    for _ in range(n):
        q = q @ m
        out.append(_frozen(q))
    return out


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues of a group-circulant matrix, one per character.

    ``eigenvalues[0]`` belongs to the trivial character and equals 1.
    ``labels[i]`` is the character index: ``k`` for ``omega(k a)`` on Z(d),
    ``d*j + k`` for ``omega(j alpha + k beta)`` on Z(d) x Z(d).
    """

    eigenvalues: np.ndarray
    labels: np.ndarray

    @property
    def e_max(self) -> float:
        if self.eigenvalues.size < 2:
            return 0.0
        return float(np.abs(self.eigenvalues[1:]).max())


def spectrum(spec: GroupSpec, p) -> Spectrum:
    """Eigenvalues via character sums ``e_chi = sum_g p(g) chi(g)``."""
    p = probability_vector(p)
    if p.size != spec.order:
        raise DomainError(f"step distribution has length {p.size}, group order is {spec.order}")
    d = spec.d
    k = np.arange(d)
    chars = np.exp(2j * np.pi * np.outer(k, k) / d)
    if spec.kind == "cyclic":
        ev = chars @ p
    else:
        # p[alpha, beta]; e[j, k] = sum omega(j alpha) omega(k beta) p[alpha, beta]
        ev = (chars @ p.reshape(d, d) @ chars.T).reshape(-1)
    ev = np.array(ev)
    ev[0] = 1.0
    ev.setflags(write=False)
    labels = np.arange(spec.order)
    labels.setflags(write=False)
    return Spectrum(ev, labels)


def is_ergodic(s: Spectrum, tol: float = ERGODIC_TOL) -> bool:
    return s.e_max < 1.0 - tol


def mixing_time_heuristic(s: Spectrum, epsilon: float, tol: float = ERGODIC_TOL) -> float:
    """Steps ``k`` at which ``e_max**k`` falls to ``epsilon``."""
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    if not is_ergodic(s, tol):
        raise NotErgodicError(f"e_max = {s.e_max:.6g} is not below 1")
    if s.e_max == 0.0:
        return 0.0
    return math.log(epsilon) / math.log(s.e_max)


def mixing_time_empirical(q0, P, epsilon: float, max_steps: int) -> Optional[int]:
    """Smallest ``n <= max_steps`` with ``||q(n) - u|| <= epsilon``, else None."""
    from .measures import tv_distance

    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    q = probability_vector(q0)
    m = _as_entries(P)
    u = uniform(q.size)
    for n in range(max_steps + 1):
        if tv_distance(q, u) <= epsilon:
            return n
        q = q @ m
    return None


def subpolytope_membership(spec: GroupSpec, P) -> Optional[np.ndarray]:
    """Return the step distribution ``p`` with ``P == transition_matrix(spec, p)``.

    Reads the candidate from row 0 (``P[0, r] = p(r)``) and accepts it only
    if the reconstruction matches every entry within 1e-10.
    """
    m = _as_entries(P)
    if m.shape != (spec.order, spec.order):
        return None
    try:
        candidate = probability_vector(m[0], renormalize=True)
    except DomainError:
        return None
    rebuilt = transition_matrix(spec, candidate).entries
    if np.abs(rebuilt - m).max() <= MEMBERSHIP_TOL:
        return candidate
    return None


def certify(spec: GroupSpec, P: TransitionMatrix) -> TransitionMatrix:
    """Attach a membership certificate to ``P`` when one exists."""
    p = subpolytope_membership(spec, P)
    if p is None:
        return P
    return TransitionMatrix(P.entries, certificate=p, spec=spec)


def is_doubly_stochastic(m, tol: float = 1e-10) -> bool:
    m = np.asarray(m, dtype=float)
    return bool(
        m.ndim == 2
        and m.shape[0] == m.shape[1]
        and m.min() >= -tol
        and np.abs(m.sum(0) - 1).max() <= tol
        and np.abs(m.sum(1) - 1).max() <= tol
    )


def matrix_power(P, k: int) -> np.ndarray:
    """``P**k`` by repeated multiplication (keeps entries nonnegative)."""
    m = _as_entries(P)
    out = np.eye(m.shape[0])
    for _ in range(k):
        out = out @ m
    return out


__all__ = [
    "probability_vector", "uniform", "delta", "binomial_step", "TransitionMatrix",
    "transition_matrix", "evolve", "trajectory", "Spectrum", "spectrum", "is_ergodic",
    "mixing_time_heuristic", "mixing_time_empirical", "subpolytope_membership",
    "certify", "is_doubly_stochastic", "matrix_power",
]

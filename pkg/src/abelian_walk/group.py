"""Finite Abelian groups Z(d) and Z(d) x Z(d) in single-index form.

Elements are always canonical indices ``0 .. order-1``. For the product
group an index ``nu`` encodes the pair ``(alpha, beta)`` as
``nu = d*alpha + beta``; the pair form is only a codec, never storage.
Addition in the product group is componentwise mod ``d`` and differs from
addition mod ``d**2`` (there is no carry between the two digits).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import CapacityError, DomainError, UnsupportedOperationError

MAX_TABLE_ORDER = 4096

GroupKind = Literal["cyclic", "product"]


@dataclass(frozen=True)
class GroupSpec:
    """A cyclic group Z(d) or the product Z(d) x Z(d)."""

    kind: GroupKind
    d: int

    def __post_init__(self):
        if self.kind not in ("cyclic", "product"):
            raise DomainError(f"unknown group kind {self.kind!r}")
        if isinstance(self.d, bool) or not isinstance(self.d, (int, np.integer)):
            raise DomainError(f"d must be an integer, got {self.d!r}")
        if self.d < 2:
            raise DomainError(f"d must be >= 2, got {self.d}")
        object.__setattr__(self, "d", int(self.d))

    @classmethod
    def cyclic(cls, d: int) -> GroupSpec:
        return cls("cyclic", d)

    @classmethod
    def product(cls, d: int) -> GroupSpec:
        return cls("product", d)

    @property
    def order(self) -> int:
        return self.d if self.kind == "cyclic" else self.d * self.d

    def elements(self) -> np.ndarray:
        return np.arange(self.order)

    def check(self, g) -> None:
        """Raise `DomainError` unless every index in ``g`` lies in range."""
        arr = np.asarray(g)
        if arr.dtype.kind not in "iu":
            raise DomainError(f"group elements must be integers, got {g!r}")
        if arr.size and (arr.min() < 0 or arr.max() >= self.order):
            raise DomainError(
                f"element index out of range [0, {self.order - 1}] for {self}: {g!r}"
            )

    def __str__(self):
        return f"Z({self.d})" if self.kind == "cyclic" else f"Z({self.d})xZ({self.d})"


def _unwrap(result):
    return int(result) if np.ndim(result) == 0 else result


def add(spec: GroupSpec, g, h):
    """Group sum of ``g`` and ``h``; accepts ints or integer arrays (broadcast)."""
    spec.check(g)
    spec.check(h)
    g = np.asarray(g)
    h = np.asarray(h)
    d = spec.d
    if spec.kind == "cyclic":
        return _unwrap((g + h) % d)
    alpha = (g // d + h // d) % d
    beta = (g % d + h % d) % d
    return _unwrap(d * alpha + beta)


def inverse(spec: GroupSpec, g):
    """Additive inverse, so that ``add(spec, g, inverse(spec, g)) == 0``."""
    spec.check(g)
    g = np.asarray(g)
    d = spec.d
    if spec.kind == "cyclic":
        return _unwrap((-g) % d)
    return _unwrap(d * ((-(g // d)) % d) + (-(g % d)) % d)


def decode(spec: GroupSpec, nu) -> tuple:
    """Split a product-group index into ``(alpha, beta)``."""
    if spec.kind != "product":
        raise UnsupportedOperationError("pair codec is only defined for product groups")
    spec.check(nu)
    nu = np.asarray(nu)
    return _unwrap(nu // spec.d), _unwrap(nu % spec.d)


def encode(spec: GroupSpec, alpha, beta):
    """Inverse of `decode`: ``nu = d*alpha + beta``."""
    if spec.kind != "product":
        raise UnsupportedOperationError("pair codec is only defined for product groups")
    alpha = np.asarray(alpha)
    beta = np.asarray(beta)
    for part in (alpha, beta):
        if part.dtype.kind not in "iu" or (part.size and (part.min() < 0 or part.max() >= spec.d)):
            raise DomainError(f"pair components must be integers in [0, {spec.d - 1}]")
    return _unwrap(spec.d * alpha + beta)


@dataclass(frozen=True)
class PermutationMatrix:
    """Permutation matrix stored as its image map.

    Row ``a`` has its single 1 in column ``image[a]``. Matrix products
    follow the dense convention: ``(A @ B).image[a] == B.image[A.image[a]]``.
    """

    image: tuple

    def __post_init__(self):
        image = tuple(int(i) for i in self.image)
        if sorted(image) != list(range(len(image))):
            raise DomainError("image map is not a bijection")
        object.__setattr__(self, "image", image)

    @property
    def size(self) -> int:
        return len(self.image)

    def dense(self) -> np.ndarray:
        m = np.zeros((self.size, self.size))
        m[np.arange(self.size), self.image] = 1.0
        return m

    def transpose(self) -> PermutationMatrix:
        inv = [0] * self.size
        for a, b in enumerate(self.image):
            inv[b] = a
        return PermutationMatrix(tuple(inv))

    def __matmul__(self, other: PermutationMatrix) -> PermutationMatrix:
        if not isinstance(other, PermutationMatrix):
            return NotImplemented
        if other.size != self.size:
            raise DomainError("permutation sizes differ")
        return PermutationMatrix(tuple(other.image[i] for i in self.image))

    def act(self, x) -> np.ndarray:
        """Row vector times matrix: ``(x @ M)[image[a]] = x[a]``."""
        x = np.asarray(x)
        out = np.empty_like(x)
        out[list(self.image)] = x
        return out


def permutation_rep(spec: GroupSpec, r: int) -> PermutationMatrix:
    """Matrix M(r) with ``M(r)[a, b] = 1`` iff ``g_b = g_a + g_r``."""
    spec.check(r)
    return PermutationMatrix(tuple(add(spec, spec.elements(), r)))


def cayley_table(spec: GroupSpec) -> np.ndarray:
    """Full addition table; refuses groups with more than 4096 elements."""
    if spec.order > MAX_TABLE_ORDER:
        raise CapacityError(
            f"cayley table for order {spec.order} exceeds limit {MAX_TABLE_ORDER}"
        )
    el = spec.elements()
    return add(spec, el[:, None], el[None, :])

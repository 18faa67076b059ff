"""Quantum realizations of the group walks on a d-dimensional Hilbert space.

Two measurement schemes are modelled. Projective: measure in the position
basis ``|X;j>``, evolve with a random unitary channel built from shifts
``X**a``, measure again; the outcome distributions follow a walk on Z(d).
POVM: measure with the d**2 coherent states ``D(nu)|eta>`` of a generic
fiducial ``eta``, evolve with a channel of displacements, measure again;
the outcomes follow a walk on Z(d) x Z(d).

Conventions: ``X|X;j> = |X;j+1>``, ``Z|X;j> = omega(j)|X;j>`` with
``omega(k) = exp(2 pi i k / d)``, and
``D(alpha, beta)|X;j> = omega(2^-1 alpha beta + alpha j)|X;j+beta>`` where
``2^-1 = (d+1)/2``. Anything using ``2^-1`` requires odd d.
"""
from __future__ import annotations

import itertools
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .birkhoff import (
    TransitionMatrix,
    certify,
    probability_vector,
    trajectory,
)
from .errors import DomainError, UnsupportedOperationError
from .group import GroupSpec, add

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_FLOOR = -1e-9
UNITARY_TOL = 1e-10
DET_FLOOR = 1e-8
OVERLAP_CEILING = 1.0 - 1e-9


def omega(d: int, k) -> np.ndarray:
    return np.exp(2j * np.pi * np.asarray(k) / d)


def _require_odd(d: int) -> None:
    if d < 3 or d % 2 == 0:
        raise UnsupportedOperationError(f"only odd d >= 3 is supported, got d={d}")


def half(d: int) -> int:
    """The inverse of 2 in Z(d) for odd d."""
    _require_odd(d)
    return (d + 1) // 2


def fourier_matrix(d: int) -> np.ndarray:
    """``F[j, k] = omega(jk) / sqrt(d)``."""
    _require_odd(d)
    j = np.arange(d)
    return omega(d, np.outer(j, j)) / np.sqrt(d)


def shift_matrix(d: int, power: int = 1) -> np.ndarray:
    """``X**power`` with ``X|X;j> = |X;j+1>``."""
    m = np.zeros((d, d), dtype=complex)
    j = np.arange(d)
    m[(j + power) % d, j] = 1.0
    return m


def clock_matrix(d: int, power: int = 1) -> np.ndarray:
    """``Z**power``, diagonal with entries ``omega(power * j)``."""
    return np.diag(omega(d, power * np.arange(d)))


def displacement(d: int, alpha: int, beta: int) -> np.ndarray:
    """Displacement operator ``D(alpha, beta)`` as a d x d matrix."""
    h = half(d)
    j = np.arange(d)
    m = np.zeros((d, d), dtype=complex)
    m[(j + beta) % d, j] = omega(d, (h * alpha * beta + alpha * j) % d)
    return m


def displacement_index(d: int, nu: int) -> np.ndarray:
    """``D(nu)`` in single-index notation ``nu = d*alpha + beta``."""
    if not 0 <= nu < d * d:
        raise DomainError(f"displacement index {nu} out of range for d={d}")
    return displacement(d, nu // d, nu % d)


def position_state(d: int, j: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[j % d] = 1.0
    return v


def momentum_state(d: int, j: int) -> np.ndarray:
    """``|P;j> = F|X;j>``, i.e. column j of the Fourier matrix."""
    return omega(d, (j * np.arange(d)) % d) / np.sqrt(d)


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and bool(
        np.abs(u @ u.conj().T - np.eye(u.shape[0])).max() <= tol
    )


# --- fiducial vectors and coherent states -----------------------------------

def coherent_states(eta) -> np.ndarray:
    """All d**2 coherent states as rows: row ``nu`` is ``D(nu)|eta>``."""
    eta = np.asarray(eta, dtype=complex)
    d = eta.size
    h = half(d)
    r = np.arange(d)
    out = np.empty((d * d, d), dtype=complex)
    for nu in range(d * d):
        a, b = divmod(nu, d)
        # <X;r|C;a,b> = omega(-2^-1 a b + a r) eta_{r-b}
        out[nu] = omega(d, (-h * a * b + a * r) % d) * eta[(r - b) % d]
    return out


def coherent_state(eta, nu: int) -> np.ndarray:
    eta = np.asarray(eta, dtype=complex)
    d = eta.size
    if not 0 <= nu < d * d:
        raise DomainError(f"coherent state index {nu} out of range for d={d}")
    return displacement_index(d, nu) @ eta


def fiducial_vector(eta, exhaustive: Optional[bool] = None) -> np.ndarray:
    """Normalize ``eta`` and check that its coherent states are generic.

    For d = 3 (or with ``exhaustive=True``) every set of d coherent states
    must have ``|det| > 1e-8``. Otherwise a cheaper screen is used: the
    family has full rank and no two distinct states coincide up to phase.
    Position and momentum states fail both checks.
    """
    eta = np.array(eta, dtype=complex).ravel()
    d = eta.size
    _require_odd(d)
    norm = np.linalg.norm(eta)
    if not np.isfinite(norm) or norm == 0:
        raise DomainError("fiducial vector must be nonzero and finite")
    eta = eta / norm
    states = coherent_states(eta)
    if exhaustive is None:
        exhaustive = d == 3

    if exhaustive:
        subsets = np.array(list(itertools.combinations(range(d * d), d)))
        dets = np.abs(np.linalg.det(states[subsets]))
        if dets.min() <= DET_FLOOR:
            worst = subsets[int(dets.argmin())]
            raise DomainError(
                f"fiducial is not generic: coherent states {worst.tolist()} are "
                f"linearly dependent (|det| = {dets.min():.3g})"
            )
    else:
        if np.linalg.matrix_rank(states, tol=DET_FLOOR) < d:
            raise DomainError("fiducial is not generic: coherent family is rank deficient")
        gram = np.abs(states.conj() @ states.T)
        np.fill_diagonal(gram, 0.0)
        if gram.max() >= OVERLAP_CEILING:
            raise DomainError("fiducial is not generic: two coherent states coincide up to phase")
    eta.setflags(write=False)
    return eta


def random_fiducial(d: int, seed: int = 0, exhaustive: Optional[bool] = None) -> np.ndarray:
    """Seeded complex Gaussian fiducial, normalized and screened."""
    rng = np.random.default_rng(seed)
    eta = rng.normal(size=d) + 1j * rng.normal(size=d)
    return fiducial_vector(eta, exhaustive=exhaustive)


# --- density matrices and channels ------------------------------------------

def density_matrix(rho) -> np.ndarray:
    """Validate ``rho``: Hermitian, unit trace, eigenvalues >= -1e-9."""
    rho = np.array(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DomainError(f"density matrix must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise DomainError("density matrix has non-finite entries")
    if np.abs(rho - rho.conj().T).max() > HERMITIAN_TOL:
        raise DomainError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise DomainError(f"density matrix has trace {tr.real:.12g}, not 1")
    low = np.linalg.eigvalsh(rho).min()
    if low < PSD_FLOOR:
        raise DomainError(f"density matrix has negative eigenvalue {low:.3g}")
    rho.setflags(write=False)
    return rho


def pure_density(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return density_matrix(np.outer(psi, psi.conj()))


def maximally_mixed(d: int) -> np.ndarray:
    return density_matrix(np.eye(d) / d)


def projective_nonselective(rho):
    """Position-basis measurement with the outcome discarded.

    Returns ``(sigma, q)`` where ``q_j = <X;j|rho|X;j>`` and ``sigma`` is
    the diagonal matrix of ``q``.
    """
    rho = density_matrix(rho)
    q = probability_vector(np.diag(rho).real, renormalize=True)
    return density_matrix(np.diag(q).astype(complex)), q


def povm_nonselective(rho, eta):
    """Coherent-state POVM measurement with the outcome discarded.

    Returns ``(sigma, q, A)`` with ``q_nu = Tr[rho Pi(nu)] / d``,
    ``sigma = sum_nu q_nu Pi(nu)`` and ``A = rho - sigma`` (traceless).
    """
    rho = density_matrix(rho)
    eta = np.asarray(eta, dtype=complex)
    d = eta.size
    if rho.shape != (d, d):
        raise DomainError(f"rho has shape {rho.shape}, fiducial has dimension {d}")
    states = coherent_states(eta)
    # <C;nu|rho|C;nu>
    q = np.einsum("ni,ij,nj->n", states.conj(), rho, states).real / d
    q = probability_vector(q, renormalize=True)
    sigma = np.einsum("n,ni,nj->ij", q, states, states.conj())
    sigma = density_matrix(sigma)
    A = rho - sigma
    if abs(np.trace(A)) > TRACE_TOL:
        raise DomainError("remainder of POVM decomposition is not traceless")
    return sigma, q, A


def _family_and_weights(family: Sequence, weights):
    w = probability_vector(weights)
    family = [np.asarray(u, dtype=complex) for u in family]
    if len(family) != w.size:
        raise DomainError(f"{len(family)} unitaries but {w.size} weights")
    for i, u in enumerate(family):
        if not is_unitary(u):
            raise DomainError(f"channel member {i} is not unitary")
    return family, w


def random_unitary_channel(rho, family: Sequence, weights) -> np.ndarray:
    """``sum_a w_a U_a rho U_a^dagger``."""
    rho = density_matrix(rho)
    family, w = _family_and_weights(family, weights)
    out = np.zeros_like(rho)
    for wa, u in zip(w, family):
        if wa:
            out = out + wa * (u @ rho @ u.conj().T)
    return density_matrix(out)


# --- induced classical transition matrices ----------------------------------

def induced_projective_transition(family: Sequence, weights) -> TransitionMatrix:
    """``V[k, j] = sum_a w_a |<X;j|U_a|X;k>|**2`` for an arbitrary unitary family.

    The result is doubly stochastic; it carries a Z(d) certificate only if
    it happens to be a group circulant.
    """
    family, w = _family_and_weights(family, weights)
    d = family[0].shape[0]
    V = sum(wa * np.abs(u) ** 2 for wa, u in zip(w, family)).T
    return certify(GroupSpec.cyclic(d), TransitionMatrix.from_array(V, renormalize=True))


def shift_family(d: int) -> list:
    return [shift_matrix(d, a) for a in range(d)]


def displacement_family(d: int) -> list:
    return [displacement_index(d, a) for a in range(d * d)]


def projective_walk_transition(weights) -> TransitionMatrix:
    """Transition matrix induced by the shift channel ``{X**a}`` with ``weights``.

    ``X**a`` moves ``|X;k>`` to ``|X;k+a>``, so ``V = sum_a w_a M(a)`` on
    Z(d) and the certificate equals the weights.
    """
    w = probability_vector(weights)
    d = w.size
    if d < 2:
        raise DomainError("need d >= 2")
    V = induced_projective_transition(shift_family(d), w)
    if V.certificate is None:
        raise AssertionError("shift channel produced a non-circulant matrix")
    return V


def povm_walk_transition(eta, weights, family: Optional[Sequence] = None) -> TransitionMatrix:
    """``W[nu, mu] = (1/d) sum_a w_a |<C;mu|U_a|C;nu>|**2``.

    ``family`` defaults to the displacements ``D(a)``, a = 0..d**2-1. The
    result carries a Z(d) x Z(d) certificate when it is a group circulant.
    """
    eta = np.asarray(eta, dtype=complex)
    d = eta.size
    _require_odd(d)
    if family is None:
        family = displacement_family(d)
    family, w = _family_and_weights(family, weights)
    states = coherent_states(eta)
    W = np.zeros((d * d, d * d))
    for wa, u in zip(w, family):
        if wa:
            amp = states.conj() @ u @ states.T  # [mu, nu]
            W += wa * np.abs(amp.T) ** 2
    W /= d
    return certify(GroupSpec.product(d), TransitionMatrix.from_array(W, renormalize=True))


def povm_kernel(eta) -> np.ndarray:
    """Step distribution ``k(r) = |<eta|C;r>|**2 / d`` of the bare POVM (all weight on D(0))."""
    eta = np.asarray(eta, dtype=complex)
    d = eta.size
    states = coherent_states(eta)
    return probability_vector(np.abs(states @ eta.conj()) ** 2 / d, renormalize=True)


def povm_step_distribution(eta, weights) -> np.ndarray:
    """Closed form of the displacement-channel step law: ``s(r) = sum_a w_a k(r - a)``."""
    eta = np.asarray(eta, dtype=complex)
    d = eta.size
    spec = GroupSpec.product(d)
    w = probability_vector(weights)
    k = povm_kernel(eta)
    el = spec.elements()
    s = np.zeros(spec.order)
    for a in range(spec.order):
        # r = a + t  =>  s[r] += w[a] k[t]
        s[add(spec, a, el)] += w[a] * k
    return probability_vector(s, renormalize=True)


# --- measured walks ---------------------------------------------------------

class MeasuredWalk(NamedTuple):
    distributions: list
    transition: TransitionMatrix
    states: list


def measured_walk(rho0, mode: str, weights, eta=None, n: int = 0) -> MeasuredWalk:
    """Simulate measure -> channel -> measure ... on density matrices.

    ``distributions[k]`` is the outcome law of the k-th measurement,
    ``states[k]`` the post-measurement state, and ``transition`` the induced
    classical matrix (V for ``"projective"``, W for ``"povm"``).
    """
    if n < 0:
        raise DomainError("number of steps must be >= 0")
    rho = density_matrix(rho0)
    d = rho.shape[0]
    if mode == "projective":
        family = shift_family(d)
        transition = projective_walk_transition(weights)
        if transition.size != d:
            raise DomainError(f"{transition.size} weights for dimension {d}")
        measure = projective_nonselective
    elif mode == "povm":
        if eta is None:
            raise DomainError("POVM mode needs a fiducial vector")
        eta = fiducial_vector(eta, exhaustive=False)
        if eta.size != d:
            raise DomainError(f"fiducial dimension {eta.size} does not match rho dimension {d}")
        family = displacement_family(d)
        transition = povm_walk_transition(eta, weights, family)

        def measure(r):
            sigma, q, _ = povm_nonselective(r, eta)
            return sigma, q
    else:
        raise DomainError(f"unknown measurement mode {mode!r}")

    dists, states = [], []
    for step in range(n + 1):
        sigma, q = measure(rho)
        dists.append(q)
        states.append(sigma)
        if step < n:
            rho = random_unitary_channel(sigma, family, weights)
    return MeasuredWalk(dists, transition, states)


def bridge_deviation(walk: MeasuredWalk) -> float:
    """Max entry gap between simulated outcomes and ``q(0) @ T**k``."""
    classical = trajectory(walk.distributions[0], walk.transition, len(walk.distributions) - 1)
    return float(max(np.abs(a - b).max() for a, b in zip(walk.distributions, classical)))

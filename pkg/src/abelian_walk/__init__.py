"""Random walks on finite Abelian groups with doubly stochastic matrices.

Submodules: `group` (Z(d) and Z(d) x Z(d) arithmetic), `birkhoff`
(transition matrices, evolution, spectra), `measures` (Lorenz, Gini,
entropy, total variation), `polytope` (polytopes of probability vectors),
`quantum` (measurement-based realizations) and `cli`.
"""
from .birkhoff import (
    Spectrum,
    TransitionMatrix,
    binomial_step,
    evolve,
    is_ergodic,
    mixing_time_empirical,
    mixing_time_heuristic,
    probability_vector,
    spectrum,
    subpolytope_membership,
    trajectory,
    transition_matrix,
)
from .errors import (
    AbelianWalkError,
    CapacityError,
    DomainError,
    NotErgodicError,
    UnsupportedOperationError,
)
from .group import GroupSpec, PermutationMatrix, add, cayley_table, inverse, permutation_rep
from .measures import entropy, gini, lorenz, majorizes, tv_distance

__version__ = "0.1.0"

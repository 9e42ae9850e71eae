"""Exact-arithmetic toolkit for open dynamical systems.

Finite stochastic / possibilistic / deterministic kernels with copy-discard
structure, bidirectional interfaces (lenses and charts), square-shaped cells
relating machines to their interfaces, trajectory unrolling over finite time
chains, uniformization of stochastic kernels, and a Mealy-style variant.
"""

from .errors import (BadFactorSelection, BoundaryMismatch, InstanceMismatch,
                     MarginalMismatch, MksysError, NaturalityViolation,
                     ObjectMismatch, ParseError, PreconditionViolation,
                     ShapeMismatch, UnknownSuite, ValidationError)
from .objects import UNIT, FiniteObject, tensor_objects
from .markov import (DetKernel, Morphism, PossKernel, StochKernel,
                     almost_surely_equal, as_det, comonoid_structure, compose,
                     compose_all, conditional, conditional_product, copy_map,
                     dirac, discard_map, displays_cond_indep, identity,
                     is_deterministic, joint_from_conditional, marginal,
                     morphism_equal, permute_factors, select_factors,
                     swap_map, tensor, tensor_all, uniform_dist)

__all__ = [
    "BadFactorSelection", "BoundaryMismatch", "InstanceMismatch",
    "MarginalMismatch", "MksysError", "NaturalityViolation", "ObjectMismatch",
    "ParseError", "PreconditionViolation", "ShapeMismatch", "UnknownSuite",
    "ValidationError",
    "UNIT", "FiniteObject", "tensor_objects",
    "DetKernel", "Morphism", "PossKernel", "StochKernel",
    "almost_surely_equal", "as_det", "comonoid_structure", "compose",
    "compose_all", "conditional", "conditional_product", "copy_map", "dirac",
    "discard_map", "displays_cond_indep", "identity", "is_deterministic",
    "joint_from_conditional", "marginal", "morphism_equal", "permute_factors",
    "select_factors", "swap_map", "tensor", "tensor_all", "uniform_dist",
]

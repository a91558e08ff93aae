"""Numerical laboratory for multi-speed quasi-linear wave systems.

Simulates coupled wave equations with distinct propagation speeds, computes
vector-field generalized energies and weighted norms, verifies the functional
inequalities and commutator identities the energy method rests on, and
measures small-data lifespan scaling.
"""

from .grid import (
    Field,
    Grid,
    StateSnapshot,
    StencilError,
    laplacian,
    lorentz_weight,
    partial_derivative,
    radial_coordinate,
    radial_derivative,
    second_derivative,
)
from .operators import (
    Dalembertian,
    MissingTimeDerivative,
    apply_word,
    apply_word_pair,
    commutator_defect,
    expand_mixed_commutator,
)
from .polynomials import PolynomialState, SpaceTimePolynomial, monomial
from .words import Generator, OperatorWord, WordError, enumerate_words

__version__ = "0.1.0"

__all__ = [
    "Field",
    "Grid",
    "StateSnapshot",
    "StencilError",
    "laplacian",
    "lorentz_weight",
    "partial_derivative",
    "radial_coordinate",
    "radial_derivative",
    "second_derivative",
    "Dalembertian",
    "MissingTimeDerivative",
    "apply_word",
    "apply_word_pair",
    "commutator_defect",
    "expand_mixed_commutator",
    "PolynomialState",
    "SpaceTimePolynomial",
    "monomial",
    "Generator",
    "OperatorWord",
    "WordError",
    "enumerate_words",
    "__version__",
]

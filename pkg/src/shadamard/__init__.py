"""Seminormalized Hadamard matrices built from balanced ±1 vectors."""

__version__ = "0.1.0"

from .core import (
    Permutation,
    QshMatrix,
    ShMatrix,
    ShVector,
    SignVector,
    UnityVector,
    apply_permutation,
    format_matrix,
    gram_matrix,
    inner_product,
    is_hadamard,
    is_orthogonal,
    parse_matrix,
    sylvester,
)
from .errors import (
    CapacityError,
    DimensionError,
    HadamardError,
    MatrixParseError,
    PreconditionError,
    SearchFailure,
)
from .search import (
    SearchBudget,
    ThresholdSchedule,
    energy,
    exhaustive_search,
    osa_construct,
    rvs_construct,
)

__all__ = [
    "CapacityError",
    "DimensionError",
    "HadamardError",
    "MatrixParseError",
    "Permutation",
    "PreconditionError",
    "QshMatrix",
    "SearchBudget",
    "SearchFailure",
    "ShMatrix",
    "ShVector",
    "SignVector",
    "ThresholdSchedule",
    "UnityVector",
    "apply_permutation",
    "energy",
    "exhaustive_search",
    "format_matrix",
    "gram_matrix",
    "inner_product",
    "is_hadamard",
    "is_orthogonal",
    "osa_construct",
    "parse_matrix",
    "rvs_construct",
    "sylvester",
]

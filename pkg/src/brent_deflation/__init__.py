"""Deflation sequences of polynomial systems, with the Brent equations of matrix multiplication."""

from .brent import (
    BilinearScheme,
    BrentShape,
    BrentSystem,
    MMTensor,
    brent_polysystem,
    brent_system,
    mm_tensor,
    natural_algorithm,
    orbit_lower_bound,
    residual,
    strassen_scheme,
    underdetermined_bound,
)
from .deflation import (
    DeflatedSystem,
    DeflationConfig,
    DeflationReport,
    RankResult,
    deflate_once,
    deflation_sequence,
    first_columns_nullity_check,
    numerical_rank,
    projected_columns_nullity,
)
from .errors import (
    DegenerateInputError,
    DeflationError,
    InputError,
    NotASolutionError,
    NumericalError,
    ParseError,
    SchemaError,
    UnsupportedDegreeError,
)
from .polysys import Monomial, Polynomial, PolySystem, parse_system, symbolic_deflate
from .systems import DeflatableSystem, SymbolicSystem

__version__ = "0.1.0"

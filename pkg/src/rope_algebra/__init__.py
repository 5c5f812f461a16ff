"""Rotary position embeddings built from commuting generators of so(d)."""

from .apply import TokenBatch, attention_scores, recover_displacement, relative_scores_oracle, rotate_batch
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    DimensionError,
    DomainError,
    InconsistencyError,
    NumericalWarning,
    OrthogonalityError,
    ResourceError,
    RopeAlgebraError,
    StateError,
)
from .generators import (
    FrequencySchedule,
    GeneratorSet,
    conjugate,
    embed_in_larger,
    mixed_2d,
    rope_matrix_dense,
    rope_matrix_fast,
    standard_1d,
    standard_2d,
    toral_basis,
)
from .linalg import J, block_diag, commutator, mat_exp_dense, rot2_block, structure_residuals
from .ortho import OrthoParam, build_orthogonal, default_givens_plan, directional_derivative, fd_directional_derivative
from .validate import ValidationReport, check_masa, centralizer_dimension, validate_all

__version__ = "0.1.0"

"""Interconversion and verification of viscoelastic relaxation and creep kernels."""

from .duality import (
    dualize,
    dualize_creep_to_relaxation,
    dualize_matrix_creep_to_relaxation,
    dualize_matrix_relaxation_to_creep,
    dualize_relaxation_to_creep,
)
from .kernels import (
    EigenstressBasis,
    InvalidKernel,
    LimitReport,
    MatrixCreep,
    MatrixRelaxation,
    NumericsError,
    ScalarCreep,
    ScalarRelaxation,
    UNBOUNDED,
    assemble_eigenstress,
    creep_limits,
    eval_creep,
    eval_relaxation,
    laplace_times_p,
    relaxation_limits,
    symmetric6,
)
from .matio import (
    MaterialFormatError,
    parse_material,
    sample_to_csv,
    serialize_material,
)
from .verify import (
    CheckReport,
    ResponseSeries,
    StrainHistory,
    check_limit_identities,
    check_wellformed,
    convolution_value,
    default_time_grid,
    duality_residual,
    respond,
    respond_creep,
)

__all__ = [
    "EigenstressBasis",
    "InvalidKernel",
    "LimitReport",
    "MaterialFormatError",
    "MatrixCreep",
    "MatrixRelaxation",
    "NumericsError",
    "ScalarCreep",
    "ScalarRelaxation",
    "UNBOUNDED",
    "CheckReport",
    "ResponseSeries",
    "StrainHistory",
    "assemble_eigenstress",
    "check_limit_identities",
    "check_wellformed",
    "convolution_value",
    "creep_limits",
    "default_time_grid",
    "duality_residual",
    "dualize",
    "dualize_creep_to_relaxation",
    "dualize_matrix_creep_to_relaxation",
    "dualize_matrix_relaxation_to_creep",
    "dualize_relaxation_to_creep",
    "eval_creep",
    "eval_relaxation",
    "laplace_times_p",
    "parse_material",
    "relaxation_limits",
    "respond",
    "respond_creep",
    "sample_to_csv",
    "serialize_material",
    "symmetric6",
]

__version__ = "0.1.0"

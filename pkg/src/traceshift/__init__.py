"""traceshift: trace formulas for unitary pairs at finite dimension.

Double operator integrals with divided-difference kernels, certified Schur
multiplier bounds, the strong derivative along unitary exponential paths,
and the spectral shift function built from eigenphase flow: everything
verified against independent routes to the same numbers.
"""

from .backends import active as active_backend, set_backend
from .circlefn import (
    CircleFunction,
    LineFunction,
    NonDifferentiablePointError,
    builtin_circle_function,
    parse_circle_function,
    parse_line_function,
    random_trig_poly,
    trig_poly_from_json,
    trig_poly_to_json,
)
from .doi import (
    KernelMatrix,
    dd_kernel,
    doi_compute,
    doi_trace,
    function_difference_doi,
    trace_norm,
)
from .flowderiv import DerivativeReport, fd_probe, qs_operator, qs_trace, sa_derivative
from .multiplier import (
    DiagonalTrace,
    SchurNormResult,
    diagonal_trace,
    divided_difference_kernel,
    half_step_grid,
    ol_lower_bound,
    probe_ratio,
    schur_norm,
)
from .spectra import (
    DecompositionError,
    HermitianMatrix,
    NumericalError,
    SpectralDecomposition,
    UnitaryMatrix,
    UnitaryPath,
    ValidationError,
    decompose_hermitian,
    decompose_unitary,
    matrix_function,
    path_point,
    random_haar_unitary,
    random_hermitian,
)
from .ssf import (
    PhaseBraid,
    SpectralShiftFunction,
    TrackingError,
    TrackingPolicy,
    TwistScan,
    VerifyReport,
    build_ssf,
    krein_rhs,
    nu_weights,
    qs_trace_quadrature,
    track_eigenphases,
    twist_scan,
    verify_trace_formula,
)

__version__ = "0.1.0"

__all__ = [
    "CircleFunction",
    "DecompositionError",
    "DerivativeReport",
    "DiagonalTrace",
    "HermitianMatrix",
    "KernelMatrix",
    "LineFunction",
    "NonDifferentiablePointError",
    "NumericalError",
    "PhaseBraid",
    "SchurNormResult",
    "SpectralDecomposition",
    "SpectralShiftFunction",
    "TrackingError",
    "TrackingPolicy",
    "TwistScan",
    "UnitaryMatrix",
    "UnitaryPath",
    "ValidationError",
    "VerifyReport",
    "active_backend",
    "build_ssf",
    "builtin_circle_function",
    "dd_kernel",
    "decompose_hermitian",
    "decompose_unitary",
    "diagonal_trace",
    "divided_difference_kernel",
    "doi_compute",
    "doi_trace",
    "fd_probe",
    "function_difference_doi",
    "half_step_grid",
    "krein_rhs",
    "matrix_function",
    "nu_weights",
    "ol_lower_bound",
    "parse_circle_function",
    "parse_line_function",
    "path_point",
    "probe_ratio",
    "qs_operator",
    "qs_trace",
    "qs_trace_quadrature",
    "random_haar_unitary",
    "random_hermitian",
    "random_trig_poly",
    "sa_derivative",
    "schur_norm",
    "set_backend",
    "trace_norm",
    "track_eigenphases",
    "trig_poly_from_json",
    "trig_poly_to_json",
    "twist_scan",
    "verify_trace_formula",
]

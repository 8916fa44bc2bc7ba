"""Prethermal quasiconserved observables of Floquet spin-1/2 chains.

Exact Pauli-string algebra, dense Floquet diagonalization, the systematic
Lambda-matrix search for eigen-quasiconserved observables, Magnus-type
expansions of the prethermal Hamiltonian and of the emergent dipolar
order, and the fitting/sweep tooling that reproduces the reference
numerical experiments at desk scale.
"""

__version__ = "0.1.0"

from .pauli import (
    OperatorSum,
    PauliString,
    coherence_decompose,
    commutator,
    from_text,
    inner_product,
    intensive_norm,
    multiply,
    norm,
    to_text,
    trace_inner,
)
from .models import FloquetModel, build_model, collective, dipolar
from .ed import (
    CorrelationSeries,
    FloquetDense,
    FloquetSpectrum,
    correlation_series,
    diagonal_blocks,
    floquet_spectrum,
    floquet_unitary,
    infinite_time_corr,
    propagator,
    to_dense,
)
from .qcfind import (
    LambdaMatrix,
    LocalBasis,
    build_basis,
    decompose_correlation,
    eigen_observables,
    lambda_matrix,
)
from .expansions import (
    SeriesOperator,
    conjugate_series,
    conjugate_series_orders,
    dpre_expand,
    dpre_observable,
    floquet_magnus,
    h_pre,
    omega_norms,
)
from .fitting import (
    NO_CROSSING,
    CriticalPoint,
    FitResult,
    critical_jtau,
    fit_arrhenius,
    fit_exponential_decay,
)

__all__ = [
    "__version__",
    "PauliString",
    "OperatorSum",
    "multiply",
    "commutator",
    "trace_inner",
    "norm",
    "intensive_norm",
    "inner_product",
    "coherence_decompose",
    "to_text",
    "from_text",
    "FloquetModel",
    "build_model",
    "dipolar",
    "collective",
    "to_dense",
    "propagator",
    "FloquetDense",
    "floquet_unitary",
    "FloquetSpectrum",
    "floquet_spectrum",
    "diagonal_blocks",
    "infinite_time_corr",
    "CorrelationSeries",
    "correlation_series",
    "LocalBasis",
    "build_basis",
    "LambdaMatrix",
    "lambda_matrix",
    "eigen_observables",
    "decompose_correlation",
    "SeriesOperator",
    "floquet_magnus",
    "omega_norms",
    "h_pre",
    "dpre_expand",
    "dpre_observable",
    "conjugate_series",
    "conjugate_series_orders",
    "FitResult",
    "fit_exponential_decay",
    "fit_arrhenius",
    "CriticalPoint",
    "critical_jtau",
    "NO_CROSSING",
]

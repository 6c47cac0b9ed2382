"""Eigenvalue estimation for non-normal matrices from sampled trace signals
via the matrix pencil method."""

from .access import AccessModel, NoisySignalEstimate, estimate_signal_entry, hadamard_sample, qae_sample, sample_series
from .applications import (LindbladSpec, StabilityVerdict, liouvillian_gap, liouvillian_pipeline,
                           spectral_abscissa, vectorize_lindblad)
from .approx import (PolySeries, chebyshev_coeffs, eval_series_matrix, eval_series_scalar,
                     faber_disk_coeffs, generating_function_residual, truncation_order)
from .errors import ConfigError, NumericalError, PencilError, PreconditionError
from .pencil import (EstimateReport, HankelPair, build_hankel_pair, estimate_eigenvalues, estimate_sparsity,
                     match_eigenvalues, postprocess, solve_gevp, vandermonde_residual)
from .signals import Family, SignalFamily, SignalSeries, ideal_signal, ideal_signal_bruteforce
from .spectral import (InitialState, SparseExpansion, SpectralModel, eig_decompose, expand_initial_state,
                       hermitian_split, jordan_condition_estimate)

__version__ = "0.1.0"

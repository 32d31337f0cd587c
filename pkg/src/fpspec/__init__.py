"""Hermite-space spectral laboratory for degenerate Fokker-Planck equations."""

from .errors import (
    BoundViolationError,
    ConsistencyError,
    DegenerateTimeError,
    FPSpecError,
    InputError,
    InvalidModelError,
    NumericalError,
)
from .evolution import (
    SpectralState,
    flux_J,
    greens_evaluate,
    initial_state,
    propagate,
    solve_lyapunov,
)
from .functionals import (
    DecayReport,
    decay_experiment,
    entropy_e2,
    fisher_I2,
    fisher_IP,
    sharpness_witness,
)
from .generator import GeneratorBlock, block_exponential, build_block, verify_spectrum, weighted_operator_norm
from .hermite import CoeffVector, enumerate_indices, expand, gradient_shift, hermite_polynomial, inner_product, reconstruct
from .kernels import BACKEND
from .model import ModelSpec, envelope, exp_norm, matrix_exponential, spectral_summary, validate

__version__ = "0.1.0"

"""Matrices of the Fokker-Planck operator on each Hermite shell V_m.

With f = sum d_alpha h_alpha, the coefficients of order m evolve by
d'(t) = -B_m d(t). Blocks are derived by applying the operator symbolically
to every basis function; nothing assumes a tensor-power formula.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import BlockSizeError, ConsistencyError, InputError
from .hermite import (
    Polynomial,
    block_size,
    enumerate_indices,
    expand,
    factorial,
    hermite_polynomial,
)
from .model import ModelSpec, SpectralSummary, matrix_exponential

DEFAULT_CAP = 500
INVARIANCE_TOL = 1e-12
EIG_DIGITS = 60


@dataclass(frozen=True, eq=False)
class GeneratorBlock:
    m: int
    basis: tuple
    B: np.ndarray

    def __post_init__(self):
        self.B.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def weights(self) -> np.ndarray:
        return np.array([factorial(a) for a in self.basis], dtype=float)

    def to_dict(self) -> dict:
        return {"m": self.m, "basis": [list(a) for a in self.basis], "B": self.B.tolist()}

    def dumps(self) -> str:
        return json.dumps(self.to_dict())


def apply_generator(C: np.ndarray, D: np.ndarray, H: Polynomial) -> Polynomial:
    """Polynomial Q with div(D grad(H f) + C x H f) = Q f, f the standard Gaussian.

    Uses grad f = -x f, so the flux is (D grad H + (C - D) x H) f and
    div(u f) = (div u - x.u) f.
    """
    d = H.dim
    A = C - D
    x = [Polynomial.variable(i, d) for i in range(d)]
    grad = [H.diff(i) for i in range(d)]
    Q = Polynomial({}, d)
    for i in range(d):
        for k in range(d):
            if D[i, k]:
                Q = Q + grad[k].diff(i).scale(D[i, k])  # div(D grad H)
                Q = Q - grad[k].mul_x(i).scale(D[i, k])  # x . D grad H
            if A[i, k]:
                Q = Q + (x[k] * grad[i]).scale(A[i, k])  # (A x) . grad H
                Q = Q - H.mul_x(i).mul_x(k).scale(A[i, k])  # x^T A x H
        if A[i, i]:
            Q = Q + H.scale(A[i, i])  # tr(A) H
    return Q


def build_block(model: ModelSpec, m: int, cap: int = DEFAULT_CAP) -> GeneratorBlock:
    """B_m for the model, in graded-lex basis order of V_m."""
    if m < 1:
        raise InputError("block order m must be >= 1")
    side = block_size(model.d, m)
    if side > cap:
        raise BlockSizeError(f"V_{m} in dimension {model.d} has {side} basis functions (cap {cap})")
    return _build_block(model, m)


@lru_cache(maxsize=256)
def _build_block(model: ModelSpec, m: int) -> GeneratorBlock:
    d = model.d
    basis = tuple(enumerate_indices(d, m))
    pos = {a: i for i, a in enumerate(basis)}
    C, D = model.C, model.D
    minusB = np.zeros((len(basis), len(basis)))
    for col, alpha in enumerate(basis):
        image = expand(apply_generator(C, D, hermite_polynomial(alpha)))
        scale = max(1.0, max((abs(float(v)) for _, v in image), default=0.0))
        for beta, v in image:
            if beta in pos:
                minusB[pos[beta], col] = float(v)
            elif abs(float(v)) > INVARIANCE_TOL * scale:
                raise ConsistencyError(
                    f"image of h_{alpha} has component {float(v):.3e} at {beta}, outside V_{m}"
                )
    return GeneratorBlock(m=m, basis=basis, B=-minusB)


def build_blocks(model: ModelSpec, M: int, cap: int = DEFAULT_CAP) -> dict[int, GeneratorBlock]:
    return {m: build_block(model, m, cap) for m in range(1, M + 1)}


def shell_eigenvalues(summary: SpectralSummary, m: int) -> np.ndarray:
    """Multiset {sum_i alpha_i lambda_i : |alpha| = m}.

    Eigenvalues of C are taken from the clustered summary (each cluster mean
    repeated by its algebraic multiplicity), which removes the ~sqrt(eps)
    splitting of defective eigenvalues.
    """
    if summary.clusters:
        lam = np.array([c.value for c in summary.clusters for _ in range(c.algebraic)], dtype=complex)
    else:
        lam = np.asarray(summary.eigenvalues, dtype=complex)
    return np.array([np.dot(a, lam) for a in enumerate_indices(len(lam), m)])


def block_eigenvalues(block: GeneratorBlock, digits: int | None = EIG_DIGITS) -> np.ndarray:
    """Eigenvalues of B_m; with ``digits`` set, computed in extended precision.

    A Jordan block of size k perturbs eigenvalues by ~eps**(1/k) in double
    precision, which swamps the comparison for defective drift matrices.
    """
    if digits is None:
        return np.linalg.eigvals(block.B)
    with mpmath.workdps(digits):
        ev = mpmath.eig(mpmath.matrix(block.B.tolist()), left=False, right=False)
        return np.array([complex(z) for z in ev])


def verify_spectrum(block: GeneratorBlock, summary: SpectralSummary, digits: int | None = EIG_DIGITS) -> float:
    """Largest distance in the optimal multiset pairing of eig(B_m) with the predicted shell spectrum."""
    got = block_eigenvalues(block, digits)
    want = shell_eigenvalues(summary, block.m)
    if len(got) != len(want):
        raise InputError("block and spectral summary have inconsistent dimensions")
    cost = np.abs(got[:, None] - want[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def block_exponential(block: GeneratorBlock, t: float) -> np.ndarray:
    """exp(-B_m t)."""
    return matrix_exponential(block.B, t)


def weighted_operator_norm(block: GeneratorBlock, t: float) -> float:
    """Norm of exp(-B_m t) in the inner product sum alpha! u_alpha v_alpha."""
    s = np.sqrt(block.weights)
    E = block_exponential(block, t)
    return float(np.linalg.norm(s[:, None] * E / s[None, :], 2))


def symmetric_power(v, m: int, basis=None) -> np.ndarray:
    """Coefficients c_alpha = (m!/alpha!) v^alpha, the V_m image of the m-fold power of v."""
    v = np.asarray(v, dtype=float)
    basis = basis if basis is not None else enumerate_indices(len(v), m)
    mf = math.factorial(m)
    return np.array([mf / factorial(a) * np.prod(v ** np.array(a)) for a in basis])

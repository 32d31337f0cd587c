"""Time evolution of Hermite coefficients, plus the Green's-function oracle."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ConfigurationError, DegenerateTimeError, InputError, NumericalError
from .generator import GeneratorBlock, block_exponential, build_blocks
from .hermite import CoeffVector, gradient_shift, series_polynomial_values
from .model import ModelSpec, matrix_exponential

STEPS_PER_UNIT_TIME = 1000
MIN_STEPS = 100
PSD_TOL = 1e-10
COND_LIMIT = 1e12
DEFAULT_QUAD_ORDER = 40


@dataclass(frozen=True)
class SpectralState:
    t: float
    coeffs: CoeffVector
    model: ModelSpec
    truncation: int
    blocks: Mapping[int, GeneratorBlock] = field(repr=False, default_factory=dict)


def initial_state(model: ModelSpec, f0: CoeffVector, truncation: int | None = None) -> SpectralState:
    if f0.dim != model.d:
        raise InputError(f"initial data has dimension {f0.dim}, model has {model.d}")
    M = max(f0.max_order, 0) if truncation is None else truncation
    if f0.max_order > M:
        raise InputError(f"initial data has order {f0.max_order} beyond truncation {M}")
    return SpectralState(0.0, f0.to_float(), model, M, build_blocks(model, M))


def propagate(state: SpectralState, t_target: float) -> SpectralState:
    """Advance every shell by exp(-B_m (t_target - t)); the mass coefficient is untouched."""
    dt = t_target - state.t
    if dt < 0:
        raise InputError(f"cannot propagate backwards from t = {state.t} to {t_target}")
    d = state.model.d
    out = {}
    zero = (0,) * d
    if state.coeffs[zero]:
        out[zero] = state.coeffs[zero]
    for m in state.coeffs.orders():
        if m == 0:
            continue
        if m not in state.blocks:
            raise ConfigurationError(f"no generator block for order {m} (truncation {state.truncation})")
        block = state.blocks[m]
        vec = block_exponential(block, dt) @ state.coeffs.block(m, block.basis)
        out.update(zip(block.basis, vec))
    return SpectralState(t_target, CoeffVector(out, d), state.model, state.truncation, state.blocks)


def flux_J(state: SpectralState) -> list[CoeffVector]:
    """Coefficients of J_j = d_j f + x_j f for j = 1..d."""
    return [gradient_shift(state.coeffs, j) for j in range(state.model.d)]


@dataclass(frozen=True)
class LyapunovCovariance:
    t: float
    W: np.ndarray
    min_eigenvalue: float = 0.0  # smallest eigenvalue seen along the trajectory


def _lyapunov_rhs(C, D, W):
    return 2 * D - C @ W - W @ C.T


def lyapunov_trajectory(model: ModelSpec, t: float, steps: int):
    """Yield (t_k, W_k) for RK4 on W' = 2D - CW - WC^T, W(0) = 0, symmetrized every step."""
    if t < 0 or steps < 1:
        raise InputError("need t >= 0 and steps >= 1")
    C, D = model.C, model.D
    h = t / steps
    W = np.zeros_like(C)
    yield 0.0, W
    for k in range(steps):
        k1 = _lyapunov_rhs(C, D, W)
        k2 = _lyapunov_rhs(C, D, W + 0.5 * h * k1)
        k3 = _lyapunov_rhs(C, D, W + 0.5 * h * k2)
        k4 = _lyapunov_rhs(C, D, W + h * k3)
        W = W + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        W = 0.5 * (W + W.T)
        yield (k + 1) * h, W


def default_steps(t: float) -> int:
    return max(MIN_STEPS, math.ceil(STEPS_PER_UNIT_TIME * t))


def solve_lyapunov(model: ModelSpec, t: float, steps: int | None = None) -> LyapunovCovariance:
    """W(t) = 2 int_0^t exp(-Cs) D exp(-C^T s) ds via the differential Lyapunov equation."""
    steps = default_steps(t) if steps is None else steps
    lo = 0.0
    W = None
    for tk, W in lyapunov_trajectory(model, t, steps):
        e = float(np.linalg.eigvalsh(W)[0])
        lo = min(lo, e)
        if e < -PSD_TOL:
            raise NumericalError(f"W({tk:g}) has eigenvalue {e:.3e}; step size t/steps = {t / steps:g} too large")
    return LyapunovCovariance(t, W, lo)


def _covariance_ok(model: ModelSpec, t: float) -> bool:
    if t <= 0:
        return False
    W = solve_lyapunov(model, t, MIN_STEPS).W
    s = np.linalg.svd(W, compute_uv=False)
    return s[-1] > 0 and s[0] / s[-1] <= COND_LIMIT and np.prod(s) > 1e-300


def smallest_safe_time(model: ModelSpec, t_hi: float = 1.0) -> float:
    """Approximate smallest t with cond(W(t)) <= 1e12, by bisection in log t."""
    while not _covariance_ok(model, t_hi):
        t_hi *= 2
        if t_hi > 1e6:  # pragma: no cover - hypoelliptic models always recover
            raise NumericalError("W(t) stays singular; model is not hypoelliptic")
    t_lo = t_hi
    while _covariance_ok(model, t_lo) and t_lo > 1e-300:
        t_lo /= 2
    for _ in range(40):
        mid = math.sqrt(t_lo * t_hi)
        if _covariance_ok(model, mid):
            t_hi = mid
        else:
            t_lo = mid
    return t_hi


def greens_evaluate(model: ModelSpec, f0: CoeffVector, x, t: float,
                    quad_order: int = DEFAULT_QUAD_ORDER, W: np.ndarray | None = None):
    """f(x, t) = int G(x - exp(-Ct) y, t) f0(y) dy for f0 = P f_inf.

    The product of the kernel and the Gaussian factor of f0 is itself a
    Gaussian in y; the integral is done with Gauss-Hermite nodes mapped onto
    that Gaussian, which is exact for the polynomial P up to degree
    2 * quad_order - 1.
    """
    if t <= 0:
        raise DegenerateTimeError(t, smallest_safe_time(model))
    if f0.dim != model.d:
        raise InputError("initial data and model dimensions differ")
    if quad_order < f0.max_order / 2 + 1:
        warnings.warn(f"quad_order {quad_order} may be too low for polynomial degree {f0.max_order}", stacklevel=2)
    xa = np.asarray(x, dtype=float)
    single = xa.ndim == 1
    X = np.atleast_2d(xa)
    d = model.d

    if W is None:
        W = solve_lyapunov(model, t).W
    s = np.linalg.svd(W, compute_uv=False)
    detW = float(np.prod(s))
    if detW <= 1e-300 or s[-1] <= 0 or s[0] / s[-1] > COND_LIMIT:
        raise DegenerateTimeError(t, smallest_safe_time(model))

    E = matrix_exponential(model.C, t)
    Winv = np.linalg.inv(W)
    Winv = 0.5 * (Winv + Winv.T)
    A = np.eye(d) + E.T @ Winv @ E  # precision of the y-Gaussian
    Ainv = np.linalg.inv(A)
    Ainv = 0.5 * (Ainv + Ainv.T)
    L = np.linalg.cholesky(Ainv)

    B = X @ (Winv @ E)  # rows are b^T = (E^T W^{-1} x)^T
    nu = B @ Ainv
    quad = np.einsum("ni,ij,nj->n", X, Winv, X) - np.einsum("ni,ni->n", B, nu)

    z, w = np.polynomial.hermite_e.hermegauss(quad_order)
    grids = np.meshgrid(*([z] * d), indexing="ij")
    Z = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*([w] * d), indexing="ij")
    wq = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)

    Y = nu[:, None, :] + (Z @ L.T)[None, :, :]  # (n_points, n_nodes, d)
    P = series_polynomial_values(f0, Y.reshape(-1, d)).reshape(len(X), len(wq))
    integral = P @ wq  # int P(nu + L z) exp(-|z|^2/2) dz
    pref = (2 * np.pi) ** (-d) / math.sqrt(detW) * np.prod(np.diag(L))
    vals = pref * np.exp(-0.5 * quad) * integral
    return float(vals[0]) if single else vals

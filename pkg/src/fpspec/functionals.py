"""2-entropy, quadratic Fisher information, decay experiments and sharpness witnesses."""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundViolationError, InputError
from .evolution import initial_state, propagate
from .generator import symmetric_power
from .hermite import CoeffVector, enumerate_indices, factorial, gauss_hermite_rule, gradient_shift, series_polynomial_values
from .model import ModelSpec, exp_norm, matrix_exponential, spectral_summary

BOUND_RTOL = 1e-9
MASS_TOL = 1e-12
SV_GAP_TOL = 1e-12


def entropy_e2(f: CoeffVector, deviation: bool = False) -> float:
    """e_2(f | f_inf) = 1/2 sum_{|alpha| >= 1} alpha! d_alpha^2.

    ``deviation`` says f is f - f_inf (mass 0) rather than a unit-mass density.
    """
    expected = 0.0 if deviation else 1.0
    if abs(float(f.mass) - expected) > MASS_TOL:
        kind = "a pure deviation" if deviation else "unit mass"
        raise InputError(f"f is declared {kind} but has d_0 = {float(f.mass)}")
    return 0.5 * f.weighted_norm2(min_order=1)


def fisher_I2(f: CoeffVector) -> float:
    """I_2(f | f_inf) = sum_k k sum_{|alpha|=k} alpha! d_alpha^2."""
    return float(sum(sum(a) * factorial(a) * float(v) ** 2 for a, v in f))


def fisher_I2_flux(f: CoeffVector) -> float:
    """Same quantity as the squared weighted norm of the flux J = grad f + x f."""
    return sum(gradient_shift(f, j).weighted_norm2() for j in range(f.dim))


def fisher_I2_quadrature(f: CoeffVector, order: int | None = None) -> float:
    """int |grad(f / f_inf)|^2 f_inf dx by tensor Gauss-Hermite quadrature.

    f / f_inf = sum d_alpha H_alpha and d_j H_alpha = alpha_j H_{alpha - e_j}.
    """
    order = order or max(2, f.max_order + 1)
    nodes, weights = gauss_hermite_rule(order, f.dim)
    total = np.zeros(len(weights))
    for j in range(f.dim):
        dj = CoeffVector({a[:j] + (a[j] - 1,) + a[j + 1:]: a[j] * float(v) for a, v in f if a[j]}, f.dim)
        g = series_polynomial_values(dj, nodes)
        total += g * g
    return float(weights @ total)


def _flux_gram(f: CoeffVector) -> np.ndarray:
    J = [gradient_shift(f, j) for j in range(f.dim)]
    G = np.zeros((f.dim, f.dim))
    for i in range(f.dim):
        for k in range(i, f.dim):
            G[i, k] = G[k, i] = sum(factorial(a) * float(v) * float(J[k][a]) for a, v in J[i])
    return G


def fisher_IP(f: CoeffVector, P) -> float:
    """I_2^P = sum_{ij} P_ij <J_i, J_j>_w for a symmetric positive definite P."""
    P = np.asarray(P, dtype=float)
    if P.shape != (f.dim, f.dim):
        raise InputError(f"P must be {f.dim}x{f.dim}")
    if not np.allclose(P, P.T, rtol=0, atol=1e-12 * max(1.0, np.abs(P).max())):
        raise InputError("P is not symmetric")
    if np.linalg.eigvalsh(P)[0] <= 0:
        raise InputError("P is not positive definite")
    return float(np.sum(P * _flux_gram(f)))


@dataclass
class DecayReport:
    times: np.ndarray
    fisher: np.ndarray
    bound: np.ndarray
    envelope: np.ndarray
    m: int
    fitted_Cm: float
    mu: float
    defect: int
    model_digest: str = ""
    meta: dict = field(default_factory=dict)

    def first_violation(self):
        """Index of the first sample where fisher exceeds the bound, or None."""
        bad = np.nonzero(self.fisher > self.bound * (1 + BOUND_RTOL) + 1e-300)[0]
        return int(bad[0]) if len(bad) else None

    def envelope_violation(self):
        bad = np.nonzero(self.bound > self.envelope * (1 + BOUND_RTOL) + 1e-300)[0]
        return int(bad[0]) if len(bad) else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "fisher", "bound", "envelope"])
        for row in zip(self.times, self.fisher, self.bound, self.envelope):
            w.writerow([format_float(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "metadata": {"model_hash": self.model_digest, "m": self.m, "mu": self.mu,
                         "n": self.defect, "fitted_Cm": self.fitted_Cm, **self.meta},
            "t": self.times.tolist(),
            "fisher": self.fisher.tolist(),
            "bound": self.bound.tolist(),
            "envelope": self.envelope.tolist(),
        }


def format_float(v: float) -> str:
    return f"{float(v):.17g}"


def vanishing_order(f: CoeffVector) -> int:
    """Smallest k >= 1 with a nonzero coefficient of order k (0 if f = d_0 f_inf)."""
    orders = [k for k in f.orders() if k >= 1]
    return orders[0] if orders else 0


def decay_experiment(model: ModelSpec, f0: CoeffVector, times, m: int | None = None,
                     truncation: int | None = None, check: bool = True) -> DecayReport:
    """Propagate f0 and compare I_2(f(t)) against ||exp(-Ct)||^{2m} I_2(f0) and the envelope."""
    if m is None:
        m = max(1, vanishing_order(f0))
    if m < 1:
        raise InputError("declared vanishing order m must be >= 1")
    offending = [a for a, _ in f0 if 0 < sum(a) < m]
    if offending:
        raise InputError(f"f0 is not orthogonal to V_1..V_{m - 1}: nonzero coefficients at {sorted(offending)}")
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise InputError("times must be nonnegative and nondecreasing")

    summary = spectral_summary(model)
    state = initial_state(model, f0, truncation)
    I0 = fisher_I2(state.coeffs)
    fisher = np.empty(len(times))
    bound = np.empty(len(times))
    for i, t in enumerate(times):
        # each sample is propagated from t = 0 so the series does not accumulate steps
        fisher[i] = I0 if t == 0 else fisher_I2(propagate(state, t).coeffs)
        bound[i] = exp_norm(model, t) ** (2 * m) * I0

    shape = (1 + times) ** (2 * summary.defect * m) * np.exp(-2 * m * summary.mu * times)
    if I0 > 0:
        Cm = float(np.max(bound / (shape * I0)))
    else:
        Cm = 1.0
    report = DecayReport(times, fisher, bound, Cm * shape * I0, m, Cm, summary.mu, summary.defect, model.digest())
    if check:
        i = report.first_violation()
        if i is not None:
            raise BoundViolationError(i, times[i], fisher[i], bound[i])
    return report


@dataclass(frozen=True)
class SharpnessWitness:
    f0: CoeffVector
    direction: np.ndarray  # unit vector v with |exp(-Ct) v| = ||exp(-Ct)||
    unique: bool


def sharpness_witness(model: ModelSpec, m: int, t_star: float) -> SharpnessWitness:
    """f0 = f_inf + sum_{|alpha|=m} (m!/alpha!) v^alpha h_alpha for the top right singular vector v.

    The first-order coefficients move by exp(-B_1 t) = exp(-Ct), and the
    m-th shell carries the m-fold symmetric power of that motion, so this
    initial datum attains the Fisher decay bound at t_star.
    """
    if m < 1 or not t_star > 0:
        raise InputError("need m >= 1 and t_star > 0")
    E = matrix_exponential(model.C, t_star)
    _, s, vh = np.linalg.svd(E)
    v = vh[0]
    unique = len(s) == 1 or (s[0] - s[1]) >= SV_GAP_TOL
    if not unique:
        warnings.warn("top singular value is not simple; returning one maximizer", stacklevel=2)
    # fixed sign for reproducible output
    k = int(np.argmax(np.abs(v)))
    if v[k] < 0:
        v = -v
    basis = enumerate_indices(model.d, m)
    coeffs = dict(zip(basis, symmetric_power(v, m, basis)))
    coeffs[(0,) * model.d] = 1.0
    return SharpnessWitness(CoeffVector(coeffs, model.d), v, bool(unique))


def report_json_text(report: DecayReport) -> str:
    return json.dumps(report.to_json(), indent=2, sort_keys=True)


def sandwich_bounds(P) -> tuple[float, float]:
    ev = np.linalg.eigvalsh(np.asarray(P, dtype=float))
    return float(ev[0]), float(ev[-1])


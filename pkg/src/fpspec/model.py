"""Normalized drift/diffusion pairs: validation, spectral data, propagator norms."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import InputError, InvalidModelError, NumericalError

NORMALIZED_TOL = 1e-12
RANK_TOL = 1e-10
JORDAN_RANK_TOL = 1e-8
MU_TIE_TOL = 1e-9
# eigenvalues of an order-k Jordan block split by ~eps**(1/k); clustering must absorb that
CLUSTER_TOL = 1e-5


@dataclass(frozen=True)
class Violation:
    condition: str  # "A", "B", "C" or "normalized"
    detail: str

    def to_dict(self) -> dict:
        return {"condition": self.condition, "detail": self.detail}


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """A validated normalized pair (C, D). Build it through :func:`validate`."""

    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        for a in (self.C, self.D):
            a.setflags(write=False)

    @property
    def d(self) -> int:
        return self.C.shape[0]

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(np.diag(self.D) > RANK_TOL))

    def to_dict(self) -> dict:
        return {"d": self.d, "C": self.C.tolist(), "D": self.D.tolist()}

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]

    def __eq__(self, other):
        if not isinstance(other, ModelSpec):
            return NotImplemented
        return np.array_equal(self.C, other.C) and np.array_equal(self.D, other.D)

    def __hash__(self):
        return hash((self.C.tobytes(), self.D.tobytes()))


@dataclass(frozen=True)
class EigenCluster:
    value: complex
    algebraic: int
    geometric: int
    largest_block: int


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray  # raw eigenvalues of C, length d
    mu: float
    defect: int
    clusters: tuple[EigenCluster, ...] = field(default=())


def _as_matrix(name: str, a) -> np.ndarray:
    try:
        arr = np.array(a, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name} is not a real matrix: {exc}") from None
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise InputError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has NaN or Inf entries")
    return arr


def null_space(A: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of ker A, rank decided on singular values."""
    if A.size == 0:
        return np.eye(A.shape[1])
    _, s, vh = np.linalg.svd(A)
    r = int(np.sum(s > tol))
    return vh[r:].conj().T


def numerical_rank(A: np.ndarray, tol: float = RANK_TOL) -> int:
    if A.size == 0:
        return 0
    return int(np.sum(np.linalg.svd(A, compute_uv=False) > tol))


def invariant_kernel_subspace(C: np.ndarray, D: np.ndarray, tol: float = RANK_TOL):
    """Largest C^T-invariant subspace contained in ker D.

    Iterates K_{i+1} = {x in K_i : C^T x in K_i} from K_0 = ker D until the
    dimension stops dropping. Returns (basis, iterations).
    """
    d = C.shape[0]
    N = null_space(D, tol)
    steps = 0
    while N.shape[1] > 0:
        steps += 1
        # component of C^T N y leaving span(N) must vanish
        leak = (np.eye(d) - N @ N.T) @ C.T @ N
        Y = null_space(leak, tol)
        if Y.shape[1] == N.shape[1]:
            break
        N, _ = np.linalg.qr(N @ Y) if Y.shape[1] else (np.zeros((d, 0)), None)
        if steps > d:  # pragma: no cover - dimensions strictly decrease
            raise NumericalError("invariant-subspace iteration did not terminate")
    return N, steps


def kalman_rank(C: np.ndarray, D: np.ndarray, tol: float = RANK_TOL) -> int:
    """rank [sqrt(D), C sqrt(D), ..., C^{d-1} sqrt(D)].

    Full rank is equivalent to ker D holding no C^T-invariant subspace.
    """
    d = C.shape[0]
    S = np.diag(np.sqrt(np.clip(np.diag(D), 0.0, None)))
    blocks = [S]
    for _ in range(d - 1):
        blocks.append(C @ blocks[-1])
    return numerical_rank(np.hstack(blocks), tol)


def check(C, D) -> list[Violation]:
    """All violated conditions for the pair (C, D); empty when valid."""
    C = _as_matrix("C", C)
    D = _as_matrix("D", D)
    if C.shape != D.shape:
        raise InputError(f"C has shape {C.shape} but D has shape {D.shape}")
    out: list[Violation] = []

    off = D - np.diag(np.diag(D))
    if np.max(np.abs(off)) > NORMALIZED_TOL:
        out.append(Violation("A", f"D is not diagonal (max off-diagonal {np.max(np.abs(off)):.3e})"))
    diag = np.diag(D)
    if np.any(diag < -NORMALIZED_TOL):
        out.append(Violation("A", f"D has negative diagonal entries {diag[diag < -NORMALIZED_TOL].tolist()}"))
    r = numerical_rank(D)
    if r < 1:
        out.append(Violation("A", "rank(D) = 0"))

    gap = np.max(np.abs(D - (C + C.T) / 2))
    if gap > NORMALIZED_TOL:
        out.append(Violation("normalized", f"D differs from (C + C^T)/2 by {gap:.3e}"))

    lam = np.linalg.eigvals(C)
    bad = [z for z in lam if z.real <= 0]
    for z in bad:
        out.append(Violation("B", f"eigenvalue {_fmt_complex(z)} of C has non-positive real part"))

    N, _ = invariant_kernel_subspace(C, D)
    if N.shape[1] > 0:
        basis = np.round(N.T, 12).tolist()
        out.append(Violation("C", f"ker(D) contains a C^T-invariant subspace of dimension {N.shape[1]} with basis {basis}"))
    return out


def validate(C, D) -> ModelSpec:
    """Return a ModelSpec for (C, D) or raise InvalidModelError listing every violation."""
    violations = check(C, D)
    if violations:
        raise InvalidModelError(violations)
    return ModelSpec(np.array(C, dtype=float), np.array(D, dtype=float))


def _fmt_complex(z: complex) -> str:
    if abs(z.imag) < 1e-14:
        return f"{z.real:.12g}"
    return f"{z.real:.12g}{z.imag:+.12g}j"


def _cluster(lam: np.ndarray, tol: float) -> list[list[complex]]:
    groups: list[list[complex]] = []
    for z in sorted(lam, key=lambda z: (z.real, z.imag)):
        for g in groups:
            if abs(np.mean(g) - z) <= tol:
                g.append(z)
                break
        else:
            groups.append([z])
    return groups


def spectral_summary(model: ModelSpec) -> SpectralSummary:
    """Eigenvalues of C, spectral gap mu = min Re(lambda), and defect n."""
    C = model.C
    d = model.d
    try:
        lam = np.linalg.eigvals(C)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalError(f"eigenvalue solver failed: {exc}") from None
    scale = max(1.0, np.linalg.norm(C, 2))
    residual = max(np.linalg.svd(C - z * np.eye(d), compute_uv=False)[-1] for z in lam)
    if residual > 1e-6 * scale:
        raise NumericalError(f"eigenvalue residual {residual:.3e} too large")

    clusters = []
    for g in _cluster(lam, CLUSTER_TOL * scale):
        z = complex(np.mean(g))
        if abs(z.imag) < 1e-12:
            z = complex(z.real, 0.0)
        M = C - z * np.eye(d)
        tol = JORDAN_RANK_TOL * scale
        ranks = [d, numerical_rank(M, tol)]
        P = M
        while ranks[-1] != ranks[-2] and len(ranks) <= d + 1:
            P = P @ M
            ranks.append(numerical_rank(P, tol))
        # index of the eigenvalue = largest Jordan block
        block = len(ranks) - 2
        clusters.append(EigenCluster(z, len(g), d - ranks[1], block))

    mu = min(c.value.real for c in clusters)
    defect = max(c.largest_block - 1 for c in clusters if abs(c.value.real - mu) <= MU_TIE_TOL)
    return SpectralSummary(eigenvalues=lam, mu=float(mu), defect=int(defect), clusters=tuple(clusters))


def matrix_exponential(A, t: float) -> np.ndarray:
    """exp(-A t) by scaling and squaring (Pade kernel)."""
    A = _as_matrix("A", A)
    if not (t >= 0 and math.isfinite(t)):
        raise InputError(f"time must be finite and nonnegative, got {t}")
    if t == 0:
        return np.eye(A.shape[0])
    return scipy.linalg.expm(-t * A)


def exp_norm(model: ModelSpec, t: float) -> float:
    """Spectral norm of exp(-C t)."""
    if t < 0:
        raise InputError("t must be nonnegative")
    return float(np.linalg.norm(matrix_exponential(model.C, t), 2))


def envelope(model: ModelSpec, m: int, t: float, Cm: float, summary: SpectralSummary | None = None) -> float:
    """Cm (1+t)^{2nm} exp(-2 m mu t)."""
    if m < 1 or t < 0 or Cm <= 0:
        raise InputError("envelope needs m >= 1, t >= 0, Cm > 0")
    s = summary or spectral_summary(model)
    return Cm * (1 + t) ** (2 * s.defect * m) * math.exp(-2 * m * s.mu * t)


def model_from_dict(doc: dict) -> ModelSpec:
    try:
        d = int(doc["d"])
        C, D = doc["C"], doc["D"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"model document needs keys d, C, D: {exc}") from None
    C = _as_matrix("C", C)
    D = _as_matrix("D", D)
    if C.shape[0] != d:
        raise InputError(f"declared d = {d} but C is {C.shape[0]}x{C.shape[0]}")
    return validate(C, D)


def read_model_document(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read model file {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise InputError("model file must hold a JSON object")
    return doc


def load_model(path) -> ModelSpec:
    return model_from_dict(read_model_document(path))


def ou(d: int = 2) -> ModelSpec:
    return validate(np.eye(d), np.eye(d))


def kinetic() -> ModelSpec:
    return validate([[0.0, -1.0], [1.0, 1.0]], np.diag([0.0, 1.0]))


def defective() -> ModelSpec:
    return validate([[1.0, 0.5], [-0.5, 0.0]], np.diag([1.0, 0.0]))

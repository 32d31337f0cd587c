"""Exact multi-index Hermite calculus for the standard Gaussian.

Multi-indices are plain tuples of nonnegative ints. Polynomials keep exact
integer/rational coefficients until they are evaluated.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Real
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import InputError

PRUNE_TOL = 1e-15

MultiIndex = tuple


def order(alpha: Sequence[int]) -> int:
    return sum(alpha)


def factorial(alpha: Sequence[int]) -> int:
    """alpha! = prod alpha_i!"""
    return math.prod(math.factorial(a) for a in alpha)


def unit(d: int, j: int) -> MultiIndex:
    return tuple(1 if i == j else 0 for i in range(d))


def _check_index(alpha) -> MultiIndex:
    alpha = tuple(int(a) for a in alpha)
    if any(a < 0 for a in alpha):
        raise InputError(f"multi-index {alpha} has negative entries")
    return alpha


def enumerate_indices(d: int, m: int) -> list[MultiIndex]:
    """All alpha in N_0^d with |alpha| = m, graded lexicographic (first entry largest first)."""
    if d < 1 or m < 0:
        raise InputError("need d >= 1 and m >= 0")
    if d == 1:
        return [(m,)]
    out = []
    for first in range(m, -1, -1):
        for rest in enumerate_indices(d - 1, m - first):
            out.append((first,) + rest)
    return out


def block_size(d: int, m: int) -> int:
    return math.comb(m + d - 1, d - 1)


class Polynomial:
    """Sparse multivariate polynomial: exponent tuple -> coefficient."""

    __slots__ = ("terms", "dim")

    def __init__(self, terms: Mapping[tuple, Real], dim: int):
        self.dim = dim
        self.terms = {tuple(e): c for e, c in terms.items() if c != 0}

    @classmethod
    def constant(cls, c, dim: int) -> Polynomial:
        return cls({(0,) * dim: c}, dim)

    @classmethod
    def variable(cls, j: int, dim: int) -> Polynomial:
        return cls({unit(dim, j): 1}, dim)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def __add__(self, other: Polynomial) -> Polynomial:
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        return Polynomial(terms, self.dim)

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + other.scale(-1)

    def scale(self, c) -> Polynomial:
        return Polynomial({e: c * v for e, v in self.terms.items()}, self.dim)

    def __mul__(self, other: Polynomial) -> Polynomial:
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return Polynomial(terms, self.dim)

    def mul_x(self, j: int) -> Polynomial:
        """x_j * P"""
        return Polynomial({e[:j] + (e[j] + 1,) + e[j + 1:]: c for e, c in self.terms.items()}, self.dim)

    def diff(self, j: int) -> Polynomial:
        terms = {}
        for e, c in self.terms.items():
            if e[j]:
                terms[e[:j] + (e[j] - 1,) + e[j + 1:]] = c * e[j]
        return Polynomial(terms, self.dim)

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(sum(float(c) * np.prod(x ** np.array(e)) for e, c in self.terms.items()))

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.dim == other.dim and self.terms == other.terms

    def __repr__(self):
        return f"Polynomial({self.terms!r}, dim={self.dim})"


@lru_cache(maxsize=None)
def hermite_polynomial(alpha: MultiIndex) -> Polynomial:
    """H_alpha with h_alpha = (-1)^|alpha| d^alpha f_inf = H_alpha f_inf.

    Built by differentiating the Gaussian one coordinate at a time:
    -d_j (H f_inf) = (x_j H - d_j H) f_inf.
    """
    alpha = _check_index(alpha)
    d = len(alpha)
    for j, a in enumerate(alpha):
        if a:
            lower = alpha[:j] + (a - 1,) + alpha[j + 1:]
            H = hermite_polynomial(lower)
            return H.mul_x(j) - H.diff(j)
    return Polynomial.constant(1, d)


def inner_product(alpha: Sequence[int], beta: Sequence[int]) -> int:
    """<h_alpha, h_beta> in L^2(f_inf^{-1}) = alpha! delta_{alpha beta}."""
    alpha, beta = _check_index(alpha), _check_index(beta)
    if len(alpha) != len(beta):
        raise InputError("multi-indices of different dimension")
    return factorial(alpha) if alpha == beta else 0


class CoeffVector:
    """Finitely supported Hermite coefficients d_alpha of f = sum d_alpha h_alpha."""

    __slots__ = ("_coeffs", "dim")

    def __init__(self, coeffs: Mapping[Iterable[int], Real], dim: int | None = None):
        cleaned = {}
        for alpha, v in coeffs.items():
            alpha = _check_index(alpha)
            if dim is None:
                dim = len(alpha)
            elif len(alpha) != dim:
                raise InputError(f"multi-index {alpha} does not have dimension {dim}")
            if isinstance(v, (Fraction, int)) and not isinstance(v, bool):
                keep = v != 0
            else:
                v = float(v)
                if not math.isfinite(v):
                    raise InputError(f"non-finite coefficient at {alpha}")
                keep = abs(v) > PRUNE_TOL
            if keep:
                cleaned[alpha] = cleaned.get(alpha, 0) + v
        if dim is None:
            raise InputError("dimension cannot be inferred from an empty coefficient map")
        self._coeffs = MappingProxyType(cleaned)
        self.dim = dim

    @property
    def coeffs(self) -> Mapping[MultiIndex, Real]:
        return self._coeffs

    @classmethod
    def zeros(cls, d: int) -> CoeffVector:
        return cls({}, d)

    @classmethod
    def equilibrium(cls, d: int) -> CoeffVector:
        return cls({(0,) * d: 1}, d)

    @classmethod
    def basis(cls, alpha, value=1) -> CoeffVector:
        return cls({tuple(alpha): value})

    @classmethod
    def from_blocks(cls, d: int, blocks: Mapping[int, np.ndarray], basis: Mapping[int, Sequence[MultiIndex]] | None = None) -> CoeffVector:
        coeffs = {}
        for m, vec in blocks.items():
            idx = basis[m] if basis else enumerate_indices(d, m)
            for alpha, v in zip(idx, vec):
                coeffs[alpha] = float(v)
        return cls(coeffs, d)

    def __getitem__(self, alpha) -> Real:
        return self._coeffs.get(tuple(alpha), 0)

    def __iter__(self):
        return iter(self._coeffs.items())

    def __len__(self):
        return len(self._coeffs)

    def __add__(self, other: CoeffVector) -> CoeffVector:
        self._same_dim(other)
        out = dict(self._coeffs)
        for a, v in other._coeffs.items():
            out[a] = out.get(a, 0) + v
        return CoeffVector(out, self.dim)

    def __sub__(self, other: CoeffVector) -> CoeffVector:
        return self + other * -1

    def __mul__(self, c) -> CoeffVector:
        return CoeffVector({a: c * v for a, v in self._coeffs.items()}, self.dim)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, CoeffVector):
            return NotImplemented
        return self.dim == other.dim and dict(self._coeffs) == dict(other._coeffs)

    def __repr__(self):
        return f"CoeffVector({dict(self._coeffs)!r}, dim={self.dim})"

    def _same_dim(self, other):
        if other.dim != self.dim:
            raise InputError(f"dimension mismatch: {self.dim} vs {other.dim}")

    @property
    def max_order(self) -> int:
        return max((sum(a) for a in self._coeffs), default=-1)

    @property
    def mass(self) -> Real:
        return self[(0,) * self.dim]

    def orders(self) -> list[int]:
        return sorted({sum(a) for a in self._coeffs})

    def block(self, m: int, basis: Sequence[MultiIndex] | None = None) -> np.ndarray:
        idx = basis if basis is not None else enumerate_indices(self.dim, m)
        return np.array([float(self[a]) for a in idx])

    def weighted_norm2(self, min_order: int = 0) -> float:
        """sum alpha! d_alpha^2 over |alpha| >= min_order."""
        return float(sum(factorial(a) * float(v) ** 2 for a, v in self._coeffs.items() if sum(a) >= min_order))

    def to_float(self) -> CoeffVector:
        return CoeffVector({a: float(v) for a, v in self._coeffs.items()}, self.dim)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(alphas, values) as arrays, sorted graded-lex."""
        items = sorted(self._coeffs.items(), key=lambda kv: (sum(kv[0]), tuple(-a for a in kv[0])))
        alphas = np.array([a for a, _ in items], dtype=np.int64).reshape(len(items), self.dim)
        values = np.array([float(v) for _, v in items])
        return alphas, values

    def to_json(self) -> list[dict]:
        alphas, values = self.arrays()
        return [{"alpha": [int(a) for a in al], "value": float(v)} for al, v in zip(alphas, values)]

    @classmethod
    def from_json(cls, doc, dim: int | None = None) -> CoeffVector:
        if not isinstance(doc, list):
            raise InputError("coefficient document must be a JSON list")
        coeffs = {}
        dims = set()
        for entry in doc:
            try:
                alpha = tuple(entry["alpha"])
                value = float(entry["value"])
            except (KeyError, TypeError, ValueError) as exc:
                raise InputError(f"bad coefficient entry {entry!r}: {exc}") from None
            if not all(isinstance(a, int) and not isinstance(a, bool) for a in alpha):
                raise InputError(f"alpha must be a list of ints, got {entry['alpha']!r}")
            dims.add(len(alpha))
            coeffs[alpha] = coeffs.get(alpha, 0.0) + value
        if len(dims) > 1:
            raise InputError(f"non-uniform alpha lengths {sorted(dims)}")
        if dims:
            dim_doc = dims.pop()
            if dim is not None and dim != dim_doc:
                raise InputError(f"coefficients have dimension {dim_doc}, expected {dim}")
            dim = dim_doc
        if dim is None:
            raise InputError("empty coefficient list needs an explicit dimension")
        return cls(coeffs, dim)


def load_coeffs(path, dim: int | None = None) -> CoeffVector:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read coefficient file {path}: {exc}") from None
    return CoeffVector.from_json(doc, dim)


def expand(P: Polynomial) -> CoeffVector:
    """Hermite coefficients of P f_inf, i.e. P = sum d_alpha H_alpha.

    Peels off the leading monomial repeatedly; each H_alpha is monic in x^alpha
    with only lower-degree remainder terms, so this is a triangular solve.
    Exact when P has int/Fraction coefficients.
    """
    rest = dict(P.terms)
    out: dict = {}
    while rest:
        alpha = max(rest, key=lambda e: (sum(e), e))
        c = rest[alpha]
        out[alpha] = out.get(alpha, 0) + c
        for e, v in hermite_polynomial(alpha).terms.items():
            nv = rest.get(e, 0) - c * v
            if nv == 0 or (isinstance(nv, float) and abs(nv) <= PRUNE_TOL * max(1.0, abs(c))):
                rest.pop(e, None)
            else:
                rest[e] = nv
    return CoeffVector(out, P.dim)


def to_polynomial(f: CoeffVector) -> Polynomial:
    """P = sum d_alpha H_alpha, so that f = P f_inf."""
    P = Polynomial({}, f.dim)
    for alpha, v in f:
        P = P + hermite_polynomial(alpha).scale(v)
    return P


def gradient_shift(f: CoeffVector, j: int) -> CoeffVector:
    """Coefficients of d_j f + x_j f: entry (alpha_j + 1) d_{alpha + e_j} at alpha."""
    if not 0 <= j < f.dim:
        raise InputError(f"coordinate {j} out of range for dimension {f.dim}")
    out = {}
    for alpha, v in f:
        if alpha[j]:
            out[alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]] = alpha[j] * v
    return CoeffVector(out, f.dim)


def gaussian(x) -> np.ndarray:
    """Standard Gaussian density f_inf at each row of x."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = x.shape[1]
    return (2 * np.pi) ** (-d / 2) * np.exp(-0.5 * np.sum(x * x, axis=1))


def series_polynomial_values(f: CoeffVector, x) -> np.ndarray:
    """sum d_alpha H_alpha(x) at each row of x (no Gaussian factor)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != f.dim:
        raise InputError(f"points have dimension {x.shape[1]}, coefficients {f.dim}")
    alphas, values = f.arrays()
    return kernels.hermite_series_eval(alphas, values, x)


def reconstruct(f: CoeffVector, x):
    """f(x) = sum d_alpha H_alpha(x) f_inf(x). Scalar for one point, array for rows."""
    xa = np.asarray(x, dtype=float)
    single = xa.ndim == 1
    pts = np.atleast_2d(xa)
    vals = series_polynomial_values(f, pts) * gaussian(pts)
    return float(vals[0]) if single else vals


def gauss_hermite_rule(n: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Hermite rule for integrals against f_inf(x) dx in d dimensions."""
    z, w = np.polynomial.hermite_e.hermegauss(n)
    w = w / np.sqrt(2 * np.pi)
    grids = np.meshgrid(*([z] * d), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*([w] * d), indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    return nodes, weights

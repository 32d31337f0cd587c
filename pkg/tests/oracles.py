"""Independent reference computations used by the tests.

None of these call into the code paths they check.
"""

import math

import mpmath
import numpy as np
import sympy as sp


def taylor_expm(A, t, terms=60, dps=50):
    """exp(-A t) from a truncated Taylor series in extended precision."""
    with mpmath.workdps(dps):
        M = -mpmath.matrix(np.asarray(A, dtype=float).tolist()) * mpmath.mpf(t)
        n = M.rows
        term = mpmath.eye(n)
        acc = mpmath.eye(n)
        for k in range(1, terms):
            term = term * M / k
            acc = acc + term
        return np.array(acc.tolist(), dtype=float)


def random_direction_norm(E, samples=10_000, seed=0):
    """max |E x| over random unit vectors x (a lower estimate of ||E||_2)."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(samples, E.shape[1]))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    return float(np.max(np.linalg.norm(X @ E.T, axis=1)))


def sympy_hermite(alpha):
    """H_alpha(x) = (-1)^|alpha| d^alpha f / f for the standard Gaussian f, via sympy."""
    xs = sp.symbols(f"x1:{len(alpha) + 1}")
    f = sp.exp(-sum(x**2 for x in xs) / 2)
    g = f
    for x, a in zip(xs, alpha):
        g = sp.diff(g, x, a)
    H = sp.expand(sp.simplify((-1) ** sum(alpha) * g / f))
    poly = sp.Poly(H, *xs)
    return {tuple(int(e) for e in m): int(c) for m, c in zip(poly.monoms(), poly.coeffs())}


def sympy_generator_image(C, D, alpha):
    """Coefficients (as a sympy polynomial dict) of div(D grad h + C x h) / f for h = H_alpha f."""
    d = len(alpha)
    xs = sp.symbols(f"x1:{d + 1}")
    f = sp.exp(-sum(x**2 for x in xs) / 2)
    h = f
    for x, a in zip(xs, alpha):
        h = sp.diff(h, x, a)
    h = (-1) ** sum(alpha) * h
    Cs = sp.Matrix(C)
    Ds = sp.Matrix(D)
    X = sp.Matrix(xs)
    grad = sp.Matrix([sp.diff(h, x) for x in xs])
    flux = Ds * grad + Cs * X * h
    div = sum(sp.diff(flux[i], xs[i]) for i in range(d))
    Q = sp.expand(sp.simplify(div / f))
    poly = sp.Poly(Q, *xs)
    return {tuple(int(e) for e in m): c for m, c in zip(poly.monoms(), poly.coeffs())}


def multinomial_weight(alpha):
    return math.prod(math.factorial(a) for a in alpha)

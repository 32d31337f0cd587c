import json
import math

import numpy as np
import pytest
import sympy as sp

from fpspec import generator as fg
from fpspec import model as fm
from fpspec.errors import BlockSizeError, ConsistencyError, InputError
from fpspec.hermite import enumerate_indices, expand, Polynomial

from oracles import sympy_generator_image, taylor_expm


def test_first_block_is_drift_matrix(any_model):
    # coefficient flow d' = -C d: the mean of the density moves by exp(-Ct)
    np.testing.assert_array_equal(fg.build_block(any_model, 1).B, any_model.C)


@pytest.mark.parametrize("alpha", [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (2, 1)])
def test_block_columns_match_sympy(kinetic, alpha):
    """Apply the operator with sympy and re-expand: column alpha of -B."""
    C = sp.Matrix([[0, -1], [1, 1]])
    D = sp.diag(0, 1)
    image = sympy_generator_image(C, D, alpha)
    coeffs = expand(Polynomial({e: int(c) for e, c in image.items()}, 2))
    m = sum(alpha)
    block = fg.build_block(kinetic, m)
    col = block.basis.index(alpha)
    want = np.array([float(coeffs[b]) for b in block.basis])
    np.testing.assert_allclose(-block.B[:, col], want, atol=1e-14)
    assert all(sum(b) == m for b, _ in coeffs)


def test_ou_blocks_are_scaled_identity():
    for d in (1, 2, 3):
        model = fm.ou(d)
        for m in range(1, 6):
            B = fg.build_block(model, m).B
            np.testing.assert_allclose(B, m * np.eye(len(B)), atol=1e-13)


def test_kinetic_second_block_spectrum(kinetic):
    ev = sorted(np.linalg.eigvals(fg.build_block(kinetic, 2).B), key=lambda z: z.imag)
    # 2 lambda_1, lambda_1 + lambda_2, 2 lambda_2 with lambda = 1/2 -+ i sqrt(3)/2
    want = [1 - 1j * math.sqrt(3), 1.0, 1 + 1j * math.sqrt(3)]
    np.testing.assert_allclose(ev, want, atol=1e-12)


def test_block_size_and_cap(kinetic):
    assert fg.build_block(kinetic, 4).size == 5
    with pytest.raises(BlockSizeError):
        fg.build_block(fm.ou(3), 40, cap=500)
    with pytest.raises(InputError):
        fg.build_block(kinetic, 0)


def test_invariance_violation_is_detected():
    # a drift whose (C - D) is far from antisymmetric breaks shell invariance
    bad = fm.ModelSpec(np.array([[1.0, 1.0], [0.0, 1.0]]), np.eye(2))
    with pytest.raises(ConsistencyError):
        fg.build_block(bad, 1)


def test_verify_spectrum_examples(ou, kinetic, defective):
    assert fg.verify_spectrum(fg.build_block(ou, 3), fm.spectral_summary(ou)) < 1e-10
    assert fg.verify_spectrum(fg.build_block(kinetic, 1), fm.spectral_summary(kinetic)) < 1e-10
    s = fm.spectral_summary(defective)
    assert fg.verify_spectrum(fg.build_block(defective, 2), s) < 1e-6
    np.testing.assert_allclose(fg.shell_eigenvalues(s, 2), [1, 1, 1], atol=1e-12)


def test_double_precision_eigenvalues_of_defective_blocks_are_inaccurate(defective):
    """Why verify_spectrum defaults to extended precision."""
    s = fm.spectral_summary(defective)
    block = fg.build_block(defective, 3)
    assert fg.verify_spectrum(block, s, digits=None) > 1e-5
    assert fg.verify_spectrum(block, s) < 1e-10


@pytest.mark.parametrize("m", range(1, 5))
def test_spectrum_identity(any_model, m):
    s = fm.spectral_summary(any_model)
    tol = 1e-5 if s.defect else 1e-8
    assert fg.verify_spectrum(fg.build_block(any_model, m), s) <= tol


def test_spectrum_identity_three_dimensional():
    C = np.array([[1.0, 1.0, 0.0], [-1.0, 0.0, 1.0], [0.0, -1.0, 0.0]])
    model = fm.validate(C, np.diag([1.0, 0.0, 0.0]))
    s = fm.spectral_summary(model)
    for m in range(1, 5):
        assert fg.verify_spectrum(fg.build_block(model, m), s) <= 1e-8


def test_block_exponential_examples(ou, kinetic):
    b = fg.build_block(kinetic, 3)
    np.testing.assert_array_equal(fg.block_exponential(b, 0.0), np.eye(b.size))
    np.testing.assert_allclose(fg.block_exponential(fg.build_block(ou, 2), 1.0), math.exp(-2) * np.eye(3), rtol=1e-14)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_block_exponential_against_taylor(any_model, m):
    b = fg.build_block(any_model, m)
    ref = taylor_expm(b.B, 0.7, terms=80)
    got = fg.block_exponential(b, 0.7)
    for k in range(b.size):
        e = np.zeros(b.size)
        e[k] = 1
        np.testing.assert_allclose(got @ e, ref @ e, atol=1e-10)


@pytest.mark.parametrize("t", [0.0, 0.1, 0.5, 1.0, 2.0, 5.0])
def test_weighted_norm_first_block_equals_exp_norm(any_model, t):
    b = fg.build_block(any_model, 1)
    assert abs(fg.weighted_operator_norm(b, t) - fm.exp_norm(any_model, t)) < 1e-10


def test_weighted_norm_examples(ou):
    assert abs(fg.weighted_operator_norm(fg.build_block(ou, 3), 1.0) - math.exp(-3)) < 1e-15
    assert abs(fg.weighted_operator_norm(fg.build_block(ou, 2), 0.0) - 1.0) < 1e-15


def test_blockwise_decay_bound(any_model):
    for m in range(1, 5):
        b = fg.build_block(any_model, m)
        for t in np.linspace(0, 10, 41):
            assert fg.weighted_operator_norm(b, t) <= fm.exp_norm(any_model, t) ** m + 1e-9


@pytest.mark.parametrize("m", [1, 2, 3])
def test_tensor_multiplicativity(any_model, m):
    rng = np.random.default_rng(m)
    b = fg.build_block(any_model, m)
    for t in (0.3, 1.0, 2.5):
        E1 = fm.matrix_exponential(any_model.C, t)
        for _ in range(3):
            v = rng.normal(size=any_model.d)
            lhs = fg.block_exponential(b, t) @ fg.symmetric_power(v, m, b.basis)
            rhs = fg.symmetric_power(E1 @ v, m, b.basis)
            np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_symmetric_power_weighted_norm():
    v = np.array([0.3, -1.2, 0.5])
    for m in range(1, 5):
        basis = enumerate_indices(3, m)
        c = fg.symmetric_power(v, m, basis)
        w = np.array([math.prod(math.factorial(a) for a in al) for al in basis])
        assert abs(w @ c**2 - math.factorial(m) * np.dot(v, v) ** m) < 1e-12


def test_block_dump(kinetic):
    doc = json.loads(fg.build_block(kinetic, 2).dumps())
    assert doc["m"] == 2
    assert doc["basis"] == [[2, 0], [1, 1], [0, 2]]
    assert np.array(doc["B"]).shape == (3, 3)


def test_block_construction_is_deterministic(kinetic):
    fg._build_block.cache_clear()
    first = fg.build_block(kinetic, 4).B.copy()
    fg._build_block.cache_clear()
    assert np.array_equal(first, fg.build_block(kinetic, 4).B)

import numpy as np
import pytest

from fpspec import _kernels_py, kernels
from fpspec.hermite import hermite_polynomial

try:
    from fpspec import _kernels as compiled
except ImportError:  # pragma: no cover - extension not built
    compiled = None

needs_ext = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def _reference(alphas, coeffs, points):
    return np.array([sum(c * hermite_polynomial(tuple(a))(x) for a, c in zip(alphas, coeffs)) for x in points])


@pytest.fixture
def problem():
    rng = np.random.default_rng(7)
    alphas = np.array([[0, 0, 0], [3, 1, 0], [0, 0, 5], [2, 2, 2], [1, 0, 4]], dtype=np.int64)
    coeffs = rng.normal(size=len(alphas))
    points = rng.uniform(-3, 3, size=(40, 3))
    return alphas, coeffs, points


def test_python_backend_matches_exact_polynomials(problem):
    np.testing.assert_allclose(_kernels_py.hermite_series_eval(*problem), _reference(*problem), rtol=1e-12, atol=1e-12)


@needs_ext
def test_compiled_backend_matches_python(problem):
    np.testing.assert_allclose(compiled.hermite_series_eval(*problem), _kernels_py.hermite_series_eval(*problem), rtol=1e-13, atol=1e-12)


@needs_ext
def test_backend_selected_at_import():
    assert kernels.BACKEND == "cython"


@pytest.mark.parametrize("impl", [_kernels_py] + ([compiled] if compiled else []))
def test_kernel_input_checks(impl):
    with pytest.raises(ValueError):
        impl.hermite_series_eval(np.zeros((2, 2), dtype=np.int64), np.zeros(2), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        impl.hermite_series_eval(np.array([[-1, 0]], dtype=np.int64), np.zeros(1), np.zeros((3, 2)))


def test_wrapper_handles_empty_and_single_point():
    assert kernels.hermite_series_eval(np.zeros((0, 2)), np.zeros(0), np.zeros((4, 2))).shape == (4,)
    out = kernels.hermite_series_eval([[2, 0]], [1.0], [3.0, 0.0])
    assert out.shape == (1,) and abs(out[0] - 8.0) < 1e-15


def test_forced_fallback(tmp_path):
    import subprocess
    import sys

    code = "import fpspec.kernels as k; print(k.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env={"FPSPEC_PURE_PYTHON": "1", "PATH": ""},
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"

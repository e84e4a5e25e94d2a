import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from embedlab import linalg
from embedlab.errors import DimensionTooLarge

from .conftest import random_hermitian


def test_compiled_backend_is_built():
    # the package is meant to ship the extension; the fallback still works without it
    assert "python" in linalg.available_backends()
    if linalg._jacobi is None:
        pytest.skip("compiled extension not built")
    assert linalg.BACKEND in ("compiled", "python")


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 17, 40])
def test_matches_lapack(backend, rng, n):
    m = random_hermitian(rng, n)
    w, v = linalg.eigh(m, backend=backend)
    ref = np.linalg.eigvalsh(m)[::-1]
    np.testing.assert_allclose(w, ref, atol=1e-10 * max(1, np.abs(ref).max()))
    np.testing.assert_allclose(v.conj().T @ v, np.eye(n), atol=1e-10)
    np.testing.assert_allclose((v * w) @ v.conj().T, m, atol=1e-9)


def test_descending_order(backend, rng):
    w, _ = linalg.eigh(random_hermitian(rng, 12), backend=backend)
    assert np.all(np.diff(w) <= 0)


def test_diagonal_input_keeps_basis(backend):
    m = np.diag([0.1, 0.7, 0.2]).astype(complex)
    w, v = linalg.eigh(m, backend=backend)
    np.testing.assert_allclose(w, [0.7, 0.2, 0.1])
    np.testing.assert_allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]])


def test_degenerate_spectrum(backend, rng):
    q, _ = np.linalg.qr(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
    m = q @ np.diag([1, 1, 1, 0.5, 0.5, 0]) @ q.conj().T
    w, v = linalg.eigh(m, backend=backend)
    np.testing.assert_allclose(w, [1, 1, 1, 0.5, 0.5, 0], atol=1e-12)
    np.testing.assert_allclose((v * w) @ v.conj().T, m, atol=1e-12)


def test_real_symmetric_input(backend):
    m = np.array([[2.0, 1.0], [1.0, 2.0]])
    w, _ = linalg.eigh(m, backend=backend)
    np.testing.assert_allclose(w, [3.0, 1.0])


def test_backends_agree(rng):
    if len(linalg.available_backends()) < 2:
        pytest.skip("only one backend available")
    m = random_hermitian(rng, 30)
    wa = linalg.eigvalsh(m, backend="compiled")
    wb = linalg.eigvalsh(m, backend="python")
    np.testing.assert_allclose(wa, wb, atol=1e-11)


def test_empty_and_guard():
    w, v = linalg.eigh(np.zeros((0, 0)))
    assert w.shape == (0,) and v.shape == (0, 0)
    with pytest.raises(ValueError):
        linalg.eigh(np.zeros((2, 3)))
    with pytest.raises(DimensionTooLarge):
        linalg.eigh(np.zeros((linalg.MAX_DIM + 1, linalg.MAX_DIM + 1)))


@given(st.integers(1, 9), st.integers(0, 2**32 - 1))
def test_trace_and_frobenius_preserved(n, seed):
    m = random_hermitian(np.random.default_rng(seed), n)
    for b in linalg.available_backends():
        w = linalg.eigvalsh(m, backend=b)
        assert abs(w.sum() - np.trace(m).real) < 1e-9 * max(1, n)
        assert abs(np.sum(w**2) - np.linalg.norm(m) ** 2) < 1e-8 * max(1, np.linalg.norm(m) ** 2)

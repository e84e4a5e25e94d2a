"""Hermitian eigensolver front end.

Two interchangeable Jacobi kernels back :func:`eigh`: the compiled
``_jacobi`` extension and the NumPy fallback in ``_jacobi_py``. The compiled
one is used when it imports; set ``EMBEDLAB_BACKEND=python`` to force the
fallback.
"""
import os

import numpy as np

from . import _jacobi_py
from .errors import DimensionTooLarge

MAX_DIM = 4096
JACOBI_TOL = 1e-12

_KERNELS = {"python": _jacobi_py.jacobi_eigh}
try:
    from . import _jacobi
except ImportError:  # extension not built
    _jacobi = None
else:
    _KERNELS["compiled"] = _jacobi.jacobi_eigh

if _jacobi is not None and os.environ.get("EMBEDLAB_BACKEND", "").lower() != "python":
    BACKEND = "compiled"
else:
    BACKEND = "python"


def available_backends():
    return sorted(_KERNELS)


def eigh(m, backend=None, tol=JACOBI_TOL):
    """Eigen-decompose a Hermitian matrix.

    Returns ``(w, v)`` with ``w`` real and descending and the matching
    orthonormal eigenvectors in the columns of ``v``. No Hermiticity check is
    done here; callers validate.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if n > MAX_DIM:
        raise DimensionTooLarge(f"dimension {n} exceeds the eigensolver cap of {MAX_DIM}")
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    kernel = _KERNELS[backend or BACKEND]
    w, v, _ = kernel(m, tol)
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def eigvalsh(m, backend=None, tol=JACOBI_TOL):
    return eigh(m, backend=backend, tol=tol)[0]

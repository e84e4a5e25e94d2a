# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Cyclic-by-row complex Jacobi eigensolver for Hermitian matrices."""
import numpy as np

from libc.math cimport fabs, hypot, sqrt


def jacobi_eigh(a_in, double tol=1e-12, int max_sweeps=100):
    """Diagonalise a Hermitian matrix on a private copy.

    Returns ``(eigenvalues, eigenvectors, sweeps)`` with eigenvalues in the
    order they sit on the final diagonal (unsorted) and eigenvectors in the
    columns.
    """
    a = np.array(a_in, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = a.shape[0]
    # eigenvectors are accumulated as rows so every update is contiguous
    vt = np.eye(n, dtype=np.complex128)
    cdef double complex[:, ::1] A = a
    cdef double complex[:, ::1] VT = vt
    cdef Py_ssize_t p, q, k
    cdef int sweep = 0
    cdef double fro = 0.0, off, mag, app, aqq, theta, t, c, s, skip
    cdef double complex apq, se, sec, x, y

    for p in range(n):
        A[p, p] = A[p, p].real
        for q in range(n):
            fro += A[p, q].real * A[p, q].real + A[p, q].imag * A[p, q].imag
    fro = sqrt(fro)
    skip = 1e-18 * fro

    with nogil:
        while sweep < max_sweeps:
            off = 0.0
            for p in range(n):
                for q in range(p + 1, n):
                    off += 2.0 * (A[p, q].real * A[p, q].real + A[p, q].imag * A[p, q].imag)
            if fro == 0.0 or sqrt(off) <= tol * fro:
                break
            sweep += 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    mag = hypot(apq.real, apq.imag)
                    if mag <= skip:
                        continue
                    app = A[p, p].real
                    aqq = A[q, q].real
                    theta = (aqq - app) / (2.0 * mag)
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    se = s * (apq / mag)
                    sec = se.conjugate()
                    # rows p, q of V^dagger A; Hermitian mirror gives the columns
                    for k in range(n):
                        x = A[p, k]
                        y = A[q, k]
                        x, y = c * x - se * y, sec * x + c * y
                        A[p, k] = x
                        A[q, k] = y
                        A[k, p] = x.conjugate()
                        A[k, q] = y.conjugate()
                    A[p, p] = app - t * mag
                    A[q, q] = aqq + t * mag
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    # columns p, q of V, stored conjugated as rows of VT
                    for k in range(n):
                        x = VT[p, k]
                        y = VT[q, k]
                        VT[p, k] = c * x - se * y
                        VT[q, k] = sec * x + c * y

    return np.real(np.diagonal(a)).copy(), np.ascontiguousarray(vt.conj().T), sweep

"""Pure NumPy Jacobi eigensolver used when the compiled core is unavailable.

Rotations are applied in round-robin (tournament) order so that each round
is a batch of disjoint 2x2 rotations that NumPy can apply in one shot.
"""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _rounds(n):
    m = n + (n % 2)
    idx = list(range(m))
    out = []
    for _ in range(m - 1):
        pairs = [(idx[i], idx[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        if pairs:
            p = np.array([pq[0] for pq in pairs], dtype=np.intp)
            q = np.array([pq[1] for pq in pairs], dtype=np.intp)
            out.append((p, q))
        idx = [idx[0], idx[-1]] + idx[1:-1]
    return tuple(out)


def jacobi_eigh(a_in, tol=1e-12, max_sweeps=100):
    a = np.array(a_in, dtype=np.complex128, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    a[np.diag_indices(n)] = a.diagonal().real
    fro = float(np.linalg.norm(a))
    skip = 1e-18 * fro
    sweep = 0
    while sweep < max_sweeps:
        off = float(np.linalg.norm(a - np.diag(a.diagonal())))
        if fro == 0.0 or off <= tol * fro:
            break
        sweep += 1
        for p, q in _rounds(n):
            apq = a[p, q]
            mag = np.abs(apq)
            active = mag > skip
            if not active.any():
                continue
            safe = np.where(active, mag, 1.0)
            app = a[p, p].real
            aqq = a[q, q].real
            theta = (aqq - app) / (2.0 * safe)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            eph = np.where(active, apq / safe, 1.0)
            se = s * eph
            sec = s * eph.conj()

            cp, cq = a[:, p], a[:, q]
            a[:, p] = cp * c - cq * sec
            a[:, q] = cp * se + cq * c
            rp, rq = a[p, :], a[q, :]
            a[p, :] = c[:, None] * rp - se[:, None] * rq
            a[q, :] = sec[:, None] * rp + c[:, None] * rq
            a[p, p] = app - t * mag
            a[q, q] = aqq + t * mag
            a[p, q] = np.where(active, 0.0, a[p, q])
            a[q, p] = np.where(active, 0.0, a[q, p])

            vp, vq = v[:, p], v[:, q]
            v[:, p] = vp * c - vq * sec
            v[:, q] = vp * se + vq * c
    return a.diagonal().real.copy(), v, sweep

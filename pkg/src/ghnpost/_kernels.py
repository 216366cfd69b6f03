"""Hot numerical kernels: Householder QR and cyclic Jacobi eigensolver.

Each kernel exists twice with identical conventions: a loop form compiled
with numba ``@njit`` and a vectorized pure-numpy form.  The active variant
is chosen at import time; set ``GHNPOST_NO_NUMBA=1`` (or if numba is not
installed) to force the numpy path.  ``benchmarks/bench_kernels.py`` times
the two against each other.

Inputs must be float64 and C-contiguous; callers in :mod:`ghnpost.linalg`
take care of that.
"""

from __future__ import annotations

import math
import os

import numpy as np

_ENV_FLAG = "GHNPOST_NO_NUMBA"

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    HAVE_NUMBA = False


def _numba_disabled() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


USING_NUMBA = HAVE_NUMBA and not _numba_disabled()


# --------------------------------------------------------------------------
# Householder QR (thin): a (m x n, m >= n) -> q (m x n), r (n x n)
#
# Reflector convention: v = x + copysign(||x||, x0) * e1, H = I - 2 vv^T/v^Tv,
# so the produced R may carry negative diagonal entries; sign correction is a
# separate step (linalg.sign_adjust).  A zero subcolumn gets no reflection,
# which keeps Q exactly orthonormal on rank-deficient input.
# --------------------------------------------------------------------------

def householder_qr_loops(a):
    m, n = a.shape
    r = a.copy()
    vt = np.zeros((n, m))  # reflector j lives in vt[j, j:], contiguous per row
    betas = np.zeros(n)
    w = np.zeros(n)
    for j in range(n):
        x0 = r[j, j]
        tail = 0.0
        for i in range(j + 1, m):
            tail += r[i, j] * r[i, j]
        normx = math.sqrt(x0 * x0 + tail)
        if normx == 0.0:
            vt[j, j] = 1.0
            continue
        v0 = x0 + math.copysign(normx, x0)
        vt[j, j] = v0
        for i in range(j + 1, m):
            vt[j, i] = r[i, j]
        beta = 2.0 / (v0 * v0 + tail)
        betas[j] = beta
        for c in range(j, n):
            w[c] = 0.0
        for i in range(j, m):
            vi = vt[j, i]
            for c in range(j, n):
                w[c] += vi * r[i, c]
        for i in range(j, m):
            bvi = beta * vt[j, i]
            for c in range(j, n):
                r[i, c] -= bvi * w[c]
        for i in range(j + 1, m):
            r[i, j] = 0.0
    q = np.zeros((m, n))
    for i in range(n):
        q[i, i] = 1.0
    for j in range(n - 1, -1, -1):
        beta = betas[j]
        if beta == 0.0:
            continue
        for c in range(n):
            w[c] = 0.0
        for i in range(j, m):
            vi = vt[j, i]
            for c in range(n):
                w[c] += vi * q[i, c]
        for i in range(j, m):
            bvi = beta * vt[j, i]
            for c in range(n):
                q[i, c] -= bvi * w[c]
    return q, r[:n, :n].copy()


def householder_qr_numpy(a):
    m, n = a.shape
    r = a.copy()
    vt = np.zeros((n, m))
    betas = np.zeros(n)
    for j in range(n):
        x = r[j:, j]
        x0 = x[0]
        tail = float(x[1:] @ x[1:])
        normx = math.sqrt(x0 * x0 + tail)
        if normx == 0.0:
            vt[j, j] = 1.0
            continue
        v0 = x0 + math.copysign(normx, x0)
        vt[j, j] = v0
        vt[j, j + 1:] = x[1:]
        betas[j] = 2.0 / (v0 * v0 + tail)
        v = vt[j, j:]
        r[j:, j:] -= np.outer(v, betas[j] * (v @ r[j:, j:]))
        r[j + 1:, j] = 0.0
    q = np.zeros((m, n))
    np.fill_diagonal(q, 1.0)
    for j in range(n - 1, -1, -1):
        if betas[j] == 0.0:
            continue
        v = vt[j, j:]
        q[j:, :] -= np.outer(v, betas[j] * (v @ q[j:, :]))
    return q, r[:n, :n].copy()


# --------------------------------------------------------------------------
# Cyclic Jacobi eigensolver for symmetric matrices: a -> (eigvals, eigvecs),
# unsorted; eigvecs holds eigenvectors in columns.  Quadratic convergence;
# the sweep cap is a safety net, not a tuning knob.
# --------------------------------------------------------------------------

_JACOBI_MAX_SWEEPS = 60
_JACOBI_RTOL = 1e-15


def jacobi_eigh_loops(a):
    n = a.shape[0]
    A = a.copy()
    V = np.zeros((n, n))
    for i in range(n):
        V[i, i] = 1.0
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += A[i, j] * A[i, j]
    fro = math.sqrt(fro)
    if fro == 0.0:
        return np.diag(A).copy(), V
    tol = _JACOBI_RTOL * fro
    for _sweep in range(_JACOBI_MAX_SWEEPS):
        offsq = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                offsq += A[i, j] * A[i, j]
        if math.sqrt(2.0 * offsq) <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(1.0 + theta * theta))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for i in range(n):
                    aip = A[i, p]
                    aiq = A[i, q]
                    A[i, p] = c * aip - s * aiq
                    A[i, q] = s * aip + c * aiq
                for i in range(n):
                    api = A[p, i]
                    aqi = A[q, i]
                    A[p, i] = c * api - s * aqi
                    A[q, i] = s * api + c * aqi
                A[p, q] = 0.0
                A[q, p] = 0.0
                for i in range(n):
                    vip = V[i, p]
                    viq = V[i, q]
                    V[i, p] = c * vip - s * viq
                    V[i, q] = s * vip + c * viq
    return np.diag(A).copy(), V


def jacobi_eigh_numpy(a):
    n = a.shape[0]
    A = a.copy()
    V = np.eye(n)
    fro = math.sqrt(float(np.sum(A * A)))
    if fro == 0.0:
        return np.diag(A).copy(), V
    tol = _JACOBI_RTOL * fro
    for _sweep in range(_JACOBI_MAX_SWEEPS):
        offsq = float(np.sum(np.triu(A, 1) ** 2))
        if math.sqrt(2.0 * offsq) <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(1.0 + theta * theta))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                colp = A[:, p].copy()
                colq = A[:, q].copy()
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                rowp = A[p, :].copy()
                rowq = A[q, :].copy()
                A[p, :] = c * rowp - s * rowq
                A[q, :] = s * rowp + c * rowq
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    return np.diag(A).copy(), V


if USING_NUMBA:
    householder_qr_jit = njit(cache=True)(householder_qr_loops)
    jacobi_eigh_jit = njit(cache=True)(jacobi_eigh_loops)
    householder_qr = householder_qr_jit
    jacobi_eigh = jacobi_eigh_jit
else:
    householder_qr_jit = None
    jacobi_eigh_jit = None
    householder_qr = householder_qr_numpy
    jacobi_eigh = jacobi_eigh_numpy

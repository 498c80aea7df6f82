"""Householder tridiagonalization and implicit-shift QL for symmetric matrices.

Eigenvalues only. This is the in-house reference solver; the Monte Carlo paths
default to LAPACK (see ``spectra.eigenvalues_symmetric``) and the test suite
cross-checks the two.
"""

from __future__ import annotations

import math

import numpy as np

_MAX_SWEEPS = 60


def householder_tridiagonal(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduce a real symmetric matrix to tridiagonal form.

    Returns ``(d, e)`` with the diagonal ``d`` (length n) and the
    sub-diagonal ``e`` (length n-1) of an orthogonally similar matrix.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    d = np.empty(n)
    e = np.zeros(max(n - 1, 0))
    for k in range(n - 2):
        x = a[k + 1:, k]
        tail = np.linalg.norm(x[1:])
        if tail == 0.0:
            d[k] = a[k, k]
            e[k] = x[0]
            continue
        alpha = -math.copysign(math.hypot(x[0], tail), x[0])
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        block = a[k + 1:, k + 1:]
        p = block @ v
        q = p - (v @ p) * v
        block -= 2.0 * (np.outer(v, q) + np.outer(q, v))
        d[k] = a[k, k]
        e[k] = alpha
    if n >= 2:
        d[n - 2] = a[n - 2, n - 2]
        e[n - 2] = a[n - 1, n - 2]
    if n >= 1:
        d[n - 1] = a[n - 1, n - 1]
    return d, e


def tridiagonal_ql(d: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL.

    ``d`` is the diagonal and ``e`` the sub-diagonal. Returns the
    eigenvalues sorted ascending.
    """
    d = [float(v) for v in d]
    n = len(d)
    e = [float(v) for v in e] + [0.0]
    eps = np.finfo(float).eps
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if sweeps == _MAX_SWEEPS:
                raise RuntimeError("QL iteration did not converge")
            sweeps += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.sort(np.array(d))


def symmetric_eigenvalues(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of a real symmetric or complex Hermitian matrix.

    A complex Hermitian ``A = X + iY`` is embedded as the real symmetric
    ``[[X, -Y], [Y, X]]``, whose spectrum is that of ``A`` with every
    eigenvalue doubled; every second value is kept.
    """
    a = np.asarray(a)
    if np.iscomplexobj(a):
        x, y = a.real, a.imag
        big = np.block([[x, -y], [y, x]])
        return symmetric_eigenvalues(big)[::2]
    if a.shape[0] == 0:
        return np.empty(0)
    d, e = householder_tridiagonal(a)
    return tridiagonal_ql(d, e)

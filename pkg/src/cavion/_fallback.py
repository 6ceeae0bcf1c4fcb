"""Numpy/scipy versions of the CSR kernels in ``_kernels.pyx``."""
import numpy as np
import scipy.sparse as sp


def _csr(indptr, indices, data):
    n = len(indptr) - 1
    return sp.csr_matrix((data, indices, indptr), shape=(n, n))


def _absmax(x):
    # |re| + |im|, matching the compiled kernel's cheap norm
    if x.size == 0:
        return 0.0
    return float(np.max(np.abs(x.real) + np.abs(x.imag)))


def expm_action(indptr, indices, data, v, tau, nsteps, tol, max_terms):
    H = _csr(indptr, indices, data)
    w = np.array(v, dtype=np.complex128)
    total = 0
    for _ in range(nsteps):
        term = w.copy()
        prev = _absmax(term)
        converged = False
        for k in range(1, max_terms + 1):
            term = (-1j * tau / k) * (H @ term)
            w += term
            tnorm = _absmax(term)
            total += 1
            if tnorm + prev <= tol * _absmax(w):
                converged = True
                break
            prev = tnorm
        if not converged:
            return w, -1
    return w, total


def rk4(indptr, indices, data, v, h, nsteps):
    H = _csr(indptr, indices, data)
    y = np.array(v, dtype=np.complex128)
    h2 = 0.5 * h
    h6 = h / 6.0
    for _ in range(nsteps):
        k1 = -1j * (H @ y)
        k2 = -1j * (H @ (y + h2 * k1))
        k3 = -1j * (H @ (y + h2 * k2))
        k4 = -1j * (H @ (y + h * k3))
        y = y + h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y

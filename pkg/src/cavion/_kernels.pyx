# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled CSR kernels for exp(-iHt)v and the fixed-step RK4 reference.

Both routines mirror ``cavion._fallback`` operation for operation so the two
backends agree to rounding.
"""
import numpy as np
cimport numpy as cnp

from libc.math cimport fabs

ctypedef double complex cplx

cnp.import_array()


cdef inline void _matvec(const int[::1] indptr, const int[::1] indices,
                         const cplx[::1] data, const cplx[::1] x,
                         cplx[::1] y, cplx scale) noexcept nogil:
    cdef Py_ssize_t i, k, n = indptr.shape[0] - 1
    cdef cplx acc
    for i in range(n):
        acc = 0
        for k in range(indptr[i], indptr[i + 1]):
            acc = acc + data[k] * x[indices[k]]
        y[i] = scale * acc


cdef inline double _absmax(const cplx[::1] x) noexcept nogil:
    cdef Py_ssize_t i
    cdef double m = 0.0, re, im, a
    for i in range(x.shape[0]):
        re = x[i].real
        im = x[i].imag
        a = fabs(re) + fabs(im)
        if a > m:
            m = a
    return m


def expm_action(const int[::1] indptr, const int[::1] indices,
                const cplx[::1] data, const cplx[::1] v,
                double tau, Py_ssize_t nsteps, double tol, Py_ssize_t max_terms):
    """Apply exp(-i H tau) ``nsteps`` times to ``v`` by truncated Taylor series.

    Returns ``(w, terms)``; ``terms`` is -1 when a step failed to converge.
    """
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t step, k, i, total = 0
    cdef cplx[::1] w = np.array(v, dtype=np.complex128)
    cdef cplx[::1] term = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] nxt = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] swap
    cdef double tnorm, prev, wnorm
    cdef bint converged
    with nogil:
        for step in range(nsteps):
            for i in range(n):
                term[i] = w[i]
            prev = _absmax(term)
            converged = False
            for k in range(1, max_terms + 1):
                _matvec(indptr, indices, data, term, nxt, -1j * tau / k)
                for i in range(n):
                    w[i] = w[i] + nxt[i]
                swap = term
                term = nxt
                nxt = swap
                tnorm = _absmax(term)
                wnorm = _absmax(w)
                total += 1
                if tnorm + prev <= tol * wnorm:
                    converged = True
                    break
                prev = tnorm
            if not converged:
                total = -1
                break
    return np.asarray(w), total


def rk4(const int[::1] indptr, const int[::1] indices, const cplx[::1] data,
        const cplx[::1] v, double h, Py_ssize_t nsteps):
    """Integrate dy/dt = -i H y with ``nsteps`` classical RK4 steps of size ``h``."""
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t step, i
    cdef cplx[::1] y = np.array(v, dtype=np.complex128)
    cdef cplx[::1] k1 = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] k2 = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] k3 = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] k4 = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] tmp = np.empty(n, dtype=np.complex128)
    cdef cplx mi = -1j
    cdef double h2 = 0.5 * h, h6 = h / 6.0
    with nogil:
        for step in range(nsteps):
            _matvec(indptr, indices, data, y, k1, mi)
            for i in range(n):
                tmp[i] = y[i] + h2 * k1[i]
            _matvec(indptr, indices, data, tmp, k2, mi)
            for i in range(n):
                tmp[i] = y[i] + h2 * k2[i]
            _matvec(indptr, indices, data, tmp, k3, mi)
            for i in range(n):
                tmp[i] = y[i] + h * k3[i]
            _matvec(indptr, indices, data, tmp, k4, mi)
            for i in range(n):
                y[i] = y[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return np.asarray(y)

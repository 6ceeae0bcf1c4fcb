"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise, or when the
``CAVION_PURE_PYTHON`` environment variable is set to a non-empty value, the
numpy fallback runs the same algorithms.
"""
import os

import numpy as np

from cavion import _fallback

try:
    from cavion import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _fallback}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled

if _compiled is not None and not os.environ.get("CAVION_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"


def available_backends():
    return sorted(_BACKENDS)


def get_backend(name=None):
    """Return the kernel module called ``name`` (default: the active one)."""
    name = BACKEND if name is None else name
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {available_backends()}") from None


def csr_arrays(matrix):
    """Split a scipy CSR matrix into contiguous arrays the kernels accept."""
    m = matrix.tocsr()
    m.sort_indices()
    return (
        np.ascontiguousarray(m.indptr, dtype=np.intc),
        np.ascontiguousarray(m.indices, dtype=np.intc),
        np.ascontiguousarray(m.data, dtype=np.complex128),
    )


def expm_action(matrix, v, tau, nsteps, tol, max_terms=80, backend=None):
    indptr, indices, data = csr_arrays(matrix)
    v = np.ascontiguousarray(v, dtype=np.complex128)
    return get_backend(backend).expm_action(indptr, indices, data, v, float(tau), int(nsteps), float(tol), int(max_terms))


def rk4(matrix, v, h, nsteps, backend=None):
    indptr, indices, data = csr_arrays(matrix)
    v = np.ascontiguousarray(v, dtype=np.complex128)
    return get_backend(backend).rk4(indptr, indices, data, v, float(h), int(nsteps))

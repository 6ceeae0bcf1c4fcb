import numpy as np
import pytest

from cavion.core import PhysicalParams, make_space


@pytest.fixture
def small():
    return make_space(5, 5)


@pytest.fixture
def eff():
    """Effective couplings with distinct values so mix-ups show."""
    return PhysicalParams.effective(omega1=0.7, omega2=0.9, omega3=1.3)


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)


def random_state(spec, rng):
    from cavion.core import StateVector

    v = rng.normal(size=spec.dim) + 1j * rng.normal(size=spec.dim)
    return StateVector(spec, v / np.linalg.norm(v))


def ladder_dense(spec, mode):
    """Annihilator on the composite space built element by element from basis labels."""
    dim = spec.dim
    out = np.zeros((dim, dim), dtype=complex)
    for ket in range(dim):
        n_a, n_b, s = spec.labels(ket)
        if mode == "a" and n_a > 0:
            out[spec.index(n_a - 1, n_b, s), ket] = np.sqrt(n_a)
        if mode == "b" and n_b > 0:
            out[spec.index(n_a, n_b - 1, s), ket] = np.sqrt(n_b)
    return out


def qubit_dense(spec, which):
    dim = spec.dim
    out = np.zeros((dim, dim), dtype=complex)
    for ket in range(dim):
        n_a, n_b, s = spec.labels(ket)
        if which == "z":
            out[ket, ket] = 1.0 if s == 1 else -1.0
        elif which == "minus" and s == 1:
            out[spec.index(n_a, n_b, 0), ket] = 1.0
        elif which == "plus" and s == 0:
            out[spec.index(n_a, n_b, 1), ket] = 1.0
    return out

"""State diagnostics: fidelity, photon-number statistics, truncation mass and
bipartite (cavity | vibration) entanglement entropy."""
from dataclasses import dataclass

import numpy as np

from cavion.core import StateVector
from cavion.errors import InvalidArgument
from cavion.targets import TwoModeState, align_phase

SINGULAR_CUTOFF = 1e-12


@dataclass(frozen=True)
class FidelityReport:
    fidelity: float
    overlap: complex
    phase_aligned: bool = False


def _bosonic_probs(x) -> np.ndarray:
    if isinstance(x, TwoModeState):
        return np.abs(x.amplitudes) ** 2
    if isinstance(x, StateVector):
        return (np.abs(x.tensor()) ** 2).sum(axis=2)
    raise InvalidArgument(f"expected a TwoModeState or StateVector, got {type(x).__name__}")


def fidelity(x, y, align: bool = False) -> FidelityReport:
    """Pure-state fidelity ``|<x|y>|^2``.

    Both arguments must be the same kind of state on the same space; compare a
    :class:`TwoModeState` with a composite state via ``TwoModeState.embed``.
    With ``align`` the reported overlap uses phase-aligned copies of both states.
    """
    if type(x) is not type(y) or not isinstance(x, (TwoModeState, StateVector)):
        raise InvalidArgument(
            f"cannot compare {type(x).__name__} with {type(y).__name__}; embed the two-mode state first"
        )
    if x.spec != y.spec:
        raise InvalidArgument("states live on different Hilbert spaces")
    u = x.amplitudes.reshape(-1)
    v = y.amplitudes.reshape(-1)
    if align:
        u, v = align_phase(u), align_phase(v)
    overlap = complex(np.vdot(u, v))
    return FidelityReport(abs(overlap) ** 2, overlap, align)


def number_distribution(x, mode: str = "joint") -> np.ndarray:
    """Photon/phonon number probabilities.

    ``mode='a'`` or ``'b'`` gives the marginal of that mode, ``'joint'`` the
    ``(cutoff_a, cutoff_b)`` table. Composite states are summed over the
    internal state.
    """
    probs = _bosonic_probs(x)
    if mode == "joint":
        return probs
    if mode == "a":
        return probs.sum(axis=1)
    if mode == "b":
        return probs.sum(axis=0)
    raise InvalidArgument(f"mode must be 'a', 'b' or 'joint', got {mode!r}")


def truncation_mass(x, guard_levels: int) -> float:
    """Probability in the top ``guard_levels`` Fock levels of either mode."""
    spec = x.spec
    if not 1 <= guard_levels < min(spec.cutoff_a, spec.cutoff_b):
        raise InvalidArgument(f"guard_levels={guard_levels} must be >= 1 and below both cutoffs")
    probs = _bosonic_probs(x)
    mask = np.zeros(probs.shape, dtype=bool)
    mask[-guard_levels:, :] = True
    mask[:, -guard_levels:] = True
    return float(probs[mask].sum())


def schmidt_coefficients(x: TwoModeState) -> np.ndarray:
    s = np.linalg.svd(np.asarray(x.amplitudes), compute_uv=False)
    return s[s > SINGULAR_CUTOFF]


def schmidt_entropy(x: TwoModeState) -> float:
    """Von Neumann entropy (bits) of the reduced cavity state."""
    p = schmidt_coefficients(x) ** 2
    p = p / p.sum()
    return float(max(0.0, -np.sum(p * np.log2(p))))

"""Analytic two-mode target states: coherent, SU(2) coherent/cat, entangled
coherent pairs, two-mode squeezed vacuum and squeezed cats.

Cat constructors return normalized states and keep the squared norm of the
unnormalized superposition in ``norm_sq``; detection probabilities are
``norm_sq / 4`` for an equal-weight internal superposition.
"""
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from cavion.core import HilbertSpec, StateVector, internal_index, two_mode_ladders
from cavion.errors import DegenerateStateError, InvalidArgument
from cavion.evolution import exp_action

TRUNCATION_BUDGET = 1e-10
# squared norm below which a superposition counts as cancelled
DEGENERATE_NORM_SQ = 1e-14


def align_phase(amplitudes: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first non-negligible amplitude is real and >= 0."""
    flat = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    mags = np.abs(flat)
    if mags.max(initial=0.0) == 0.0:
        return np.array(amplitudes, dtype=np.complex128)
    first = int(np.argmax(mags > 1e-12 * mags.max()))
    phase = flat[first] / mags[first]
    return np.asarray(amplitudes, dtype=np.complex128) * np.conj(phase)


@dataclass(frozen=True, eq=False)
class TwoModeState:
    """Pure state of the cavity and vibration modes, amplitudes indexed ``[n_a, n_b]``."""

    spec: HilbertSpec
    amplitudes: np.ndarray
    norm_sq: float | None = None
    truncation_mass: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        shape = (self.spec.cutoff_a, self.spec.cutoff_b)
        if amps.size != self.spec.bosonic_dim:
            raise InvalidArgument(f"expected {shape} amplitudes, got shape {amps.shape}")
        amps = amps.reshape(shape)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def flat(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def vdot(self, other: "TwoModeState") -> complex:
        if other.spec != self.spec:
            raise InvalidArgument("states live on different Hilbert spaces")
        return complex(np.vdot(self.flat, other.flat))

    def aligned(self) -> "TwoModeState":
        return TwoModeState(self.spec, align_phase(self.amplitudes), self.norm_sq, self.truncation_mass)

    def embed(self, s) -> StateVector:
        """The composite state ``|self> (x) |s>``."""
        internal = np.zeros(2)
        internal[internal_index(s)] = 1.0
        return StateVector.from_factors(self.spec, self.amplitudes, internal)


def _normalized(spec, amps, norm_sq=None, truncation_mass=0.0) -> TwoModeState:
    nrm = np.linalg.norm(amps)
    return TwoModeState(spec, amps / nrm, norm_sq, truncation_mass)


def _sign(parity) -> int:
    if parity in ("+", 1, +1.0):
        return 1
    if parity in ("-", -1, -1.0):
        return -1
    raise InvalidArgument(f"parity must be '+' or '-', got {parity!r}")


def _check_norm(norm_sq: float, what: str):
    if norm_sq < DEGENERATE_NORM_SQ:
        raise DegenerateStateError(f"{what} cancels to zero norm (norm^2 = {norm_sq:.3e})")


def coherent_tail(alpha: complex, cutoff: int) -> float:
    """Poisson mass of ``|alpha>`` at Fock levels >= ``cutoff``."""
    return float(poisson.sf(cutoff - 1, abs(alpha) ** 2))


def required_coherent_cutoff(alpha: complex, budget: float = TRUNCATION_BUDGET) -> int:
    cutoff = 2
    while coherent_tail(alpha, cutoff) >= budget:
        cutoff += 1
    return cutoff


def coherent_state(spec: HilbertSpec, alpha: complex, mode: str) -> np.ndarray:
    """Fock amplitudes of ``|alpha>`` on mode ``'a'`` or ``'b'``, renormalized after truncation."""
    if mode not in ("a", "b"):
        raise InvalidArgument(f"mode must be 'a' or 'b', got {mode!r}")
    cutoff = spec.cutoff_a if mode == "a" else spec.cutoff_b
    tail = coherent_tail(alpha, cutoff)
    if tail >= TRUNCATION_BUDGET:
        raise InvalidArgument(
            f"coherent amplitude {alpha} loses {tail:.2e} beyond cutoff {cutoff}; "
            f"need cutoff >= {required_coherent_cutoff(alpha)}"
        )
    amps = np.empty(cutoff, dtype=np.complex128)
    amps[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, cutoff):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return amps / np.linalg.norm(amps)


def coherent_overlap(gamma: complex, delta: complex) -> complex:
    """<gamma|delta> for untruncated coherent states."""
    return complex(np.exp(-(abs(gamma) ** 2 + abs(delta) ** 2) / 2 + np.conj(gamma) * delta))


def coherent_pair(spec: HilbertSpec, alpha: complex, beta: complex) -> TwoModeState:
    """Product state ``|alpha>_a |beta>_b``."""
    amps = np.outer(coherent_state(spec, alpha, "a"), coherent_state(spec, beta, "b"))
    mass = coherent_tail(alpha, spec.cutoff_a) + coherent_tail(beta, spec.cutoff_b)
    return TwoModeState(spec, amps, truncation_mass=mass)


def fock_pair(spec: HilbertSpec, n_a: int, n_b: int) -> TwoModeState:
    amps = np.zeros((spec.cutoff_a, spec.cutoff_b), dtype=np.complex128)
    spec.index(n_a, n_b)
    amps[n_a, n_b] = 1.0
    return TwoModeState(spec, amps)


def su2_zeta(xi: complex) -> complex:
    """Stereographic label of ``exp(xi J+ - xi* J-)|j,-j>`` in the Schwinger realization.

    The binomial weights go as ``zeta**k`` with ``zeta = e^{i arg xi} tan|xi|``.
    """
    return complex(np.exp(1j * np.angle(xi)) * math.tan(abs(xi)))


def _su2_rotation(spec: HilbertSpec, xi: complex, n: int) -> np.ndarray:
    if not (isinstance(n, (int, np.integer)) and 0 <= n < min(spec.cutoff_a, spec.cutoff_b)):
        raise InvalidArgument(f"excitation number n={n} must satisfy 0 <= n < min cutoff")
    a, b = two_mode_ladders(spec)
    jp = a.conj().T @ b
    # exp(xi J+ - xi* J-) = exp(-i M) with Hermitian M = i (xi J+ - xi* J-)
    M = 1j * (xi * jp - np.conj(xi) * jp.conj().T)
    v = np.zeros(spec.bosonic_dim, dtype=np.complex128)
    v[n] = 1.0  # |0>_a |n>_b
    return exp_action(M.tocsr(), v, 1.0).reshape(spec.cutoff_a, spec.cutoff_b)


def su2_coherent_state(spec: HilbertSpec, xi: complex, n: int) -> TwoModeState:
    """``exp(xi a^dag b - xi* a b^dag) |0>_a |n>_b``."""
    return TwoModeState(spec, _su2_rotation(spec, xi, n))


def su2_cat(spec: HilbertSpec, theta: float, n: int, parity) -> TwoModeState:
    """Normalized ``(exp[+G] +/- exp[-G]) |0,n>`` with ``G = theta (a^dag b - a b^dag)``."""
    sign = _sign(parity)
    amps = _su2_rotation(spec, theta, n) + sign * _su2_rotation(spec, -theta, n)
    norm_sq = float(np.vdot(amps, amps).real)
    _check_norm(norm_sq, f"SU(2) cat (theta={theta}, n={n}, parity {parity})")
    return _normalized(spec, amps, norm_sq)


class Variant(enum.Enum):
    HALF_ANGLE = "half_angle"
    FULL_SWAP = "full_swap"


def entangled_coherent_components(alpha: complex, beta: complex, variant) -> tuple:
    """Coherent labels ``((a1, b1), (a2, b2))`` of the two superposed product states.

    The first component is the one reached from the ``|e>`` sector.
    """
    variant = Variant(variant)
    if variant is Variant.HALF_ANGLE:
        s = math.sqrt(2)
        return ((alpha + beta) / s, (beta - alpha) / s), ((alpha - beta) / s, (alpha + beta) / s)
    return (beta, -alpha), (-beta, alpha)


def entangled_coherent_pair(spec: HilbertSpec, alpha: complex, beta: complex, variant, parity) -> TwoModeState:
    sign = _sign(parity)
    (g1, d1), (g2, d2) = entangled_coherent_components(alpha, beta, variant)
    first = coherent_pair(spec, g1, d1)
    second = coherent_pair(spec, g2, d2)
    cross = coherent_overlap(g1, g2) * coherent_overlap(d1, d2)
    norm_sq = 2.0 + 2.0 * sign * cross.real
    _check_norm(norm_sq, f"entangled coherent pair ({variant}, parity {parity})")
    amps = (first.amplitudes + sign * second.amplitudes) / math.sqrt(norm_sq)
    mass = first.truncation_mass + second.truncation_mass
    return _normalized(spec, amps, norm_sq, mass)


def _squeeze_budget(spec: HilbertSpec, r: float) -> float:
    levels = min(spec.cutoff_a, spec.cutoff_b)
    tail = math.tanh(abs(r)) ** (2 * levels)
    if tail >= TRUNCATION_BUDGET:
        need = math.ceil(math.log(TRUNCATION_BUDGET) / (2 * math.log(math.tanh(abs(r))))) + 1
        raise InvalidArgument(f"squeeze parameter {r} loses {tail:.2e} beyond the cutoff; need cutoff >= {need}")
    return tail


def two_mode_squeezed_vacuum(spec: HilbertSpec, r: float) -> TwoModeState:
    """``exp[r(a^dag b^dag - a b)] |0,0>``: amplitude ``tanh(r)^n / cosh(r)`` on ``|n,n>``.

    ``r`` is signed; negative ``r`` flips the sign of odd-``n`` amplitudes.
    """
    tail = _squeeze_budget(spec, r)
    levels = min(spec.cutoff_a, spec.cutoff_b)
    amps = np.zeros((spec.cutoff_a, spec.cutoff_b), dtype=np.complex128)
    n = np.arange(levels)
    amps[n, n] = np.tanh(r) ** n / np.cosh(r)
    return _normalized(spec, amps, truncation_mass=tail)


def squeezed_cat(spec: HilbertSpec, r: float, parity) -> TwoModeState:
    """Normalized ``[S(r) +/- S(-r)] |0,0>``.

    The ``+`` cat lives on even ``|2k,2k>`` and the ``-`` cat on odd
    ``|2k+1,2k+1>``; only ``r = 0`` (to rounding) makes the ``-`` cat vanish.
    """
    sign = _sign(parity)
    plus = two_mode_squeezed_vacuum(spec, r)
    minus = two_mode_squeezed_vacuum(spec, -r)
    # <S(r)0|S(-r)0> = 1/cosh(2r) for the untruncated states
    norm_sq = 2.0 + 2.0 * sign / math.cosh(2 * r)
    _check_norm(norm_sq, f"squeezed cat (r={r}, parity {parity})")
    amps = plus.amplitudes + sign * minus.amplitudes
    return _normalized(spec, amps, norm_sq, plus.truncation_mass)

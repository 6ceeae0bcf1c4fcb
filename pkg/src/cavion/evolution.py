"""Unitary evolution under time-independent Hamiltonians.

``evolve`` applies exp(-iHt) by a scaled truncated Taylor series; the
independent check ``integrate_reference`` steps the Schrodinger equation with
fixed-step RK4. Both run on the kernels selected in :mod:`cavion.kernels`.
"""
import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from cavion import kernels
from cavion.core import Operator, StateVector
from cavion.errors import InvalidArgument, NumericFailure, TruncationWarning

# largest ||H tau||_1 per Taylor step
_TAYLOR_STEP_NORM = 1.0
# RK4 step satisfies h * ||H||_1 <= this
_RK4_STEP_NORM = 0.01
_RK4_MAX_STEPS = 20_000_000
TRUNCATION_BUDGET = 1e-10


@dataclass(frozen=True, eq=False)
class EvolutionRequest:
    hamiltonian: Operator
    duration: float
    input: StateVector
    tolerance: float = 1e-12

    def __post_init__(self):
        if not math.isfinite(self.duration) or self.duration < 0:
            raise InvalidArgument(f"duration must be finite and >= 0, got {self.duration}")
        if self.hamiltonian.spec != self.input.spec:
            raise InvalidArgument("hamiltonian and input state use different Hilbert spaces")
        if not self.tolerance > 0:
            raise InvalidArgument("tolerance must be positive")


def edge_mass(state: StateVector, guard_levels: int = 1) -> float:
    """Population in the top ``guard_levels`` Fock levels of either mode."""
    probs = np.abs(state.tensor()) ** 2
    spec = state.spec
    mask = np.zeros((spec.cutoff_a, spec.cutoff_b), dtype=bool)
    mask[spec.cutoff_a - guard_levels:, :] = True
    mask[:, spec.cutoff_b - guard_levels:] = True
    return float(probs[mask].sum())


def _finish(req: EvolutionRequest, out: np.ndarray) -> StateVector:
    if not np.all(np.isfinite(out)):
        raise NumericFailure("evolution produced non-finite amplitudes")
    result = StateVector(req.input.spec, out)
    mass = edge_mass(result)
    # inputs may legitimately sit on the top level; flag only population pushed there
    if mass - edge_mass(req.input) > TRUNCATION_BUDGET:
        warnings.warn(
            f"population {mass:.3e} reached the Fock cutoff; increase the cutoffs",
            TruncationWarning,
            stacklevel=3,
        )
    return StateVector(req.input.spec, out, truncation_mass=mass)


def exp_action(matrix, v: np.ndarray, t: float, tolerance: float = 1e-12,
               backend: str | None = None) -> np.ndarray:
    """exp(-i M t) v for a sparse Hermitian ``M`` (any dimension)."""
    v = np.asarray(v, dtype=np.complex128)
    if t == 0 or matrix.nnz == 0:
        return v.copy()
    scale = float(abs(matrix).sum(axis=0).max()) * abs(t)
    if not math.isfinite(scale):
        raise NumericFailure("Hamiltonian has non-finite entries")
    nsteps = max(1, math.ceil(scale / _TAYLOR_STEP_NORM))
    tau = t / nsteps
    # split the error budget over the steps, but never below rounding
    step_tol = max(tolerance / nsteps, 2.0 ** -53)
    out, terms = kernels.expm_action(matrix, v, tau, nsteps, step_tol, backend=backend)
    if terms < 0:
        raise NumericFailure("Taylor series for the exponential action did not converge")
    if not np.all(np.isfinite(out)):
        raise NumericFailure("exponential action produced non-finite amplitudes")
    return out


def evolve(req: EvolutionRequest, backend: str | None = None) -> StateVector:
    """Return exp(-i H t) applied to the input state."""
    out = exp_action(req.hamiltonian.matrix, req.input.amplitudes, req.duration, req.tolerance, backend)
    return _finish(req, out)


def integrate_reference(req: EvolutionRequest, backend: str | None = None) -> StateVector:
    """Fixed-step RK4 solution of i d/dt psi = H psi; an independent check on :func:`evolve`."""
    v = req.input.amplitudes
    if req.duration == 0 or req.hamiltonian.matrix.nnz == 0:
        return _finish(req, v.copy())
    scale = req.hamiltonian.norm1() * req.duration
    if not math.isfinite(scale):
        raise NumericFailure("Hamiltonian has non-finite entries")
    nsteps = max(1, math.ceil(scale / _RK4_STEP_NORM))
    if nsteps > _RK4_MAX_STEPS:
        raise NumericFailure(f"reference integration would need {nsteps} steps; step size underflow")
    h = req.duration / nsteps
    return _finish(req, kernels.rk4(req.hamiltonian.matrix, v, h, nsteps, backend=backend))


class Frame(enum.Enum):
    FREE_OSCILLATION = "free_oscillation"


def frame_transform(state: StateVector, t: float, nu: float, delta_cA: float,
                    frame=Frame.FREE_OSCILLATION) -> StateVector:
    """Apply exp[-i(nu b^dag b + delta_cA a^dag a) t], i.e. leave the interaction picture."""
    Frame(frame)
    spec = state.spec
    n_a = np.arange(spec.cutoff_a)[:, None, None]
    n_b = np.arange(spec.cutoff_b)[None, :, None]
    phases = np.exp(-1j * (nu * n_b + delta_cA * n_a) * t)
    phases = np.broadcast_to(phases, (spec.cutoff_a, spec.cutoff_b, 2)).reshape(-1)
    return StateVector(spec, phases * state.amplitudes)

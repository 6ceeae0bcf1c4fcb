"""Pulse-and-measure pipelines for the ion-cavity system.

Each ``run_*`` pipeline prepares ``(|g> + |e>)/sqrt(2)`` times a bosonic
state, evolves under a sigma_z-conditioned interaction, applies a carrier
pi/2 pulse and enumerates both internal-state detection branches. Nothing is
sampled: both branches are always returned with their probabilities.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from cavion import analysis, targets
from cavion.core import (
    HilbertSpec,
    Model,
    PhysicalParams,
    StateVector,
    build_hamiltonian,
    internal_index,
)
from cavion.errors import EmptyBranchError, InvalidArgument
from cavion.evolution import EvolutionRequest, edge_mass, evolve, frame_transform
from cavion.targets import TwoModeState, Variant

EMPTY_BRANCH_PROBABILITY = 1e-14
NORM_ATOL = 1e-10
_PLUS = np.array([1.0, 1.0]) / math.sqrt(2)  # (|g> + |e>)/sqrt(2) in (g, e) order


@dataclass(frozen=True, eq=False)
class ProtocolOutcome:
    branch: str
    probability: float
    post_state: TwoModeState | None
    target_fidelity: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return self.post_state is None


def carrier_pi2_pulse(state: StateVector) -> StateVector:
    """Resonant pi/2 pulse: ``|e> -> (|g>+|e>)/sqrt2``, ``|g> -> (|g>-|e>)/sqrt2``."""
    t = state.tensor()
    g, e = t[:, :, 0], t[:, :, 1]
    out = np.stack([(g + e) / math.sqrt(2), (e - g) / math.sqrt(2)], axis=2)
    return StateVector(state.spec, out.reshape(-1), state.truncation_mass)


def measure_internal(state: StateVector, branch) -> ProtocolOutcome:
    """Project onto internal state ``branch`` and renormalize the bosonic remainder."""
    nrm = state.norm()
    if abs(nrm - 1.0) > NORM_ATOL:
        raise InvalidArgument(f"measurement needs a normalized state, norm = {nrm!r}")
    s = internal_index(branch)
    name = "ge"[s]
    amps = state.branch(s)
    prob = float(np.vdot(amps, amps).real)
    if prob < EMPTY_BRANCH_PROBABILITY:
        raise EmptyBranchError(f"branch {name} has probability {prob:.3e}")
    post = TwoModeState(state.spec, amps / math.sqrt(prob))
    return ProtocolOutcome(name, prob, post)


def _prepare(bosonic: TwoModeState) -> StateVector:
    return StateVector.from_factors(bosonic.spec, bosonic.amplitudes, _PLUS)


def _branches(state: StateVector, target_for) -> dict[str, ProtocolOutcome]:
    """Measure both branches of ``state``; ``target_for(branch)`` builds the reference state."""
    outcomes = {}
    trunc = edge_mass(state)
    for name in ("g", "e"):
        try:
            out = measure_internal(state, name)
        except EmptyBranchError:
            prob = float(np.linalg.norm(state.branch(name)) ** 2)
            outcomes[name] = ProtocolOutcome(name, prob, None, None, {"empty": True, "truncation_mass": trunc})
            continue
        target = target_for(name)
        report = analysis.fidelity(out.post_state, target)
        diag = {"empty": False, "truncation_mass": trunc, "target_norm_sq": target.norm_sq}
        outcomes[name] = ProtocolOutcome(name, out.probability, out.post_state, report.fidelity, diag)
    return outcomes


def _duration(angle: float, rate: float, label: str) -> float:
    if rate == 0:
        raise InvalidArgument(f"{label} must be nonzero")
    t = angle / rate
    if t < 0:
        raise InvalidArgument(f"rotation angle {angle} and {label} {rate} give negative time")
    return t


def _parity(branch: str) -> str:
    # g collects the sum of the two sigma_z sectors, e their difference
    return "+" if branch == "g" else "-"


def run_su2_cat(n: int, theta: float, spec: HilbertSpec, params: PhysicalParams | None = None) -> dict[str, ProtocolOutcome]:
    """Beam-splitter pulse of area ``theta`` on ``|0>_a |n>_b`` followed by pi/2 and detection."""
    params = params or PhysicalParams.effective()
    start = _prepare(targets.fock_pair(spec, 0, n))
    H = build_hamiltonian(spec, params, Model.BEAM_SPLITTER)
    t = _duration(theta, params.Omega1, "Omega1")
    state = carrier_pi2_pulse(evolve(EvolutionRequest(H, t, start)))
    return _branches(state, lambda br: targets.su2_cat(spec, theta, n, _parity(br)))


def run_entangled_coherent(alpha: complex, beta: complex, variant, spec: HilbertSpec,
                           params: PhysicalParams | None = None) -> dict[str, ProtocolOutcome]:
    """Beam-splitter pulse on ``|alpha>_a |beta>_b``: area pi/4 (HALF_ANGLE) or pi/2 (FULL_SWAP)."""
    variant = Variant(variant)
    params = params or PhysicalParams.effective()
    start = _prepare(targets.coherent_pair(spec, alpha, beta))
    theta = math.pi / 4 if variant is Variant.HALF_ANGLE else math.pi / 2
    H = build_hamiltonian(spec, params, Model.BEAM_SPLITTER)
    t = _duration(theta, params.Omega1, "Omega1")
    state = carrier_pi2_pulse(evolve(EvolutionRequest(H, t, start)))
    return _branches(state, lambda br: targets.entangled_coherent_pair(spec, alpha, beta, variant, _parity(br)))


def run_squeezed_cat(r: float, spec: HilbertSpec, params: PhysicalParams | None = None) -> dict[str, ProtocolOutcome]:
    """Two-mode squeezing pulse of area ``r`` on the vacuum, pi/2 pulse, detection."""
    params = params or PhysicalParams.effective()
    # fails early when the cutoff cannot hold the squeezed states
    targets.two_mode_squeezed_vacuum(spec, r)
    start = _prepare(targets.fock_pair(spec, 0, 0))
    H = build_hamiltonian(spec, params, Model.SQUEEZE)
    t = _duration(r, params.Omega2, "Omega2")
    state = carrier_pi2_pulse(evolve(EvolutionRequest(H, t, start)))
    return _branches(state, lambda br: targets.squeezed_cat(spec, r, _parity(br)))


GATE_BASIS = ((0, 0), (0, 1), (1, 0), (1, 1))
PHASE_GATE_TARGET = np.diag([1.0, 1.0, 1.0, -1.0]).astype(np.complex128)


@dataclass(frozen=True, eq=False)
class GateTruthTable:
    """Gate matrix on ``|n_a, n_b>`` for n in {0, 1}, internal state ``|g>``.

    Column ``j`` is the image of ``GATE_BASIS[j]``.
    """

    matrix: np.ndarray

    def unitarity_error(self) -> float:
        u = self.matrix
        return float(np.abs(u.conj().T @ u - np.eye(4)).max())

    def max_offdiag(self) -> float:
        return float(np.abs(self.matrix - np.diag(np.diag(self.matrix))).max())

    def max_error(self, target=PHASE_GATE_TARGET) -> float:
        return float(np.abs(self.matrix - target).max())

    def leakage(self) -> np.ndarray:
        """Population leaving the computational subspace, per input column."""
        return 1.0 - (np.abs(self.matrix) ** 2).sum(axis=0)


@dataclass(frozen=True, eq=False)
class PhaseGateResult:
    truth_table: GateTruthTable
    state: StateVector | None


def gate_input_state(spec: HilbertSpec, coefficients) -> StateVector:
    """``sum_j c_j |GATE_BASIS[j]> |g>``."""
    coefficients = np.asarray(coefficients, dtype=np.complex128)
    if coefficients.shape != (4,):
        raise InvalidArgument("gate input needs 4 coefficients over |00>, |01>, |10>, |11>")
    amps = np.zeros(spec.dim, dtype=np.complex128)
    for c, (na, nb) in zip(coefficients, GATE_BASIS):
        amps[spec.index(na, nb, "g")] = c
    return StateVector(spec, amps)


def run_phase_gate(spec: HilbertSpec, input=None, params: PhysicalParams | None = None,
                   angle: float = math.pi) -> PhaseGateResult:
    """Apply the phase-gate coupling for pulse area ``Omega3 t = angle``.

    Returns the truth table and, when ``input`` (4 coefficients or a
    :class:`StateVector`) is given, the evolved input state.
    """
    params = params or PhysicalParams.effective()
    H = build_hamiltonian(spec, params, Model.PHASE_GATE)
    t = _duration(angle, params.Omega3, "Omega3")
    table = np.zeros((4, 4), dtype=np.complex128)
    rows = [spec.index(na, nb, "g") for na, nb in GATE_BASIS]
    for j, (na, nb) in enumerate(GATE_BASIS):
        ket = gate_input_state(spec, np.eye(4)[j])
        out = evolve(EvolutionRequest(H, t, ket))
        table[:, j] = out.amplitudes[rows]
    state = None
    if input is not None:
        psi = input if isinstance(input, StateVector) else gate_input_state(spec, input)
        state = evolve(EvolutionRequest(H, t, psi))
    return PhaseGateResult(GateTruthTable(table), state)


def rwa_params(ratio: float, detuning_scale: float = 10.0, drive_fraction: float = 0.5,
               eta: float = 0.1) -> PhysicalParams:
    """Physical parameters in units of Omega1 = 1 with nu = delta_cA = ratio.

    The laser detuning is ``detuning_scale * ratio`` and the drive amplitude
    ``drive_fraction`` of it; g0 is then fixed by Omega1 = 1. The Stark
    coefficient g0^2 eta^2 / Delta_oA falls off as 1/ratio.
    """
    if not ratio > 1:
        raise InvalidArgument(f"nu/Omega1 ratio must exceed 1, got {ratio}")
    Delta = detuning_scale * ratio
    eps = drive_fraction * Delta
    g0 = Delta / (eps * eta)
    return PhysicalParams(nu=ratio, delta_cA=ratio, Delta_oA=Delta, g0=g0, epsilon_A=eps, eta=eta)


def _rwa_start(spec, alpha, beta, bosonic):
    if bosonic is None:
        bosonic = targets.coherent_pair(spec, alpha, beta)
    return _prepare(bosonic)


def validate_rwa(alpha: complex, beta: complex, ratio: float, duration: float, spec: HilbertSpec,
                 bosonic: TwoModeState | None = None, **scales) -> float:
    """Fidelity between the adiabatically-eliminated dynamics and the beam-splitter model.

    ``duration`` is the pulse area Omega1 t. The beam-splitter evolution is
    moved to the lab frame with the free oscillation at nu = delta_cA before
    comparing. ``bosonic`` replaces the default coherent input ``|alpha>|beta>``.
    """
    params = rwa_params(ratio, **scales)
    start = _rwa_start(spec, alpha, beta, bosonic)
    t = duration / params.Omega1
    exact = evolve(EvolutionRequest(build_hamiltonian(spec, params, Model.ELIMINATED), t, start))
    rwa = evolve(EvolutionRequest(build_hamiltonian(spec, params, Model.BEAM_SPLITTER), t, start))
    rwa = frame_transform(rwa, t, params.nu, params.delta_cA)
    return analysis.fidelity(exact, rwa).fidelity


def compare_full_model(alpha: complex, beta: complex, ratio: float, duration: float, spec: HilbertSpec,
                       bosonic: TwoModeState | None = None, **scales) -> float:
    """Exploratory: fidelity of the unreduced (internal-state resolved) dynamics
    against the eliminated model, same parameters and bare frame.

    No frame or dressing correction is applied, so the number is only a rough
    indicator; nothing checks it against a threshold.
    """
    params = rwa_params(ratio, **scales)
    start = _rwa_start(spec, alpha, beta, bosonic)
    t = duration / params.Omega1
    full = evolve(EvolutionRequest(build_hamiltonian(spec, params, Model.FULL), t, start))
    elim = evolve(EvolutionRequest(build_hamiltonian(spec, params, Model.ELIMINATED), t, start))
    return analysis.fidelity(full, elim).fidelity

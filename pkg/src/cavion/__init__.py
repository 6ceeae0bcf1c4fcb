"""Trapped-ion cavity QED simulator: two-mode nonclassical states and a phase gate."""
from cavion.core import (
    HilbertSpec,
    Model,
    Operator,
    PhysicalParams,
    StateVector,
    build_hamiltonian,
    fock_state,
    make_mode_operators,
    make_space,
)
from cavion.errors import (
    CavionError,
    DegenerateStateError,
    EmptyBranchError,
    InternalError,
    InvalidArgument,
    NumericFailure,
    TruncationWarning,
)
from cavion.evolution import EvolutionRequest, evolve, frame_transform, integrate_reference
from cavion.kernels import BACKEND
from cavion.protocols import (
    ProtocolOutcome,
    carrier_pi2_pulse,
    measure_internal,
    run_entangled_coherent,
    run_phase_gate,
    run_squeezed_cat,
    run_su2_cat,
    validate_rwa,
)
from cavion.targets import TwoModeState, Variant

__version__ = "0.1.0"

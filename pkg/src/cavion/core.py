"""Composite Hilbert space (cavity x vibration x qubit), operators and Hamiltonians.

Basis ordering is fixed: the state ``|n_a, n_b, s>`` lives at index
``((n_a * cutoff_b) + n_b) * 2 + s`` with ``s = 0`` for ``|g>`` and ``s = 1``
for ``|e>``. Equivalently, composite operators are ``kron(cavity, vibration,
qubit)``.
"""
import enum
import functools
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from cavion.errors import InternalError, InvalidArgument

HERMITIAN_ATOL = 1e-12

_INTERNAL = {"g": 0, "e": 1, 0: 0, 1: 1}


def internal_index(s) -> int:
    """Map ``'g'``/``'e'`` (or 0/1) to the qubit index."""
    try:
        return _INTERNAL[s]
    except (KeyError, TypeError):
        raise InvalidArgument(f"internal state must be 'g' or 'e', got {s!r}") from None


@dataclass(frozen=True)
class HilbertSpec:
    cutoff_a: int
    cutoff_b: int

    def __post_init__(self):
        for name in ("cutoff_a", "cutoff_b"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise InvalidArgument(f"{name} must be an integer, got {value!r}")
            if value < 2:
                raise InvalidArgument(f"{name} must be >= 2, got {value}")

    @property
    def dim(self) -> int:
        return self.cutoff_a * self.cutoff_b * 2

    @property
    def bosonic_dim(self) -> int:
        return self.cutoff_a * self.cutoff_b

    def index(self, n_a: int, n_b: int, s=0) -> int:
        if not (0 <= n_a < self.cutoff_a and 0 <= n_b < self.cutoff_b):
            raise InvalidArgument(
                f"Fock numbers ({n_a}, {n_b}) outside cutoffs ({self.cutoff_a}, {self.cutoff_b})"
            )
        return (n_a * self.cutoff_b + n_b) * 2 + internal_index(s)

    def labels(self, index: int) -> tuple[int, int, int]:
        """Inverse of :meth:`index`: ``(n_a, n_b, s)``."""
        if not 0 <= index < self.dim:
            raise InvalidArgument(f"basis index {index} outside dimension {self.dim}")
        rest, s = divmod(index, 2)
        n_a, n_b = divmod(rest, self.cutoff_b)
        return n_a, n_b, s


def make_space(cutoff_a: int, cutoff_b: int) -> HilbertSpec:
    return HilbertSpec(cutoff_a, cutoff_b)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state on the composite space.

    ``truncation_mass`` is filled in by routines that measured population in
    the top Fock levels (e.g. time evolution); ``None`` means not measured.
    """

    spec: HilbertSpec
    amplitudes: np.ndarray
    truncation_mass: float | None = None

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != self.spec.dim:
            raise InvalidArgument(f"expected {self.spec.dim} amplitudes, got {amps.shape[0]}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise InvalidArgument("cannot normalize the zero vector")
        return StateVector(self.spec, self.amplitudes / nrm, self.truncation_mass)

    def amplitude(self, n_a: int, n_b: int, s) -> complex:
        return complex(self.amplitudes[self.spec.index(n_a, n_b, s)])

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to ``(cutoff_a, cutoff_b, 2)``."""
        return self.amplitudes.reshape(self.spec.cutoff_a, self.spec.cutoff_b, 2)

    def branch(self, s) -> np.ndarray:
        """Unnormalized bosonic amplitudes ``(cutoff_a, cutoff_b)`` of the ``s`` sector."""
        return self.tensor()[:, :, internal_index(s)].copy()

    def vdot(self, other: "StateVector") -> complex:
        if other.spec != self.spec:
            raise InvalidArgument("states live on different Hilbert spaces")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __add__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        if other.spec != self.spec:
            raise InvalidArgument("states live on different Hilbert spaces")
        return StateVector(self.spec, self.amplitudes + other.amplitudes)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return StateVector(self.spec, scalar * self.amplitudes)

    __rmul__ = __mul__

    @classmethod
    def from_factors(cls, spec: HilbertSpec, bosonic, internal) -> "StateVector":
        """Product of a bosonic ``(cutoff_a, cutoff_b)`` array and a qubit 2-vector."""
        bosonic = np.asarray(bosonic, dtype=np.complex128).reshape(spec.cutoff_a, spec.cutoff_b)
        internal = np.asarray(internal, dtype=np.complex128).reshape(2)
        return cls(spec, np.multiply.outer(bosonic, internal).reshape(-1))


def fock_state(spec: HilbertSpec, n_a: int, n_b: int, s="g") -> StateVector:
    amps = np.zeros(spec.dim, dtype=np.complex128)
    amps[spec.index(n_a, n_b, s)] = 1.0
    return StateVector(spec, amps)


@dataclass(frozen=True, eq=False)
class Operator:
    spec: HilbertSpec
    matrix: sp.csr_matrix
    hermitian: bool = False

    def __post_init__(self):
        mat = sp.csr_matrix(self.matrix, dtype=np.complex128)
        if mat.shape != (self.spec.dim, self.spec.dim):
            raise InvalidArgument(f"operator shape {mat.shape} does not match dimension {self.spec.dim}")
        mat.sort_indices()
        object.__setattr__(self, "matrix", mat)
        if self.hermitian:
            err = self.hermiticity_error()
            if err >= HERMITIAN_ATOL:
                raise InternalError(f"operator flagged Hermitian but max|H - H^dag| = {err:.3e}")

    def hermiticity_error(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0

    def dag(self) -> "Operator":
        return Operator(self.spec, self.matrix.conj().T.tocsr(), self.hermitian)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def element(self, bra, ket) -> complex:
        """``<bra| O |ket>`` for basis labels ``(n_a, n_b, s)``."""
        return complex(self.matrix[self.spec.index(*bra), self.spec.index(*ket)])

    def expect(self, state: StateVector) -> complex:
        return complex(np.vdot(state.amplitudes, self.matrix @ state.amplitudes))

    def norm1(self) -> float:
        """Max absolute column sum; an upper bound on the spectral norm for Hermitian O."""
        if self.matrix.nnz == 0:
            return 0.0
        return float(abs(self.matrix).sum(axis=0).max())

    def _check(self, other):
        if other.spec != self.spec:
            raise InvalidArgument("operators live on different Hilbert spaces")

    def __matmul__(self, other):
        if isinstance(other, StateVector):
            if other.spec != self.spec:
                raise InvalidArgument("operator and state live on different Hilbert spaces")
            return StateVector(self.spec, self.matrix @ other.amplitudes)
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.spec, self.matrix @ other.matrix)
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        self._check(other)
        return Operator(self.spec, self.matrix + other.matrix)

    def __sub__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        self._check(other)
        return Operator(self.spec, self.matrix - other.matrix)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return Operator(self.spec, scalar * self.matrix)

    __rmul__ = __mul__


def commutator(x: Operator, y: Operator) -> Operator:
    return x @ y - y @ x


class ModeOperators(NamedTuple):
    a: Operator
    a_dag: Operator
    b: Operator
    b_dag: Operator
    sigma_plus: Operator
    sigma_minus: Operator
    sigma_z: Operator


def annihilation(cutoff: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, cutoff, dtype=float)), 1, shape=(cutoff, cutoff), format="csr", dtype=np.complex128)


@functools.lru_cache(maxsize=32)
def make_mode_operators(spec: HilbertSpec) -> ModeOperators:
    eye_a = sp.identity(spec.cutoff_a, format="csr")
    eye_b = sp.identity(spec.cutoff_b, format="csr")
    eye_q = sp.identity(2, format="csr")
    a1 = annihilation(spec.cutoff_a)
    b1 = annihilation(spec.cutoff_b)
    # qubit basis (g, e): sigma_minus = |g><e|
    sm = sp.csr_matrix(np.array([[0, 1], [0, 0]], dtype=np.complex128))
    sz = sp.csr_matrix(np.diag([-1.0, 1.0]).astype(np.complex128))

    def lift(op_a, op_b, op_q):
        return sp.kron(sp.kron(op_a, op_b), op_q, format="csr")

    a = lift(a1, eye_b, eye_q)
    b = lift(eye_a, b1, eye_q)
    sigma_minus = lift(eye_a, eye_b, sm)
    return ModeOperators(
        a=Operator(spec, a),
        a_dag=Operator(spec, a.conj().T),
        b=Operator(spec, b),
        b_dag=Operator(spec, b.conj().T),
        sigma_plus=Operator(spec, sigma_minus.conj().T),
        sigma_minus=Operator(spec, sigma_minus),
        sigma_z=Operator(spec, lift(eye_a, eye_b, sz), hermitian=True),
    )


@functools.lru_cache(maxsize=32)
def two_mode_ladders(spec: HilbertSpec) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Annihilators ``a``, ``b`` on the bosonic factor alone (dimension cutoff_a*cutoff_b)."""
    a = sp.kron(annihilation(spec.cutoff_a), sp.identity(spec.cutoff_b), format="csr")
    b = sp.kron(sp.identity(spec.cutoff_a), annihilation(spec.cutoff_b), format="csr")
    return a, b


@dataclass(frozen=True)
class PhysicalParams:
    """Physical constants of the ion-cavity system (angular frequencies).

    ``omega1``/``omega2``/``omega3`` override the effective coupling strengths
    derived from the physical constants.
    """

    nu: float
    delta_cA: float
    Delta_oA: float
    g0: float
    epsilon_A: float
    eta: float
    phi_A: float = math.pi / 2
    omega1: float | None = None
    omega2: float | None = None
    omega3: float | None = None

    def __post_init__(self):
        if not self.eta > 0:
            raise InvalidArgument(f"Lamb-Dicke parameter must be positive, got {self.eta}")
        for name in ("nu", "delta_cA", "Delta_oA", "g0", "epsilon_A", "eta", "phi_A"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgument(f"{name} must be finite")

    @classmethod
    def effective(cls, omega1=1.0, omega2=1.0, omega3=1.0) -> "PhysicalParams":
        """Parameters for running the effective models directly in units of the couplings."""
        return cls(nu=1.0, delta_cA=1.0, Delta_oA=100.0, g0=1.0, epsilon_A=1.0, eta=0.1,
                   omega1=omega1, omega2=omega2, omega3=omega3)

    @property
    def E_A(self) -> complex:
        return self.epsilon_A * complex(math.cos(self.phi_A), -math.sin(self.phi_A))

    @property
    def Omega1(self) -> float:
        if self.omega1 is not None:
            return float(self.omega1)
        self.check_adiabatic()
        return self.g0 * self.epsilon_A * self.eta / self.Delta_oA

    @property
    def Omega2(self) -> float:
        if self.omega2 is not None:
            return float(self.omega2)
        self.check_adiabatic()
        return self.g0 * self.epsilon_A * self.eta / self.Delta_oA

    @property
    def Omega3(self) -> float:
        if self.omega3 is not None:
            return float(self.omega3)
        return self.g0 * self.eta

    def check_adiabatic(self) -> bool:
        """Warn (and return False) unless the laser detuning dominates every other scale."""
        scales = (abs(self.nu), abs(self.delta_cA), abs(self.g0), abs(self.epsilon_A))
        ok = abs(self.Delta_oA) > max(scales)
        if not ok:
            warnings.warn(
                f"Delta_oA={self.Delta_oA} does not exceed nu, delta_cA, g0, epsilon_A; "
                "adiabatic elimination is not justified",
                stacklevel=3,
            )
        return ok


class Model(enum.Enum):
    FULL = "full"
    ELIMINATED = "eliminated"
    BEAM_SPLITTER = "beam_splitter"
    SQUEEZE = "squeeze"
    PHASE_GATE = "phase_gate"


def build_hamiltonian(spec: HilbertSpec, params: PhysicalParams, model) -> Operator:
    """Build one of the system Hamiltonians as a Hermitian :class:`Operator`.

    FULL and ELIMINATED use the Lamb-Dicke linearization
    ``sin(eta (b^dag + b)) -> eta (b^dag + b)``.
    """
    model = Model(model)
    ops = make_mode_operators(spec)
    a, ad, b, bd = (o.matrix for o in (ops.a, ops.a_dag, ops.b, ops.b_dag))
    sp_, sm, sz = ops.sigma_plus.matrix, ops.sigma_minus.matrix, ops.sigma_z.matrix

    if model in (Model.FULL, Model.ELIMINATED) and params.eta >= 1:
        raise InvalidArgument(f"Lamb-Dicke linearization needs eta < 1, got {params.eta}")

    if model is Model.FULL:
        x = params.eta * (bd + b)
        # E_A sigma_+ + h.c. keeps the drive Hermitian for any phase
        H = (params.nu * (bd @ b) + params.delta_cA * (ad @ a) + params.Delta_oA * (sp_ @ sm)
             + params.E_A * sp_ + np.conj(params.E_A) * sm
             + params.g0 * (x @ (ad @ sm + a @ sp_)))
    elif model is Model.ELIMINATED:
        params.check_adiabatic()
        x = params.eta * (bd + b)
        stark = (params.g0 ** 2 / params.Delta_oA) * (x @ x @ ad @ a @ sz)
        phase = complex(math.cos(params.phi_A), -math.sin(params.phi_A))
        drive = (params.g0 * params.epsilon_A / params.Delta_oA) * (
            x @ (phase * ad + np.conj(phase) * a) @ sz)
        H = params.nu * (bd @ b) + params.delta_cA * (ad @ a) - stark - drive
    elif model is Model.BEAM_SPLITTER:
        H = 1j * params.Omega1 * ((ad @ b - a @ bd) @ sz)
    elif model is Model.SQUEEZE:
        H = 1j * params.Omega2 * ((a @ b - ad @ bd) @ sz)
    else:
        H = params.Omega3 * (a @ b @ sp_ + ad @ bd @ sm)

    H = sp.csr_matrix(H, dtype=np.complex128)
    H.eliminate_zeros()
    return Operator(spec, H, hermitian=True)

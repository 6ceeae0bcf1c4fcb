import math
import warnings

import numpy as np
import pytest

from cavion import protocols
from cavion.core import Model, PhysicalParams, StateVector, build_hamiltonian, fock_state, make_space
from cavion.errors import EmptyBranchError, InvalidArgument
from cavion.evolution import EvolutionRequest, evolve
from cavion.protocols import (
    carrier_pi2_pulse,
    gate_input_state,
    measure_internal,
    run_entangled_coherent,
    run_phase_gate,
    run_squeezed_cat,
    run_su2_cat,
    validate_rwa,
)
from cavion.targets import Variant, fock_pair

from conftest import random_state

# ratio-100 value of validate_rwa for |0,1>(|g>+|e>)/sqrt2, Omega1 t = pi/4, cutoff 12,
# recorded on the first implementation (both kernel backends agree to all digits)
RWA_FLOOR_100 = 0.9998986061926


def test_pi2_pulse_examples(small):
    out = carrier_pi2_pulse(fock_state(small, 0, 0, "e"))
    assert out.amplitude(0, 0, "g") == pytest.approx(1 / math.sqrt(2))
    assert out.amplitude(0, 0, "e") == pytest.approx(1 / math.sqrt(2))
    out = carrier_pi2_pulse(fock_state(small, 0, 0, "g"))
    assert out.amplitude(0, 0, "g") == pytest.approx(1 / math.sqrt(2))
    assert out.amplitude(0, 0, "e") == pytest.approx(-1 / math.sqrt(2))


def test_pi2_pulse_twice_is_pi_rotation_and_unitary():
    spec = make_space(2, 3)
    U = np.column_stack([carrier_pi2_pulse(StateVector(spec, np.eye(spec.dim)[j])).amplitudes for j in range(spec.dim)])
    assert np.abs(U.conj().T @ U - np.eye(spec.dim)).max() < 1e-14
    twice = carrier_pi2_pulse(carrier_pi2_pulse(fock_state(spec, 1, 2, "e")))
    assert twice.amplitude(1, 2, "g") == pytest.approx(1)
    twice = carrier_pi2_pulse(carrier_pi2_pulse(fock_state(spec, 1, 2, "g")))
    assert twice.amplitude(1, 2, "e") == pytest.approx(-1)


def test_measure_internal(small):
    psi = carrier_pi2_pulse(fock_state(small, 0, 0, "e"))
    out = measure_internal(psi, "g")
    assert out.probability == pytest.approx(0.5)
    assert abs(out.post_state.amplitudes[0, 0]) == pytest.approx(1)
    with pytest.raises(EmptyBranchError):
        measure_internal(fock_state(small, 0, 1, "e"), "g")
    with pytest.raises(InvalidArgument):
        measure_internal(2.0 * fock_state(small, 0, 1, "e"), "e")


def test_measure_completeness(small, rng):
    psi = random_state(small, rng)
    total = measure_internal(psi, "g").probability + measure_internal(psi, "e").probability
    assert total == pytest.approx(1, abs=1e-12)


def test_branch_probability_from_overlap():
    # P(g) = ||Phi_+||^2 / 4 with ||Phi_+||^2 = 2 + 2 Re <psi|U^2|psi>, U^2 from the simulator itself
    spec = make_space(6, 6)
    theta = math.pi / 4
    params = PhysicalParams.effective()
    H = build_hamiltonian(spec, params, Model.BEAM_SPLITTER)
    psi = fock_state(spec, 0, 1, "e")
    u2 = evolve(EvolutionRequest(H, 2 * theta, psi)).vdot(psi).conjugate()
    outcomes = run_su2_cat(1, theta, spec)
    assert outcomes["g"].probability == pytest.approx((2 + 2 * u2.real) / 4, abs=1e-12)


def test_su2_cat_without_rotation():
    spec = make_space(5, 5)
    out = run_su2_cat(2, 0.0, spec)
    assert out["g"].probability == pytest.approx(1)
    assert abs(out["g"].post_state.amplitudes[0, 2]) == pytest.approx(1)
    assert out["e"].empty and out["e"].probability < 1e-14


@pytest.mark.parametrize("n, theta", [(1, math.pi / 4), (2, 0.3), (5, 0.3), (3, 1.2)])
def test_su2_cat_branches(n, theta):
    out = run_su2_cat(n, theta, make_space(8, 8), PhysicalParams.effective(omega1=0.6))
    assert out["g"].probability + out["e"].probability == pytest.approx(1, abs=1e-10)
    for o in out.values():
        assert o.target_fidelity >= 1 - 1e-9
        assert o.post_state.norm() == pytest.approx(1, abs=1e-12)
        assert o.probability == pytest.approx(o.diagnostics["target_norm_sq"] / 4, abs=1e-10)


def test_su2_cat_frozen_probability():
    out = run_su2_cat(5, 0.3, make_space(8, 8))
    # (2 + 2 cos^5(0.6)) / 4
    assert out["g"].probability == pytest.approx(0.69147978684471571, abs=1e-12)


def test_entangled_coherent_vacuum():
    out = run_entangled_coherent(0, 0, Variant.HALF_ANGLE, make_space(6, 6))
    assert out["g"].probability == pytest.approx(1)
    assert out["e"].empty


@pytest.mark.parametrize("variant", list(Variant))
def test_entangled_coherent_branches(variant):
    out = run_entangled_coherent(0.8, 0.4j, variant, make_space(25, 25))
    for o in out.values():
        assert o.target_fidelity >= 1 - 1e-6
    assert out["g"].probability + out["e"].probability == pytest.approx(1, abs=1e-10)


def test_entangled_coherent_budget():
    with pytest.raises(InvalidArgument):
        run_entangled_coherent(0.8, 0.4j, Variant.FULL_SWAP, make_space(6, 6))


def test_squeezed_cat_without_squeezing():
    out = run_squeezed_cat(0.0, make_space(10, 10))
    assert out["g"].probability == pytest.approx(1)
    assert out["e"].empty


def test_squeezed_cat_parities_and_probabilities():
    out = run_squeezed_cat(0.5, make_space(40, 40))
    n = np.arange(40)
    dg = np.abs(np.diag(out["g"].post_state.amplitudes)) ** 2
    de = np.abs(np.diag(out["e"].post_state.amplitudes)) ** 2
    assert dg[n % 2 == 1].sum() < 1e-12 and de[n % 2 == 0].sum() < 1e-12
    # P(g) - P(e) = <0,0|S(2r)|0,0> = 1/cosh(2r)
    assert out["g"].probability - out["e"].probability == pytest.approx(1 / math.cosh(1.0), abs=1e-12)
    for o in out.values():
        assert o.target_fidelity >= 1 - 1e-7


def test_phase_gate_truth_table():
    res = run_phase_gate(make_space(2, 2))
    np.testing.assert_allclose(res.truth_table.matrix, np.diag([1, 1, 1, -1]), atol=1e-12)
    assert res.truth_table.max_offdiag() < 1e-12
    assert res.truth_table.unitarity_error() < 1e-12
    assert np.abs(res.truth_table.leakage()).max() < 1e-12
    assert res.state is None


def test_phase_gate_superposition_and_params():
    spec = make_space(3, 3)
    res = run_phase_gate(spec, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)], PhysicalParams.effective(omega3=2.5))
    expect = gate_input_state(spec, [1 / math.sqrt(2), 0, 0, -1 / math.sqrt(2)])
    assert np.abs(res.state.amplitudes - expect.amplitudes).max() < 1e-12


def test_phase_gate_half_pulse_transfers_population():
    spec = make_space(3, 3)
    res = run_phase_gate(spec, fock_state(spec, 1, 1, "g"), angle=math.pi / 2)
    assert abs(res.state.amplitude(0, 0, "e")) ** 2 == pytest.approx(1, abs=1e-12)


def test_pipeline_is_linear_before_measurement():
    spec = make_space(8, 8)
    H = build_hamiltonian(spec, PhysicalParams.effective(), Model.BEAM_SPLITTER)

    def stage(psi):
        return carrier_pi2_pulse(evolve(EvolutionRequest(H, 0.4, psi)))

    x, y = fock_pair(spec, 0, 2).embed("e"), fock_pair(spec, 1, 1).embed("g")
    c1, c2 = 0.6, 0.8j
    lhs = stage(c1 * x + c2 * y)
    rhs = c1 * stage(x) + c2 * stage(y)
    assert np.abs(lhs.amplitudes - rhs.amplitudes).max() < 1e-10


def test_rwa_requires_ratio_above_one():
    with pytest.raises(InvalidArgument):
        validate_rwa(0, 0, 0.5, 1.0, make_space(6, 6))


def test_rwa_ladder_and_floor():
    spec = make_space(12, 12)
    bos = fock_pair(spec, 0, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fids = [validate_rwa(0, 0, r, math.pi / 4, spec, bosonic=bos) for r in (10, 30, 100)]
    assert fids[0] < fids[1] < fids[2] < 1
    assert fids[2] >= RWA_FLOOR_100


def test_rwa_with_coherent_input():
    spec = make_space(14, 14)
    f10 = validate_rwa(0.5, 0.3j, 10, math.pi / 4, spec)
    f40 = validate_rwa(0.5, 0.3j, 40, math.pi / 4, spec)
    assert f10 < f40 < 1


def test_rwa_params_regime():
    p = protocols.rwa_params(30)
    assert p.Omega1 == pytest.approx(1)
    assert p.nu == p.delta_cA == 30
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert p.check_adiabatic()


def test_full_model_comparison_runs():
    spec = make_space(12, 12)
    f = protocols.compare_full_model(0, 0, 10, math.pi / 4, spec, bosonic=fock_pair(spec, 0, 1))
    assert 0 <= f <= 1 + 1e-12

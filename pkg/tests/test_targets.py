import math

import numpy as np
import pytest

from cavion.core import Model, PhysicalParams, build_hamiltonian, make_space
from cavion.errors import DegenerateStateError, InvalidArgument
from cavion.evolution import EvolutionRequest, evolve
from cavion.targets import (
    Variant,
    align_phase,
    coherent_overlap,
    coherent_pair,
    coherent_state,
    entangled_coherent_pair,
    fock_pair,
    su2_cat,
    su2_coherent_state,
    su2_zeta,
    squeezed_cat,
    two_mode_squeezed_vacuum,
)


def binomial_su2(spec, xi, n):
    """Closed-form two-mode binomial state: sqrt(C(n,k)) cos^{n-k}|xi| sin^k|xi| e^{ik arg xi} |k, n-k>."""
    out = np.zeros((spec.cutoff_a, spec.cutoff_b), dtype=complex)
    r, phi = abs(xi), np.angle(xi)
    for k in range(n + 1):
        out[k, n - k] = math.sqrt(math.comb(n, k)) * math.cos(r) ** (n - k) * math.sin(r) ** k * np.exp(1j * k * phi)
    return out


def test_coherent_vacuum():
    amps = coherent_state(make_space(6, 6), 0, "a")
    np.testing.assert_array_equal(amps, np.eye(6)[0])


def test_coherent_mean_occupation():
    amps = coherent_state(make_space(25, 25), 1.0, "b")
    assert np.sum(np.arange(25) * np.abs(amps) ** 2) == pytest.approx(1.0, abs=1e-10)


def test_coherent_vacuum_weight():
    amps = coherent_state(make_space(20, 20), 0.8, "a")
    assert abs(amps[0]) ** 2 == pytest.approx(0.52729242404304855, abs=1e-12)


def test_coherent_budget_error_suggests_cutoff():
    with pytest.raises(InvalidArgument, match="need cutoff >= 12"):
        coherent_state(make_space(5, 5), 0.8, "a")
    with pytest.raises(InvalidArgument):
        coherent_state(make_space(5, 5), 0.1, "c")


def test_coherent_overlap_matches_truncated_vectors():
    spec = make_space(30, 30)
    g, d = 0.7 - 0.2j, -0.3 + 0.5j
    num = np.vdot(coherent_state(spec, g, "a"), coherent_state(spec, d, "a"))
    assert num == pytest.approx(coherent_overlap(g, d), abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_su2_coherent_identity(n):
    spec = make_space(8, 8)
    np.testing.assert_allclose(su2_coherent_state(spec, 0, n).amplitudes, fock_pair(spec, 0, n).amplitudes, atol=1e-15)


def test_su2_coherent_quarter_turn_swaps_modes():
    spec = make_space(3, 3)
    st = su2_coherent_state(spec, math.pi / 2, 1)
    assert abs(st.amplitudes[1, 0]) == pytest.approx(1, abs=1e-14)


def test_su2_coherent_n2_magnitudes():
    st = su2_coherent_state(make_space(4, 4), math.pi / 4, 2)
    mags = [abs(st.amplitudes[0, 2]), abs(st.amplitudes[1, 1]), abs(st.amplitudes[2, 0])]
    np.testing.assert_allclose(mags, [0.5, 1 / math.sqrt(2), 0.5], atol=1e-14)


@pytest.mark.parametrize("xi", [0.1, math.pi / 4, 1.0, 0.6 * np.exp(0.9j)])
@pytest.mark.parametrize("n", [1, 2, 5])
def test_su2_coherent_matches_binomial(xi, n):
    spec = make_space(8, 7)
    np.testing.assert_allclose(su2_coherent_state(spec, xi, n).amplitudes, binomial_su2(spec, xi, n), atol=1e-13)


def test_su2_stereographic_label_is_tan_of_full_angle():
    # successive binomial weights c_{k+1}/c_k scale with tan(theta), not tan(theta/2)
    spec = make_space(4, 4)
    theta = 0.7
    st = su2_coherent_state(spec, theta, 1)
    ratio = st.amplitudes[1, 0] / st.amplitudes[0, 1]
    assert ratio == pytest.approx(su2_zeta(theta))
    assert ratio == pytest.approx(math.tan(theta))
    assert abs(ratio - math.tan(theta / 2)) > 0.4


@pytest.mark.parametrize("theta", [0.1, math.pi / 4, 1.0])
@pytest.mark.parametrize("n", [1, 2, 5])
def test_su2_coherent_matches_beam_splitter_sector(theta, n):
    spec = make_space(7, 7)
    p = PhysicalParams.effective(omega1=1.0)
    out = evolve(EvolutionRequest(build_hamiltonian(spec, p, Model.BEAM_SPLITTER), theta, fock_pair(spec, 0, n).embed("e")))
    target = su2_coherent_state(spec, theta, n)
    assert abs(np.vdot(target.flat, out.branch("e").reshape(-1))) ** 2 >= 1 - 1e-10


def test_su2_range_check():
    with pytest.raises(InvalidArgument):
        su2_coherent_state(make_space(4, 6), 0.2, 4)


def test_su2_cat_identity_and_degenerate():
    spec = make_space(5, 5)
    plus = su2_cat(spec, 0.0, 3, "+")
    np.testing.assert_allclose(plus.amplitudes, fock_pair(spec, 0, 3).amplitudes, atol=1e-15)
    assert plus.norm_sq == pytest.approx(4.0)
    with pytest.raises(DegenerateStateError):
        su2_cat(spec, 0.0, 3, "-")


def test_su2_cat_single_excitation_odd():
    spec = make_space(3, 3)
    theta = math.pi / 4
    cat = su2_cat(spec, theta, 1, "-")
    assert abs(cat.amplitudes[1, 0]) == pytest.approx(1, abs=1e-14)
    assert cat.norm_sq == pytest.approx(4 * math.sin(theta) ** 2)


@pytest.mark.parametrize("n", [1, 2, 5])
@pytest.mark.parametrize("theta", [0.3, math.pi / 4, 1.1])
def test_su2_cats_orthogonal_and_norms(n, theta):
    spec = make_space(7, 7)
    plus, minus = su2_cat(spec, theta, n, "+"), su2_cat(spec, theta, n, "-")
    assert abs(plus.vdot(minus)) < 1e-10
    # |e^G + e^-G|^2 + |e^G - e^-G|^2 = 4
    assert plus.norm_sq + minus.norm_sq == pytest.approx(4.0, abs=1e-12)
    # <0,n| e^{2G} |0,n> = cos^n(2 theta)
    assert plus.norm_sq == pytest.approx(2 + 2 * math.cos(2 * theta) ** n, abs=1e-12)


def test_entangled_coherent_vacuum_and_degenerate():
    spec = make_space(6, 6)
    for v in Variant:
        st = entangled_coherent_pair(spec, 0, 0, v, "+")
        assert abs(st.amplitudes[0, 0]) == pytest.approx(1)
        with pytest.raises(DegenerateStateError):
            entangled_coherent_pair(spec, 0, 0, v, "-")


def test_entangled_coherent_norm_full_swap():
    spec = make_space(25, 25)
    st = entangled_coherent_pair(spec, 0.8, 0.4j, Variant.FULL_SWAP, "-")
    assert st.norm_sq == pytest.approx(1.5962069640106892, abs=1e-13)
    assert st.norm() == pytest.approx(1, abs=1e-14)


@pytest.mark.parametrize("variant", list(Variant))
@pytest.mark.parametrize("parity", ["+", "-"])
def test_entangled_coherent_norm_matches_vector(variant, parity):
    spec = make_space(25, 25)
    a, b = 0.8, 0.4j
    from cavion.targets import entangled_coherent_components
    (g1, d1), (g2, d2) = entangled_coherent_components(a, b, variant)
    s = 1 if parity == "+" else -1
    raw = coherent_pair(spec, g1, d1).amplitudes + s * coherent_pair(spec, g2, d2).amplitudes
    st = entangled_coherent_pair(spec, a, b, variant, parity)
    assert st.norm_sq == pytest.approx(np.vdot(raw, raw).real, abs=1e-9)


def test_two_mode_squeezed_vacuum_closed_form():
    spec = make_space(40, 40)
    st = two_mode_squeezed_vacuum(spec, 0.5)
    d = np.diag(st.amplitudes)
    assert abs(d[0]) ** 2 == pytest.approx(0.78644773296592741, abs=1e-14)
    np.testing.assert_allclose(np.abs(d[1:20] / d[:19]), math.tanh(0.5), rtol=1e-13)
    off = st.amplitudes - np.diag(d)
    assert np.abs(off).max() < 1e-14
    np.testing.assert_array_equal(two_mode_squeezed_vacuum(spec, 0).amplitudes, fock_pair(spec, 0, 0).amplitudes)


def test_squeezed_budget():
    with pytest.raises(InvalidArgument, match="need cutoff"):
        two_mode_squeezed_vacuum(make_space(8, 8), 0.75)


@pytest.mark.parametrize("r", [0.2, 0.5, 0.75])
def test_squeezed_vacuum_matches_evolution(r):
    # exp(-i H2 t) acts as exp[-r(a^dag b^dag - a b)] on the e sector, i.e. S(-r)
    spec = make_space(40, 40)
    p = PhysicalParams.effective(omega2=1.0)
    out = evolve(EvolutionRequest(build_hamiltonian(spec, p, Model.SQUEEZE), r, fock_pair(spec, 0, 0).embed("e")))
    e_sector = out.branch("e").reshape(-1)
    assert abs(np.vdot(two_mode_squeezed_vacuum(spec, -r).flat, e_sector)) ** 2 >= 1 - 1e-8
    g = evolve(EvolutionRequest(build_hamiltonian(spec, p, Model.SQUEEZE), r, fock_pair(spec, 0, 0).embed("g")))
    assert abs(np.vdot(two_mode_squeezed_vacuum(spec, r).flat, g.branch("g").reshape(-1))) ** 2 >= 1 - 1e-8


def test_squeezed_cat_parity_support():
    spec = make_space(40, 40)
    plus, minus = squeezed_cat(spec, 0.5, "+"), squeezed_cat(spec, 0.5, "-")
    n = np.arange(40)
    dp, dm = np.diag(plus.amplitudes), np.diag(minus.amplitudes)
    assert np.abs(dp[n % 2 == 1]).max() < 1e-15
    assert np.abs(dm[n % 2 == 0]).max() < 1e-15
    assert abs(plus.vdot(minus)) < 1e-10
    assert plus.norm_sq == pytest.approx(2 + 2 / math.cosh(1.0))


def test_squeezed_cat_zero():
    spec = make_space(10, 10)
    assert abs(squeezed_cat(spec, 0.0, "+").amplitudes[0, 0]) == pytest.approx(1)
    with pytest.raises(DegenerateStateError):
        squeezed_cat(spec, 0.0, "-")


def test_align_phase():
    v = np.array([0, 1e-20, -2j, 1 + 1j])
    out = align_phase(v)
    assert out[2] == pytest.approx(2)
    assert abs(out[3]) == pytest.approx(abs(v[3]))
    cat = su2_cat(make_space(4, 4), 0.4, 2, "-").aligned()
    first = cat.flat[np.flatnonzero(np.abs(cat.flat) > 1e-12)[0]]
    assert first.imag == 0 and first.real > 0


def test_embed_places_internal_state():
    spec = make_space(3, 3)
    st = fock_pair(spec, 1, 2).embed("e")
    assert st.amplitude(1, 2, "e") == 1
    assert st.norm() == 1

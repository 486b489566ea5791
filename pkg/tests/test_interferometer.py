import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entop import interferometer as itf
from entop import operators as ops
from entop.errors import NotDiagonal, ZeroSuccess
from entop.metrics import concurrence, purity, state_fidelity
from entop.opalg import ket, projector

from conftest import random_ket, random_matrix

CFG = itf.TimeBinConfig()


def brute_force(amps, table, thetas, psi):
    # explicit sum over all joint arm choices; diagonal choices add coherently
    parties, arms = len(table), len(table[0])
    coherent = np.zeros(psi.size, complex)
    incoherent = 0.0
    for choice in itertools.product(range(arms), repeat=parties):
        a = 1.0 + 0j
        op = np.ones((1, 1))
        for j, k in enumerate(choice):
            a *= amps[j][k] * np.exp(1j * k * thetas[j])
            op = np.kron(op, table[j][k])
        out = a * (op @ psi)
        if len(set(choice)) == 1:
            coherent += out
        else:
            incoherent += np.vdot(out, out).real
    return coherent, incoherent


def bell_family(phi=0.0):
    return ops.build_superposition([(1, [ops.I, ops.I]), (np.exp(1j * phi), [ops.X, ops.X])])


ZZXX = ops.build_superposition([(1, [ops.Z, ops.Z]), (1, [ops.X, ops.X])])


def test_config_validation():
    with pytest.raises(ValueError):
        itf.TimeBinConfig(coincidence_window=7.0)
    with pytest.raises(ValueError):
        itf.TimeBinConfig(pulse_period=-1)
    with pytest.raises(ValueError):
        itf.TimeBinConfig(arm_count=0)


def test_amplitude_validation_and_defaults():
    with pytest.raises(ValueError):
        itf.ArmAmplitudes(((0.9, 0.9),))
    m = itf.ArmAmplitudes.default(2, 2)
    assert m.per_party == ((0.5, 0.5), (0.5, 0.5))
    assert np.isclose(m.transmitted_mass(), 0.25)
    b = itf.ArmAmplitudes.default(3, 2)
    assert np.isclose(b.transmitted_mass(), 1.0)


def test_noise_model_validation():
    with pytest.raises(ValueError):
        itf.PhaseNoiseModel((0.0, 0.0), (0.1,), source_count=2)
    with pytest.raises(ValueError):
        itf.PhaseNoiseModel((0.0,), (0.1, 0.1), source_count=2)
    with pytest.raises(ValueError):
        itf.PhaseNoiseModel((0.0, 0.0), (-0.1,))


def test_time_classes():
    assert itf.time_class([1, 1]) == 0
    assert itf.time_class([1, 2]) == 1
    assert itf.time_class([2, 1]) == -1
    assert itf.time_class([2, 2, 2]) == 0
    assert itf.time_class([1, 2, 1]) == (1, 0)
    outs = itf.enumerate_outcomes(CFG, 2)
    assert len(outs) == 4
    assert sum(1 for _, c in outs if c == 0) == 2


@pytest.mark.parametrize("phi", np.linspace(0, 2 * np.pi, 8, endpoint=False))
@pytest.mark.parametrize("op,label", [(ZZXX, "HH"), (ZZXX, "HV"), (bell_family(), "HH")])
def test_postselection_equals_operator_action(op, label, phi):
    s = op.with_relative_phase(phi)
    psi = ket(label)
    res = itf.simulate_scenario(s, psi, itf.PhaseNoiseModel.noiseless((0.0, 0.0)))
    out, weight = ops.apply_to_state(s, psi)
    assert np.allclose(res.state, projector(out), atol=1e-12)
    assert abs(res.success_probability - weight / 8) < 1e-12
    total = sum(res.outcome_breakdown.values()) + res.loss_probability
    assert abs(total - 1.0) < 1e-12


def test_phase_enters_through_first_party():
    psi = ket("HH")
    res = itf.simulate_scenario(bell_family(), psi, itf.PhaseNoiseModel.noiseless((0.7, 0.0)))
    assert np.isclose(state_fidelity(res.state, (ket("HH") + np.exp(0.7j) * ket("VV")) / np.sqrt(2)), 1.0)


def test_breakdown_for_michelson_bell():
    res = itf.simulate_scenario(bell_family(), ket("HH"), itf.PhaseNoiseModel.noiseless((0.0, 0.0)))
    assert res.outcome_breakdown == pytest.approx({-1: 1 / 16, 0: 1 / 8, 1: 1 / 16})
    assert res.loss_probability == pytest.approx(0.75)


@given(st.integers(0, 2**32 - 1), st.integers(2, 3), st.integers(1, 3))
def test_postselect_matches_brute_force(seed, arms, parties):
    rng = np.random.default_rng(seed)
    amps = [tuple(rng.uniform(0.05, 1 / np.sqrt(arms)) * np.exp(1j * rng.uniform(0, 6)) for _ in range(arms)) for _ in range(parties)]
    table = [[random_matrix(rng, 2) for _ in range(arms)] for _ in range(parties)]
    thetas = rng.uniform(0, 2 * np.pi, parties)
    psi = random_ket(rng, 2**parties)
    cfg = itf.TimeBinConfig(arm_count=arms)
    res = itf.postselect(cfg, itf.ArmAmplitudes(tuple(amps)), table, itf.PhaseNoiseModel.noiseless(thetas), psi)
    v, off = brute_force(amps, table, thetas, psi)
    assert np.allclose(res.unnormalized, np.outer(v, v.conj()), atol=1e-12)
    assert np.isclose(sum(p for c, p in res.outcome_breakdown.items() if c != 0), off)


def test_unequal_coefficients_are_realized_by_transmittance():
    s = ops.build_superposition([(0.8, [ops.Z, ops.Z]), (0.6j, [ops.X, ops.X])])
    res = itf.simulate_scenario(s, ket("HH"), itf.PhaseNoiseModel.noiseless((0.0, 0.0)))
    out, _ = ops.apply_to_state(s, ket("HH"))
    assert np.isclose(state_fidelity(res.state, out), 1.0)


def test_three_party_postselection():
    for s, target in [
        (ops.ghz_operator(), (ket("HHH") + ket("VVV")) / np.sqrt(2)),
        (ops.w_operator(), (ket("HHV") + ket("HVH") + ket("VHH")) / np.sqrt(3)),
    ]:
        res = itf.simulate_scenario(s, ket("HHH"), itf.PhaseNoiseModel.noiseless((0.0,) * 3))
        assert abs(state_fidelity(res.state, target) - 1) < 1e-12
        assert abs(sum(res.outcome_breakdown.values()) + res.loss_probability - 1) < 1e-12


def test_toffoli_postselection_flips_target():
    res = itf.simulate_scenario(ops.ccu(ops.X), ket("VVH"), itf.PhaseNoiseModel.noiseless((0.0,) * 3))
    assert np.isclose(state_fidelity(res.state, ket("VVV")), 1.0)


def test_zero_success_raises():
    with pytest.raises(ZeroSuccess):
        itf.simulate_scenario(ops.entanglement_filter(), ket("HV"), itf.PhaseNoiseModel.noiseless((0.0, 0.0)))


def analytic_fidelity(sigma):
    return (1 + np.exp(-sigma**2 / 2)) / 2


@pytest.mark.parametrize("sigma", [0.0, 0.25, 0.5, 1.0, 1.5])
def test_analytic_dephasing_closed_form(sigma):
    target = (ket("HH") + ket("VV")) / np.sqrt(2)
    res = itf.simulate_scenario(bell_family(), ket("HH"), itf.PhaseNoiseModel((0.0, 0.0), (sigma,)))
    assert np.isclose(state_fidelity(res.state, target), analytic_fidelity(sigma), atol=1e-12)
    assert np.isclose(concurrence(res.state), np.exp(-sigma**2 / 2), atol=1e-9)
    expected = np.zeros((4, 4), complex)
    expected[0, 0] = expected[3, 3] = 0.5
    expected[0, 3] = expected[3, 0] = 0.5 * np.exp(-sigma**2 / 2)
    assert np.allclose(res.state, expected, atol=1e-12)


@pytest.mark.parametrize("sigma", [0.25, 0.75, 1.5])
def test_sampled_noise_within_three_standard_errors(sigma):
    shots = 4000
    target = (ket("HH") + ket("VV")) / np.sqrt(2)
    res = itf.simulate_scenario(bell_family(), ket("HH"), itf.PhaseNoiseModel((0.0, 0.0), (sigma,)), analytic=False, shots=shots, seed=5)
    var = 0.25 * ((1 + np.exp(-2 * sigma**2)) / 2 - np.exp(-sigma**2))
    se = np.sqrt(var / shots)
    assert abs(state_fidelity(res.state, target) - analytic_fidelity(sigma)) < 3 * se
    assert abs(concurrence(res.state) - np.exp(-sigma**2 / 2)) < 6 * se


def test_sampled_noise_is_seeded():
    noise = itf.PhaseNoiseModel((0.0, 0.0), (0.8,))
    a = itf.simulate_scenario(bell_family(), ket("HH"), noise, analytic=False, shots=200, seed=1)
    b = itf.simulate_scenario(bell_family(), ket("HH"), noise, analytic=False, shots=200, seed=1)
    assert np.array_equal(a.state, b.state)


def test_analytic_three_arm_against_dense_quadrature():
    s = ops.build_superposition([(1, [ops.I, ops.I]), (1, [ops.X, ops.X]), (1, [ops.Z, ops.Y])])
    psi = np.kron(ket("H"), np.array([1, 1]) / np.sqrt(2))
    sigma = 0.6
    res = itf.simulate_scenario(s, psi, itf.PhaseNoiseModel((0.3, 0.0), (sigma,)))
    # Gauss-Hermite average of the unnormalized output as an oracle
    x, w = np.polynomial.hermite_e.hermegauss(60)
    branches, amps, offsets = itf.branches_from_superposition(s)
    sel = itf.PostSelector(itf.TimeBinConfig(arm_count=3), amps, branches, psi, offsets)
    acc = sum(wi * sel(np.array([0.3 + sigma * xi, 0.0])).unnormalized for xi, wi in zip(x, w)) / w.sum()
    assert np.allclose(res.unnormalized, acc, atol=1e-12)


def test_two_sources_equal_one_source_with_summed_variance():
    psi = ket("HH")
    two = itf.simulate_scenario(ZZXX, psi, itf.PhaseNoiseModel((0.4, 0.0), (0.3, 0.5), source_count=2))
    one = itf.simulate_scenario(ZZXX, psi, itf.PhaseNoiseModel((0.4, 0.0), (np.hypot(0.3, 0.5),)))
    assert np.allclose(two.state, one.state, atol=1e-12)


@pytest.mark.parametrize("sigma", [0.2, 0.6, 1.0])
def test_two_sources_degrade_at_least_as_much(sigma):
    psi = ket("HH")
    out, _ = ops.apply_to_state(ZZXX, psi)
    one = itf.simulate_scenario(ZZXX, psi, itf.PhaseNoiseModel((0.0, 0.0), (sigma,)))
    two = itf.simulate_scenario(ZZXX, psi, itf.PhaseNoiseModel((0.0, 0.0), (sigma, sigma), source_count=2))
    assert state_fidelity(two.state, out) <= state_fidelity(one.state, out) + 1e-12
    assert purity(two.state) <= purity(one.state) + 1e-12
    assert concurrence(two.state) <= concurrence(one.state) + 1e-12


@given(st.floats(0, 2.5), st.floats(0, 2.5))
def test_fidelity_monotone_in_sigma(s1, s2):
    lo, hi = sorted((s1, s2))
    psi = ket("HH")
    out, _ = ops.apply_to_state(ZZXX, psi)
    f = lambda s: state_fidelity(itf.simulate_scenario(ZZXX, psi, itf.PhaseNoiseModel((0.0, 0.0), (s,))).state, out)
    assert f(hi) <= f(lo) + 1e-12


def test_waveplate_phase_control():
    assert np.isclose(itf.waveplate_phase_control(0.0), np.pi)
    alphas = np.linspace(0, np.pi, 50, endpoint=False)
    phases = np.array([itf.waveplate_phase_control(a) for a in alphas])
    diff = np.mod(phases - phases[0] - 4 * alphas + np.pi, 2 * np.pi) - np.pi
    assert np.max(np.abs(diff)) < 1e-9
    # finite-difference slope of the unwrapped phase is 4
    h = 1e-6
    slope = (np.angle(np.exp(1j * (itf.waveplate_phase_control(0.3 + h) - itf.waveplate_phase_control(0.3 - h))))) / (2 * h)
    assert np.isclose(slope, 4.0, atol=1e-5)


def test_waveplate_not_diagonal_tolerance():
    with pytest.raises(NotDiagonal):
        itf.waveplate_phase_control(0.3, tol=-1.0)

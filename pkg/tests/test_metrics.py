import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entop import metrics
from entop.errors import BasisMismatch, WrongDimension
from entop.opalg import ket, projector
from entop.tomography import ProcessMatrix

from conftest import random_density, random_ket, random_unitary

BELL = (ket("00") + ket("11")) / np.sqrt(2)
YY = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])


def concurrence_oracle(rho):
    # eigenvalues of the non-Hermitian product rho * rho~
    r = rho @ YY @ rho.conj() @ YY
    lam = np.sort(np.sqrt(np.abs(np.linalg.eigvals(r).real)))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def werner(p):
    return p * projector(BELL) + (1 - p) * np.eye(4) / 4


def test_state_fidelity_examples():
    assert np.isclose(metrics.state_fidelity(projector(BELL), BELL), 1.0)
    assert np.isclose(metrics.state_fidelity(np.eye(4) / 4, BELL), 0.25)
    assert np.isclose(metrics.state_fidelity(projector(ket("01")), BELL), 0.0)


def test_uhlmann_frozen_value():
    # (sqrt(.21) + sqrt(.21))^2
    assert np.isclose(metrics.uhlmann_fidelity(np.diag([0.7, 0.3]), np.diag([0.3, 0.7])), 0.84)
    assert np.isclose(metrics.uhlmann_fidelity(np.diag([0.5, 0.5]), np.diag([0.5, 0.5])), 1.0)


@pytest.mark.parametrize("p", [0.0, 1 / 3, 0.5, 0.8, 1.0])
def test_concurrence_werner_closed_form(p):
    expected = max(0.0, (3 * p - 1) / 2)
    assert np.isclose(metrics.concurrence(werner(p)), expected, atol=1e-9)
    assert np.isclose(concurrence_oracle(werner(p)), expected, atol=1e-9)


def test_concurrence_werner_half():
    assert np.isclose(metrics.concurrence(werner(0.5)), 0.25)


def test_concurrence_extremes(rng):
    assert np.isclose(metrics.concurrence(projector(BELL)), 1.0)
    prod = np.kron(random_ket(rng, 2), random_ket(rng, 2))
    assert metrics.concurrence(projector(prod)) < 1e-7


def test_concurrence_wrong_dimension():
    with pytest.raises(WrongDimension):
        metrics.concurrence(np.eye(8) / 8)


def test_purity_examples():
    assert np.isclose(metrics.purity(projector(BELL)), 1.0)
    assert np.isclose(metrics.purity(np.eye(4) / 4), 0.25)
    assert np.isclose(metrics.purity((projector(ket("HH")) + projector(ket("VV"))) / 2), 0.5)


def test_process_fidelity_checks_labels():
    labels = tuple(f"{i}" for i in range(16))
    a = ProcessMatrix(np.eye(16) / 16, labels, 1.0)
    b = ProcessMatrix(np.eye(16) / 16, labels[::-1], 1.0)
    with pytest.raises(BasisMismatch):
        metrics.process_fidelity(a, b)
    assert np.isclose(metrics.process_fidelity(a, a), 1.0)


def test_process_fidelity_normalizes_trace():
    chi = np.zeros((16, 16))
    chi[0, 0] = 1
    assert np.isclose(metrics.process_fidelity(3 * chi, chi), 1.0)


def test_trace_distance():
    assert np.isclose(metrics.trace_distance(projector(ket("0")), projector(ket("1"))), 1.0)
    assert np.isclose(metrics.trace_distance(np.diag([0.7, 0.3]), np.diag([0.3, 0.7])), 0.4)


@given(st.integers(0, 2**32 - 1))
def test_concurrence_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 4, rank=int(rng.integers(1, 5)))
    assert abs(metrics.concurrence(rho) - concurrence_oracle(rho)) < 1e-6


@given(st.integers(0, 2**32 - 1))
def test_metrics_invariant_under_local_unitaries(seed):
    rng = np.random.default_rng(seed)
    rho, sigma = random_density(rng, 4, 2), random_density(rng, 4)
    u = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
    rot = lambda m: u @ m @ u.conj().T
    assert abs(metrics.concurrence(rho) - metrics.concurrence(rot(rho))) < 1e-7
    assert abs(metrics.purity(rho) - metrics.purity(rot(rho))) < 1e-9
    assert abs(metrics.uhlmann_fidelity(rho, sigma) - metrics.uhlmann_fidelity(rot(rho), rot(sigma))) < 1e-7


@given(st.integers(0, 2**32 - 1))
def test_state_fidelity_is_uhlmann_with_pure_target(seed):
    rng = np.random.default_rng(seed)
    rho, psi = random_density(rng, 4), random_ket(rng, 4)
    assert abs(metrics.state_fidelity(rho, psi) - metrics.uhlmann_fidelity(rho, projector(psi))) < 1e-10


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_metrics_bounded(seed, rank):
    rng = np.random.default_rng(seed)
    rho, sigma = random_density(rng, 4, rank), random_density(rng, 4, rank)
    for v in (
        metrics.concurrence(rho),
        metrics.purity(rho),
        metrics.uhlmann_fidelity(rho, sigma),
        metrics.state_fidelity(rho, random_ket(rng, 4)),
        metrics.trace_distance(rho, sigma),
    ):
        assert 0.0 <= v <= 1.0

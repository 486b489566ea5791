import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entop import opalg
from entop.errors import DimensionMismatch, NotHermitian, NotPSD

from conftest import random_density, random_matrix, random_unitary


def kron_loop(a, b):
    # independent oracle: explicit index arithmetic
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def realign_loop(o, da, db):
    out = np.zeros((da * da, db * db), dtype=complex)
    for i in range(da):
        for j in range(db):
            for k in range(da):
                for l in range(db):
                    out[i * da + k, j * db + l] = o[i * db + j, k * db + l]
    return out


def test_tensor_product_matches_loop_oracle(rng):
    a, b, c = random_matrix(rng, 2), random_matrix(rng, 2), random_matrix(rng, 2)
    assert np.allclose(opalg.tensor_product(a, b), kron_loop(a, b), atol=1e-14)
    assert np.allclose(opalg.tensor_product(a, b, c), kron_loop(kron_loop(a, b), c), atol=1e-13)


def test_tensor_product_big_endian():
    h, v = np.array([1, 0]), np.array([0, 1])
    assert np.array_equal(opalg.kron_vectors(h, v), [0, 1, 0, 0])
    assert np.array_equal(opalg.ket("VH"), [0, 0, 1, 0])
    assert np.array_equal(opalg.ket("01"), opalg.ket("HV"))


@pytest.mark.parametrize("da,db", [(2, 2), (2, 4), (4, 2), (3, 2)])
def test_realign_matches_loop_oracle(rng, da, db):
    o = random_matrix(rng, da * db)
    assert np.allclose(opalg.realign(o, da, db), realign_loop(o, da, db))
    assert np.allclose(opalg.unrealign(opalg.realign(o, da, db), da, db), o)


def test_realign_of_product_is_rank_one(rng):
    a, b = random_matrix(rng, 2), random_matrix(rng, 2)
    r = opalg.realign(np.kron(a, b), 2, 2)
    assert np.linalg.matrix_rank(r, tol=1e-10) == 1
    assert np.allclose(r, np.outer(a.reshape(-1), b.reshape(-1)))


def test_realign_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        opalg.realign(np.eye(4), 2, 3)


def test_hermitian_eig_descending_and_reconstructs(rng):
    rho = random_density(rng, 4)
    w, v = opalg.hermitian_eig(rho)
    assert np.all(np.diff(w) <= 0)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, rho)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        opalg.hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_svd_reconstructs(rng):
    a = random_matrix(rng, 4)
    u, s, v = opalg.svd(a)
    assert np.all(np.diff(s) <= 0)
    assert np.allclose(u @ np.diag(s) @ v.conj().T, a)


def test_matrix_sqrt_psd(rng):
    rho = random_density(rng, 4)
    r = opalg.matrix_sqrt_psd(rho)
    assert np.allclose(r @ r, rho)
    with pytest.raises(NotPSD):
        opalg.matrix_sqrt_psd(np.diag([1.0, -0.5]))


def test_project_psd_keeps_valid_states_and_fixes_negative(rng):
    rho = random_density(rng, 4)
    assert np.allclose(opalg.project_psd(rho), rho)
    bad = np.diag([0.7, 0.5, -0.2, 0.0]).astype(complex)
    p = opalg.project_psd(bad)
    assert np.all(np.linalg.eigvalsh(p) >= -1e-15)
    assert np.isclose(np.trace(p).real, 1.0)
    # eigenvalues (.7, .5, -.2, 0) shift by 0.1 onto the simplex: (.6, .4, 0, 0)
    assert np.allclose(p, np.diag([0.6, 0.4, 0.0, 0.0]))
    assert np.allclose(opalg.project_psd(bad, trace=None), np.diag([0.7, 0.5, 0.0, 0.0]))


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_project_psd_is_nearest_unit_trace_state(seed):
    rng = np.random.default_rng(seed)
    h = random_matrix(rng, 4)
    h = 0.5 * (h + h.conj().T)
    p = opalg.project_psd(h)
    dist = np.linalg.norm(h - p)
    for _ in range(20):
        other = random_density(rng, 4, rank=int(rng.integers(1, 5)))
        assert dist <= np.linalg.norm(h - other) + 1e-12
    # the convex combination towards any state never gets closer
    other = random_density(rng, 4)
    for t in (1e-3, 1e-2):
        assert dist <= np.linalg.norm(h - ((1 - t) * p + t * other)) + 1e-12


def test_global_phase_equality(rng):
    u = random_unitary(rng, 4)
    assert opalg.equal_up_to_global_phase(u, np.exp(0.7j) * u)
    assert not opalg.equal_up_to_global_phase(u, random_unitary(rng, 4))
    assert np.isclose(opalg.global_phase_overlap(u, -1j * u), 1.0)


def test_pauli_basis_is_hs_orthogonal():
    basis = opalg.pauli_basis(2)
    assert [lab for lab, _ in basis][:5] == ["II", "IX", "IY", "IZ", "XI"]
    gram = np.array([[np.trace(a.conj().T @ b) for _, b in basis] for _, a in basis])
    assert np.allclose(gram, 4 * np.eye(16))


def test_as_matrix_rejects_bad_input():
    with pytest.raises(DimensionMismatch):
        opalg.as_matrix(np.zeros(3))
    with pytest.raises(ValueError):
        opalg.as_matrix([[np.nan, 0], [0, 1]])


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_realign_roundtrip_property(seed):
    rng = np.random.default_rng(seed)
    o = random_matrix(rng, 4)
    assert np.allclose(opalg.unrealign(opalg.realign(o, 2, 2), 2, 2), o, atol=1e-14)
    # realignment preserves the Hilbert-Schmidt norm
    assert np.isclose(np.linalg.norm(opalg.realign(o, 2, 2)), np.linalg.norm(o))

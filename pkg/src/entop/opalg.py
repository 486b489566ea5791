"""Dense complex linear algebra used by every other module.

Matrices and kets are plain ``numpy`` arrays of dtype ``complex128``.
Qubit ordering is big-endian: the first factor of a tensor product is the
most significant index, so ``|01>`` is basis index 1 and ``|10>`` is index 2.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotPSD

HERMITIAN_TOL = 1e-10
PSD_CLIP = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": I2, "X": SX, "Y": SY, "Z": SZ}


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or 0 in m.shape:
        raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def as_vector(v) -> np.ndarray:
    x = np.asarray(v, dtype=complex).reshape(-1)
    if x.size == 0:
        raise DimensionMismatch("empty vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector has non-finite entries")
    return x


def tensor_product(*factors) -> np.ndarray:
    """Kronecker product of one or more matrices, left factor most significant."""
    if not factors:
        raise ValueError("tensor_product needs at least one factor")
    out = as_matrix(factors[0])
    for f in factors[1:]:
        out = np.kron(out, as_matrix(f))
    return out


def kron_vectors(*kets) -> np.ndarray:
    out = as_vector(kets[0])
    for k in kets[1:]:
        out = np.kron(out, as_vector(k))
    return out


def dagger(a) -> np.ndarray:
    return as_matrix(a).conj().T


def hermiticity_error(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T)))


def _require_square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {a.shape}")


def hermitian_eig(a, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues real and sorted
    in descending order and eigenvectors as the columns of a unitary matrix,
    so that ``a = V @ diag(w) @ V^dagger``.

    Raises
    ------
    NotHermitian
        If ``max|a - a^dagger| > tol``.
    """
    m = as_matrix(a)
    _require_square(m)
    err = hermiticity_error(m)
    if err > tol:
        raise NotHermitian(f"matrix is not Hermitian (max deviation {err:.3e} > {tol:.1e})")
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return w[::-1].copy(), v[:, ::-1].copy()


def svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD ``a = u @ diag(s) @ v^dagger`` with ``s`` descending.

    Unlike ``numpy.linalg.svd`` this returns ``v`` rather than ``v^dagger``.
    """
    m = as_matrix(a)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    return u, s, vh.conj().T


def matrix_sqrt_psd(a, clip: float = PSD_CLIP) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues in ``[-clip, 0)`` are treated as rounding noise and set to 0,
    as are positive ones below the eigensolver's resolution.
    """
    w, v = hermitian_eig(a)
    if w[-1] < -clip:
        raise NotPSD(f"matrix has eigenvalue {w[-1]:.3e} below -{clip:.0e}")
    floor = 10 * w.size * np.finfo(float).eps * max(w[0], 0.0)
    r = (v * np.sqrt(np.where(w > floor, w, 0.0))) @ v.conj().T
    return 0.5 * (r + r.conj().T)


def project_psd(a, trace: float | None = 1.0) -> np.ndarray:
    """Frobenius-nearest PSD matrix to the Hermitian part of ``a``.

    With ``trace`` given the nearest point of ``{PSD, Tr = trace}`` is
    returned: the eigenvalues are projected onto the scaled simplex (shift
    by a common constant, then clip at zero). This also removes the small
    positive eigenvalues that noise spreads over, which plain clipping keeps.
    With ``trace=None`` negative eigenvalues are simply clipped.
    """
    m = as_matrix(a)
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    if trace is None:
        w = np.clip(w, 0.0, None)
    else:
        if trace <= 0:
            raise NotPSD("target trace must be positive")
        u = w[::-1]
        css = np.cumsum(u) - trace
        k = np.nonzero(u - css / np.arange(1, u.size + 1) > 0)[0][-1]
        w = np.clip(w - css[k] / (k + 1), 0.0, None)
    out = (v * w) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def realign(o, dim_a: int, dim_b: int) -> np.ndarray:
    """Realignment ``R[(i,j),(k,l)] = o[(i,k),(j,l)]``.

    ``(i, j)`` index row/column of the A factor and ``(k, l)`` those of the
    B factor, so ``realign(A kron B) = vec(A) vec(B)^T`` (row-major vec) and the
    singular values of the result are the operator-Schmidt coefficients.
    """
    m = as_matrix(o)
    n = dim_a * dim_b
    if m.shape != (n, n):
        raise DimensionMismatch(f"operator of shape {m.shape} does not match {dim_a}x{dim_b} bipartition")
    t = m.reshape(dim_a, dim_b, dim_a, dim_b)  # [i, k, j, l]
    return t.transpose(0, 2, 1, 3).reshape(dim_a * dim_a, dim_b * dim_b)


def unrealign(r, dim_a: int, dim_b: int) -> np.ndarray:
    """Inverse of :func:`realign`."""
    m = as_matrix(r)
    if m.shape != (dim_a * dim_a, dim_b * dim_b):
        raise DimensionMismatch(f"realigned matrix of shape {m.shape} does not match {dim_a}x{dim_b}")
    t = m.reshape(dim_a, dim_a, dim_b, dim_b)  # [i, j, k, l]
    return t.transpose(0, 2, 1, 3).reshape(dim_a * dim_b, dim_a * dim_b)


def _as_array(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim not in (1, 2) or m.size == 0:
        raise DimensionMismatch(f"expected a vector or matrix, got shape {m.shape}")
    return m


def global_phase_overlap(a, b) -> float:
    """``|Tr(a^dagger b)| / (||a|| ||b||)``; equals 1 iff ``b = e^{i t} c a`` with ``c > 0``.

    Works for kets as well as matrices.
    """
    x, y = _as_array(a), _as_array(b)
    if x.shape != y.shape:
        raise DimensionMismatch(f"shapes {x.shape} and {y.shape} differ")
    na, nb = np.linalg.norm(x), np.linalg.norm(y)
    if na == 0 or nb == 0:
        return 0.0
    return float(abs(np.vdot(x, y)) / (na * nb))


def equal_up_to_global_phase(a, b, tol: float = 1e-10) -> bool:
    """True iff ``a = e^{i t} b`` for some real ``t`` (norms must match too)."""
    x, y = _as_array(a), _as_array(b)
    if x.shape != y.shape:
        return False
    ov = np.vdot(y, x)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return bool(np.max(np.abs(x - phase * y)) <= tol)


def pauli_basis(n_qubits: int) -> list[tuple[str, np.ndarray]]:
    """All ``4**n`` Pauli products with labels, ordered II, IX, IY, IZ, XI, ..."""
    out: list[tuple[str, np.ndarray]] = [("", np.ones((1, 1), dtype=complex))]
    for _ in range(n_qubits):
        out = [(lab + k, np.kron(m, p)) for lab, m in out for k, p in PAULIS.items()]
    return out


def ket(bits: str) -> np.ndarray:
    """Computational-basis ket from a string over {0,1,H,V}; H=0, V=1."""
    idx = 0
    for ch in bits:
        if ch in "0H":
            b = 0
        elif ch in "1V":
            b = 1
        else:
            raise ValueError(f"unknown basis symbol {ch!r} in {bits!r}")
        idx = 2 * idx + b
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[idx] = 1.0
    return v


def projector(psi) -> np.ndarray:
    v = as_vector(psi)
    return np.outer(v, v.conj())

"""Entangled operations as coherent superpositions of local operators.

An N-party operation with M branches is

    O = sum_k c_k  O_k^(1) (x) O_k^(2) (x) ... (x) O_k^(N)

where each ``O_k^(j)`` is a 2x2 local operator (not necessarily unitary).
Its entangling character is measured by the operator-Schmidt rank, obtained
from the singular values of the realigned matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import opalg
from .errors import Annihilated, DimensionMismatch, EmptyTermList, MismatchedParties

NORM_TOL = 1e-12
ANNIHILATION_TOL = 1e-14


@dataclass(frozen=True)
class LocalOperator:
    """A single-qubit operator with an optional symbolic label."""

    matrix: np.ndarray
    label: str | None = None

    def __post_init__(self):
        m = opalg.as_matrix(self.matrix)
        if m.shape != (2, 2):
            raise DimensionMismatch(f"local operators are 2x2, got {m.shape}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __str__(self) -> str:
        return self.label if self.label is not None else np.array2string(self.matrix, precision=3)


I = LocalOperator(opalg.I2, "I")
X = LocalOperator(opalg.SX, "X")
Y = LocalOperator(opalg.SY, "Y")
Z = LocalOperator(opalg.SZ, "Z")
P0 = LocalOperator(np.diag([1.0, 0.0]), "P0")
P1 = LocalOperator(np.diag([0.0, 1.0]), "P1")


def _rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]], dtype=complex)


def waveplate(theta: float, retardance: float) -> np.ndarray:
    """Jones matrix of a linear retarder with fast axis at ``theta`` (radians)."""
    r = _rotation(theta)
    return r.T @ np.diag([1.0, np.exp(1j * retardance)]) @ r


def half_waveplate(theta: float) -> LocalOperator:
    # [[cos 2t, sin 2t], [sin 2t, -cos 2t]]; H(0) = Z, H(pi/4) = X
    return LocalOperator(waveplate(theta, np.pi), f"H({theta:g})")


def quarter_waveplate(theta: float) -> LocalOperator:
    return LocalOperator(waveplate(theta, np.pi / 2), f"Q({theta:g})")


def as_local(op) -> LocalOperator:
    if isinstance(op, LocalOperator):
        return op
    return LocalOperator(np.asarray(op, dtype=complex))


@dataclass(frozen=True)
class BranchTerm:
    coefficient: complex
    factors: tuple[LocalOperator, ...]

    def __post_init__(self):
        if not self.factors:
            raise EmptyTermList("a branch term needs at least one local factor")
        object.__setattr__(self, "factors", tuple(as_local(f) for f in self.factors))
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    def product_matrix(self) -> np.ndarray:
        return opalg.tensor_product(*(f.matrix for f in self.factors))


@dataclass(frozen=True)
class BranchSuperposition:
    """``M`` weighted products of ``N`` local operators."""

    terms: tuple[BranchTerm, ...]
    parties: int = field(init=False)

    def __post_init__(self):
        if not self.terms:
            raise EmptyTermList("a superposition needs at least one term")
        object.__setattr__(self, "terms", tuple(self.terms))
        n = len(self.terms[0].factors)
        for t in self.terms:
            if len(t.factors) != n:
                raise MismatchedParties(f"terms act on {n} and {len(t.factors)} parties")
        object.__setattr__(self, "parties", n)

    @property
    def branch_count(self) -> int:
        return len(self.terms)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([t.coefficient for t in self.terms])

    def factor_table(self) -> list[list[LocalOperator]]:
        """``table[j][k]`` is the operator of party ``j`` on branch ``k``."""
        return [[t.factors[j] for t in self.terms] for j in range(self.parties)]

    def with_relative_phase(self, phi: float) -> "BranchSuperposition":
        """Multiply branch ``k`` (0-based) by ``exp(i k phi)``."""
        return BranchSuperposition(
            tuple(
                BranchTerm(t.coefficient * np.exp(1j * k * phi), t.factors)
                for k, t in enumerate(self.terms)
            )
        )

    def __str__(self) -> str:
        parts = []
        for t in self.terms:
            c = t.coefficient
            parts.append(f"({c.real:+.4g}{c.imag:+.4g}j)*[{','.join(str(f) for f in t.factors)}]")
        return " + ".join(parts)


def build_superposition(terms: Sequence[tuple[complex, Sequence]]) -> BranchSuperposition:
    """Normalized superposition: coefficients are rescaled so sum |c_k|^2 = 1.

    >>> s = build_superposition([(1, [Z, Z]), (1, [X, X])])
    >>> round(abs(s.terms[0].coefficient) ** 2, 12)
    0.5
    """
    if len(terms) == 0:
        raise EmptyTermList("no terms given")
    raw = [BranchTerm(complex(c), tuple(fs)) for c, fs in terms]
    norm = np.sqrt(sum(abs(t.coefficient) ** 2 for t in raw))
    if norm == 0:
        raise EmptyTermList("all coefficients are zero")
    return BranchSuperposition(tuple(BranchTerm(t.coefficient / norm, t.factors) for t in raw))


def to_matrix(s: BranchSuperposition) -> np.ndarray:
    out = np.zeros((2**s.parties, 2**s.parties), dtype=complex)
    for t in s.terms:
        out += t.coefficient * t.product_matrix()
    return out


def apply_to_state(s: BranchSuperposition | np.ndarray, psi) -> tuple[np.ndarray, float]:
    """Apply ``s`` to ``psi``; return the normalized output and survival weight.

    The weight is ``||O psi||^2``, the probability that the (generally
    non-trace-preserving) operation succeeds.

    Raises
    ------
    Annihilated
        If the weight falls below 1e-14.
    """
    o = to_matrix(s) if isinstance(s, BranchSuperposition) else opalg.as_matrix(s)
    v = opalg.as_vector(psi)
    if v.size != o.shape[1]:
        raise DimensionMismatch(f"state of dimension {v.size} for a {o.shape} operator")
    w = o @ v
    weight = float(np.vdot(w, w).real)
    if weight < ANNIHILATION_TOL:
        raise Annihilated(f"operator annihilates the input state (weight {weight:.2e})")
    return w / np.sqrt(weight), weight


@dataclass(frozen=True)
class SchmidtDecomposition:
    coefficients: np.ndarray
    left_factors: tuple[np.ndarray, ...]
    right_factors: tuple[np.ndarray, ...]
    bipartition: tuple[int, int]

    def reconstruct(self) -> np.ndarray:
        da, db = self.bipartition
        out = np.zeros((da * db, da * db), dtype=complex)
        for c, a, b in zip(self.coefficients, self.left_factors, self.right_factors):
            out += c * np.kron(a, b)
        return out


def schmidt_decompose(o, dim_a: int = 2, dim_b: int | None = None) -> SchmidtDecomposition:
    """Operator-Schmidt decomposition ``o = sum_k c_k L_k (x) R_k``.

    ``L_k`` and ``R_k`` have unit Hilbert-Schmidt norm and are pairwise
    HS-orthogonal. Factors are only defined up to the usual SVD gauge
    (phases, rotations inside degenerate blocks).
    """
    m = opalg.as_matrix(o)
    if dim_b is None:
        dim_b, rem = divmod(m.shape[0], dim_a)
        if rem:
            raise DimensionMismatch(f"dimension {m.shape[0]} is not divisible by {dim_a}")
    r = opalg.realign(m, dim_a, dim_b)
    u, s, v = opalg.svd(r)
    lefts = tuple(u[:, k].reshape(dim_a, dim_a) for k in range(s.size))
    rights = tuple(v[:, k].conj().reshape(dim_b, dim_b) for k in range(s.size))
    return SchmidtDecomposition(s, lefts, rights, (dim_a, dim_b))


def schmidt_number(d: SchmidtDecomposition | np.ndarray, tol: float = 1e-9) -> int:
    """Number of coefficients above ``tol`` times the largest one."""
    if not isinstance(d, SchmidtDecomposition):
        d = schmidt_decompose(d)
    c = np.asarray(d.coefficients)
    if c.size == 0 or c[0] == 0:
        return 0
    return int(np.sum(c > tol * c.max()))


def is_unitary(o, tol: float = 1e-10) -> bool:
    m = opalg.as_matrix(o)
    if m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


def schmidt2_unitary(p: float) -> BranchSuperposition:
    """Canonical Schmidt-2 two-qubit unitary ``sqrt(1-p) II + i sqrt(p) XX``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return BranchSuperposition(
        (
            BranchTerm(np.sqrt(1 - p), (I, I)),
            BranchTerm(1j * np.sqrt(p), (X, X)),
        )
    )


def ising_xx(theta: float) -> np.ndarray:
    """``exp(-i theta XX) = cos(theta) I - i sin(theta) XX``."""
    xx = np.kron(opalg.SX, opalg.SX)
    return np.cos(theta) * np.eye(4) - 1j * np.sin(theta) * xx


def controlled_unitary(u) -> BranchSuperposition:
    u = as_local(u)
    return build_superposition([(1, [P0, I]), (1, [P1, u])])


def entanglement_filter() -> BranchSuperposition:
    return build_superposition([(1, [P0, P0]), (1, [P1, P1])])


def swap_operator() -> BranchSuperposition:
    """``(II + XX + YY + ZZ)/2``, the SWAP gate as a four-branch superposition."""
    return build_superposition([(1, [P, P]) for P in (I, X, Y, Z)])


def cnot_operator() -> BranchSuperposition:
    return controlled_unitary(X)


def ghz_operator() -> BranchSuperposition:
    return build_superposition([(1, [I, I, I]), (1, [X, X, X])])


def w_operator() -> BranchSuperposition:
    return build_superposition([(1, [I, I, X]), (1, [I, X, I]), (1, [X, I, I])])


def ccu(u) -> BranchSuperposition:
    """Controlled-controlled-U; ``ccu(X)`` is the Toffoli gate up to the 1/2 scale."""
    u = as_local(u)
    return build_superposition(
        [(1, [P0, P0, I]), (1, [P0, P1, I]), (1, [P1, P0, I]), (1, [P1, P1, u])]
    )


def pauli_coefficients(o) -> np.ndarray:
    """Coefficients ``a_m = Tr(P_m^dagger O) / d`` in the N-qubit Pauli basis (order I, X, Y, Z)."""
    m = opalg.as_matrix(o)
    d = m.shape[0]
    basis = opalg.pauli_basis(int(round(np.log2(d))))
    return np.array([np.vdot(p, m) / d for _, p in basis])

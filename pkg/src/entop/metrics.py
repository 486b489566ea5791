"""Figures of merit: state fidelity, Uhlmann/process fidelity, concurrence, purity.

Fidelities use the squared convention ``F = [Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2``.
Some literature quotes the square root of this number instead.
"""

from __future__ import annotations

import numpy as np

from . import opalg
from .errors import BasisMismatch, WrongDimension

_YY = np.kron(opalg.SY, opalg.SY)


def _clip01(x: float) -> float:
    return float(min(1.0, max(0.0, x)))


def state_fidelity(rho, psi) -> float:
    """``<psi|rho|psi>`` for a pure target ``psi``."""
    r = opalg.as_matrix(rho)
    v = opalg.as_vector(psi)
    if r.shape != (v.size, v.size):
        raise WrongDimension(f"rho {r.shape} vs psi of dimension {v.size}")
    return _clip01(np.vdot(v, r @ v).real)


def uhlmann_fidelity(rho, sigma) -> float:
    r = opalg.as_matrix(rho)
    s = opalg.as_matrix(sigma)
    if r.shape != s.shape:
        raise WrongDimension(f"shapes {r.shape} and {s.shape} differ")
    # Tr sqrt(sqrt(r) s sqrt(r)) is the nuclear norm of sqrt(r) sqrt(s); the
    # SVD route avoids taking square roots of round-off eigenvalues.
    nuc = np.linalg.svd(opalg.matrix_sqrt_psd(r) @ opalg.matrix_sqrt_psd(s), compute_uv=False)
    return _clip01(np.sum(nuc) ** 2)


def process_fidelity(chi_exp, chi_ideal) -> float:
    """Uhlmann fidelity between two unit-trace process matrices.

    Accepts :class:`~entop.tomography.ProcessMatrix` objects (labels are
    checked) or bare arrays.
    """
    a_labels = getattr(chi_exp, "basis_labels", None)
    b_labels = getattr(chi_ideal, "basis_labels", None)
    if a_labels is not None and b_labels is not None and tuple(a_labels) != tuple(b_labels):
        raise BasisMismatch("process matrices use different Pauli label orderings")
    a = opalg.as_matrix(getattr(chi_exp, "chi", chi_exp))
    b = opalg.as_matrix(getattr(chi_ideal, "chi", chi_ideal))
    if a.shape != b.shape:
        raise BasisMismatch(f"chi shapes {a.shape} and {b.shape} differ")
    a = a / np.trace(a).real
    b = b / np.trace(b).real
    return uhlmann_fidelity(a, b)


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    The spin flip uses complex conjugation in the computational basis. The
    lambdas are obtained as sqrt of the spectrum of the Hermitian matrix
    ``sqrt(rho) rho~ sqrt(rho)``, isospectral to ``rho rho~``.
    """
    r = opalg.as_matrix(rho)
    if r.shape != (4, 4):
        raise WrongDimension(f"concurrence needs a 4x4 density matrix, got {r.shape}")
    flipped = _YY @ r.conj() @ _YY
    sr = opalg.matrix_sqrt_psd(r)
    m = sr @ flipped @ sr
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[::-1]
    lam = np.sqrt(np.clip(w, 0.0, None))
    return _clip01(lam[0] - lam[1] - lam[2] - lam[3])


def purity(rho) -> float:
    r = opalg.as_matrix(rho)
    return _clip01(np.trace(r @ r).real)


def trace_distance(rho, sigma) -> float:
    d = opalg.as_matrix(rho) - opalg.as_matrix(sigma)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T)))))

"""State and process tomography with maximum-likelihood reconstruction.

Measurements are local projections onto the eigenstates of the Pauli
operators (H/V, D/A, R/L). Counts are Poisson with mean
``exposure * Tr(Pi rho)``; the state estimate maximizes the Poisson
log-likelihood over density matrices using a diluted ``R rho R`` iteration.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import optimize

from . import opalg
from .errors import InputSetDegenerate, NotInformationallyComplete, NotPSD

log = logging.getLogger(__name__)

_S2 = 1 / np.sqrt(2)
SINGLE_QUBIT_KETS = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([_S2, _S2], dtype=complex),
    "A": np.array([_S2, -_S2], dtype=complex),
    "R": np.array([_S2, 1j * _S2], dtype=complex),
    "L": np.array([_S2, -1j * _S2], dtype=complex),
}
QPT_INPUT_TOKENS = "HVDR"


@dataclass(frozen=True)
class MeasurementSetting:
    label: str
    projector: np.ndarray


@dataclass(frozen=True)
class CountRecord:
    setting: MeasurementSetting
    count: float
    exposure: float


@dataclass
class DensityMatrixEstimate:
    rho: np.ndarray
    log_likelihood: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list, repr=False)


@dataclass
class ProcessMatrix:
    """Process matrix in the N-qubit Pauli product basis, normalized to unit trace.

    ``raw_trace`` keeps the trace before normalization; for a
    non-trace-preserving map it carries the lost overall scale.
    """

    chi: np.ndarray
    basis_labels: tuple[str, ...]
    raw_trace: float = 1.0


@dataclass(frozen=True)
class MonteCarloReport:
    metric_name: str
    mean: float
    std: float
    repeats: int


def product_ket(labels: str) -> np.ndarray:
    return opalg.kron_vectors(*(SINGLE_QUBIT_KETS[c] for c in labels))


def standard_settings(n_qubits: int) -> list[MeasurementSetting]:
    """The ``6^n`` local projectors, labels like ``'HD'``; order H, V, D, A, R, L per qubit."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    out = []
    for labels in itertools.product("HVDARL", repeat=n_qubits):
        lab = "".join(labels)
        out.append(MeasurementSetting(lab, opalg.projector(product_ket(lab))))
    return out


def setting_from_label(label: str) -> MeasurementSetting:
    try:
        return MeasurementSetting(label, opalg.projector(product_ket(label)))
    except KeyError as exc:
        raise ValueError(f"unknown basis token in setting label {label!r}") from exc


def simulate_counts(
    rho,
    settings: Sequence[MeasurementSetting],
    exposure: float,
    seed=None,
    poisson: bool = True,
    efficiency: float = 1.0,
) -> list[CountRecord]:
    """Expected counts ``exposure * efficiency * Tr(Pi rho)``, optionally Poisson-sampled.

    ``efficiency`` scales the mean without changing the recorded exposure;
    it models post-selection success when ``rho`` is the normalized output.
    ``seed`` may be an int, a ``SeedSequence`` or a ``Generator``.
    """
    r = opalg.as_matrix(rho)
    probs = np.array([np.vdot(s.projector, r).real for s in settings])
    mu = exposure * efficiency * np.clip(probs, 0.0, None)
    if poisson:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        n = rng.poisson(mu).astype(float)
    else:
        n = mu
    return [CountRecord(s, float(c), float(exposure)) for s, c in zip(settings, n)]


def resample_counts(records: Sequence[CountRecord], rng: np.random.Generator) -> list[CountRecord]:
    """Parametric bootstrap: Poisson redraw around each recorded count."""
    lam = np.array([r.count for r in records])
    new = rng.poisson(lam).astype(float)
    return [CountRecord(r.setting, float(c), r.exposure) for r, c in zip(records, new)]


def _design(records: Sequence[CountRecord]):
    proj = np.array([r.setting.projector for r in records])
    d = proj.shape[1]
    # p_k = Tr(Pi_k rho) = sum_ij conj(Pi_k)_ij rho_ij for Hermitian Pi_k
    flat = proj.reshape(len(records), d * d)
    n = np.array([r.count for r in records], float)
    expo = np.array([r.exposure for r in records], float)
    return proj, flat, n, expo, d


def check_informationally_complete(records: Sequence[CountRecord]) -> None:
    _, flat, _, _, d = _design(records)
    rank = np.linalg.matrix_rank(flat, tol=1e-9)
    if rank < d * d:
        raise NotInformationallyComplete(f"settings span a {rank}-dimensional space, need {d * d}")


def _log_likelihood(rho, flat, n, expo) -> float:
    p = (flat.conj() @ rho.reshape(-1)).real
    mu = expo * p
    pos = n > 0
    if np.any(mu[pos] <= 0):
        return -np.inf
    return float(np.sum(n[pos] * np.log(mu[pos])) - np.sum(mu))


def qst_linear_inversion(records: Sequence[CountRecord], project: bool = False) -> np.ndarray:
    """Least-squares solution of ``Tr(Pi_k rho) = n_k / exposure_k``.

    The raw result is Hermitian but may have negative eigenvalues; with
    ``project`` it is mapped to the nearest unit-trace PSD matrix.
    """
    check_informationally_complete(records)
    _, flat, n, expo, d = _design(records)
    f = n / expo
    x, *_ = np.linalg.lstsq(flat.conj(), f.astype(complex), rcond=None)
    rho = x.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    if project:
        return opalg.project_psd(rho)
    return rho


def _rrr_operator(rho, flat, n, d):
    p = (flat.conj() @ rho.reshape(-1)).real
    w = np.zeros_like(p)
    pos = n > 0
    w[pos] = n[pos] / np.maximum(p[pos], 1e-300)
    r = (w @ flat).reshape(d, d)
    return 0.5 * (r + r.conj().T)


def _normalize(rho):
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def _gradient_refine(rho, flat, n, expo, d):
    """Maximize the likelihood over ``rho = T^dagger T / Tr`` with T lower triangular."""
    tril = np.tril_indices(d)
    diag = tril[0] == tril[1]

    def unpack(x):
        re = x[: len(tril[0])]
        im = np.zeros(len(tril[0]))
        im[~diag] = x[len(tril[0]):]
        t = np.zeros((d, d), dtype=complex)
        t[tril] = re + 1j * im
        return t

    def fun(x):
        t = unpack(x)
        a = t.conj().T @ t
        tr = np.trace(a).real
        r = a / tr
        p = np.clip((flat.conj() @ r.reshape(-1)).real, 1e-300, None)
        mu = expo * p
        ll = float(np.sum(n * np.log(mu)) - np.sum(mu))
        g = ((n / p - expo) @ flat).reshape(d, d)
        g = 0.5 * (g + g.conj().T)
        gt = g - np.vdot(r, g).real * np.eye(d)
        m = gt @ t.conj().T  # dLL = (2/tr) Re sum_ij m_ji dT_ij
        grad_c = (2 / tr) * m.T
        gre = grad_c.real[tril]
        gim = -grad_c.imag[tril][~diag]
        return -ll, -np.concatenate([gre, gim])

    # J rho J = L L^dagger  =>  rho = T^dagger T with T = J L^dagger J lower triangular
    w, v = np.linalg.eigh(rho)
    rho_pd = (v * np.clip(w, 1e-12, None)) @ v.conj().T
    jmat = np.eye(d)[::-1]
    chol = np.linalg.cholesky(jmat @ rho_pd @ jmat)
    t0 = jmat @ chol.conj().T @ jmat
    x0 = np.concatenate([t0[tril].real, t0[tril].imag[~diag]])
    res = optimize.minimize(fun, x0, jac=True, method="L-BFGS-B", options={"maxiter": 2000, "ftol": 1e-15, "gtol": 1e-12})
    t = unpack(res.x)
    return _normalize(t.conj().T @ t)


def qst_mle(
    records: Sequence[CountRecord],
    max_iter: int = 5000,
    tol: float = 1e-10,
    rho0=None,
) -> DensityMatrixEstimate:
    """Maximum-likelihood density matrix for Poisson counts.

    Each iteration tries the full ``R rho R`` update and, if the likelihood
    would drop, the diluted update ``(1 + eps R) rho (1 + eps R)`` with
    halving ``eps``. A step is accepted only if the log-likelihood does not
    decrease, so ``history`` is non-decreasing. When no dilution improves the
    likelihood before convergence, a quasi-Newton ascent over a triangular
    factorization ``rho = T^dagger T / Tr`` takes over. Iteration stops when
    the relative log-likelihood change drops below ``tol``; hitting
    ``max_iter`` returns the best iterate with ``converged=False``.
    """
    check_informationally_complete(records)
    _, flat, n, expo, d = _design(records)

    if n.sum() <= 0:
        rho = np.eye(d, dtype=complex) / d
        ll = _log_likelihood(rho, flat, n, expo)
        return DensityMatrixEstimate(rho, ll, 0, True, [ll])

    if rho0 is None:
        try:
            li = qst_linear_inversion(records, project=True)
        except Exception:  # zero projection and friends
            li = np.eye(d) / d
        rho = 0.99 * li + 0.01 * np.eye(d) / d
    else:
        rho = _normalize(opalg.as_matrix(rho0))
    ll = _log_likelihood(rho, flat, n, expo)
    history = [ll]
    eye = np.eye(d)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        r = _rrr_operator(rho, flat, n, d)
        r /= np.vdot(rho, r).real
        accepted = False
        cand = _normalize(r @ rho @ r)
        ll_new = _log_likelihood(cand, flat, n, expo)
        if ll_new >= ll:
            accepted = True
        else:
            eps = 1.0
            while eps > 1e-10:
                m = eye + eps * r
                cand = _normalize(m @ rho @ m)
                ll_new = _log_likelihood(cand, flat, n, expo)
                if ll_new >= ll:
                    accepted = True
                    break
                eps *= 0.5
        if not accepted:
            refined = _gradient_refine(rho, flat, n, expo, d)
            ll_ref = _log_likelihood(refined, flat, n, expo)
            if ll_ref > ll:
                log.debug("R rho R stalled at iteration %d; gradient refinement gained %.3e", it, ll_ref - ll)
                rho, ll = refined, ll_ref
                history.append(ll)
            converged = True
            break
        change = ll_new - ll
        rho, ll = cand, ll_new
        history.append(ll)
        if change <= tol * abs(ll):
            converged = True
            break
    rho, ll = _polish(rho, ll, records, flat, n, expo, d, history)
    return DensityMatrixEstimate(rho, ll, it, converged, history)


def _polish(rho, ll, records, flat, n, expo, d, history):
    # R rho R crawls near the optimum, especially for nearly pure states. Two
    # cheap candidates sharpen the result; each is kept only if it raises
    # the likelihood: the PSD-projected linear inversion (exact for
    # noiseless data) and a quasi-Newton ascent from the current iterate.
    cands = [_gradient_refine(rho, flat, n, expo, d)]
    try:
        cands.append(qst_linear_inversion(records, project=True))
    except Exception:
        pass
    for c in cands:
        lc = _log_likelihood(c, flat, n, expo)
        if lc > ll:
            rho, ll = c, lc
            history.append(ll)
    return rho, ll


def qpt_input_states(n_qubits: int) -> list[tuple[str, np.ndarray]]:
    """The ``4^n`` product inputs over {H, V, D, R}."""
    return [("".join(t), product_ket("".join(t))) for t in itertools.product(QPT_INPUT_TOKENS, repeat=n_qubits)]


def _pauli_superops(n_qubits: int):
    basis = opalg.pauli_basis(n_qubits)
    labels = tuple(lab for lab, _ in basis)
    mats = np.array([p for _, p in basis])
    return labels, mats


def qpt(input_states, outputs, weights: Sequence[float] | None = None) -> ProcessMatrix:
    """Least-squares process matrix, projected onto the PSD cone.

    Solves ``E(rho_i) = sum_mn chi_mn P_m rho_i P_n^dagger`` for ``chi``,
    where ``E(rho_i) = weights[i] * outputs[i]``. The weights restore the
    relative success rates of a non-trace-preserving map; omit them for a
    trace-preserving process. The result is normalized to unit trace.
    """
    ins = []
    for s in input_states:
        a = np.asarray(s, dtype=complex)
        ins.append(np.outer(a, a.conj()) if a.ndim == 1 else opalg.as_matrix(a))
    outs = [opalg.as_matrix(getattr(o, "rho", o)) for o in outputs]
    if len(ins) != len(outs):
        raise ValueError(f"{len(ins)} inputs but {len(outs)} outputs")
    w = np.ones(len(ins)) if weights is None else np.asarray(weights, float)
    d = ins[0].shape[0]
    nq = int(round(np.log2(d)))
    span = np.linalg.matrix_rank(np.array([r.reshape(-1) for r in ins]), tol=1e-9)
    if span < d * d:
        raise InputSetDegenerate(f"input states span {span} dimensions, need {d * d}")

    labels, paulis = _pauli_superops(nq)
    # column (m, n) for input i: vec(P_m rho_i P_n^dagger)
    left = np.einsum("mab,ibc->imac", paulis, np.array(ins))
    cols = np.einsum("imac,ndc->imnad", left, paulis.conj())
    b = cols.reshape(len(ins), d**4, d * d).transpose(0, 2, 1).reshape(len(ins) * d * d, d**4)
    y = np.concatenate([wi * o.reshape(-1) for wi, o in zip(w, outs)])
    x, *_ = np.linalg.lstsq(b, y, rcond=None)
    chi = x.reshape(d * d, d * d)
    chi = 0.5 * (chi + chi.conj().T)
    raw_trace = float(np.trace(chi).real)
    if raw_trace <= 0:
        raise NotPSD(f"fitted process matrix has non-positive trace {raw_trace:.3e}")
    return ProcessMatrix(opalg.project_psd(chi / raw_trace), labels, raw_trace)


def ideal_process_matrix(o) -> ProcessMatrix:
    """Rank-one ``chi = a a^dagger`` of a single-Kraus map, ``a_m = Tr(P_m O) / d``."""
    from .operators import pauli_coefficients

    m = opalg.as_matrix(o)
    a = pauli_coefficients(m)
    chi = np.outer(a, a.conj())
    tr = float(np.trace(chi).real)
    labels, _ = _pauli_superops(int(round(np.log2(m.shape[0]))))
    return ProcessMatrix(chi / tr, labels, tr)


def monte_carlo(
    pipeline: Callable[[np.random.Generator], Mapping[str, float]],
    repeats: int = 100,
    seed: int | np.random.SeedSequence = 0,
    workers: int = 1,
) -> dict[str, MonteCarloReport]:
    """Run ``pipeline`` on ``repeats`` independent streams; mean and one standard deviation.

    Repeat ``r`` uses ``SeedSequence(seed).spawn(repeats)[r]``, so results do
    not depend on ``workers``.
    """
    if repeats < 2:
        raise ValueError("repeats must be >= 2")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(repeats)

    def run(child):
        return pipeline(np.random.default_rng(child))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, children))
    else:
        results = [run(c) for c in children]
    out = {}
    for name in results[0]:
        vals = np.array([r[name] for r in results], float)
        out[name] = MonteCarloReport(name, float(vals.mean()), float(vals.std(ddof=1)), repeats)
    return out

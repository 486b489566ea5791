"""Time-bin realization of superposed operations.

Each party sends its photon through an unbalanced interferometer with ``M``
arms; arm ``k`` (0-based) is delayed by ``k`` delay steps and applies the
local operator ``O_{j,k}``. Because the photons of a pair are born together,
the joint arm choice ``(k_1, ..., k_N)`` is visible as a pattern of arrival
time differences. A coincidence window shorter than one delay step keeps
only the diagonal choices ``k_1 = ... = k_N``, which add coherently:

    v = sum_k (prod_j a_{j,k} e^{i phase_{j,k}}) (O_{1,k} (x) ... (x) O_{N,k}) |psi>

Off-diagonal choices arrive at distinct times; they are tallied per
time-difference class as incoherent detection probabilities.

Arm phases follow ``phase_{j,k} = k * theta_j + offset_{j,k}`` where
``theta_j`` is the relative phase of party ``j``'s interferometer. For two
arms the realized relative phase is ``phi = sum_j theta_j``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np

from . import opalg
from . import operators as ops
from .errors import DimensionMismatch, NotDiagonal, ZeroSuccess

ZERO_SUCCESS_TOL = 1e-14


@dataclass(frozen=True)
class TimeBinConfig:
    """Interferometer timing; durations in ns.

    Defaults follow the photonic apparatus: 12.5 ns pulse period, an arm
    delay of half a period, and a 3 ns coincidence window.
    """

    arm_count: int = 2
    arm_delay_step: float = 6.25
    pulse_period: float = 12.5
    coincidence_window: float = 3.0

    def __post_init__(self):
        if self.arm_count < 1:
            raise ValueError("arm_count must be >= 1")
        for name in ("arm_delay_step", "pulse_period", "coincidence_window"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.coincidence_window >= self.arm_delay_step:
            raise ValueError(
                f"coincidence window {self.coincidence_window} ns cannot resolve "
                f"arm delay step {self.arm_delay_step} ns"
            )


@dataclass(frozen=True)
class ArmAmplitudes:
    """Per-party complex amplitude of reaching the detector through each arm."""

    per_party: tuple[tuple[complex, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(complex(a) for a in row) for row in self.per_party)
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("every party needs the same number of arm amplitudes")
        for j, r in enumerate(rows):
            if sum(abs(a) ** 2 for a in r) > 1 + 1e-12:
                raise ValueError(f"party {j}: arm amplitudes carry more than unit probability")
        object.__setattr__(self, "per_party", rows)

    @classmethod
    def michelson(cls, parties: int) -> "ArmAmplitudes":
        """Two arms, one 50/50 splitter passed twice: amplitude 1/2 per arm."""
        return cls(tuple((0.5, 0.5) for _ in range(parties)))

    @classmethod
    def balanced(cls, arms: int, parties: int) -> "ArmAmplitudes":
        """Lossless balanced ``M``-way splitter, amplitude ``1/sqrt(M)`` per arm."""
        a = 1 / np.sqrt(arms)
        return cls(tuple(tuple([a] * arms) for _ in range(parties)))

    @classmethod
    def default(cls, arms: int, parties: int) -> "ArmAmplitudes":
        return cls.michelson(parties) if arms == 2 else cls.balanced(arms, parties)

    @property
    def parties(self) -> int:
        return len(self.per_party)

    @property
    def arms(self) -> int:
        return len(self.per_party[0])

    def transmitted_mass(self) -> float:
        """Probability that every photon heads to its detector, summed over arms."""
        return float(np.prod([sum(abs(a) ** 2 for a in r) for r in self.per_party]))


@dataclass(frozen=True)
class PhaseNoiseModel:
    """Interferometer phases with Gaussian, quasi-static locking noise.

    ``mean_phases[j]`` is party ``j``'s relative phase; ``sigma[s]`` is the
    standard deviation of noise source ``s``, which perturbs party ``s``'s
    phase. One source models a single shared interferometer, two sources
    independently locked interferometers.
    """

    mean_phases: tuple[float, ...]
    sigma: tuple[float, ...] = (0.0,)
    source_count: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mean_phases", tuple(float(p) for p in self.mean_phases))
        object.__setattr__(self, "sigma", tuple(float(s) for s in self.sigma))
        if self.source_count < 1 or len(self.sigma) != self.source_count:
            raise ValueError("sigma must list one standard deviation per noise source")
        if any(s < 0 or not np.isfinite(s) for s in self.sigma):
            raise ValueError("sigma must be finite and non-negative")
        if self.source_count > len(self.mean_phases):
            raise ValueError("more noise sources than interferometers")

    @classmethod
    def noiseless(cls, mean_phases: Sequence[float]) -> "PhaseNoiseModel":
        return cls(tuple(mean_phases), (0.0,), 1)

    @property
    def total_phase(self) -> float:
        return float(sum(self.mean_phases))

    @property
    def total_sigma(self) -> float:
        return float(np.sqrt(sum(s * s for s in self.sigma)))

    @property
    def is_noiseless(self) -> bool:
        return all(s == 0 for s in self.sigma)


@dataclass
class PostSelectionResult:
    """Post-selected state plus the bookkeeping of every arrival-time class.

    ``outcome_breakdown`` maps a time-difference class (0 is the coincident,
    post-selected class) to its detection probability. ``loss_probability``
    is the mass that never reaches the detectors under the
    ``sum_arms |amplitude|^2`` accounting.
    """

    state: np.ndarray
    success_probability: float
    outcome_breakdown: dict[Hashable, float] = field(default_factory=dict)
    loss_probability: float = 0.0

    @property
    def unnormalized(self) -> np.ndarray:
        return self.success_probability * self.state


def time_class(arms: Sequence[int]) -> Hashable:
    """Arrival-time signature of a joint arm choice, in delay steps.

    One party gives 0, two parties give ``k_B - k_A``; more parties give the
    tuple of delays relative to the first party.
    """
    if len(arms) <= 1:
        return 0
    if len(arms) == 2:
        return arms[1] - arms[0]
    rel = tuple(k - arms[0] for k in arms[1:])
    return 0 if not any(rel) else rel


def enumerate_outcomes(cfg: TimeBinConfig, parties: int) -> list[tuple[tuple[int, ...], Hashable]]:
    """All ``M^N`` joint arm choices (1-based arm numbers) with their time class."""
    out = []
    for choice in itertools.product(range(1, cfg.arm_count + 1), repeat=parties):
        out.append((choice, time_class(choice)))
    return out


def _as_branch_table(branches, parties: int, arms: int) -> list[list[np.ndarray]]:
    if len(branches) != parties:
        raise DimensionMismatch(f"{len(branches)} branch rows for {parties} parties")
    table = []
    for j, row in enumerate(branches):
        if len(row) != arms:
            raise DimensionMismatch(f"party {j}: {len(row)} arm operators for {arms} arms")
        table.append([ops.as_local(o).matrix for o in row])
    return table


def postselect(
    cfg: TimeBinConfig,
    amps: ArmAmplitudes,
    branches: Sequence[Sequence],
    phases: PhaseNoiseModel,
    psi,
    arm_offsets: Sequence[Sequence[float]] | None = None,
    allow_zero: bool = False,
) -> PostSelectionResult:
    """Noiseless post-selection of the coincident (diagonal) arm choices.

    ``branches[j][k]`` is party ``j``'s operator in arm ``k``. With
    ``allow_zero`` a vanishing success probability returns a zero state
    instead of raising :class:`ZeroSuccess`.
    """
    if not phases.is_noiseless:
        raise ValueError("postselect takes a noiseless phase model; use apply_phase_noise")
    v_in = opalg.as_vector(psi)
    parties = amps.parties
    arms = cfg.arm_count
    if amps.arms != arms:
        raise DimensionMismatch(f"{amps.arms} amplitudes per party for {arms} arms")
    if len(phases.mean_phases) != parties:
        raise DimensionMismatch(f"{len(phases.mean_phases)} phases for {parties} parties")
    if v_in.size != 2**parties:
        raise DimensionMismatch(f"state of dimension {v_in.size} for {parties} qubits")
    table = _as_branch_table(branches, parties, arms)
    offsets = np.zeros((parties, arms)) if arm_offsets is None else np.asarray(arm_offsets, float)
    if offsets.shape != (parties, arms):
        raise DimensionMismatch(f"arm offsets of shape {offsets.shape}, expected {(parties, arms)}")

    amp = np.array(amps.per_party)
    arm_index = np.arange(arms)
    phase = np.exp(1j * (np.outer(phases.mean_phases, arm_index) + offsets))
    weights = amp * phase  # [party, arm]

    v = np.zeros_like(v_in)
    breakdown: dict[Hashable, float] = {}
    for choice in itertools.product(range(arms), repeat=parties):
        w = np.prod([weights[j, k] for j, k in enumerate(choice)])
        if w == 0:
            continue
        out = opalg.tensor_product(*(table[j][k] for j, k in enumerate(choice))) @ v_in
        cls = time_class([k + 1 for k in choice])
        if cls == 0:
            v += w * out
        else:
            p = abs(w) ** 2 * float(np.vdot(out, out).real)
            breakdown[cls] = breakdown.get(cls, 0.0) + p
    success = float(np.vdot(v, v).real)
    breakdown[0] = success
    breakdown = dict(sorted(breakdown.items(), key=lambda kv: _class_sort_key(kv[0])))
    loss = 1.0 - amps.transmitted_mass()
    if success < ZERO_SUCCESS_TOL:
        if not allow_zero:
            raise ZeroSuccess(f"post-selection never fires (success probability {success:.2e})")
        return PostSelectionResult(np.zeros((v.size, v.size), complex), 0.0, breakdown, loss)
    state = np.outer(v, v.conj()) / success
    return PostSelectionResult(state, success, breakdown, loss)


def _class_sort_key(c):
    return (0, (c,)) if isinstance(c, int) else (1, c)


class PostSelector:
    """Callable ``thetas -> PostSelectionResult`` over per-party interferometer phases.

    ``max_harmonic`` bounds the Fourier degree of the unnormalized output in
    each phase (``M - 1``), which lets :func:`apply_phase_noise` average
    analytically.
    """

    def __init__(self, cfg, amps, branches, psi, arm_offsets=None):
        self.cfg = cfg
        self.amps = amps
        self.branches = branches
        self.psi = opalg.as_vector(psi)
        self.arm_offsets = arm_offsets
        self.max_harmonic = cfg.arm_count - 1

    def __call__(self, thetas) -> PostSelectionResult:
        return postselect(
            self.cfg,
            self.amps,
            self.branches,
            PhaseNoiseModel.noiseless(thetas),
            self.psi,
            self.arm_offsets,
            allow_zero=True,
        )


def branches_from_superposition(
    s: ops.BranchSuperposition, amps: ArmAmplitudes | None = None
) -> tuple[list[list[ops.LocalOperator]], ArmAmplitudes, np.ndarray]:
    """Interferometer layout realizing ``s``: branch ``k`` goes to arm ``k`` of every party.

    Coefficient phases become static arm offsets on the first party and
    unequal magnitudes are absorbed into that party's arm transmittances.
    Returns ``(branches, amplitudes, arm_offsets)``.
    """
    m = s.branch_count
    amps = amps or ArmAmplitudes.default(m, s.parties)
    if amps.arms != m or amps.parties != s.parties:
        raise DimensionMismatch("amplitudes do not match the superposition's arms/parties")
    c = s.coefficients
    mags = np.abs(c)
    scale = mags / mags.max()
    rows = [list(r) for r in amps.per_party]
    rows[0] = [a * sc for a, sc in zip(rows[0], scale)]
    offsets = np.zeros((s.parties, m))
    offsets[0] = np.angle(c)
    return s.factor_table(), ArmAmplitudes(tuple(tuple(r) for r in rows)), offsets


def _fourier_weights(sigma: float, harmonic: int, nodes: int) -> np.ndarray:
    """Quadrature weights making ``sum_m w_m f(mu + 2 pi m / K)`` equal ``E f(mu + N(0, sigma^2))``.

    Exact for trigonometric polynomials of degree ``<= harmonic`` when
    ``nodes >= 2 * harmonic + 1``.
    """
    delta = 2 * np.pi * np.arange(nodes) / nodes
    n = np.arange(-harmonic, harmonic + 1)
    damp = np.exp(-0.5 * (n * sigma) ** 2)
    return (damp[None, :] * np.cos(np.outer(delta, n))).sum(axis=1) / nodes


def _accumulate(acc, res: PostSelectionResult, w: float):
    rho, bd = acc
    rho += w * res.unnormalized
    for k, p in res.outcome_breakdown.items():
        bd[k] = bd.get(k, 0.0) + w * p


def apply_phase_noise(
    selector: Callable[[np.ndarray], PostSelectionResult],
    noise: PhaseNoiseModel,
    analytic: bool = True,
    shots: int = 1000,
    seed: int | np.random.SeedSequence | None = None,
    harmonics: int | None = None,
) -> PostSelectionResult:
    """Average post-selection over Gaussian phase noise.

    ``selector`` maps per-party phases to a post-selection result. In
    analytic mode the Gaussian average is computed exactly with a Fourier
    quadrature (for two arms the coherence between branches is multiplied by
    ``exp(-sigma_tot^2 / 2)``). Sampled mode draws ``shots`` quasi-static
    phase offsets from ``seed`` and averages the unnormalized outputs.
    """
    parties = len(noise.mean_phases)
    mean = np.asarray(noise.mean_phases, float)
    rho = None
    bd: dict[Hashable, float] = {}
    loss = 0.0

    if noise.is_noiseless:
        res = selector(mean)
        if res.success_probability < ZERO_SUCCESS_TOL:
            raise ZeroSuccess("post-selection never fires")
        return res

    if analytic:
        h = harmonics if harmonics is not None else getattr(selector, "max_harmonic", 1)
        k = 2 * h + 1
        grids = []
        for s in range(noise.source_count):
            grids.append(_fourier_weights(noise.sigma[s], h, k))
        for idx in itertools.product(range(k), repeat=noise.source_count):
            w = float(np.prod([grids[s][m] for s, m in enumerate(idx)]))
            thetas = mean.copy()
            for s, m in enumerate(idx):
                thetas[s] += 2 * np.pi * m / k
            res = selector(thetas)
            if rho is None:
                rho = np.zeros_like(res.state)
                loss = res.loss_probability
            _accumulate((rho, bd), res, w)
    else:
        if shots < 1:
            raise ValueError("shots must be >= 1")
        rng = np.random.default_rng(seed)
        draws = rng.normal(0.0, 1.0, size=(shots, noise.source_count)) * np.asarray(noise.sigma)
        for d in draws:
            thetas = mean.copy()
            thetas[: noise.source_count] += d
            res = selector(thetas)
            if rho is None:
                rho = np.zeros_like(res.state)
                loss = res.loss_probability
            _accumulate((rho, bd), res, 1.0 / shots)

    assert rho is not None and parties >= 1
    rho = 0.5 * (rho + rho.conj().T)
    success = float(np.trace(rho).real)
    if success < ZERO_SUCCESS_TOL:
        raise ZeroSuccess(f"post-selection never fires (success probability {success:.2e})")
    bd[0] = success
    bd = dict(sorted(bd.items(), key=lambda kv: _class_sort_key(kv[0])))
    return PostSelectionResult(rho / success, success, bd, loss)


def simulate_scenario(
    s: ops.BranchSuperposition,
    psi,
    noise: PhaseNoiseModel,
    cfg: TimeBinConfig | None = None,
    amps: ArmAmplitudes | None = None,
    analytic: bool = True,
    shots: int = 1000,
    seed=None,
) -> PostSelectionResult:
    """Post-select ``s`` acting on ``psi`` through its interferometer layout."""
    cfg = cfg or TimeBinConfig(arm_count=s.branch_count)
    if cfg.arm_count != s.branch_count:
        raise DimensionMismatch(f"{s.branch_count} branches need {s.branch_count} arms, config has {cfg.arm_count}")
    branches, amps, offsets = branches_from_superposition(s, amps)
    sel = PostSelector(cfg, amps, branches, psi, offsets)
    return apply_phase_noise(sel, noise, analytic=analytic, shots=shots, seed=seed)


def waveplate_phase_control(alpha: float, tol: float = 1e-10) -> float:
    """Relative H/V phase of the QWP(pi/4) HWP(alpha) QWP(pi/4) stack, in ``[0, 2 pi)``.

    The stack is diagonal in H/V and returns ``arg(J_VV) - arg(J_HH)``, which
    equals ``4 alpha + pi`` (mod 2 pi) with this sign convention.
    """
    q = ops.waveplate(np.pi / 4, np.pi / 2)
    h = ops.waveplate(alpha, np.pi)
    j = q @ h @ q
    off = max(abs(j[0, 1]), abs(j[1, 0]))
    if off > tol:
        raise NotDiagonal(f"waveplate stack has off-diagonal magnitude {off:.2e}")
    return float(np.mod(np.angle(j[1, 1] * np.conj(j[0, 0])), 2 * np.pi))

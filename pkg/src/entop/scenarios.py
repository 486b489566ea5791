"""Config-driven experiment pipelines behind the ``entop`` CLI.

Seeding: every stochastic run derives all randomness from one
``numpy.random.SeedSequence(seed)``. Its ``spawn(len(phi_list))`` children
belong to the phi-grid points in config order; each point's child is split
again with ``spawn(3)`` into (phase-noise shots, measured counts,
Monte-Carlo resampling), and the Monte-Carlo stream is split per repeat by
``spawn(repeats)``. Only the stream structure is documented, not the bit
streams, so other implementations can match statistics but not bytes.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import interferometer as itf
from . import io as eio
from . import metrics
from . import operators as ops
from . import tomography as tomo
from .errors import ConfigError, ZeroSuccess
from .opspec import parse_complex, parse_ket, parse_operator, _Parser

log = logging.getLogger(__name__)

OUTPUT_KINDS = {"density", "counts", "chi", "summary"}


def _real(x, what: str) -> float:
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        v = parse_complex(x)
        if abs(v.imag) > 1e-12:
            raise ConfigError(f"{what} must be real, got {x!r}")
        return float(v.real)
    raise ConfigError(f"{what}: expected a number or expression, got {x!r}")


def parse_factor(token: str) -> ops.LocalOperator:
    p = _Parser(token)
    f = p.factor()
    if p.cur.kind != "end":
        p.error("trailing input after local operator")
    return f


@dataclass
class ScenarioConfig:
    name: str
    operator: ops.BranchSuperposition
    input_state: np.ndarray
    input_label: str
    phi_list: list[float] = field(default_factory=lambda: [0.0])
    timing: itf.TimeBinConfig | None = None
    amplitudes: itf.ArmAmplitudes | None = None
    phases: list[float] | None = None
    sigma: list[float] = field(default_factory=lambda: [0.0])
    source_count: int = 1
    noise_mode: str = "analytic"
    shots: int = 1000
    counts: float = 10000.0
    poisson: bool = True
    repeats: int = 100
    seed: int | None = None
    outputs: set[str] = field(default_factory=lambda: {"density", "summary"})
    truth_table: bool = False
    bipartition: tuple[int, int] | None = None
    operator_text: str = ""

    @property
    def parties(self) -> int:
        return self.operator.parties

    @property
    def stochastic(self) -> bool:
        sampled_noise = self.noise_mode == "sampled" and any(s > 0 for s in self.sigma)
        return sampled_noise or (self.poisson and self.counts > 0)

    def noise_model(self, phi: float) -> itf.PhaseNoiseModel:
        base = list(self.phases) if self.phases is not None else [0.0] * self.parties
        base[0] += phi
        return itf.PhaseNoiseModel(tuple(base), tuple(self.sigma), self.source_count)

    def total_phase(self, phi: float) -> float:
        return phi + (sum(self.phases) if self.phases else 0.0)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "operatorSpec": self.operator_text,
            "inputState": self.input_label,
            "phiList": list(self.phi_list),
            "armCount": self.operator.branch_count,
            "sigma": list(self.sigma),
            "sourceCount": self.source_count,
            "noiseMode": self.noise_mode,
            "counts": self.counts,
            "poisson": self.poisson,
            "repeats": self.repeats,
            "seed": self.seed,
        }


def load_config(source: str | Path | dict, seed: int | None = None, require_seed: bool = True) -> ScenarioConfig:
    """Validate a scenario dict (or JSON file) into a :class:`ScenarioConfig`.

    Every validation failure surfaces as :class:`ConfigError`. Pass
    ``require_seed=False`` for deterministic uses such as ``decompose``.
    """
    try:
        return _load_config(source, seed, require_seed)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError, IndexError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def _load_config(source, seed, require_seed):
    import json

    if isinstance(source, (str, Path)):
        try:
            raw = json.loads(Path(source).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {source}: {exc}") from exc
    else:
        raw = dict(source)
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = {
        "name", "operatorSpec", "branches", "inputState", "phiList", "armCount", "armDelayStepNs",
        "pulsePeriodNs", "coincidenceWindowNs", "amplitudes", "phases", "sigma", "sourceCount",
        "noiseMode", "shots", "counts", "poisson", "repeats", "seed", "outputs", "truthTable",
        "bipartition", "description",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    if "operatorSpec" in raw:
        text = raw["operatorSpec"]
        op = parse_operator(text)
    elif "branches" in raw:
        table = raw["branches"]
        try:
            rows = [[parse_factor(t) for t in row] for row in table]
        except TypeError as exc:
            raise ConfigError("branches must be a list of per-party token lists") from exc
        arms = {len(r) for r in rows}
        if len(arms) != 1:
            raise ConfigError("every party needs the same number of arm operators")
        m = arms.pop()
        op = ops.build_superposition([(1, [rows[j][k] for j in range(len(rows))]) for k in range(m)])
        text = " + ".join("[" + ",".join(row[k] for row in table) + "]" for k in range(m))
    else:
        raise ConfigError("config needs 'operatorSpec' or 'branches'")

    n = op.parties
    if "armCount" in raw and int(raw["armCount"]) != op.branch_count:
        raise ConfigError(f"armCount {raw['armCount']} but the operator has {op.branch_count} branches")
    try:
        timing = itf.TimeBinConfig(
            arm_count=op.branch_count,
            arm_delay_step=float(raw.get("armDelayStepNs", 6.25)),
            pulse_period=float(raw.get("pulsePeriodNs", 12.5)),
            coincidence_window=float(raw.get("coincidenceWindowNs", 3.0)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    in_spec = raw.get("inputState", "H" * n)
    try:
        psi = parse_ket(in_spec)
    except ValueError as exc:
        raise ConfigError(f"inputState: {exc}") from exc
    if psi.size != 2**n:
        raise ConfigError(f"inputState has dimension {psi.size}, operator acts on {n} qubits")
    label = in_spec if isinstance(in_spec, str) else "custom"

    amps = None
    if raw.get("amplitudes") is not None:
        try:
            amps = itf.ArmAmplitudes(
                tuple(tuple(parse_complex(a) if isinstance(a, str) else complex(a) for a in row) for row in raw["amplitudes"])
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"amplitudes: {exc}") from exc
        if amps.parties != n or amps.arms != op.branch_count:
            raise ConfigError("amplitudes must be parties x arms")

    phases = None
    if raw.get("phases") is not None:
        phases = [_real(p, "phases") for p in raw["phases"]]
        if len(phases) != n:
            raise ConfigError(f"phases needs {n} entries")

    sigma = [_real(s, "sigma") for s in raw.get("sigma", [0.0])]
    source_count = int(raw.get("sourceCount", len(sigma)))
    if source_count != len(sigma) or not 1 <= source_count <= n:
        raise ConfigError("sourceCount must equal len(sigma) and not exceed the number of parties")
    if any(s < 0 for s in sigma):
        raise ConfigError("sigma must be non-negative")

    noise_mode = raw.get("noiseMode", "analytic")
    if noise_mode not in ("analytic", "sampled"):
        raise ConfigError("noiseMode must be 'analytic' or 'sampled'")
    outputs = set(raw.get("outputs", ["density", "summary"]))
    if outputs - OUTPUT_KINDS:
        raise ConfigError(f"unknown outputs {sorted(outputs - OUTPUT_KINDS)}")

    cfg = ScenarioConfig(
        name=str(raw.get("name", "scenario")),
        operator=op,
        input_state=psi,
        input_label=label,
        phi_list=[_real(p, "phiList") for p in raw.get("phiList", [0.0])],
        timing=timing,
        amplitudes=amps,
        phases=phases,
        sigma=sigma,
        source_count=source_count,
        noise_mode=noise_mode,
        shots=int(raw.get("shots", 1000)),
        counts=float(raw.get("counts", 10000)),
        poisson=bool(raw.get("poisson", True)),
        repeats=int(raw.get("repeats", 100)),
        seed=seed if seed is not None else raw.get("seed"),
        outputs=outputs,
        truth_table=bool(raw.get("truthTable", False)),
        bipartition=tuple(raw["bipartition"]) if raw.get("bipartition") else None,
        operator_text=text,
    )
    if cfg.repeats < 1 or cfg.shots < 1:
        raise ConfigError("repeats and shots must be >= 1")
    if cfg.counts < 0:
        raise ConfigError("counts must be non-negative")
    if require_seed and cfg.stochastic and cfg.seed is None:
        raise ConfigError("a seed is mandatory for stochastic runs (config 'seed' or --seed)")
    return cfg


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("ENTOP_THREADS", "1")))
    except ValueError:
        return 1


def _ordered_map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _point_streams(cfg: ScenarioConfig) -> list[list[np.random.SeedSequence]]:
    root = np.random.SeedSequence(cfg.seed if cfg.seed is not None else 0)
    return [child.spawn(3) for child in root.spawn(len(cfg.phi_list))]


def postselected_output(cfg: ScenarioConfig, phi: float, psi=None, stream=None) -> itf.PostSelectionResult:
    return itf.simulate_scenario(
        cfg.operator,
        cfg.input_state if psi is None else psi,
        cfg.noise_model(phi),
        cfg.timing,
        cfg.amplitudes,
        analytic=cfg.noise_mode == "analytic",
        shots=cfg.shots,
        seed=stream,
    )


def ideal_output(cfg: ScenarioConfig, phi: float, psi=None) -> np.ndarray:
    s = cfg.operator.with_relative_phase(cfg.total_phase(phi))
    out, _ = ops.apply_to_state(s, cfg.input_state if psi is None else psi)
    return out


def _state_metrics(rho, target, parties: int) -> dict[str, float]:
    out = {"fidelity": metrics.state_fidelity(rho, target), "purity": metrics.purity(rho)}
    if parties == 2:
        out["concurrence"] = metrics.concurrence(rho)
    return out


def _stat_block(value: float, mc: tomo.MonteCarloReport | None, repeats: int) -> dict:
    block: dict[str, Any] = {"value": value}
    if repeats > 1:
        if mc is None:
            block["mean"] = value
            block["std"] = 0.0
        else:
            block["mean"] = mc.mean
            block["std"] = mc.std
    block["repeats"] = repeats
    return block


def run_state_tomography(cfg: ScenarioConfig, out_dir: Path | None) -> dict:
    """Post-select, simulate tomography counts, reconstruct by MLE, Monte-Carlo error bars."""
    streams = _point_streams(cfg)
    settings = tomo.standard_settings(cfg.parties)

    def one(idx: int) -> dict:
        phi = cfg.phi_list[idx]
        noise_ss, count_ss, mc_ss = streams[idx]
        res = postselected_output(cfg, phi, stream=noise_ss)
        target = ideal_output(cfg, phi)
        entry: dict[str, Any] = {
            "phi": phi,
            "successProbability": res.success_probability,
            "outcomeBreakdown": {str(k): v for k, v in res.outcome_breakdown.items()},
            "lossProbability": res.loss_probability,
            "simulated": _state_metrics(res.state, target, cfg.parties),
        }
        if cfg.counts > 0:
            measured = tomo.simulate_counts(res.state, settings, cfg.counts, seed=count_ss, poisson=cfg.poisson)
            est = tomo.qst_mle(measured)
            point = _state_metrics(est.rho, target, cfg.parties)
            mc = None
            if cfg.poisson and cfg.repeats > 1:

                def trial(rng):
                    e = tomo.qst_mle(tomo.resample_counts(measured, rng))
                    return _state_metrics(e.rho, target, cfg.parties)

                mc = tomo.monte_carlo(trial, cfg.repeats, mc_ss)
            entry["reconstructed"] = {
                k: _stat_block(v, mc[k] if mc else None, cfg.repeats) for k, v in point.items()
            }
            entry["mle"] = {"iterations": est.iterations, "converged": est.converged}
            files = {}
            if out_dir is not None:
                if "density" in cfg.outputs:
                    p = eio.write_matrix_csv(out_dir / f"{cfg.name}_phi{idx}_rho.csv", est.rho)
                    files["density"] = p.name
                if "counts" in cfg.outputs:
                    p = eio.write_counts_csv(out_dir / f"{cfg.name}_phi{idx}_counts.csv", measured)
                    files["counts"] = p.name
            entry["files"] = files
        return entry

    points = _ordered_map(one, list(range(len(cfg.phi_list))), worker_count())
    report = {"scenario": cfg.to_dict(), "results": points}
    recon = [p["reconstructed"] for p in points if "reconstructed" in p]
    if recon:
        report["average"] = {
            k: float(np.mean([r[k]["value"] for r in recon])) for k in recon[0]
        }
    return report


def run_process_tomography(cfg: ScenarioConfig, out_dir: Path | None) -> dict:
    """Full QPT over the {H,V,D,R}^N inputs with Monte-Carlo error bars on F_chi.

    Each input's post-selected output is measured with exposure ``counts``
    times its success probability relative to the brightest input; the
    relative rates are re-estimated from the total counts and restore the
    scale of non-trace-preserving maps.
    """
    n = cfg.parties
    streams = _point_streams(cfg)
    settings = tomo.standard_settings(n)
    inputs = tomo.qpt_input_states(n)
    norm = 3**n

    def one(idx: int) -> dict:
        phi = cfg.phi_list[idx]
        noise_ss, count_ss, mc_ss = streams[idx]
        noise_children = noise_ss.spawn(len(inputs))
        count_children = count_ss.spawn(len(inputs))
        outs, succ = [], []
        for (lab, psi), nss in zip(inputs, noise_children):
            try:
                r = postselected_output(cfg, phi, psi=psi, stream=nss)
                outs.append(r.state)
                succ.append(r.success_probability)
            except ZeroSuccess:
                outs.append(np.zeros((2**n, 2**n), complex))
                succ.append(0.0)
        succ_arr = np.array(succ)
        rel = succ_arr / succ_arr.max()
        ideal = tomo.ideal_process_matrix(ops.to_matrix(cfg.operator.with_relative_phase(cfg.total_phase(phi))))
        exact_chi = tomo.qpt([p for _, p in inputs], outs, weights=succ_arr)
        entry: dict[str, Any] = {
            "phi": phi,
            "simulated": {"processFidelity": metrics.process_fidelity(exact_chi, ideal)},
        }
        if cfg.counts > 0:
            measured = [
                tomo.simulate_counts(o, settings, cfg.counts, seed=cs, poisson=cfg.poisson, efficiency=e)
                for o, e, cs in zip(outs, rel, count_children)
            ]

            def estimate(datasets):
                rhos, weights = [], []
                for recs in datasets:
                    rhos.append(tomo.qst_mle(recs).rho)
                    weights.append(sum(r.count for r in recs) / (cfg.counts * norm))
                return tomo.qpt([p for _, p in inputs], rhos, weights=weights)

            chi = estimate(measured)
            value = metrics.process_fidelity(chi, ideal)
            mc = None
            if cfg.poisson and cfg.repeats > 1:

                def trial(rng):
                    c = estimate([tomo.resample_counts(m, rng) for m in measured])
                    return {"processFidelity": metrics.process_fidelity(c, ideal)}

                mc = tomo.monte_carlo(trial, cfg.repeats, mc_ss)
            entry["reconstructed"] = {
                "processFidelity": _stat_block(value, mc["processFidelity"] if mc else None, cfg.repeats)
            }
        else:
            chi = exact_chi
        files = {}
        if out_dir is not None and "chi" in cfg.outputs:
            p = eio.write_matrix_csv(out_dir / f"{cfg.name}_phi{idx}_chi.csv", chi.chi, chi.basis_labels)
            files["chi"] = p.name
            p = eio.write_matrix_csv(out_dir / f"{cfg.name}_phi{idx}_chi_ideal.csv", ideal.chi, ideal.basis_labels)
            files["chiIdeal"] = p.name
        entry["files"] = files
        return entry

    points = _ordered_map(one, list(range(len(cfg.phi_list))), worker_count())
    return {"scenario": cfg.to_dict(), "results": points}


def toffoli_truth_table(cfg: ScenarioConfig, phi: float = 0.0) -> list[dict]:
    """Post-select every computational-basis input and report the dominant output."""
    n = cfg.parties
    rows = []
    for idx in range(2**n):
        bits = format(idx, f"0{n}b")
        label = bits.replace("0", "H").replace("1", "V")
        psi = np.zeros(2**n, complex)
        psi[idx] = 1
        try:
            r = itf.simulate_scenario(
                cfg.operator, psi, itf.PhaseNoiseModel.noiseless([phi] + [0.0] * (n - 1)), cfg.timing, cfg.amplitudes
            )
        except ZeroSuccess:
            rows.append({"input": label, "output": None, "probability": 0.0, "successProbability": 0.0})
            continue
        diag = np.real(np.diag(r.state))
        k = int(np.argmax(diag))
        out = format(k, f"0{n}b").replace("0", "H").replace("1", "V")
        rows.append(
            {"input": label, "output": out, "probability": float(diag[k]), "successProbability": r.success_probability}
        )
    return rows


def run_multiparty(cfg: ScenarioConfig, out_dir: Path | None) -> dict:
    report = run_state_tomography(cfg, out_dir) if cfg.counts > 0 else _noiseless_states(cfg)
    if cfg.truth_table:
        report["truthTable"] = toffoli_truth_table(cfg)
    return report


def _noiseless_states(cfg: ScenarioConfig) -> dict:
    streams = _point_streams(cfg)
    points = []
    for idx, phi in enumerate(cfg.phi_list):
        res = postselected_output(cfg, phi, stream=streams[idx][0])
        target = ideal_output(cfg, phi)
        points.append(
            {
                "phi": phi,
                "successProbability": res.success_probability,
                "outcomeBreakdown": {str(k): v for k, v in res.outcome_breakdown.items()},
                "lossProbability": res.loss_probability,
                "simulated": _state_metrics(res.state, target, cfg.parties),
            }
        )
    return {"scenario": cfg.to_dict(), "results": points}


def run_decompose(op: ops.BranchSuperposition, bipartition: tuple[int, int] | None = None, text: str = "") -> dict:
    m = ops.to_matrix(op)
    qa, qb = bipartition or (1, op.parties - 1)
    if qa < 1 or qb < 1 or qa + qb != op.parties:
        raise ConfigError(f"bipartition {qa}+{qb} qubits does not split {op.parties} parties")
    da, db = 2**qa, 2**qb
    dec = ops.schmidt_decompose(m, da, db)
    k = ops.schmidt_number(dec)
    return {
        "operatorSpec": text,
        "parties": op.parties,
        "bipartition": [qa, qb],
        "schmidtCoefficients": [float(c) for c in dec.coefficients],
        "schmidtNumber": k,
        "unitary": ops.is_unitary(m),
        "entangled": k > 1,
    }


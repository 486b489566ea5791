"""Run the four-phase state-generation scenario and print a metric table.

    python scripts/dephased_state_tomography.py configs/dephased_hh.json --out results/dephased_hh
"""

import argparse
from pathlib import Path

import numpy as np

from entop import io as eio
from entop import scenarios


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--out", default=None)
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()

    cfg = scenarios.load_config(args.config, seed=args.seed)
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    rep = scenarios.run_state_tomography(cfg, out)
    print(f"{'phi':>8} {'F':>16} {'C':>16} {'P':>16}")
    for p in rep["results"]:
        r = p["reconstructed"]
        cells = [f"{r[k].get('mean', r[k]['value']):.3f}+-{r[k].get('std', 0):.3f}" for k in ("fidelity", "concurrence", "purity")]
        print(f"{p['phi'] / np.pi:6.2f}pi " + " ".join(f"{c:>16}" for c in cells))
    avg = rep["average"]
    print("average: " + ", ".join(f"{k} {v:.3f}" for k, v in avg.items()))
    if out:
        eio.write_report(out / f"{cfg.name}_report.json", rep)


if __name__ == "__main__":
    main()

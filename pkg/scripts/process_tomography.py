"""Process tomography of the configured operations; writes chi CSVs and prints F_chi.

    python scripts/process_tomography.py configs/qpt_zz_xx.json configs/qpt_ii_ixx.json --out results/qpt
"""

import argparse
from pathlib import Path

import numpy as np

from entop import io as eio
from entop import scenarios


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("configs", nargs="+")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    for path in args.configs:
        cfg = scenarios.load_config(path)
        rep = scenarios.run_process_tomography(cfg, out)
        for p in rep["results"]:
            rec = p["reconstructed"]["processFidelity"]
            print(f"{cfg.name:>12} phi={p['phi'] / np.pi:.2f}pi  simulated {p['simulated']['processFidelity']:.3f}  "
                  f"reconstructed {rec.get('mean', rec['value']):.3f}+-{rec.get('std', 0):.3f}")
        if out:
            eio.write_report(out / f"{cfg.name}_report.json", rep)


if __name__ == "__main__":
    main()

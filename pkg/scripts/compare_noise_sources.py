"""Compare one shared interferometer with two independently locked ones.

Both runs use the same per-source sigma; the two-source case dephases with
the summed variance, so every metric drops.

    python scripts/compare_noise_sources.py --sigma 0.5056
"""

import argparse

import numpy as np

from entop import scenarios

PHI4 = [0.0, np.pi / 2, np.pi, 3 * np.pi / 2]


def run(sigma: float, sources: int, counts: int, repeats: int, seed: int) -> dict:
    cfg = scenarios.load_config({
        "operatorSpec": "1*[Z,Z] + 1*[X,X]", "inputState": "HH", "phiList": PHI4,
        "sigma": [sigma] * sources, "sourceCount": sources,
        "counts": counts, "repeats": repeats, "seed": seed,
    })
    return scenarios.run_state_tomography(cfg, None)["average"]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sigma", type=float, default=0.5056)
    ap.add_argument("--counts", type=int, default=10_000)
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    print(f"{'sources':>8} {'fidelity':>9} {'purity':>9} {'concurrence':>12}")
    for n in (1, 2):
        avg = run(args.sigma, n, args.counts, args.repeats, args.seed)
        print(f"{n:>8} {avg['fidelity']:9.4f} {avg['purity']:9.4f} {avg['concurrence']:12.4f}")


if __name__ == "__main__":
    main()

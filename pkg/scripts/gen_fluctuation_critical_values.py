"""Simulate two-sided critical values for the fluctuation test.

Under the null the statistic path behaves like (W(s) - W(s - mu)) / sqrt(mu)
for a standard Brownian motion W on [0, 1], with s ranging over [mu, 1]. For
each window fraction mu this script simulates the supremum of the absolute
value of that functional on a fine grid and stores the 95th percentile.

Regenerate with:  python scripts/gen_fluctuation_critical_values.py
The output is committed at src/favar/_data/fluctuation_critical_values.csv.
"""

from __future__ import annotations

import csv
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from favar._rng import make_rng  # noqa: E402

SEED = 20240801
N_PATHS = 100_000
N_STEPS = 4_000
CHUNK = 1_000
MUS = np.round(np.arange(0.05, 0.96, 0.05), 2)
OUT = Path(__file__).resolve().parents[1] / "src" / "favar" / "_data"


def simulate() -> dict[float, float]:
    rng = make_rng(SEED, stream=0)
    windows = {float(mu): int(round(mu * N_STEPS)) for mu in MUS}
    sup_stats = {mu: np.empty(N_PATHS) for mu in windows}
    done = 0
    start = time.time()
    while done < N_PATHS:
        size = min(CHUNK, N_PATHS - done)
        increments = rng.standard_normal((size, N_STEPS)) / np.sqrt(N_STEPS)
        cs = np.concatenate([np.zeros((size, 1)), np.cumsum(increments, axis=1)], axis=1)
        for mu, k in windows.items():
            spans = cs[:, k:] - cs[:, :-k]
            sup_stats[mu][done : done + size] = np.max(np.abs(spans), axis=1) / np.sqrt(
                k / N_STEPS
            )
        done += size
        print(f"\r{done}/{N_PATHS} paths ({time.time() - start:.0f}s)", end="", flush=True)
    print()
    return {mu: float(np.quantile(s, 0.95)) for mu, s in sup_stats.items()}


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    table = simulate()
    path = OUT / "fluctuation_critical_values.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mu", "two_sided_95"])
        for mu in sorted(table):
            writer.writerow([f"{mu:.2f}", f"{table[mu]:.6f}"])
    print(f"wrote {path} (seed={SEED}, paths={N_PATHS}, grid={N_STEPS})")


if __name__ == "__main__":
    main()

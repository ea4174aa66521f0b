"""Chains of 2, 5 and 20 oscillators: the Otto ratios do not depend on N."""
import argparse
from pathlib import Path

import numpy as np

from _common import load_sweep, run


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", type=Path, default=Path("results"))
    args = parser.parse_args()
    tables = {n: load_sweep(run("sweep", f"chain_n{n}.ini", args.outdir / f"chain_n{n}.csv")) for n in (2, 5, 20)}
    keep = np.array([g not in ("carnot_point", "equal_frequency") for g in tables[2]["regime"]])
    ref = tables[2]["Q1"][keep] / tables[2]["W"][keep]
    for n in (5, 20):
        ratio = tables[n]["Q1"][keep] / tables[n]["W"][keep]
        print(f"N = {n}: max relative difference of Q1/W from N = 2: {np.max(np.abs(ratio / ref - 1)):.2e}")
        print(f"        Q1 at omega_1/omega_2 = 0.25 is {tables[n]['Q1'][24] / tables[2]['Q1'][24]:.3f} x the N = 2 value")


if __name__ == "__main__":
    main()

"""Two-oscillator sweep: heat and work rates versus omega_1/omega_2 and their Otto ratios."""
import argparse
from pathlib import Path

import numpy as np

from _common import load_sweep, run, zero_crossings


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", type=Path, default=Path("results"))
    args = parser.parse_args()
    table = load_sweep(run("sweep", "two_site_regimes.ini", args.outdir / "two_site_regimes.csv"))
    r = table["omega1_over_omega2"]
    print("Q1 changes sign at", zero_crossings(r, table["Q1"]))
    print("W changes sign at", zero_crossings(r, table["W"]))
    fridge = np.array([g == "refrigerator" for g in table["regime"]])
    cop = table["Q1"][fridge] / table["W"][fridge]
    otto = r[fridge] / (1 - r[fridge])
    print(f"max |Q1/W - Otto COP| in refrigerator window: {np.abs(cop - otto).max():.2e}")


if __name__ == "__main__":
    main()

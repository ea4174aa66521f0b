"""Oracle cross-checks: truncated-Fock moments and collision-model rates as tau -> 0."""
import argparse
import json
from pathlib import Path

from _common import run


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", type=Path, default=Path("results"))
    args = parser.parse_args()
    oracle = json.loads(run("oracle-compare", "oracle.ini", args.outdir / "oracle.json").read_text())
    print(f"Gaussian vs Fock max deviation {oracle['max_deviation']:.2e}, low confidence: {oracle['low_confidence']}")
    out = run("collision", "collision.ini", args.outdir / "collision.csv")
    extra = json.loads(out.with_name(out.name + ".meta.json").read_text())["extrapolation"]
    print("intercepts:", extra["intercepts"])
    print("closed form:", extra["closed_form"])


if __name__ == "__main__":
    main()

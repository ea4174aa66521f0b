"""Strong-damping sweeps with pair creation: machine windows shrink as eta grows."""
import argparse
from pathlib import Path


from _common import load_sweep, run


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", type=Path, default=Path("results"))
    args = parser.parse_args()
    for tag, eta in (("0", 0.0), ("03", 0.3), ("06", 0.6)):
        table = load_sweep(run("sweep", f"pairing_eta{tag}.ini", args.outdir / f"pairing_eta{tag}.csv"))
        r = table["omega1_over_omega2"]
        step = r[1] - r[0]
        counts = {g: sum(x == g for x in table["regime"]) for g in ("refrigerator", "engine", "heater")}
        print(f"eta = {eta}: " + ", ".join(f"{g} ~{n * step:.3f}" for g, n in counts.items()))


if __name__ == "__main__":
    main()

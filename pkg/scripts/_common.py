"""Helpers shared by the reproduction scripts."""
import csv
import sys
from pathlib import Path

import numpy as np

from lmechain import cli

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"


def run(command, config, out):
    out = Path(out)
    code = cli.main(["--out", str(out), command, str(CONFIGS / config)])
    if code != 0:
        sys.exit(code)
    return out


def load_sweep(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    table = {k: np.array([float(r[k]) for r in rows]) for k in ("omega1_over_omega2", "Q1", "Q2", "W", "Pi")}
    table["regime"] = [r["regime"] for r in rows]
    return table


def zero_crossings(x, y):
    out = []
    for i in range(len(x) - 1):
        if y[i] == 0 or y[i] * y[i + 1] < 0:
            out.append(x[i] - y[i] * (x[i + 1] - x[i]) / (y[i + 1] - y[i]))
    return np.array(out)

"""Command-line front end: ``lmechain {steady,sweep,oracle-compare,collision} CONFIG``.

Rates in every output are in units of ``omega_N`` (energy) per unit time
``1/omega_N``, i.e. divided by ``omega_N**2``; entropy production rates are
divided by ``omega_N``. Data files carry no timestamps; run metadata goes in
a ``.meta.json`` sidecar next to ``--out``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .collision import rate_extrapolation
from .config import ConfigError, ScenarioConfig, load_config
from .errors import (
    DegenerateKernel,
    DimensionBudget,
    InconsistentSigns,
    InsufficientSamples,
    NonHurwitz,
    SolverSingular,
    Unphysical,
)
from .fock import build_model, fock_moments, solve_model
from .gaussian import mode_moments, steady_state
from .thermo import Regime, steady_report

EXIT_OK, EXIT_CONFIG, EXIT_UNSTABLE, EXIT_SOLVER, EXIT_BUDGET, EXIT_SAMPLES = 0, 2, 3, 4, 5, 6
SWEEP_HEADER = ["omega1_over_omega2", "Q1", "Q2", "W", "Pi", "regime", "fom"]
COLLISION_HEADER = ["tau", "dQ1_rate", "dQN_rate", "dW_rate", "Sigma"]
DEFAULT_COLLISION_DIM = 12


def fmt(x: Optional[float]) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def _spec_dict(spec) -> dict:
    d = asdict(spec)
    d["frequencies"] = list(spec.frequencies)
    d["bath_sites"] = list(spec.bath_sites)
    return d


def _steady_record(config: ScenarioConfig) -> dict:
    spec = config.spec
    report, cov = steady_report(spec)
    s2 = config.omega_last ** 2
    return {
        "spec": _spec_dict(spec),
        "units": "rates / omega_N**2, Pi / omega_N",
        "Q1": report.q_dot[0] / s2,
        "QN": report.q_dot[1] / s2,
        "W": report.w_dot / s2,
        "Pi": report.entropy_rate / config.omega_last,
        "first_law_residual": report.first_law_residual / s2,
        "regime": report.regime.value,
        "fom": report.figure_of_merit,
        "internal_current": None if report.internal_current is None else report.internal_current / s2,
        "covariance": cov.matrix.tolist(),
    }


def cmd_steady(config: ScenarioConfig) -> tuple[str, dict]:
    record = _steady_record(config)
    summary = f"{record['regime']}: Q1={record['Q1']:.6g} QN={record['QN']:.6g} W={record['W']:.6g}"
    return json.dumps(record, indent=2) + "\n", {"summary": summary}


def _sweep_row(config: ScenarioConfig, ratio: float) -> list[str]:
    spec = config.spec_at_ratio(ratio)
    s2 = config.omega_last ** 2
    try:
        report, _ = steady_report(spec)
    except NonHurwitz:
        nan = float("nan")
        return [fmt(ratio), fmt(nan), fmt(nan), fmt(nan), fmt(nan), Regime.UNSTABLE.value, ""]
    return [
        fmt(ratio),
        fmt(report.q_dot[0] / s2),
        fmt(report.q_dot[1] / s2),
        fmt(report.w_dot / s2),
        fmt(report.entropy_rate / config.omega_last),
        report.regime.value,
        fmt(report.figure_of_merit),
    ]


def sweep_rows(config: ScenarioConfig, workers: Optional[int] = None) -> list[list[str]]:
    if config.sweep is None:
        raise ConfigError("sweep", "section missing")
    ratios = config.sweep.ratios()
    workers = workers or min(8, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: _sweep_row(config, float(r)), ratios))


def _csv(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def cmd_sweep(config: ScenarioConfig) -> tuple[str, dict]:
    rows = sweep_rows(config)
    regimes = sorted({r[5] for r in rows})
    return _csv(SWEEP_HEADER, rows), {"summary": f"{len(rows)} rows; regimes: {', '.join(regimes)}"}


def cmd_oracle_compare(config: ScenarioConfig) -> tuple[str, dict]:
    if config.fock is None:
        raise ConfigError("fock", "section missing")
    spec = config.spec
    gauss = mode_moments(steady_state(spec), spec)
    model = build_model(spec, config.fock.dim, config.fock.budget)
    fock = fock_moments(solve_model(model), model)
    dn = np.abs(gauss.number - fock.number)
    dm = np.abs(gauss.anomalous - fock.anomalous)
    record = {
        "spec": _spec_dict(spec),
        "dim": config.fock.dim,
        "number_deviation": dn.tolist(),
        "anomalous_deviation": dm.tolist(),
        "max_deviation": float(max(dn.max(), dm.max())),
        "top_level_population": fock.top_population.tolist(),
        "low_confidence": fock.low_confidence,
    }
    summary = f"max deviation {record['max_deviation']:.3e}" + (" (LowConfidence)" if fock.low_confidence else "")
    return json.dumps(record, indent=2) + "\n", {"summary": summary}


def cmd_collision(config: ScenarioConfig) -> tuple[str, dict]:
    coll = config.collision
    if coll is None:
        raise ConfigError("collision", "section missing")
    if len(coll.taus) < 3:
        raise InsufficientSamples(f"need at least three interaction times, got {len(coll.taus)}")
    dim = coll.dim or (config.fock.dim if config.fock else DEFAULT_COLLISION_DIM)
    rep = rate_extrapolation(config.spec, coll.g, dim, coll.taus, coll.strokes)
    s2 = config.omega_last ** 2
    rows = [
        [fmt(tau), fmt(q[0] / s2), fmt(q[1] / s2), fmt(w / s2), fmt(sig)]
        for tau, q, w, sig in zip(rep.taus, rep.heat_rates, rep.work_rates, rep.entropy_production)
    ]

    def rates(r):
        return None if r is None else {"Q1": r.q_cold / s2, "QN": r.q_hot / s2, "W": r.w_dot / s2}

    extra = {
        "dim": dim,
        "g": coll.g if coll.g is not None else math.sqrt(config.spec.gamma),
        "intercepts": {"Q1": rep.heat_intercepts[0] / s2, "QN": rep.heat_intercepts[1] / s2,
                       "W": rep.work_intercept / s2},
        "slopes": {"Q1": rep.heat_slopes[0] / s2, "QN": rep.heat_slopes[1] / s2, "W": rep.work_slope / s2},
        "closed_form": rates(rep.closed_form),
        "master_equation_at_held_state": rates(rep.lme_rates),
        "relative_error": {k: float(v) for k, v in rep.relative_errors().items()},
        "min_sigma": float(rep.entropy_production.min()),
        "max_first_law_residual": float(rep.first_law_residuals.max()),
        "low_confidence": rep.low_confidence,
    }
    summary = "relative error " + ", ".join(f"{k}={v:.2e}" for k, v in extra["relative_error"].items())
    return _csv(COLLISION_HEADER, rows), {"summary": summary, "extrapolation": extra}


COMMANDS = {
    "steady": cmd_steady,
    "sweep": cmd_sweep,
    "oracle-compare": cmd_oracle_compare,
    "collision": cmd_collision,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lmechain", description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, help="output file (default: stdout)")
    parser.add_argument("--quiet", action="store_true", help="suppress the summary line on stderr")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("config", type=Path)
    return parser


def _write_outputs(out: Optional[Path], data: str, meta: dict) -> None:
    if out is None:
        sys.stdout.write(data)
        if "extrapolation" in meta:
            sys.stdout.write(json.dumps(meta["extrapolation"], indent=2) + "\n")
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(data)
    out.with_name(out.name + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    def note(msg: str) -> None:
        if not args.quiet:
            print(msg, file=sys.stderr)

    try:
        config = load_config(args.config)
        data, meta = COMMANDS[args.command](config)
    except ConfigError as exc:
        note(f"config error: {exc}")
        return EXIT_CONFIG
    except NonHurwitz as exc:
        note(f"unstable: {exc}")
        return EXIT_UNSTABLE
    except (SolverSingular, DegenerateKernel, Unphysical, InconsistentSigns) as exc:
        note(f"solver failure: {exc}")
        return EXIT_SOLVER
    except DimensionBudget as exc:
        note(f"budget exceeded: {exc}")
        return EXIT_BUDGET
    except InsufficientSamples as exc:
        note(f"insufficient samples: {exc}")
        return EXIT_SAMPLES
    meta = {
        "command": args.command,
        "config": str(args.config),
        "version": __version__,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        **meta,
    }
    _write_outputs(args.out, data, meta)
    note(meta["summary"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

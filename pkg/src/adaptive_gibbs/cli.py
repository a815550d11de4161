"""Experiment runner.

Every subcommand reads an optional flat ``key=value`` config file, applies
``--key value`` overrides, and writes into one output directory:
``config.txt`` (the resolved config), ``summary.json`` and CSV files.

Exit codes: 0 success, 1 runtime failure or unmet criterion, 2 usage or
config error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import shutil
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import counterexample as cx
from . import examples as ex
from .core import substream
from .errors import AdaptiveGibbsError, ConfigError
from .samplers import format_real
from .verify import run_all

log = logging.getLogger("adaptive_gibbs")

DEFAULT_SEED = 1729


@dataclass(frozen=True)
class Param:
    name: str
    kind: Callable
    default: object
    help: str = ""


def _float(s) -> float:
    return float(s)


def _int(s) -> int:
    v = float(s)
    if v != int(v):
        raise ValueError(f"{s!r} is not an integer")
    return int(v)


def _text(s) -> str:
    return str(s)


COMMON = [Param("seed", _int, DEFAULT_SEED, "base seed for all random streams")]

PARAMS: dict[str, list[Param]] = {
    "counterexample": COMMON + [
        Param("replicas", _int, 100),
        Param("steps", _int, 100_000),
        Param("threshold", _float, 500.0, "level X_n1 must exceed at the end"),
        Param("b1", _float, cx.DEFAULT_B1),
        Param("thin", _int, 100, "keep every thin-th row in trace CSVs"),
        Param("batches", _int, 4, "seed batches for the growth-rate stability check"),
        Param("stability", _float, 0.2, "allowed relative spread of batch growth rates"),
    ],
    "truncated": COMMON + [
        Param("M", _int, 20),
        Param("n_max", _int, 1_000_000),
        Param("grid_points", _int, 60),
        Param("threshold", _float, 1e-3),
        Param("b1", _float, cx.DEFAULT_B1),
    ],
    "verify-bounds": COMMON + [
        Param("pairs", _int, 100),
        Param("chains", _int, 20),
    ],
    "example2": COMMON + [
        Param("p", _float, 0.5),
        Param("n_max", _int, 40),
        Param("tol", _float, 1e-3),
    ],
    "glmm": COMMON + [
        Param("strategy", _text, "accept44"),
        Param("steps", _int, 1_000_000),
        Param("replicas", _int, 1),
        Param("n_obs", _int, 5),
        Param("data_seed", _int, ex.GLMM_DATA_SEED),
        Param("gamma_low", _float, 0.01),
        Param("gamma_high", _float, 100.0),
        Param("gamma0", _float, 5.76, "starting (and, for fixed, constant) proposal variance"),
        Param("burn_in", _float, 0.1),
        Param("batches", _int, 32),
    ],
}


def read_config_file(path: Path) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def resolve_config(command: str, file_values: dict[str, str], overrides: dict[str, str]) -> dict:
    params = {p.name: p for p in PARAMS[command]}
    raw = {p.name: p.default for p in params.values()}
    for source in (file_values, overrides):
        for key, value in source.items():
            if key not in params:
                raise ConfigError(f"unknown key {key!r} for {command}")
            raw[key] = value
    cfg = {}
    for key, p in params.items():
        try:
            cfg[key] = p.kind(raw[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {raw[key]!r}") from exc
    return cfg


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def validate(command: str, cfg: dict) -> None:
    if command == "counterexample":
        _require(cfg["steps"] >= 1, "steps must be at least 1")
        _require(cfg["replicas"] >= 1, "replicas must be at least 1")
        _require(cfg["thin"] >= 1, "thin must be at least 1")
        _require(cfg["b1"] > 0, "b1 must be positive")
        _require(cfg["batches"] >= 1, "batches must be at least 1")
    elif command == "truncated":
        _require(2 <= cfg["M"] <= 1000, "M must lie in [2, 1000]")
        _require(cfg["n_max"] >= 1, "n_max must be at least 1")
        _require(cfg["grid_points"] >= 2, "grid_points must be at least 2")
        _require(cfg["b1"] > 0, "b1 must be positive")
    elif command == "verify-bounds":
        _require(cfg["pairs"] >= 1 and cfg["chains"] >= 1, "pairs and chains must be positive")
    elif command == "example2":
        _require(0.0 < cfg["p"] < 1.0, "p must lie in (0, 1)")
        _require(cfg["n_max"] >= 1, "n_max must be at least 1")
    elif command == "glmm":
        _require(cfg["strategy"] in ex.STRATEGIES,
                 f"strategy must be one of {', '.join(ex.STRATEGIES)}")
        _require(cfg["steps"] >= 1000, "steps must be at least 1000")
        _require(cfg["replicas"] >= 1, "replicas must be at least 1")
        _require(cfg["n_obs"] >= 1, "n_obs must be at least 1")
        _require(0 < cfg["gamma_low"] <= cfg["gamma0"] <= cfg["gamma_high"],
                 "need 0 < gamma_low <= gamma0 <= gamma_high")
        _require(0.0 <= cfg["burn_in"] < 1.0, "burn_in must lie in [0, 1)")
        _require(cfg["batches"] >= 2, "batches must be at least 2")


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

class RunDir:
    def __init__(self, path: Path, force: bool):
        if path.exists() and any(path.iterdir()) and not force:
            raise ConfigError(f"{path} exists and is not empty; pass --force to overwrite")
        path.mkdir(parents=True, exist_ok=True)
        self.path = path

    def write_config(self, cfg: dict) -> None:
        lines = [f"{k}={_fmt(v)}" for k, v in sorted(cfg.items())]
        (self.path / "config.txt").write_text("\n".join(lines) + "\n")

    def write_summary(self, command: str, cfg: dict, result: dict, passed: bool) -> None:
        doc = {"command": command, "config": cfg, "passed": passed, **result}
        (self.path / "summary.json").write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")

    def write_table(self, name: str, header: list[str], rows) -> None:
        with open(self.path / name, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v).lower() if v is not None else ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_real(v)
    return str(v)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_counterexample(cfg: dict, out: RunDir) -> int:
    traces = out.path / "traces"
    if traces.exists():
        shutil.rmtree(traces)
    traces.mkdir()

    def save(trace):
        with open(traces / f"replica_{trace.replica_index:04d}.csv", "w", newline="") as fh:
            trace.write_csv(fh, thin=cfg["thin"])

    summary = cx.run_transience(cfg["replicas"], cfg["steps"], cfg["seed"], cfg["threshold"],
                                b1=cfg["b1"], batches=cfg["batches"], on_trace=save)
    result = summary.as_dict()
    pooled = summary.pooled_growth
    spread = max(abs(g - pooled) for g in summary.batch_growth) / pooled if pooled > 0 else math.inf
    result["growth_relative_spread"] = spread
    result["growth_stable"] = bool(pooled > 0 and spread <= cfg["stability"])
    out.write_summary("counterexample", cfg, result, True)
    log.info("fraction above %s: %s", cfg["threshold"], summary.frac_exceeding_threshold)
    return 0


def _eventually_decreasing(values: list[float], tail: int = 10) -> bool:
    last = values[-tail:]
    return all(b <= a for a, b in zip(last, last[1:]))


def cmd_truncated(cfg: dict, out: RunDir) -> int:
    schedule = cx.StairSchedule(cfg["b1"])
    grid = cx.log_grid(cfg["n_max"], cfg["grid_points"])
    curve = cx.truncated_tv_curve(cfg["M"], grid, cx.StairState(1, 1), schedule)
    out.write_table("tv_curve.csv", ["n", "tv"], curve)
    tvs = [tv for _, tv in curve]
    below = [n for n, tv in curve if tv < cfg["threshold"]]
    passed = tvs[-1] < cfg["threshold"]
    result = {
        "final_n": curve[-1][0],
        "final_tv": tvs[-1],
        "min_tv": min(tvs),
        "first_n_below_threshold": below[0] if below else None,
        "eventually_decreasing": _eventually_decreasing(tvs),
        "final_a": schedule.a(curve[-1][0]) if curve[-1][0] >= 1 else None,
    }
    out.write_summary("truncated", cfg, result, passed)
    log.info("final TV %s (threshold %s)", tvs[-1], cfg["threshold"])
    return 0 if passed else 1


def cmd_verify_bounds(cfg: dict, out: RunDir, negate: bool = False) -> int:
    rows = run_all(substream(cfg["seed"]), cfg["pairs"], cfg["chains"])
    if negate:
        rows[0].violations = max(1, rows[0].violations)
    header = ["check", "model", "epsilon", "cases", "violations", "worst_ratio", "passed"]
    out.write_table("bounds.csv", header, ([r.as_dict()[h] for h in header] for r in rows))
    worst: dict[str, float] = {}
    for r in rows:
        key = f"{r.check}/{r.model}"
        worst[key] = max(worst.get(key, 0.0), r.worst_ratio)
    passed = all(r.passed for r in rows)
    result = {"rows": [r.as_dict() for r in rows], "worst_by_model": worst,
              "selftest_negate": negate}
    out.write_summary("verify-bounds", cfg, result, passed)
    return 0 if passed else 1


def cmd_example2(cfg: dict, out: RunDir) -> int:
    gaps = ex.example2_gaps(cfg["p"], cfg["n_max"])
    out.write_table("gaps.csv", ["n", "q_gap", "p_gap_lower"],
                    ((g.n, g.q_gap, g.p_gap_lower) for g in gaps))
    last = gaps[-1]
    p_err = abs(last.p_gap_lower - (1.0 - cfg["p"]))
    passed = p_err < cfg["tol"] and last.q_gap < cfg["tol"]
    result = {"q_gap_final": last.q_gap, "p_gap_lower_final": last.p_gap_lower,
              "p_gap_error": p_err, "limit": 1.0 - cfg["p"]}
    out.write_summary("example2", cfg, result, passed)
    return 0 if passed else 1


def cmd_glmm(cfg: dict, out: RunDir) -> int:
    model = ex.GlmmModel.synthetic(cfg["n_obs"], cfg["data_seed"])
    scale_range = ex.ScaleRange(cfg["gamma_low"], cfg["gamma_high"])
    summary = ex.glmm_run(model, cfg["strategy"], steps=cfg["steps"], replicas=cfg["replicas"],
                          seed=cfg["seed"], gamma0=[cfg["gamma0"]] * model.dimension,
                          scale_range=scale_range, burn_in=cfg["burn_in"], batches=cfg["batches"])
    result = summary.as_dict()
    result["data"] = list(model.y)
    out.write_summary("glmm", cfg, result, True)
    return 0


COMMANDS = {
    "counterexample": cmd_counterexample,
    "truncated": cmd_truncated,
    "verify-bounds": cmd_verify_bounds,
    "example2": cmd_example2,
    "glmm": cmd_glmm,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adaptive-gibbs", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, params in PARAMS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="flat key=value file")
        sp.add_argument("--out", type=Path, help=f"output directory (default runs/{name})")
        sp.add_argument("--force", action="store_true", help="write into a non-empty directory")
        if name == "verify-bounds":
            sp.add_argument("--selftest-negate", action="store_true",
                            help="mark one check as failed to test the harness")
        for p in params:
            flags = [f"--{p.name}"]
            if "_" in p.name:
                flags.append(f"--{p.name.replace('_', '-')}")
            sp.add_argument(*flags, dest=f"set_{p.name}", default=None,
                            help=f"{p.help} (default {p.default})".strip())
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    command = args.command
    try:
        file_values = read_config_file(args.config) if args.config else {}
        overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("set_") and v is not None}
        cfg = resolve_config(command, file_values, overrides)
        validate(command, cfg)
        out = RunDir(args.out or Path("runs") / command, args.force)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        out.write_config(cfg)
        if command == "verify-bounds":
            code = cmd_verify_bounds(cfg, out, args.selftest_negate)
        else:
            code = COMMANDS[command](cfg, out)
    except (AdaptiveGibbsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out.path / "summary.json")
    return code


if __name__ == "__main__":
    sys.exit(main())

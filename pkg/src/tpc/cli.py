"""Command line entry point: ``tpc run`` and ``tpc compare``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import config as config_mod
from .config import ConfigError, GovernorConfig, RegimeKind, RegimeSpec
from .harness import (ComparisonError, InvariantError, RunMetrics, RunSummary, check_records,
                      compare, run, write_csv, write_plot_data, write_report)

log = logging.getLogger("tpc")

MANIFEST = "run.json"


def parse_seeds(text: str) -> list[int]:
    """``"7"`` -> [7]; ``"0..4"`` -> [0, 1, 2, 3, 4] (inclusive)."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo_i, hi_i = int(lo), int(hi)
        if hi_i < lo_i:
            raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
        return list(range(lo_i, hi_i + 1))
    return [int(text)]


def _slug(regime: RegimeSpec) -> str:
    return regime.label.replace("@", "-")


def _one(args: tuple[GovernorConfig, RegimeSpec, int, str, bool]) -> tuple[int, dict]:
    cfg, regime, seed, out, plot = args
    result = run(cfg, regime, seed)
    check_records(result.records, cfg)
    out_dir = Path(out)
    write_csv(result.records, out_dir / f"records_{_slug(regime)}_seed{seed}.csv")
    if plot:
        write_plot_data(result.records, out_dir / f"series_{_slug(regime)}_seed{seed}.dat")
    return seed, dataclasses.asdict(result.metrics)


def build_config(args: argparse.Namespace) -> GovernorConfig:
    cfg = config_mod.load(args.config) if args.config else GovernorConfig()
    overrides = dict(item.split("=", 1) for item in args.set or [])
    if args.target is not None:
        overrides["target_count"] = str(args.target)
    cfg = config_mod.apply_overrides(cfg, overrides)
    config_mod.validate(cfg)
    return cfg


def cmd_run(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    kind = RegimeKind(args.regime)
    budget = args.budget
    if kind is RegimeKind.CUTOFF and budget is None:
        budget = cfg.target_count
    regime = RegimeSpec(kind, budget if kind is RegimeKind.CUTOFF else None)
    seeds = args.seeds if args.seeds is not None else [args.seed]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, regime, s, str(out), args.plot_data) for s in seeds]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_one, jobs))
    else:
        results = [_one(j) for j in jobs]

    manifest = {
        "regime": kind.value,
        "cutoff_budget": regime.cutoff_budget,
        "config": config_mod.serialize(cfg),
        "runs": [{"seed": seed, "metrics": metrics} for seed, metrics in results],
    }
    (out / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                encoding="utf-8")
    for seed, m in results:
        log.info("%s seed=%d final=%d err=%.4f rmse=%.4f", regime.label, seed, m["final_count"],
                 m["final_error_fraction"], m["tracking_rmse_fraction"])
    return 0


def load_manifest(path: Path) -> list[RunSummary]:
    data = json.loads((path / MANIFEST).read_text(encoding="utf-8"))
    cfg = config_mod.parse(data["config"])
    regime = RegimeSpec(RegimeKind(data["regime"]), data.get("cutoff_budget"))
    return [RunSummary(regime, r["seed"], RunMetrics(**r["metrics"]), cfg) for r in data["runs"]]


def cmd_compare(args: argparse.Namespace) -> int:
    out = Path(args.out)
    dirs = [Path(d) for d in args.dirs]
    if not dirs:
        dirs = sorted(p.parent for p in out.glob(f"*/{MANIFEST}"))
    if not dirs:
        raise ComparisonError(f"no run directories found under {out}")
    runs = [s for d in dirs for s in load_manifest(d)]
    report = compare(runs, tolerance=args.tolerance)
    out.mkdir(parents=True, exist_ok=True)
    write_report(report, out / "report.json")
    for label, agg in report["regimes"].items():
        log.info("%-16s final_err=%.4f rmse=%.4f compliant=%s", label,
                 agg["final_error_fraction"]["mean"], agg["tracking_rmse_fraction"]["mean"],
                 agg["capacity_compliant"])
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tpc", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one regime over one or more seeds")
    p_run.add_argument("--config", help="key=value config file (defaults if omitted)")
    p_run.add_argument("--regime", required=True, choices=[k.value for k in RegimeKind])
    p_run.add_argument("--budget", type=int, help="cutoff budget (defaults to target_count)")
    p_run.add_argument("--target", type=int, help="override target_count")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override any config key; repeatable")
    seeds = p_run.add_mutually_exclusive_group()
    seeds.add_argument("--seed", type=int, default=0)
    seeds.add_argument("--seeds", type=parse_seeds, help="inclusive range A..B")
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--plot-data", action="store_true",
                       help="also write (t, N) and (t, N*) series per run")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="aggregate run directories into a report")
    p_cmp.add_argument("--out", required=True)
    p_cmp.add_argument("--tolerance", type=float, default=0.02)
    p_cmp.add_argument("dirs", nargs="*")
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, InvariantError, ComparisonError) as exc:
        log.error("%s", exc)
        return 2
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point.

Exit codes: 0 success, 1 degeneracy escalated by ``--strict``, 2 usage or
config error. Set ``WEALTHSIM_WORKERS`` to run seeds in parallel processes.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .engine import run_ensemble
from .exchange import Model
from .experiment import (
    ConfigError, ParsedConfig, degenerate, hist_csv, load_config, serialize_config,
    sweep_csv, sweep_q, sweep_xi, write_ensemble, write_manifest, write_text,
)
from .figures import FIGURES, reproduce_figure
from .metrics import Binning, histogram

EXIT_OK, EXIT_DEGENERATE, EXIT_USAGE = 0, 1, 2


def _load(path: str) -> ParsedConfig:
    parsed = load_config(path)
    for d in parsed.diagnostics:
        print(f"{path}:{d}", file=sys.stderr)
    return parsed


def _values(text: str, kind):
    try:
        return [kind(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"malformed --values list {text!r}") from None


def cmd_run(args) -> int:
    parsed = _load(args.config)
    n_seeds = args.seeds or parsed.n_seeds
    config = parsed.config
    result = run_ensemble(config, n_seeds)
    out = Path(args.out)
    files = write_ensemble(out, "run", result)
    binning = Binning.LOG if config.exchange.model is Model.L else Binning.LINEAR
    for tr in result.per_seed:
        files.append(write_text(out / f"run_seed{tr.seed}.hist.csv",
                                hist_csv(histogram(tr.final_wealth, binning, args.bins))))
    write_manifest(out / "manifest.txt", [
        ("command", "run"),
        ("config", serialize_config(config, n_seeds).strip().replace("\n", " ")),
        *[("file", p.name) for p in files],
    ])
    print(f"t={int(result.times[-1])} mean_gini={result.final_mean():.6g} "
          f"std_gini={result.final_std():.3g} seeds={n_seeds} out={out}")
    flags = {f for tr in result.per_seed for s in tr.snapshots for f in s.flags}
    if args.strict and degenerate(flags):
        print("degenerate redistribution recorded: " + ", ".join(sorted(f.value for f in flags)), file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def _cmd_sweep(args, key: str) -> int:
    parsed = _load(args.config)
    n_seeds = args.seeds or parsed.n_seeds
    config = parsed.config
    if args.total_steps is not None:
        config = replace(config, total_steps=args.total_steps, snapshot_times=None)
    try:
        if key == "xi":
            rows = sweep_xi(config, _values(args.values, float), n_seeds)
        else:
            rows = sweep_q(config, _values(args.values, int), n_seeds)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = sweep_csv(rows, key)
    out = Path(args.out)
    path = write_text(out / f"sweep_{key}.csv", text)
    write_manifest(out / "manifest.txt", [
        ("command", f"sweep-{key}"),
        ("config", serialize_config(config, n_seeds).strip().replace("\n", " ")),
        ("values", args.values),
        ("file", path.name),
    ])
    sys.stdout.write(text)
    if args.strict and any(r.flag_rate > 0 for r in rows):
        return EXIT_DEGENERATE
    return EXIT_OK


def cmd_figure(args) -> int:
    files = reproduce_figure(args.id, args.out, args.seeds)
    for p in files:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wealthsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment file as a seed ensemble")
    p.add_argument("config")
    p.add_argument("--out", default="out")
    p.add_argument("--seeds", type=int, default=None, help="override n_seeds")
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--strict", action="store_true", help="exit 1 on degenerate redistribution")
    p.set_defaults(func=cmd_run)

    for key, kind_help in (("xi", "transfer rates"), ("q", "quantile divisors")):
        p = sub.add_parser(f"sweep-{key}", help=f"sweep {kind_help} over an experiment file")
        p.add_argument("config")
        p.add_argument("--values", required=True, help=f"comma separated {kind_help}")
        p.add_argument("--seeds", type=int, default=None)
        p.add_argument("--total-steps", type=int, default=None)
        p.add_argument("--out", default="out")
        p.add_argument("--strict", action="store_true")
        p.set_defaults(func=lambda a, key=key: _cmd_sweep(a, key))

    p = sub.add_parser("figure", help="reproduce one figure's tables")
    p.add_argument("id", type=str.upper, choices=FIGURES)
    p.add_argument("--out", default="out")
    p.add_argument("--seeds", type=int, default=10)
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"{getattr(args, 'config', '')}:{d}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

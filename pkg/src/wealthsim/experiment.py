"""Experiment files, CSV serialization and parameter sweeps.

An experiment file is flat ``key=value`` UTF-8 text; ``#`` starts a comment.
Unknown keys are rejected and missing keys take defaults (N = 1000,
initial wealth 1, lambda = 0.25).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .engine import EnsembleResult, RunConfig, Trajectory, default_snapshot_times, run_ensemble
from .exchange import ExchangeParams, Model
from .flags import Flag, format_flags, parse_flags
from .metrics import Histogram, MetricsSnapshot
from .redistribution import RedistributionParams, Scheme

DEFAULTS: dict[str, str] = {
    "model": "R",
    "redistribution": "none",
    "n_agents": "1000",
    "initial_wealth": "1.0",
    "lambda": "0.25",
    "rho": "0.0",
    "delta_w": "0.0",
    "xi": "0.5",
    "t_p": "100000",
    "q": "1",
    "total_steps": "100000",
    "snapshots": "auto",
    "seed": "0",
    "n_seeds": "1",
    "delta_bias": "0.0",
}
REQUIRED = ("seed",)

TRACE_HEADER = ["t", "gini", "total", "max", "min", "neg_fraction", "flags"]
HIST_HEADER = ["bin_lo", "bin_hi", "count", "underflow_total"]


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class ConfigError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


@dataclass
class ParsedConfig:
    config: RunConfig
    n_seeds: int = 1
    diagnostics: list[Diagnostic] = field(default_factory=list)


def _fmt(x: float) -> str:
    return repr(float(x))


def _num(x: float) -> str:
    """17 significant digits; round-trips every double."""
    return format(float(x), ".17g")


def _int(text: str) -> int:
    return int(text, 10)


def _real(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("not a finite number")
    return value


# key -> (parser, check, message)
_RULES = {
    "n_agents": (_int, lambda v: v >= 2, "n_agents must be an integer >= 2"),
    "initial_wealth": (_real, lambda v: True, ""),
    "lambda": (_real, lambda v: 0.0 <= v < 1.0, "lambda must satisfy 0 <= lambda < 1"),
    "rho": (_real, lambda v: v >= 0.0, "rho must be >= 0"),
    "delta_w": (_real, lambda v: v >= 0.0, "delta_w must be >= 0"),
    "xi": (_real, lambda v: 0.0 <= v <= 1.0, "xi must satisfy 0 <= xi <= 1"),
    "t_p": (_int, lambda v: v >= 1, "t_p must be an integer >= 1"),
    "q": (_int, lambda v: v >= 1, "q must be an integer >= 1"),
    "total_steps": (_int, lambda v: v >= 0, "total_steps must be an integer >= 0"),
    "seed": (_int, lambda v: 0 <= v < 2**64, "seed must be a 64-bit unsigned integer"),
    "n_seeds": (_int, lambda v: v >= 1, "n_seeds must be an integer >= 1"),
    "delta_bias": (_real, lambda v: True, ""),
}
_CHOICES = {
    "model": {m.value: m for m in Model},
    "redistribution": {s.value: s for s in Scheme},
}


def parse_config(text: str) -> ParsedConfig:
    """Parse an experiment file into a validated config.

    Raises :class:`ConfigError` carrying every error found. A missing seed is
    reported as a warning diagnostic on the returned object.
    """
    errors: list[Diagnostic] = []
    raw: dict[str, tuple[str, int, int]] = {}

    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            col = len(body) - len(body.lstrip()) + 1
            errors.append(Diagnostic(lineno, col, f"expected key=value, got {body.strip()!r}"))
            continue
        key_part, value_part = body.split("=", 1)
        key = key_part.strip()
        key_col = len(key_part) - len(key_part.lstrip()) + 1
        value_col = len(key_part) + 2 + (len(value_part) - len(value_part.lstrip()))
        if key not in DEFAULTS:
            errors.append(Diagnostic(lineno, key_col, f"unknown key {key!r}"))
            continue
        if key in raw:
            errors.append(Diagnostic(lineno, key_col, f"duplicate key {key!r} (first on line {raw[key][1]})"))
            continue
        raw[key] = (value_part.strip(), lineno, value_col)

    warnings = [
        Diagnostic(0, 0, f"required key {key!r} missing, using default {DEFAULTS[key]}", "warning")
        for key in REQUIRED if key not in raw
    ]

    values: dict[str, object] = {}
    where: dict[str, tuple[int, int]] = {}
    for key, default in DEFAULTS.items():
        text_value, lineno, col = raw.get(key, (default, 0, 0))
        where[key] = (lineno, col)
        if key in _CHOICES:
            choice = _CHOICES[key].get(text_value)
            if choice is None:
                allowed = "|".join(_CHOICES[key])
                errors.append(Diagnostic(lineno, col, f"{key} must be one of {allowed}, got {text_value!r}"))
            values[key] = choice
            continue
        if key == "snapshots":
            values[key] = text_value
            continue
        parser, check, message = _RULES[key]
        try:
            value = parser(text_value)
        except ValueError:
            kind = "integer" if parser is _int else "number"
            errors.append(Diagnostic(lineno, col, f"malformed {kind} for {key}: {text_value!r}"))
            continue
        if not check(value):
            errors.append(Diagnostic(lineno, col, f"{message}, got {text_value}"))
            continue
        values[key] = value

    snapshots = None
    if "total_steps" in values:
        snapshots = _parse_snapshots(values["snapshots"], values["total_steps"], *where["snapshots"], errors)

    if errors:
        raise ConfigError(sorted(errors, key=lambda d: (d.line, d.column)))

    config = RunConfig(
        exchange=ExchangeParams(
            model=values["model"],
            lam=values["lambda"],
            rho=values["rho"],
            delta_w=values["delta_w"],
            delta_bias=values["delta_bias"],
        ),
        redistribution=RedistributionParams(
            scheme=values["redistribution"], xi=values["xi"], t_p=values["t_p"], q=values["q"],
        ),
        n_agents=values["n_agents"],
        initial_wealth=values["initial_wealth"],
        total_steps=values["total_steps"],
        snapshot_times=snapshots,
        seed=values["seed"],
    )
    return ParsedConfig(config, values["n_seeds"], warnings)


def _parse_snapshots(text: str, total_steps: int, lineno: int, col: int,
                     errors: list[Diagnostic]) -> tuple[int, ...] | None:
    if text == "auto":
        return tuple(default_snapshot_times(total_steps))
    try:
        times = [int(part.strip(), 10) for part in text.split(",") if part.strip()]
    except ValueError:
        errors.append(Diagnostic(lineno, col, f"malformed snapshot list {text!r}"))
        return None
    if times != sorted(set(times)):
        errors.append(Diagnostic(lineno, col, "snapshots must be strictly increasing"))
        return None
    if times and (times[0] < 0 or times[-1] > total_steps):
        errors.append(Diagnostic(lineno, col, f"snapshots must lie within [0, {total_steps}]"))
        return None
    return tuple(times)


def load_config(path: str | Path) -> ParsedConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def serialize_config(config: RunConfig, n_seeds: int = 1) -> str:
    ex, red = config.exchange, config.redistribution
    if list(config.snapshot_times) == default_snapshot_times(config.total_steps):
        snaps = "auto"
    else:
        snaps = ",".join(str(t) for t in config.snapshot_times)
    pairs = [
        ("model", ex.model.value),
        ("redistribution", red.scheme.value),
        ("n_agents", str(config.n_agents)),
        ("initial_wealth", _fmt(config.initial_wealth)),
        ("lambda", _fmt(ex.lam)),
        ("rho", _fmt(ex.rho)),
        ("delta_w", _fmt(ex.delta_w)),
        ("delta_bias", _fmt(ex.delta_bias)),
        ("xi", _fmt(red.xi)),
        ("t_p", str(red.t_p)),
        ("q", str(red.q)),
        ("total_steps", str(config.total_steps)),
        ("snapshots", snaps),
        ("seed", str(config.seed)),
        ("n_seeds", str(n_seeds)),
    ]
    return "".join(f"{k}={v}\n" for k, v in pairs)


# CSV ------------------------------------------------------------------------

def trace_csv(snapshots: list[MetricsSnapshot]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for s in snapshots:
        writer.writerow([s.t, _num(s.gini), _num(s.total), _num(s.max), _num(s.min),
                         _num(s.neg_fraction), format_flags(s.flags)])
    return out.getvalue()


def read_trace_csv(text: str) -> list[MetricsSnapshot]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != TRACE_HEADER:
        raise ValueError(f"unexpected trace header {header}")
    rows = []
    for row in reader:
        t, g, total, mx, mn, neg, flags = row
        rows.append(MetricsSnapshot(int(t), float(g), float(total), float(mx), float(mn),
                                    float(neg), parse_flags(flags)))
    return rows


def hist_csv(hist: Histogram) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HIST_HEADER)
    for lo, hi, c in zip(hist.edges[:-1], hist.edges[1:], hist.counts):
        writer.writerow([_num(lo), _num(hi), int(c), hist.underflow])
    return out.getvalue()


def ensemble_csv(result: EnsembleResult) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["t", "mean_gini", "std_gini", "n_seeds"])
    for t, m, s in zip(result.times, result.mean_gini, result.std_gini):
        writer.writerow([int(t), _num(m), _num(s), result.n_seeds])
    return out.getvalue()


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def write_manifest(path: Path, entries: list[tuple[str, str]]) -> Path:
    """Plain-text manifest, one ``key: value`` line per entry."""
    return write_text(path, "".join(f"{k}: {v}\n" for k, v in entries))


def write_trajectory(out_dir: Path, name: str, trajectory: Trajectory) -> Path:
    return write_text(out_dir / f"{name}_seed{trajectory.seed}.trace.csv", trace_csv(trajectory.snapshots))


def write_ensemble(out_dir: Path, name: str, result: EnsembleResult) -> list[Path]:
    paths = [write_trajectory(out_dir, name, tr) for tr in result.per_seed]
    paths.append(write_text(out_dir / f"{name}.ensemble.csv", ensemble_csv(result)))
    return paths


# sweeps ---------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    value: float
    mean_gini: float
    std_gini: float
    n_seeds: int
    flag_rate: float = 0.0


def _final_only(config: RunConfig) -> RunConfig:
    return replace(config, snapshot_times=(config.total_steps,))


def sweep(base: RunConfig, key: str, values, n_seeds: int, workers: int | None = None) -> list[SweepRow]:
    """One seed ensemble per value of ``xi`` or ``q``; Gini taken at total_steps."""
    rows = []
    for v in values:
        red = replace(base.redistribution, **{key: v})
        result = run_ensemble(_final_only(replace(base, redistribution=red)), n_seeds, workers=workers)
        rows.append(SweepRow(float(v), result.final_mean(), result.final_std(), n_seeds, result.flag_rate()))
    return rows


def sweep_xi(base: RunConfig, xi_values, n_seeds: int, workers: int | None = None) -> list[SweepRow]:
    if base.redistribution.scheme is Scheme.NONE:
        raise ValueError("xi sweep needs redistribution T or Q")
    return sweep(base, "xi", [float(x) for x in xi_values], n_seeds, workers)


def sweep_q(base: RunConfig, q_values, n_seeds: int, workers: int | None = None) -> list[SweepRow]:
    if base.redistribution.scheme is not Scheme.Q:
        raise ValueError("q sweep needs redistribution Q")
    return sweep(base, "q", [int(q) for q in q_values], n_seeds, workers)


def sweep_csv(rows: list[SweepRow], key: str) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    if key == "q":
        writer.writerow(["q", "inv_q", "mean_gini", "std_gini", "n_seeds", "flag_rate"])
        for r in rows:
            writer.writerow([int(r.value), _num(1.0 / r.value), _num(r.mean_gini), _num(r.std_gini),
                             r.n_seeds, _num(r.flag_rate)])
    else:
        writer.writerow([key, "mean_gini", "std_gini", "n_seeds", "flag_rate"])
        for r in rows:
            writer.writerow([_num(r.value), _num(r.mean_gini), _num(r.std_gini), r.n_seeds, _num(r.flag_rate)])
    return out.getvalue()


def degenerate(result_flags) -> bool:
    """Whether any recorded flag is a runtime degeneracy (``--strict`` escalates these)."""
    return any(f in (Flag.Q_NO_RECEIVERS, Flag.Q_NONPOSITIVE_MAX, Flag.GINI_ZERO_TOTAL) for f in result_flags)


def as_array(rows: list[SweepRow]) -> np.ndarray:
    return np.array([[r.value, r.mean_gini, r.std_gini] for r in rows])

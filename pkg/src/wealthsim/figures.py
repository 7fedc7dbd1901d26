"""Canned reproduction recipes for the wealth-distribution and Gini figures.

Every recipe writes plain CSV tables plus ``manifest.txt`` listing the exact
configs, seeds and files, so any table can be regenerated from the manifest.

Long-run Gini values are read at ``LONG_RUN_T = 10**6 - 1``: the end of the
last full transfer period, one event before the transfer at 10**6 fires.
"""
from __future__ import annotations

from pathlib import Path

from . import __version__
from .engine import RunConfig, run, run_ensemble
from .exchange import ExchangeParams, Model
from .experiment import (
    ensemble_csv, hist_csv, serialize_config, sweep_csv, sweep_q, sweep_xi,
    trace_csv, write_manifest, write_text,
)
from .metrics import Binning, histogram
from .redistribution import RedistributionParams, Scheme

FIGURES = ("3A", "3B", "3C", "3D", "4", "5", "6", "7")

N_AGENTS = 1000
LAMBDA = 0.25
XI = 0.5
PERIODS = (10_000, 100_000)
HIST_TIMES = (1_000, 10_000, 100_000)
LONG_RUN_T = 10**6 - 1
GINI_HORIZON = 10**6
BASE_SEED = 20220901
DEFAULT_SEEDS = 10

XI_GRID = tuple(round(0.1 * k, 1) for k in range(11))
Q_GRID = tuple(range(1, 11))

R = ExchangeParams(Model.R, lam=LAMBDA)
L0 = ExchangeParams(Model.L, lam=LAMBDA, rho=0.0, delta_w=0.1)
L = ExchangeParams(Model.L, lam=LAMBDA, rho=0.05, delta_w=0.1)
J1 = ExchangeParams(Model.J, lam=LAMBDA, delta_w=0.1)
J2 = ExchangeParams(Model.J, lam=LAMBDA, delta_w=0.2)

# the models the redistribution figures combine with T and Q
COMBINED = {"R": R, "L": L, "J01": J1, "J02": J2}

# panel -> (series name, exchange params, binning)
HIST_PANELS = {
    "3A": ("R", R, Binning.LINEAR),
    "3B": ("L", L, Binning.LOG),
    "3C": ("J01", J1, Binning.LINEAR),
    "3D": ("J02", J2, Binning.LINEAR),
}


def base_config(exchange: ExchangeParams, total_steps: int, **kw) -> RunConfig:
    return RunConfig(exchange=exchange, n_agents=N_AGENTS, initial_wealth=1.0,
                     total_steps=total_steps, seed=BASE_SEED, **kw)


def transfer_config(exchange: ExchangeParams, t_p: int, xi: float = XI, scheme=Scheme.T, q: int = 1) -> RunConfig:
    return base_config(exchange, LONG_RUN_T,
                       redistribution=RedistributionParams(scheme, xi=xi, t_p=t_p, q=q))


class _Manifest:
    def __init__(self, figure: str, out_dir: Path, n_seeds: int):
        self.out_dir = out_dir
        self.entries = [("figure", figure), ("package", f"wealthsim {__version__}"), ("n_seeds", str(n_seeds)),
                        ("seed_rule", "base_seed + k for k in 0..n_seeds-1")]
        self.files: list[Path] = []

    def config(self, name: str, config: RunConfig, n_seeds: int) -> None:
        line = serialize_config(config, n_seeds).strip().replace("\n", " ")
        self.entries.append((f"config {name}", line))

    def write(self, name: str, text: str) -> Path:
        path = write_text(self.out_dir / name, text)
        self.files.append(path)
        return path

    def close(self) -> list[Path]:
        entries = self.entries + [("file", p.name) for p in self.files]
        path = write_manifest(self.out_dir / "manifest.txt", entries)
        return self.files + [path]


def _fig3(panel: str, m: _Manifest) -> None:
    name, exchange, binning = HIST_PANELS[panel]
    config = base_config(exchange, HIST_TIMES[-1], snapshot_times=(0,) + HIST_TIMES)
    m.config(name, config, 1)
    tr = run(config, record_wealth=True)
    m.write(f"fig{panel}_{name}.trace.csv", trace_csv(tr.snapshots))
    for t in HIST_TIMES:
        m.write(f"fig{panel}_{name}_t{t}.hist.csv", hist_csv(histogram(tr.wealth_at[t], binning, 50)))


def _fig4(m: _Manifest, n_seeds: int) -> None:
    series = {"R": R, "L_rho0": L0, "L_rho005": L, "J01": J1, "J02": J2}
    for name, exchange in series.items():
        config = base_config(exchange, GINI_HORIZON)
        m.config(name, config, n_seeds)
        m.write(f"fig4_{name}.ensemble.csv", ensemble_csv(run_ensemble(config, n_seeds)))


def _fig5(m: _Manifest, n_seeds: int) -> None:
    rows = ["model,t_p,xi,t,mean_gini,std_gini,n_seeds\n"]
    for name, exchange in COMBINED.items():
        for t_p in PERIODS:
            config = transfer_config(exchange, t_p)
            label = f"{name}-T_tp{t_p}"
            m.config(label, config, n_seeds)
            result = run_ensemble(config, n_seeds)
            m.write(f"fig5_{label}.ensemble.csv", ensemble_csv(result))
            rows.append(f"{name}-T,{t_p},{XI!r},{LONG_RUN_T},{result.final_mean():.17g},"
                        f"{result.final_std():.17g},{n_seeds}\n")
    m.write("fig5_long_run.csv", "".join(rows))


def _fig6(m: _Manifest, n_seeds: int) -> None:
    for name, exchange in COMBINED.items():
        for t_p in PERIODS:
            config = transfer_config(exchange, t_p)
            label = f"{name}-T_tp{t_p}"
            m.config(label, config, n_seeds)
            m.entries.append((f"grid {label}", "xi=" + ",".join(map(str, XI_GRID))))
            m.write(f"fig6_{label}.sweep.csv", sweep_csv(sweep_xi(config, XI_GRID, n_seeds), "xi"))


def _fig7(m: _Manifest, n_seeds: int) -> None:
    t_p = PERIODS[1]
    for name, exchange in COMBINED.items():
        config = transfer_config(exchange, t_p, scheme=Scheme.Q)
        label = f"{name}-Q_tp{t_p}"
        m.config(label, config, n_seeds)
        m.entries.append((f"grid {label}", "q=" + ",".join(map(str, Q_GRID))))
        m.write(f"fig7_{label}.sweep.csv", sweep_csv(sweep_q(config, Q_GRID, n_seeds), "q"))
        reference = transfer_config(exchange, t_p)
        m.config(f"{name}-T_tp{t_p} reference", reference, n_seeds)
        m.write(f"fig7_{name}-T_tp{t_p}.reference.csv",
                sweep_csv(sweep_xi(reference, [XI], n_seeds), "xi"))


def reproduce_figure(figure_id: str, out_dir: str | Path, n_seeds: int = DEFAULT_SEEDS) -> list[Path]:
    """Run one recipe and return the files written (manifest last)."""
    figure_id = figure_id.upper()
    if figure_id not in FIGURES:
        raise ValueError(f"unknown figure {figure_id!r}; choose from {', '.join(FIGURES)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    m = _Manifest(figure_id, out, n_seeds if figure_id[0] != "3" else 1)
    if figure_id.startswith("3"):
        _fig3(figure_id, m)
    elif figure_id == "4":
        _fig4(m, n_seeds)
    elif figure_id == "5":
        _fig5(m, n_seeds)
    elif figure_id == "6":
        _fig6(m, n_seeds)
    else:
        _fig7(m, n_seeds)
    return m.close()


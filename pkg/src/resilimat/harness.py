"""Monte Carlo comparison of sensor selectors under worst-case sensor failures."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import GuardExceeded, InputError
from .lqg import (
    SCENARIO_Q,
    SCENARIO_R,
    ScenarioConfig,
    SensorObjective,
    build_vehicle_scenario,
    draw_noise,
    rollout_costs,
    riccati_backward,
)
from .matroid import UniformMatroid
from .oracles import OPTIMAL_GUARD, REMOVAL_GUARD, greedy_nonresilient, optimal_resilient, random_feasible, worst_case_removal
from .setfn import Memo
from .solver import solve_resilient

log = logging.getLogger(__name__)

SELECTORS = ("optimal", "random*", "logdet", "s-LQG")
CSV_HEADER = ["alpha", "beta", "run", "selector", "selected", "removed", "cost", "evals"]


@dataclass
class ExperimentConfig:
    alphas: list[int] = field(default_factory=lambda: list(range(2, 13)))
    betas: list[int] = field(default_factory=lambda: [1, 4, 7, 10])
    runs: int = 20
    seed: int = 0
    rollouts: int = 200
    oracle_guard: int = 14
    removal_guard: int = REMOVAL_GUARD
    T: int = 20
    dt: float = 1.0
    n_ground: int = 12
    workers: int = 1
    output: str | None = None

    def __post_init__(self):
        if not self.alphas or not self.betas:
            raise InputError("alphas and betas must be non-empty")
        if min(self.alphas) < 1 or min(self.betas) < 0:
            raise InputError("alphas must be positive and betas non-negative")
        if self.runs < 1 or self.rollouts < 1:
            raise InputError("runs and rollouts must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = set(cls.__dataclass_fields__)
        unknown = set(d) - names
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @property
    def scenario(self) -> ScenarioConfig:
        return ScenarioConfig(seed=self.seed, T=self.T, dt=self.dt, n_ground=self.n_ground)


@dataclass
class ResultRow:
    alpha: int
    beta: int
    run: int
    selector: str
    selected: frozenset[int]
    removed: frozenset[int]
    cost: float
    evals: int
    value: float = math.nan  # surrogate reward of the surviving set
    flag: str = ""

    @property
    def surviving(self) -> frozenset[int]:
        return self.selected - self.removed

    def csv_fields(self) -> list[str]:
        return [
            str(self.alpha),
            str(self.beta),
            str(self.run),
            self.selector,
            ";".join(map(str, sorted(self.selected))),
            ";".join(map(str, sorted(self.removed))),
            _fmt(self.cost),
            str(self.evals),
        ]


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    if math.isnan(x):
        return "nan"
    return repr(float(x))


def run_seed(base: int, run: int) -> int:
    return int(np.random.SeedSequence([base, run]).generate_state(1)[0])


class RunContext:
    """Everything shared by the cells of one Monte Carlo run."""

    def __init__(self, run: int, config: ExperimentConfig):
        self.run = run
        self.seed = run_seed(config.seed, run)
        self.sys, self.catalog = build_vehicle_scenario(self.seed, config.scenario)
        self.weights = riccati_backward(self.sys, SCENARIO_Q, SCENARIO_R)
        self.objective = SensorObjective(self.sys, self.weights, self.catalog)
        self.objective.precompute()
        self.f = self.objective.set_function()
        self.noise = draw_noise(self.sys, self.catalog, config.rollouts, [self.seed, 1])
        self._costs: dict[frozenset[int], float] = {}

    @property
    def n(self) -> int:
        return len(self.catalog)

    def cost(self, surviving: frozenset[int]) -> float:
        c = self._costs.get(surviving)
        if c is None:
            c = float(rollout_costs(self.sys, self.weights, self.catalog, surviving, self.noise).mean())
            self._costs[surviving] = c
        return c


def run_cell(alpha: int, beta: int, run: int, config: ExperimentConfig, ctx: RunContext | None = None) -> list[ResultRow]:
    """Four rows (one per selector) for a single (alpha, beta, run)."""
    if beta >= alpha:
        # every selected sensor can fail
        return [ResultRow(alpha, beta, run, s, frozenset(), frozenset(), math.inf, 0) for s in SELECTORS]
    ctx = ctx or RunContext(run, config)
    f = ctx.f
    sel = UniformMatroid(ctx.n, alpha)
    rem = UniformMatroid(ctx.n, beta)
    rows = []

    def finish(name, a, evals, flag=""):
        memo = Memo(f)
        b = worst_case_removal(memo, a, rem, guard=config.removal_guard)
        row = ResultRow(alpha, beta, run, name, a, b.argset, ctx.cost(a - b.argset), evals, b.value, flag)
        if not sel.is_independent(row.selected) or not rem.is_independent(row.removed):
            raise AssertionError(f"infeasible {name} row: {row}")
        rows.append(row)

    start = f.eval_count
    try:
        opt = optimal_resilient(f, sel, rem, guard=config.oracle_guard, removal_guard=config.removal_guard)
        finish("optimal", opt.argset, f.eval_count - start)
    except GuardExceeded as exc:
        log.warning("optimal oracle refused for alpha=%d beta=%d: %s", alpha, beta, exc)
        rows.append(ResultRow(alpha, beta, run, "optimal", frozenset(), frozenset(), math.nan, 0, math.nan, "guard"))

    finish("random*", random_feasible(sel, [ctx.seed, alpha, beta]), 0)

    start = f.eval_count
    a = greedy_nonresilient(f, sel)
    finish("logdet", a, f.eval_count - start)

    out = solve_resilient(f, sel, rem)
    finish("s-LQG", out.a, out.eval_count)
    return rows


def _run_all_cells(run: int, config: ExperimentConfig) -> list[ResultRow]:
    ctx = RunContext(run, config)
    rows = []
    for alpha in config.alphas:
        for beta in config.betas:
            rows.extend(run_cell(alpha, beta, run, config, ctx))
    return rows


def _sort_key(r: ResultRow):
    return (r.alpha, r.beta, r.run, SELECTORS.index(r.selector))


def run_experiment(config: ExperimentConfig) -> tuple[list[ResultRow], dict]:
    runs = range(config.runs)
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            chunks = list(pool.map(_run_all_cells, runs, [config] * config.runs))
    else:
        chunks = [_run_all_cells(r, config) for r in runs]
    rows = sorted((r for chunk in chunks for r in chunk), key=_sort_key)
    summary = summarize(rows)
    if config.output:
        write_outputs(rows, summary, config.output)
    return rows, summary


def summarize(rows: list[ResultRow]) -> dict:
    """Mean cost and surrogate value per (alpha, beta, selector), plus s-LQG/optimal ratios."""
    groups: dict[tuple[int, int, str], list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.alpha, r.beta, r.selector), []).append(r)
    cells: dict[str, dict] = {}
    for (alpha, beta, name), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], SELECTORS.index(kv[0][2]))):
        cell = cells.setdefault(f"{alpha},{beta}", {"alpha": alpha, "beta": beta})
        cost = [r.cost for r in rs]
        val = [r.value for r in rs]
        cell[name] = {
            "mean_cost": float(np.mean(cost)),
            "mean_value": float(np.mean(val)) if beta < alpha else None,
            "completed": sum(not math.isnan(c) for c in cost),
        }
    for cell in cells.values():
        if cell["beta"] >= cell["alpha"]:
            continue
        opt, ours = cell.get("optimal"), cell.get("s-LQG")
        if opt and ours and opt["completed"]:
            ov, sv = opt["mean_value"], ours["mean_value"]
            cell["value_ratio"] = sv / ov if ov > 0 else 1.0
            cell["cost_ratio"] = ours["mean_cost"] / opt["mean_cost"]
    return {"cells": list(cells.values())}


def rows_to_csv(rows: list[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_outputs(rows: list[ResultRow], summary: dict, output: str) -> None:
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rows_to_csv(rows))
    path.with_suffix(".summary.json").write_text(json.dumps(summary, indent=2))


def config_dict(config: ExperimentConfig) -> dict:
    return asdict(config)

"""Randomized quantum Metropolis annealing: per-stage W^t followed by a partial
measurement of the coin and move registers."""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .circuit import layout_for
from .ilp import (
    IlpInstance,
    argmin_points,
    eliminate_equalities,
    feasible_points,
)
from .statevector import State, marginal, measure_partial, prepare_initial
from .walk import AcceptanceMode, model_for, synth_W


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class LinearThenGeometric:
    linear_stages: int = 10
    ratio: float = 1.5


@dataclass(frozen=True)
class ExplicitList:
    betas: tuple[float, ...]


@dataclass(frozen=True)
class WalkConfig:
    Q: int = 20
    T: int = 3
    schedule: LinearThenGeometric | ExplicitList = LinearThenGeometric()
    mode: AcceptanceMode = AcceptanceMode.EXACT
    seed: int = 0
    record_marginals: bool = False
    sparse: bool = True
    measured: tuple[str, ...] = ("C", "Sp")

    def __post_init__(self):
        if self.Q < 1 or self.T < 1:
            raise ScheduleError("need Q >= 1 and T >= 1")
        object.__setattr__(self, "mode", AcceptanceMode(self.mode))


def make_schedule(config: WalkConfig) -> list[float]:
    sched = config.schedule
    if isinstance(sched, ExplicitList):
        betas = [float(b) for b in sched.betas]
        if any(b < 0 for b in betas):
            raise ScheduleError("inverse temperatures must be nonnegative")
        if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
            raise ScheduleError("explicit schedule must be nondecreasing")
        return betas
    if sched.linear_stages < 1 or sched.ratio < 1:
        raise ScheduleError("need linear_stages >= 1 and ratio >= 1")
    betas: list[float] = []
    for k in range(1, config.Q + 1):
        if k <= sched.linear_stages:
            betas.append(k / sched.linear_stages)
        else:
            betas.append(betas[-1] * sched.ratio)
    return betas


@dataclass
class StageRecord:
    beta: float
    t: int
    outcomes: dict[str, int]
    marginal: dict[tuple[int, ...], float] | None = None


@dataclass
class RunRecord:
    stages: list[StageRecord]
    final_marginal: dict[tuple[int, ...], float]
    mode_point: tuple[int, ...]
    mode_probability: float
    wall_time: float
    config: dict = field(default_factory=dict)
    equalities_split: int = 0

    def to_json(self) -> str:
        def table(m):
            return [{"point": list(p), "probability": q} for p, q in sorted(m.items())]

        payload = {
            "config": self.config,
            "equalities_split": self.equalities_split,
            "stages": [
                {
                    "beta": s.beta,
                    "t": s.t,
                    "outcomes": s.outcomes,
                    **({"marginal": table(s.marginal)} if s.marginal is not None else {}),
                }
                for s in self.stages
            ],
            "final_marginal": table(self.final_marginal),
            "mode_point": list(self.mode_point),
            "mode_probability": self.mode_probability,
            "wall_time": self.wall_time,
        }
        return json.dumps(payload, indent=2)


def _config_dict(config: WalkConfig) -> dict:
    d = asdict(config)
    d["mode"] = config.mode.value
    d["schedule"] = {"kind": type(config.schedule).__name__, **asdict(config.schedule)}
    return d


def run(instance: IlpInstance, config: WalkConfig = WalkConfig(), state: State | None = None) -> RunRecord:
    """Anneal through the schedule; returns the per-stage record and final S-marginal."""
    start = time.perf_counter()
    instance = eliminate_equalities(instance)
    feasible_points(instance) or argmin_points(instance)  # raises on an empty region
    layout = layout_for(instance)
    rng = np.random.default_rng(config.seed)
    if state is None:
        state = prepare_initial(instance, layout, sparse=config.sparse, seed=config.seed)
    stages = []
    for beta in make_schedule(config):
        walk = synth_W(instance, model_for(instance, beta, config.mode, layout), layout)
        t = int(rng.integers(1, config.T + 1))
        for _ in range(t):
            state.apply(walk)
        outcomes, state = measure_partial(state, rng, config.measured)
        snap = marginal(state) if config.record_marginals else None
        stages.append(StageRecord(beta, t, outcomes, snap))
    final = marginal(state)
    mode_point = max(final, key=final.__getitem__)
    return RunRecord(
        stages, final, mode_point, final[mode_point], time.perf_counter() - start,
        _config_dict(config), instance.equalities_split,
    )


def success_probability_trace(record: RunRecord, instance: IlpInstance) -> list[tuple[int, float]]:
    """Per-stage probability of the brute-force optimum (summed over ties)."""
    if any(s.marginal is None for s in record.stages):
        raise ValueError("marginals were not recorded; rerun with record_marginals=True")
    best, _ = argmin_points(eliminate_equalities(instance))
    return [
        (k + 1, float(sum(s.marginal.get(p, 0.0) for p in best)))
        for k, s in enumerate(record.stages)
    ]


def feasible_mass(table: dict[tuple[int, ...], float], instance: IlpInstance) -> float:
    return float(sum(p for x, p in table.items() if instance.is_feasible(x)))


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def restrict_to_feasible(table: dict, instance: IlpInstance) -> dict:
    kept = {x: p for x, p in table.items() if instance.is_feasible(x)}
    total = sum(kept.values())
    return {x: p / total for x, p in kept.items()} if total > 0 else kept


__all__ = [
    "ExplicitList",
    "LinearThenGeometric",
    "RunRecord",
    "ScheduleError",
    "StageRecord",
    "WalkConfig",
    "make_schedule",
    "point_to_index",
    "run",
    "success_probability_trace",
]

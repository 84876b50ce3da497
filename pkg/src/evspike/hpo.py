"""Hyperband successive halving with a density-ratio config sampler.

Brackets follow the standard Hyperband geometry: bracket ``s`` starts
``ceil((s_max+1)/(s+1) * eta^s)`` configs at budget ``R * eta^-s`` and
keeps the best ``floor(n/eta)`` at each rung. New configs come from a
lightweight model-based sampler: once enough trials have completed at some
budget, two thirds of draws maximize the density ratio of a good/bad split
(top 15% of trials vs the rest, per-dimension Gaussian kernels, best of 64
candidates) and one third stay uniform for exploration.

Budgets count training samples consumed, since single-pass learning has no
natural epoch. All sampling happens in the coordinating thread (trials of
one rung may evaluate in parallel workers), so sampler state never races
with history appends.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

GOOD_FRACTION = 0.15
MODEL_PROBABILITY = 2.0 / 3.0
N_CANDIDATES = 64
DEFAULT_ITERATIONS = 24


@dataclass(frozen=True)
class ParamSpec:
    """One searchable parameter.

    ``kind`` is one of "log" (continuous, log-uniform), "linear"
    (continuous, uniform), "int" (integer, uniform) or "categorical".
    """

    name: str
    kind: str
    low: Optional[float] = None
    high: Optional[float] = None
    choices: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("log", "linear", "int", "categorical"):
            raise ValueError(f"unknown parameter kind {self.kind!r}")
        if self.kind == "categorical":
            if not self.choices:
                raise ValueError(f"{self.name}: categorical needs choices")
        else:
            if self.low is None or self.high is None or not self.low < self.high:
                raise ValueError(
                    f"{self.name}: need low < high, got [{self.low}, {self.high}]"
                )
            if self.kind == "log" and self.low <= 0:
                raise ValueError(f"{self.name}: log-scale bounds must be positive")

    def contains(self, value) -> bool:
        if self.kind == "categorical":
            return value in self.choices
        if self.kind == "int" and value != int(value):
            return False
        return self.low <= value <= self.high


@dataclass(frozen=True)
class SearchSpace:
    params: tuple[ParamSpec, ...]

    def __post_init__(self):
        if not self.params:
            raise ValueError("empty search space")

    @property
    def dimension(self) -> int:
        return len(self.params)

    def validate(self, values: dict) -> None:
        for p in self.params:
            if p.name not in values or not p.contains(values[p.name]):
                raise ValueError(f"value for {p.name!r} missing or out of bounds")


@dataclass(frozen=True)
class ConfigSample:
    """One candidate configuration with its evaluation budget."""

    values: dict
    budget: int
    trial_id: int
    seed: int


@dataclass(frozen=True)
class TrialResult:
    config: ConfigSample
    budget: int
    objective: float
    wall_time_s: float = 0.0
    status: str = "ok"


@dataclass(frozen=True)
class Bracket:
    n_configs: int
    budgets: tuple[int, ...]


def hyperband_schedule(max_budget: int, eta: int) -> list[Bracket]:
    """Bracket sizes and rung budgets for a maximum budget R and ratio eta.

    Bracket s (s = s_max .. 0) starts ceil((s_max+1)/(s+1) * eta^s)
    configs at budget R * eta^-s; every bracket's final rung runs at R.
    """
    if eta < 2:
        raise ValueError(f"eta must be >= 2, got {eta}")
    if max_budget < 1:
        raise ValueError(f"max_budget must be >= 1, got {max_budget}")
    s_max = int(math.floor(math.log(max_budget) / math.log(eta) + 1e-9))
    brackets = []
    for s in range(s_max, -1, -1):
        n = math.ceil((s_max + 1) / (s + 1) * eta**s)
        budgets = tuple(
            max(1, int(round(max_budget * float(eta) ** (k - s)))) for k in range(s + 1)
        )
        brackets.append(Bracket(n_configs=n, budgets=budgets))
    return brackets


# --------------------------------------------------------------------------
# config sampling
# --------------------------------------------------------------------------


def _to_model_coord(spec: ParamSpec, value):
    if spec.kind == "categorical":
        return spec.choices.index(value)
    if spec.kind == "log":
        return math.log10(value)
    return float(value)


def _from_model_coord(spec: ParamSpec, z: float):
    if spec.kind == "categorical":
        return spec.choices[int(z)]
    if spec.kind == "log":
        return float(np.clip(10.0**z, spec.low, spec.high))
    if spec.kind == "int":
        return int(np.clip(round(z), spec.low, spec.high))
    return float(np.clip(z, spec.low, spec.high))


def _uniform_value(spec: ParamSpec, rng: np.random.Generator):
    if spec.kind == "categorical":
        return spec.choices[int(rng.integers(len(spec.choices)))]
    if spec.kind == "log":
        return float(10.0 ** rng.uniform(math.log10(spec.low), math.log10(spec.high)))
    if spec.kind == "int":
        return int(rng.integers(int(spec.low), int(spec.high) + 1))
    return float(rng.uniform(spec.low, spec.high))


def _uniform_values(space: SearchSpace, rng: np.random.Generator) -> dict:
    return {p.name: _uniform_value(p, rng) for p in space.params}


def _model_range(spec: ParamSpec) -> float:
    if spec.kind == "categorical":
        return float(len(spec.choices))
    if spec.kind == "log":
        return math.log10(spec.high) - math.log10(spec.low)
    return spec.high - spec.low


def _bandwidth(coords: np.ndarray, spec: ParamSpec) -> float:
    sigma = float(np.std(coords))
    floor = 1e-3 * _model_range(spec)
    return max(sigma, floor) * len(coords) ** -0.2


def _gaussian_density(z: float, coords: np.ndarray, bw: float) -> float:
    return float(
        np.mean(np.exp(-0.5 * ((z - coords) / bw) ** 2)) / (bw * math.sqrt(2 * math.pi))
    )


def _categorical_density(idx: int, coords: np.ndarray, n_choices: int) -> float:
    counts = np.bincount(coords.astype(int), minlength=n_choices)
    return (counts[idx] + 1.0) / (len(coords) + n_choices)


def _model_based_values(
    space: SearchSpace,
    good: list[dict],
    bad: list[dict],
    rng: np.random.Generator,
) -> dict:
    good_coords = {
        p.name: np.array([_to_model_coord(p, v[p.name]) for v in good])
        for p in space.params
    }
    bad_coords = {
        p.name: np.array([_to_model_coord(p, v[p.name]) for v in bad])
        for p in space.params
    }
    best_values, best_score = None, -math.inf
    for _ in range(N_CANDIDATES):
        values = {}
        score = 0.0
        for p in space.params:
            g = good_coords[p.name]
            b = bad_coords[p.name]
            if p.kind == "categorical":
                idx = int(rng.choice(g.astype(int)))
                values[p.name] = p.choices[idx]
                l_d = _categorical_density(idx, g, len(p.choices))
                g_d = _categorical_density(idx, b, len(p.choices))
            else:
                bw = _bandwidth(g, p)
                z = float(rng.choice(g)) + bw * float(rng.standard_normal())
                values[p.name] = _from_model_coord(p, z)
                z = _to_model_coord(p, values[p.name])  # density at the clipped point
                l_d = _gaussian_density(z, g, bw)
                g_d = _gaussian_density(z, b, _bandwidth(b, p))
            score += math.log(l_d + 1e-300) - math.log(g_d + 1e-300)
        if score > best_score:
            best_values, best_score = values, score
    return best_values


def sample_config(
    space: SearchSpace,
    history: Sequence[TrialResult],
    rng: np.random.Generator,
    budget: int = 1,
    trial_id: int = 0,
) -> ConfigSample:
    """Propose a configuration.

    Uniform (log-uniform on log dimensions) until some budget has
    dimension + 2 completed trials; after that, two thirds of draws come
    from the good/bad density-ratio model fitted at the largest such
    budget, one third stay uniform.
    """
    completed = [t for t in history if t.status == "ok"]
    by_budget: dict[int, list[TrialResult]] = {}
    for t in completed:
        by_budget.setdefault(t.budget, []).append(t)
    eligible = [b for b, ts in by_budget.items() if len(ts) >= space.dimension + 2]

    values = None
    if eligible and rng.uniform() < MODEL_PROBABILITY:
        trials = by_budget[max(eligible)]
        trials = sorted(trials, key=lambda t: (-t.objective, t.config.trial_id))
        n_good = max(1, math.ceil(GOOD_FRACTION * len(trials)))
        good = [t.config.values for t in trials[:n_good]]
        bad = [t.config.values for t in trials[n_good:]]
        if bad:
            values = _model_based_values(space, good, bad, rng)
    if values is None:
        values = _uniform_values(space, rng)
    space.validate(values)
    return ConfigSample(
        values=values,
        budget=budget,
        trial_id=trial_id,
        seed=int(rng.integers(2**31 - 1)),
    )


# --------------------------------------------------------------------------
# campaign driver
# --------------------------------------------------------------------------


Objective = Callable[[ConfigSample], float]


def _run_trial(objective: Objective, config: ConfigSample) -> TrialResult:
    start = time.perf_counter()
    try:
        value = float(objective(config))
        if not (0.0 <= value <= 1.0) or not math.isfinite(value):
            raise ValueError(f"objective returned {value}, expected a value in [0, 1]")
        status, objective_value = "ok", value
    except Exception:
        status, objective_value = "failed", 0.0
    return TrialResult(
        config=config,
        budget=config.budget,
        objective=objective_value,
        wall_time_s=time.perf_counter() - start,
        status=status,
    )


def _trial_record(result: TrialResult) -> dict:
    return {
        "trial_id": result.config.trial_id,
        "values": result.config.values,
        "budget": result.budget,
        "objective": result.objective,
        "seed": result.config.seed,
        "duration_s": result.wall_time_s,
        "status": result.status,
    }


def load_campaign_log(path) -> dict[tuple[int, int], dict]:
    """Completed (trial_id, budget) records from a line-delimited JSON log."""
    records = {}
    text = Path(path).read_text()
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        records[(rec["trial_id"], rec["budget"])] = rec
    return records


def run_optimization(
    objective: Objective,
    space: SearchSpace,
    total_iterations: int = DEFAULT_ITERATIONS,
    max_budget: int = 9,
    eta: int = 3,
    rng_seed: int = 0,
    log_path=None,
    workers: int = 1,
) -> tuple[TrialResult, list[TrialResult]]:
    """Run Hyperband brackets until ``total_iterations`` distinct configs evaluated.

    Returns (best trial at the maximum budget seen, full history). Failing
    objectives become failed trials with objective 0 and never abort the
    campaign. With ``log_path`` every trial is appended as one JSON line;
    re-running with the same seed and an existing log resumes, skipping
    already-logged (trial, budget) evaluations.
    """
    rng = np.random.default_rng(rng_seed)
    brackets = hyperband_schedule(max_budget, eta)
    history: list[TrialResult] = []
    logged = {}
    if log_path is not None and Path(log_path).exists():
        logged = load_campaign_log(log_path)
    log_file = open(log_path, "a") if log_path is not None else None

    def evaluate(configs: list[ConfigSample]) -> list[TrialResult]:
        pending = [c for c in configs if (c.trial_id, c.budget) not in logged]
        if workers > 1 and len(pending) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                fresh = list(pool.map(_run_trial, [objective] * len(pending), pending))
        else:
            fresh = [_run_trial(objective, c) for c in pending]
        fresh_by_key = {(r.config.trial_id, r.budget): r for r in fresh}
        results = []
        for c in configs:
            key = (c.trial_id, c.budget)
            if key in fresh_by_key:
                r = fresh_by_key[key]
                if log_file is not None:
                    log_file.write(json.dumps(_trial_record(r)) + "\n")
                    log_file.flush()
            else:
                rec = logged[key]
                r = TrialResult(
                    config=c,
                    budget=c.budget,
                    objective=rec["objective"],
                    wall_time_s=rec.get("duration_s", 0.0),
                    status=rec["status"],
                )
            results.append(r)
        history.extend(results)
        return results

    try:
        n_sampled = 0
        while n_sampled < total_iterations:
            progressed = False
            for bracket in brackets:
                n_new = min(bracket.n_configs, total_iterations - n_sampled)
                if n_new == 0:
                    break
                progressed = True
                rung = [
                    sample_config(
                        space,
                        history,
                        rng,
                        budget=bracket.budgets[0],
                        trial_id=n_sampled + i,
                    )
                    for i in range(n_new)
                ]
                n_sampled += n_new
                for rung_idx, budget in enumerate(bracket.budgets):
                    results = evaluate(rung)
                    if rung_idx == len(bracket.budgets) - 1:
                        break
                    n_keep = len(rung) // eta
                    if n_keep == 0:
                        break
                    ranked = sorted(
                        results, key=lambda t: (-t.objective, t.config.trial_id)
                    )
                    rung = [
                        replace(t.config, budget=bracket.budgets[rung_idx + 1])
                        for t in ranked[:n_keep]
                    ]
            if not progressed:
                break
    finally:
        if log_file is not None:
            log_file.close()

    top_budget = max(t.budget for t in history)
    finalists = [t for t in history if t.budget == top_budget]
    best = min(finalists, key=lambda t: (-t.objective, t.config.trial_id))
    return best, history

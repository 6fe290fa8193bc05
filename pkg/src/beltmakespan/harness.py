"""Benchmark runner over a job corpus, report aggregation and data emission."""

from __future__ import annotations

import csv
import json
import logging
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from .core import Instance, InjectionSequence, LoadProfile, decode, load_profile, lower_bound, worst_case_bound
from .data import DEFAULT_IDLE_THRESHOLD, CorpusJob, computed_makespan, ingest_log, load_corpus
from .errors import DegenerateInput, UnknownStrategy
from .solvers import (
    DEFAULT_BRUTE_CAP,
    DEFAULT_ITERATIONS,
    DEFAULT_WALL_MS,
    STRATEGIES,
    Budget,
    SearchParams,
    solve,
    substream_seed,
)

log = logging.getLogger(__name__)

RANDOM_STRATEGIES = ("sr", "nr", "sr-loc", "nr-loc")
SOFT_TARGETS = {"nr": 1.05, "nr-loc": 1.05}
HUMAN = "human"
HUMAN_SCOPE_NOTE = (
    "human-relative ratios and the human row use only jobs with a timestamp log; "
    "lower-bound ratios of the strategies use every job"
)


@dataclass(frozen=True)
class BenchConfig:
    strategies: tuple[str, ...] = RANDOM_STRATEGIES
    budget: Budget = Budget(max_wall_ms=DEFAULT_WALL_MS)
    repeats: int = 10
    seed: int = 0
    params: SearchParams = SearchParams()
    idle_threshold: float = DEFAULT_IDLE_THRESHOLD
    brute_cap: int = DEFAULT_BRUTE_CAP

    def __post_init__(self) -> None:
        object.__setattr__(self, "strategies", tuple(self.strategies))
        for s in self.strategies:
            if s not in STRATEGIES:
                raise UnknownStrategy(f"unknown strategy {s!r}; expected one of {STRATEGIES}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")

    def to_dict(self) -> dict:
        return {
            "strategies": list(self.strategies),
            "budget": self.budget.to_dict(),
            "repeats": self.repeats,
            "seed": self.seed,
            "params": {"steps": self.params.steps, "swaps": self.params.swaps},
            "idle_threshold": self.idle_threshold,
            "brute_cap": self.brute_cap,
        }

    @classmethod
    def from_dict(cls, d: dict) -> BenchConfig:
        return cls(
            tuple(d["strategies"]),
            Budget.from_dict(d["budget"]),
            d["repeats"],
            d["seed"],
            SearchParams(**d["params"]),
            d["idle_threshold"],
            d["brute_cap"],
        )


# deterministic CI preset: iteration budget instead of wall clock
CI_BUDGET = Budget(max_sequences=DEFAULT_ITERATIONS)


@dataclass(frozen=True)
class StrategyStats:
    mean: float
    min: int
    std: float
    best_sequence: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"mean": self.mean, "min": self.min, "std": self.std, "best_sequence": list(self.best_sequence)}

    @classmethod
    def from_dict(cls, d: dict) -> StrategyStats:
        return cls(d["mean"], d["min"], d["std"], tuple(d["best_sequence"]))


@dataclass(frozen=True)
class JobRecord:
    job_id: str
    lower_bound: int
    worst_case_bound: int
    human_makespan: Optional[int]
    adjusted_time: Optional[float]
    human_sequence: Optional[tuple[str, ...]]
    instance: Instance
    stats: dict[str, StrategyStats]
    inconsistencies: tuple[str, ...] = ()

    def saved_steps(self, strategy: str) -> Optional[float]:
        if self.human_makespan is None:
            return None
        return self.human_makespan - self.stats[strategy].mean

    def gap(self, strategy: str) -> float:
        if strategy == HUMAN:
            return self.human_makespan - self.lower_bound
        return self.stats[strategy].mean - self.lower_bound

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "lower_bound": self.lower_bound,
            "worst_case_bound": self.worst_case_bound,
            "human_makespan": self.human_makespan,
            "adjusted_time": self.adjusted_time,
            "human_sequence": list(self.human_sequence) if self.human_sequence is not None else None,
            "instance": self.instance.to_dict(),
            "stats": {s: st.to_dict() for s, st in self.stats.items()},
            "saved_steps": {s: self.saved_steps(s) for s in self.stats},
            "gap": {s: self.gap(s) for s in self.stats},
            "inconsistencies": list(self.inconsistencies),
        }

    @classmethod
    def from_dict(cls, d: dict) -> JobRecord:
        hs = d["human_sequence"]
        return cls(
            d["job_id"],
            d["lower_bound"],
            d["worst_case_bound"],
            d["human_makespan"],
            d["adjusted_time"],
            tuple(hs) if hs is not None else None,
            Instance.from_dict(d["instance"]),
            {s: StrategyStats.from_dict(st) for s, st in d["stats"].items()},
            tuple(d["inconsistencies"]),
        )


@dataclass(frozen=True)
class BenchReport:
    config: BenchConfig
    jobs: tuple[JobRecord, ...]
    cumulated: dict[str, float]
    ratios: dict[str, dict[str, Optional[float]]]
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "cumulated": self.cumulated,
            "ratios": self.ratios,
            "metadata": self.metadata,
            "jobs": [j.to_dict() for j in self.jobs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> BenchReport:
        return cls(
            BenchConfig.from_dict(d["config"]),
            tuple(JobRecord.from_dict(j) for j in d["jobs"]),
            d["cumulated"],
            d["ratios"],
            d["metadata"],
        )

    @classmethod
    def from_json(cls, text: str) -> BenchReport:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    points: tuple[tuple[float, float], ...]


def trial_index(job_pos: int, strategy: str, repeat: int, repeats: int) -> int:
    return (job_pos * len(STRATEGIES) + STRATEGIES.index(strategy)) * repeats + repeat


def _run_strategy(inst: Instance, strategy: str, config: BenchConfig, job_pos: int) -> StrategyStats:
    if strategy == "brute":
        # exact and seed-free: one run stands for every repeat
        res = solve(inst, "brute", config.budget, 0, config.params, config.brute_cap)
        return StrategyStats(float(res.best_makespan), res.best_makespan, 0.0, res.best_sequence.entries)
    results = [
        solve(
            inst,
            strategy,
            config.budget,
            substream_seed(config.seed, trial_index(job_pos, strategy, r, config.repeats)),
            config.params,
        )
        for r in range(config.repeats)
    ]
    values = [r.best_makespan for r in results]
    best = min(range(len(results)), key=lambda k: (values[k], k))
    return StrategyStats(
        math.fsum(values) / len(values),
        min(values),
        statistics.pstdev(values),
        results[best].best_sequence.entries,
    )


def run_jobs(jobs: Sequence[CorpusJob], config: BenchConfig) -> BenchReport:
    records = []
    for pos, job in enumerate(jobs):
        inst = job.instance
        human = adjusted = human_seq = None
        notes: tuple[str, ...] = ()
        if job.log is not None:
            ing = ingest_log(job.log, inst, config.idle_threshold)
            inst = ing.instance
            human = computed_makespan(ing)
            adjusted = ing.adjusted_time
            human_seq = ing.human_sequence.entries
            notes = ing.inconsistencies
        stats = {s: _run_strategy(inst, s, config, pos) for s in config.strategies}
        records.append(
            JobRecord(
                job.job_id,
                lower_bound(inst),
                worst_case_bound(inst),
                human,
                adjusted,
                human_seq,
                inst,
                stats,
                notes,
            )
        )
        if (pos + 1) % 25 == 0:
            log.info("benchmarked %d/%d jobs", pos + 1, len(jobs))
    return aggregate(records, config)


def run_benchmark(corpus: Union[str, Path, Sequence[CorpusJob]], config: BenchConfig) -> BenchReport:
    """Solve every job of a corpus with each configured strategy and sum the results per strategy.

    ``corpus`` is a corpus directory or a list of already loaded jobs.
    """
    jobs = load_corpus(corpus) if isinstance(corpus, (str, Path)) else list(corpus)
    return run_jobs(jobs, config)


def aggregate(records: Sequence[JobRecord], config: BenchConfig) -> BenchReport:
    """Sum makespans over jobs first, then divide (ratio of sums)."""
    with_human = [r for r in records if r.human_makespan is not None]
    cum_lb = sum(r.lower_bound for r in records)
    cum_lb_h = sum(r.lower_bound for r in with_human)
    cum_h = sum(r.human_makespan for r in with_human)
    cumulated: dict[str, float] = {"lower_bound": float(cum_lb)}
    ratios: dict[str, dict[str, Optional[float]]] = {}
    if with_human:
        cumulated[HUMAN] = float(cum_h)
        ratios[HUMAN] = {"vs_lower_bound": cum_h / cum_lb_h, "vs_human": 1.0}
    for s in config.strategies:
        total = math.fsum(r.stats[s].mean for r in records)
        cumulated[s] = total
        vs_h = None
        if with_human:
            vs_h = math.fsum(r.stats[s].mean for r in with_human) / cum_h
        ratios[s] = {"vs_lower_bound": total / cum_lb if cum_lb else None, "vs_human": vs_h}
    metadata = {
        "job_count": len(records),
        "jobs_with_human": len(with_human),
        "human_scope": HUMAN_SCOPE_NOTE,
        "soft_targets": {
            s: {"max_ratio_vs_lower_bound": t, "met": ratios[s]["vs_lower_bound"] <= t}
            for s, t in SOFT_TARGETS.items()
            if s in ratios
        },
    }
    return BenchReport(config, tuple(records), cumulated, ratios, metadata)


def histogram(values: Sequence[float], bin_width: float) -> list[tuple[float, int]]:
    """Contiguous left-closed bins of ``bin_width`` starting at the smallest value."""
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    if not len(values):
        return []
    lo = min(values)
    counts: dict[int, int] = {}
    for v in values:
        k = int((v - lo) // bin_width)
        counts[k] = counts.get(k, 0) + 1
    return [(lo + k * bin_width, counts.get(k, 0)) for k in range(max(counts) + 1)]


def fit_least_squares(points: Sequence[tuple[float, float]]) -> LinearFit:
    pts = tuple((float(x), float(y)) for x, y in points)
    if len(pts) < 2 or len({x for x, _ in pts}) < 2:
        raise DegenerateInput("least squares needs at least two distinct x values")
    n = len(pts)
    mx = math.fsum(x for x, _ in pts) / n
    my = math.fsum(y for _, y in pts) / n
    sxx = math.fsum((x - mx) ** 2 for x, _ in pts)
    sxy = math.fsum((x - mx) * (y - my) for x, y in pts)
    slope = sxy / sxx
    return LinearFit(slope, my - slope * mx, pts)


def load_series(inst: Instance, seq: InjectionSequence) -> LoadProfile:
    """Moulds on the belt per round for the schedule a sequence induces."""
    return load_profile(decode(inst, seq))


def validation_fit(report: BenchReport) -> Optional[LinearFit]:
    pts = [(r.human_makespan, r.adjusted_time) for r in report.jobs if r.human_makespan is not None]
    try:
        return fit_least_squares(pts)
    except DegenerateInput:
        return None


def report_rows(report: BenchReport) -> list[dict]:
    rows = []
    for r in report.jobs:
        row = {"job_id": r.job_id, "lower_bound": r.lower_bound, "human": r.human_makespan}
        for s in report.config.strategies:
            row[f"{s}_mean"] = r.stats[s].mean
            row[f"{s}_min"] = r.stats[s].min
        rows.append(row)
    return rows


def _write_csv(path: Path, header: Sequence[str], rows, comments: Sequence[str] = ()) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_report(report: BenchReport, out_dir: Union[str, Path], bin_width: float = 5) -> Path:
    """Emit report.json, report.csv, histograms, the validation fit and per-round loads."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")

    rows = report_rows(report)
    header = ["job_id", "lower_bound", "human"]
    for s in report.config.strategies:
        header += [f"{s}_mean", f"{s}_min"]
    _write_csv(
        out / "report.csv",
        header,
        ([("" if row[h] is None else row[h]) for h in header] for row in rows),
    )

    with_human = [r for r in report.jobs if r.human_makespan is not None]
    for s in report.config.strategies:
        if with_human:
            _write_csv(
                out / f"saved_steps_{s}.csv",
                ["bin_start", "frequency"],
                histogram([r.saved_steps(s) for r in with_human], bin_width),
            )
        _write_csv(
            out / f"gap_{s}.csv",
            ["bin_start", "frequency"],
            histogram([r.gap(s) for r in report.jobs], bin_width),
        )
    if with_human:
        _write_csv(
            out / f"gap_{HUMAN}.csv",
            ["bin_start", "frequency"],
            histogram([r.gap(HUMAN) for r in with_human], bin_width),
        )
    fit = validation_fit(report)
    if fit is not None:
        _write_csv(
            out / "fit.csv",
            ["computed_makespan", "adjusted_time"],
            fit.points,
            comments=[f"slope={fit.slope!r}", f"intercept={fit.intercept!r}"],
        )

    load_rows = []
    for r in report.jobs:
        series = {s: r.stats[s].best_sequence for s in report.config.strategies}
        if r.human_sequence is not None:
            series = {HUMAN: r.human_sequence, **series}
        for name, seq in series.items():
            for k, load in enumerate(load_series(r.instance, InjectionSequence(seq)).per_round):
                load_rows.append((r.job_id, name, k + 1, load))
    _write_csv(out / "loads.csv", ["job_id", "series", "round", "load"], load_rows)
    return out

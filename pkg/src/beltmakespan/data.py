"""Synthetic jobs, press-exit timestamp logs, and log ingestion.

A timestamp log records one event per finished item: when it left the press,
which mould made it and the mould's type. Ingestion rebuilds the job from
such a log. Demands come from what was actually produced, and capacities are
raised where more moulds were seen than declared. The mould order comes from
the order of first appearance. Idle stretches of the line are also measured.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import (
    EMPTY,
    BeltAssignment,
    Instance,
    InjectionSequence,
    TypeSpec,
    decode,
    injections,
    load_instance,
    makespan,
    save_instance,
)
from .errors import CorpusError, EmptyLog
from .solvers import make_rng, substream_seed, uniform_sequence

DEFAULT_IDLE_THRESHOLD = 600.0
DEFAULT_JOB_COUNT = 349
DEFAULT_SLOTS = 20
TARGET_TOTAL_DEMAND = 250_000


@dataclass(frozen=True)
class CorpusProfile:
    job_count: int = DEFAULT_JOB_COUNT
    type_count_range: tuple[int, int] = (1, 8)
    # per-type mean; 250k total demand over 349 jobs of 4.5 types on average
    demand_mean: float = 159.0
    demand_dispersion: float = 0.75
    capacity_range: tuple[int, int] = (1, 8)
    slots: int = DEFAULT_SLOTS
    seed: int = 0
    with_logs: bool = True
    step_seconds: float = 30.0
    max_idle_gaps: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "type_count_range", tuple(self.type_count_range))
        object.__setattr__(self, "capacity_range", tuple(self.capacity_range))
        lo, hi = self.capacity_range
        if not 1 <= lo <= hi <= self.slots:
            raise ValueError(f"capacity_range {self.capacity_range} must lie within [1, {self.slots}]")
        lo, hi = self.type_count_range
        if not 1 <= lo <= hi:
            raise ValueError(f"bad type_count_range {self.type_count_range}")
        if self.job_count < 0 or self.demand_mean < 1 or self.demand_dispersion <= 0:
            raise ValueError("job_count >= 0, demand_mean >= 1 and demand_dispersion > 0 required")

    def expected_types(self) -> float:
        return sum(self.type_count_range) / 2

    def expected_moulds(self) -> float:
        return self.expected_types() * sum(self.capacity_range) / 2

    def expected_job_demand(self) -> float:
        return self.expected_types() * self.demand_mean

    def to_dict(self) -> dict:
        d = asdict(self)
        d["type_count_range"] = list(self.type_count_range)
        d["capacity_range"] = list(self.capacity_range)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> CorpusProfile:
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown profile fields {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class LogEvent:
    time: float
    mould_id: str
    type: str


@dataclass(frozen=True)
class TimestampLog:
    job_id: str
    start: float
    end: float
    events: tuple[LogEvent, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(self.events))

    @property
    def raw_time(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class IngestResult:
    instance: Instance
    human_sequence: InjectionSequence
    adjusted_time: float
    idle_periods: tuple[tuple[float, float], ...]
    inconsistencies: tuple[str, ...]
    step_seconds: float = field(default=math.nan, compare=False)

    def to_dict(self) -> dict:
        return {
            "instance": self.instance.to_dict(),
            "human_sequence": list(self.human_sequence.entries),
            "adjusted_time": self.adjusted_time,
            "idle_periods": [list(p) for p in self.idle_periods],
            "inconsistencies": list(self.inconsistencies),
            "step_seconds": self.step_seconds,
        }


@dataclass(frozen=True)
class CorpusJob:
    job_id: str
    instance: Instance
    log: Optional[TimestampLog] = None


def _lognormal_demands(rng: np.random.Generator, mean: float, sigma: float, k: int) -> list[int]:
    mu = math.log(mean) - sigma * sigma / 2
    return [max(1, int(round(x))) for x in rng.lognormal(mu, sigma, size=k)]


def generate_instance(profile: CorpusProfile, rng: np.random.Generator) -> Instance:
    """Random job: uniform type count, log-normal demands, uniform capacities."""
    k = int(rng.integers(profile.type_count_range[0], profile.type_count_range[1] + 1))
    demands = _lognormal_demands(rng, profile.demand_mean, profile.demand_dispersion, k)
    caps = rng.integers(profile.capacity_range[0], profile.capacity_range[1] + 1, size=k)
    return Instance(
        profile.slots,
        tuple(TypeSpec(f"P{i + 1}", d, int(c)) for i, (d, c) in enumerate(zip(demands, caps))),
    )


def synthesize_log(
    inst: Instance,
    b: BeltAssignment,
    step_seconds: float,
    idle_spec: Sequence[tuple[int, float]] = (),
    rng: Optional[np.random.Generator] = None,
    *,
    job_id: str = "job",
    start: float = 0.0,
) -> TimestampLog:
    """Press-exit log for an assignment: step ``i`` exits at ``start + (i + N) * step_seconds``.

    ``idle_spec`` entries ``(after_step, gap)`` delay every event of a later
    step by ``gap`` seconds; gaps at or after the last step only push ``end``.
    Mould ids are ``<type>#<k>`` with ``k`` counting injections of that type.
    ``rng`` is accepted for interface symmetry and unused: timing is exact.
    """
    n = inst.slots
    steps = b.steps
    gaps = sorted(idle_spec)
    ordinal: Counter = Counter()
    mould_at: list[Optional[str]] = []
    injected = {ev.step for ev in injections(b)}
    events = []
    g = 0
    delay = 0.0
    for i, a in enumerate(steps):
        while g < len(gaps) and gaps[g][0] < i:
            delay += gaps[g][1]
            g += 1
        if a is EMPTY:
            mould_at.append(None)
            continue
        if i in injected:
            ordinal[a] += 1
            mould = f"{a}#{ordinal[a]}"
        else:
            mould = mould_at[i - n]
        mould_at.append(mould)
        events.append(LogEvent(start + (i + n) * step_seconds + delay, mould, a))
    total_delay = sum(gap for _, gap in gaps)
    end = start + (len(steps) - 1 + n) * step_seconds + total_delay
    return TimestampLog(job_id, start, end, tuple(events))


def ingest_log(
    log: TimestampLog,
    declared: Instance,
    idle_threshold: float = DEFAULT_IDLE_THRESHOLD,
    step_seconds: Optional[float] = None,
) -> IngestResult:
    """Rebuild a job and its human-chosen mould order from a press-exit log.

    Idle time is the time the line stood still. Every stretch between two
    consecutive stamps (and from start to the first stamp, and from the last
    stamp to end) is compared with the running time the belt model predicts
    for it. An overshoot of at least ``idle_threshold`` seconds counts as idle
    and is subtracted. The step duration is ``step_seconds`` if given. If not,
    it is estimated as the median observed seconds per model step.
    """
    if not log.events:
        raise EmptyLog(f"log {log.job_id!r} has no events")
    notes: list[str] = []
    events = list(log.events)
    if any(b.time < a.time for a, b in zip(events, events[1:])):
        notes.append("events were not in time order; sorted")
        events.sort(key=lambda e: e.time)
    if log.start > events[0].time:
        notes.append(f"start {log.start} is after the first event at {events[0].time}")
    if log.end < events[-1].time:
        notes.append(f"end {log.end} is before the last event at {events[-1].time}")

    produced: Counter = Counter()
    mould_type: dict[str, str] = {}
    seen: set[tuple[str, str]] = set()
    first_seen: list[str] = []
    for ev in events:
        produced[ev.type] += 1
        if (ev.mould_id, ev.type) in seen:
            continue
        seen.add((ev.mould_id, ev.type))
        first_seen.append(ev.type)
        known = mould_type.setdefault(ev.mould_id, ev.type)
        if known != ev.type:
            notes.append(f"mould {ev.mould_id!r} reported as {ev.type!r} after {known!r}")
    moulds = Counter(first_seen)

    types = []
    for t in declared.types:
        if produced[t.id] == 0:
            notes.append(f"type {t.id!r}: nothing produced (demand {t.demand}); dropped")
            continue
        if produced[t.id] != t.demand:
            notes.append(f"type {t.id!r}: demand {t.demand} declared, {produced[t.id]} produced")
        cap = t.capacity
        if moulds[t.id] > cap:
            notes.append(f"type {t.id!r}: {moulds[t.id]} moulds used, capacity {cap} declared")
            cap = moulds[t.id]
        types.append(TypeSpec(t.id, produced[t.id], cap))
    for a in dict.fromkeys(ev.type for ev in events):
        if a not in declared.demand:
            notes.append(f"type {a!r}: not declared; {produced[a]} produced with {moulds[a]} moulds")
            types.append(TypeSpec(a, produced[a], moulds[a]))
    for a, c in moulds.items():
        if c > declared.slots:
            notes.append(f"type {a!r}: {c} moulds exceed the {declared.slots} slots")
    inst = Instance(declared.slots, tuple(types))
    human = InjectionSequence(tuple(first_seen))

    b = decode(inst, human)
    model_steps = [i for i, a in enumerate(b.steps) if a is not EMPTY]
    model_types = [b.steps[i] for i in model_steps]
    mismatch = next((j for j, (ev, a) in enumerate(zip(events, model_types)) if ev.type != a), None)
    if mismatch is not None:
        notes.append(f"event order departs from the belt model at event {mismatch}")

    n = inst.slots
    times = [ev.time for ev in events]
    # (from, to, model steps in between)
    segments = [(log.start, times[0], model_steps[0] + n)]
    segments += [
        (times[j], times[j + 1], model_steps[j + 1] - model_steps[j]) for j in range(len(times) - 1)
    ]
    segments.append((times[-1], log.end, 0))
    if step_seconds is None:
        rates = [(t1 - t0) / ds for t0, t1, ds in segments[1:-1]]
        if not rates:
            rates = [(times[0] - log.start) / (model_steps[0] + n)]
        step_seconds = statistics.median(rates)

    idle = []
    for t0, t1, ds in segments:
        excess = (t1 - t0) - ds * step_seconds
        if excess >= idle_threshold:
            idle.append((t0, t0 + excess))
    adjusted = log.raw_time - sum(t1 - t0 for t0, t1 in idle)
    return IngestResult(inst, human, adjusted, tuple(idle), tuple(notes), step_seconds)


def computed_makespan(result: IngestResult) -> int:
    """Makespan the belt model assigns to the mould order read off the log."""
    return makespan(decode(result.instance, result.human_sequence))


def save_log(log: TimestampLog, path: Path | str) -> None:
    Path(path).write_text(dump_log(log), encoding="utf-8")


def dump_log(log: TimestampLog) -> str:
    buf = io.StringIO()
    buf.write(f"# job_id={log.job_id}\n# start_s={float(log.start)!r}\n# end_s={float(log.end)!r}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["time_s", "mould_id", "type"])
    for ev in log.events:
        writer.writerow([repr(float(ev.time)), ev.mould_id, ev.type])
    return buf.getvalue()


def parse_log(text: str) -> TimestampLog:
    meta: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    try:
        rows = list(csv.DictReader(body))
        events = tuple(LogEvent(float(r["time_s"]), r["mould_id"], r["type"]) for r in rows)
        return TimestampLog(meta["job_id"], float(meta["start_s"]), float(meta["end_s"]), events)
    except (KeyError, ValueError, TypeError) as exc:
        raise ValueError(f"malformed timestamp log: {exc}") from exc


def load_log(path: Path | str) -> TimestampLog:
    return parse_log(Path(path).read_text(encoding="utf-8"))


def generate_corpus(profile: CorpusProfile) -> list[CorpusJob]:
    """Jobs with per-job random substreams; each job optionally gets a log of a random human order.

    The human order is a uniformly random full sequence. Logs carry up to
    ``max_idle_gaps`` stoppages of 15 minutes to 3 days. Jobs run back to
    back with a half-hour changeover.
    """
    jobs = []
    clock = 0.0
    width = max(3, len(str(profile.job_count)))
    for k in range(profile.job_count):
        rng = make_rng(substream_seed(profile.seed, k))
        inst = generate_instance(profile, rng)
        job_id = f"job-{k + 1:0{width}d}"
        log = None
        if profile.with_logs:
            b = decode(inst, uniform_sequence(inst, rng))
            n_gaps = int(rng.integers(0, profile.max_idle_gaps + 1))
            after = rng.integers(0, len(b.steps), size=n_gaps)
            length = rng.integers(900, 3 * 86400, size=n_gaps)
            spec = [(int(a), float(g)) for a, g in zip(after, length)]
            log = synthesize_log(inst, b, profile.step_seconds, spec, job_id=job_id, start=clock)
            clock = log.end + 1800.0
        jobs.append(CorpusJob(job_id, inst, log))
    return jobs


def write_corpus(jobs: Sequence[CorpusJob], out_dir: Path | str, profile: Optional[CorpusProfile] = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for job in jobs:
        save_instance(job.instance, out / f"{job.job_id}.json")
        if job.log is not None:
            save_log(job.log, out / f"{job.job_id}.csv")
    manifest = {
        "jobs": [job.job_id for job in jobs],
        "profile": profile.to_dict() if profile else None,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return out


def load_corpus(corpus_dir: Path | str) -> list[CorpusJob]:
    root = Path(corpus_dir)
    try:
        manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
        ids = manifest["jobs"]
    except FileNotFoundError as exc:
        raise CorpusError(f"{root}: no manifest.json") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise CorpusError(f"{root}: malformed manifest: {exc}") from exc
    jobs = []
    for job_id in ids:
        inst_path = root / f"{job_id}.json"
        if not inst_path.exists():
            raise CorpusError(f"{root}: job {job_id!r} has no instance file")
        log_path = root / f"{job_id}.csv"
        log = load_log(log_path) if log_path.exists() else None
        jobs.append(CorpusJob(job_id, load_instance(inst_path), log))
    return jobs

"""Domain model for scheduling moulds on a circular conveyor belt.

The belt has ``slots`` positions and advances one position per step. Only the
feed-in slot is tracked: a belt assignment lists, step by step, which type of
mould passes the feed-in (or ``None`` for an empty slot). A mould injected at
step ``i`` comes back at ``i + slots``, ``i + 2 * slots`` and so on until its
type has met its demand, at which point every mould of that type is ejected.

Everything here is immutable and side-effect free.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import (
    CapacityExceeded,
    DecodeGuardError,
    IncompleteAssignment,
    InvalidInstance,
    InvalidSequence,
    MissingType,
    NotNormalForm,
)

EMPTY = None

Step = Optional[str]


@dataclass(frozen=True)
class TypeSpec:
    id: str
    demand: int
    capacity: int


@dataclass(frozen=True)
class Instance:
    """A job: belt size plus demand and mould capacity per product type.

    Construction rejects structurally broken jobs. Capacities above the slot
    count are accepted here and clamped by :func:`validate_instance`.
    """

    slots: int
    types: tuple[TypeSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "types", tuple(self.types))
        if not isinstance(self.slots, int) or self.slots < 1:
            raise InvalidInstance(f"slots must be a positive integer, got {self.slots!r}")
        if not self.types:
            raise InvalidInstance("instance has no types")
        seen = set()
        for t in self.types:
            if not isinstance(t.id, str) or not t.id:
                raise InvalidInstance(f"type id must be a non-empty string, got {t.id!r}")
            if t.id in seen:
                raise InvalidInstance(f"duplicate type id {t.id!r}")
            seen.add(t.id)
            if not isinstance(t.demand, int) or t.demand < 1:
                raise InvalidInstance(f"type {t.id!r}: demand must be >= 1, got {t.demand!r}")
            if not isinstance(t.capacity, int) or t.capacity < 1:
                raise InvalidInstance(f"type {t.id!r}: capacity must be >= 1, got {t.capacity!r}")

    @classmethod
    def build(cls, slots: int, types: Mapping[str, tuple[int, int]]) -> Instance:
        """Shorthand: ``Instance.build(3, {"A": (2, 1), "B": (2, 1)})`` with (demand, capacity)."""
        return cls(slots, tuple(TypeSpec(k, d, c) for k, (d, c) in types.items()))

    @cached_property
    def ids(self) -> tuple[str, ...]:
        return tuple(t.id for t in self.types)

    @cached_property
    def demand(self) -> dict[str, int]:
        return {t.id: t.demand for t in self.types}

    @cached_property
    def capacity(self) -> dict[str, int]:
        return {t.id: t.capacity for t in self.types}

    @cached_property
    def index(self) -> dict[str, int]:
        return {t.id: k for k, t in enumerate(self.types)}

    @property
    def total_demand(self) -> int:
        return sum(t.demand for t in self.types)

    @property
    def total_moulds(self) -> int:
        return sum(t.capacity for t in self.types)

    def to_dict(self) -> dict:
        return {
            "slots": self.slots,
            "types": [{"id": t.id, "demand": t.demand, "capacity": t.capacity} for t in self.types],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> Instance:
        try:
            return cls(
                data["slots"],
                tuple(TypeSpec(t["id"], t["demand"], t["capacity"]) for t in data["types"]),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidInstance(f"malformed instance document: {exc}") from exc


@dataclass(frozen=True)
class InjectionSequence:
    """Ordered list of mould injections (type ids)."""

    entries: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def counts(self) -> Counter:
        return Counter(self.entries)

    def is_full(self, inst: Instance) -> bool:
        """True iff every type appears exactly ``capacity`` times."""
        return self.counts() == Counter({t.id: t.capacity for t in inst.types})

    def to_dict(self) -> dict:
        return {"entries": list(self.entries)}

    @classmethod
    def from_dict(cls, data: Mapping) -> InjectionSequence:
        try:
            entries = data["entries"]
        except (KeyError, TypeError) as exc:
            raise InvalidSequence(f"malformed sequence document: {exc}") from exc
        if not all(isinstance(e, str) for e in entries):
            raise InvalidSequence("sequence entries must be strings")
        return cls(tuple(entries))


@dataclass(frozen=True)
class BeltAssignment:
    """Feed-in slot contents per step; steps past the stored prefix are empty."""

    instance: Instance
    steps: tuple[Step, ...]

    def __post_init__(self) -> None:
        steps = tuple(self.steps)
        end = len(steps)
        while end and steps[end - 1] is EMPTY:
            end -= 1
        object.__setattr__(self, "steps", steps[:end])

    def __getitem__(self, i: int) -> Step:
        if 0 <= i < len(self.steps):
            return self.steps[i]
        return EMPTY

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class InjectionEvent:
    step: int
    type: str


@dataclass(frozen=True)
class AssignmentReport:
    cond_demand: bool
    cond_persistence: bool
    cond_capacity: bool
    econom: bool
    more_moulds: bool
    first_violation: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.first_violation is None


@dataclass(frozen=True)
class LoadProfile:
    per_round: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_round", tuple(self.per_round))

    @property
    def total(self) -> int:
        return sum(self.per_round)


def validate_instance(raw: Instance) -> tuple[Instance, list[str]]:
    """Clamp capacities above the slot count; return the instance and one warning per clamp."""
    warnings: list[str] = []
    types = []
    for t in raw.types:
        if t.capacity > raw.slots:
            warnings.append(
                f"type {t.id!r}: capacity {t.capacity} exceeds {raw.slots} slots, clamped to {raw.slots}"
            )
            t = TypeSpec(t.id, t.demand, raw.slots)
        types.append(t)
    if not warnings:
        return raw, warnings
    return Instance(raw.slots, tuple(types)), warnings


def check_sequence(inst: Instance, seq: InjectionSequence) -> None:
    """Raise unless every type occurs between 1 and ``capacity`` times and nothing else occurs."""
    counts = seq.counts()
    unknown = [a for a in counts if a not in inst.demand]
    if unknown:
        raise InvalidSequence(f"sequence uses unknown types {sorted(unknown)!r}")
    missing = [a for a in inst.ids if counts[a] == 0]
    if missing:
        raise MissingType(f"types never injected: {missing!r}")
    over = [a for a in inst.ids if counts[a] > inst.capacity[a]]
    if over:
        raise CapacityExceeded(
            "; ".join(f"{a!r} used {counts[a]} > capacity {inst.capacity[a]}" for a in over)
        )


def decode(inst: Instance, seq: InjectionSequence) -> BeltAssignment:
    """Turn an injection sequence into the belt assignment it induces.

    At every step the mould coming back from one rotation ago stays if its
    type still has demand left; otherwise (or if the slot was empty) the next
    unused entry of ``seq`` is tried, skipping types whose demand is already
    met. Once ``seq`` is used up the slot stays empty.
    """
    check_sequence(inst, seq)
    n = inst.slots
    demand = inst.demand
    placed = dict.fromkeys(demand, 0)
    total = inst.total_demand
    limit = n * total + n
    entries = seq.entries
    j = 0
    done = 0
    steps: list[Step] = []
    i = 0
    while done < total:
        if i > limit:
            raise DecodeGuardError(f"decode exceeded {limit} steps")
        a = steps[i - n] if i >= n else EMPTY
        while a is EMPTY or placed[a] == demand[a]:
            if j >= len(entries):
                a = EMPTY
                break
            a = entries[j]
            j += 1
        steps.append(a)
        if a is not EMPTY:
            placed[a] += 1
            done += 1
        i += 1
    return BeltAssignment(inst, tuple(steps))


def makespan(b: BeltAssignment) -> int:
    """Last occupied step (0-based) plus one rotation of ``slots`` steps."""
    inst = b.instance
    counts = Counter(a for a in b.steps if a is not EMPTY)
    if any(counts[a] != d for a, d in inst.demand.items()) or set(counts) - set(inst.demand):
        raise IncompleteAssignment("assignment does not meet every demand exactly")
    return len(b.steps) - 1 + inst.slots


def _rounds_needed(inst: Instance) -> int:
    return max(-(-t.demand // t.capacity) for t in inst.types)


def lower_bound(inst: Instance) -> int:
    """Lower bound on the optimal makespan from total demand and the slowest type.

    The slowest type needs ``r`` rounds; after ``r - 1`` full rounds every type
    still has ``max(0, d - (r - 1) * c)`` items to make.
    """
    n = inst.slots
    r = _rounds_needed(inst)
    rest = sum(max(0, t.demand - (r - 1) * t.capacity) for t in inst.types)
    return max(inst.total_demand, (r - 1) * n + rest) + n - 1


def worst_case_bound(inst: Instance) -> int:
    """Upper bound on the makespan of any decoded injection sequence (at most twice the lower bound)."""
    n = inst.slots
    return (_rounds_needed(inst) - 1) * n + inst.total_demand + n - 1


def injections(b: BeltAssignment) -> list[InjectionEvent]:
    n = b.instance.slots
    steps = b.steps
    return [
        InjectionEvent(i, a)
        for i, a in enumerate(steps)
        if a is not EMPTY and (i < n or steps[i - n] != a)
    ]


def moulds_used(b: BeltAssignment) -> Counter:
    return Counter(ev.type for ev in injections(b))


def check_assignment(inst: Instance, b: BeltAssignment) -> AssignmentReport:
    """Evaluate the three belt-assignment conditions and both normal-form properties.

    Steps past the stored prefix count as empty. Each failed predicate
    contributes the step where it first breaks; the smallest one is reported.
    """
    n = inst.slots
    steps = b.steps
    violations: list[int] = []

    positions: dict[str, list[int]] = {}
    for i, a in enumerate(steps):
        if a is not EMPTY:
            positions.setdefault(a, []).append(i)

    # demand: an overshoot breaks at the (d+1)-th occurrence, a shortfall at the end of the prefix
    demand_ok = True
    for a, pos in positions.items():
        d = inst.demand.get(a, 0)
        if len(pos) > d:
            demand_ok = False
            violations.append(pos[d])
    if any(len(positions.get(a, ())) < d for a, d in inst.demand.items()):
        demand_ok = False
        violations.append(len(steps))

    # persistence: b(i) = A needs b(i + n) = A unless all of A is made before step i + n
    persist_ok = True
    for i, a in enumerate(steps):
        if a is EMPTY or b[i + n] == a:
            continue
        if _count_leq(positions[a], i + n - 1) != inst.demand.get(a):
            persist_ok = False
            violations.append(i)
            break

    inj = injections(b)
    used: Counter = Counter()
    capacity_ok = True
    for ev in inj:
        used[ev.type] += 1
        if capacity_ok and used[ev.type] > inst.capacity.get(ev.type, 0):
            capacity_ok = False
            violations.append(ev.step)

    first_empty = next((i for i, a in enumerate(steps) if a is EMPTY), None)
    econom_ok = True
    more_ok = True
    if first_empty is not None:
        if inj and first_empty < inj[-1].step:
            econom_ok = False
        more_ok = not any(
            used[a] < inst.capacity[a] and positions.get(a, [-1])[-1] >= first_empty
            for a in inst.ids
        )
        if not (econom_ok and more_ok):
            violations.append(first_empty)

    return AssignmentReport(
        cond_demand=demand_ok,
        cond_persistence=persist_ok,
        cond_capacity=capacity_ok,
        econom=econom_ok,
        more_moulds=more_ok,
        first_violation=min(violations) if violations else None,
    )


def _count_leq(sorted_positions: Sequence[int], bound: int) -> int:
    lo, hi = 0, len(sorted_positions)
    while lo < hi:
        mid = (lo + hi) // 2
        if sorted_positions[mid] <= bound:
            lo = mid + 1
        else:
            hi = mid
    return lo


def short_injection_sequence(b: BeltAssignment) -> InjectionSequence:
    """Types of all injections in step order; decoding it gives ``b`` back."""
    report = check_assignment(b.instance, b)
    if not (report.econom and report.more_moulds):
        raise NotNormalForm(f"assignment is not in normal form (first violation at step {report.first_violation})")
    return InjectionSequence(tuple(ev.type for ev in injections(b)))


def load_profile(b: BeltAssignment) -> LoadProfile:
    n = b.instance.slots
    steps = b.steps
    return LoadProfile(
        tuple(sum(a is not EMPTY for a in steps[r : r + n]) for r in range(0, len(steps), n))
    )


def _dump(doc: dict, path: Path | str) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def save_instance(inst: Instance, path: Path | str) -> None:
    _dump(inst.to_dict(), path)


def load_instance(path: Path | str, *, validate: bool = True) -> Instance:
    inst = Instance.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    if validate:
        inst, _ = validate_instance(inst)
    return inst


def save_sequence(seq: InjectionSequence, path: Path | str) -> None:
    _dump(seq.to_dict(), path)


def load_sequence(path: Path | str) -> InjectionSequence:
    return InjectionSequence.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def full_sequence(inst: Instance) -> InjectionSequence:
    """Every type repeated ``capacity`` times, in instance order."""
    return InjectionSequence(tuple(a for t in inst.types for a in [t.id] * t.capacity))


def multiset_permutation_count(counts: Iterable[int]) -> int:
    counts = list(counts)
    result = math.factorial(sum(counts))
    for c in counts:
        result //= math.factorial(c)
    return result

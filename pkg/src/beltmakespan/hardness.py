"""Encoding of Partition as a belt instance, plus a subset-sum checker to test it against."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .core import Instance, TypeSpec
from .errors import InvalidSlots
from .solvers import DEFAULT_BRUTE_CAP, brute_force

DEFAULT_SLOTS = 3


@dataclass(frozen=True)
class PartitionInstance:
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ValueError("partition instance needs at least one value")
        if any(not isinstance(v, int) or v < 1 for v in self.values):
            raise ValueError(f"partition values must be positive integers, got {self.values!r}")


@dataclass(frozen=True)
class ReductionOutput:
    instance: Optional[Instance]
    threshold: Optional[int]
    trivially_no: bool

    def to_dict(self) -> dict:
        return {
            "instance": self.instance.to_dict() if self.instance else None,
            "threshold": self.threshold,
            "trivially_no": self.trivially_no,
        }


def filler_id(k: int) -> str:
    return f"__filler_{k}"


def reduce_partition(p: PartitionInstance, slots: int = DEFAULT_SLOTS) -> ReductionOutput:
    """Build the belt instance whose optimum hits the threshold iff ``p`` splits evenly.

    Each value becomes a single-mould type with that demand; ``slots - 2``
    single-mould fillers with demand half the total occupy the rest of the belt.
    """
    if slots < 2:
        raise InvalidSlots(f"reduction needs at least 2 slots, got {slots}")
    total = sum(p.values)
    if total % 2:
        return ReductionOutput(None, None, True)
    half = total // 2
    types = [TypeSpec(f"v{i}", v, 1) for i, v in enumerate(p.values)]
    types += [TypeSpec(filler_id(k), half, 1) for k in range(slots - 2)]
    return ReductionOutput(Instance(slots, tuple(types)), slots * half + slots - 1, False)


def subset_sum_oracle(p: PartitionInstance) -> bool:
    total = sum(p.values)
    if total % 2:
        return False
    target = total // 2
    reachable = 1  # bit k set <=> some subset sums to k
    for v in p.values:
        reachable |= reachable << v
    return bool(reachable >> target & 1)


def decide_partition_via_belt(
    p: PartitionInstance, slots: int = DEFAULT_SLOTS, cap: int = DEFAULT_BRUTE_CAP
) -> bool:
    red = reduce_partition(p, slots)
    if red.trivially_no:
        return False
    return brute_force(red.instance, cap).best_makespan == red.threshold


def parse_ints(text: str) -> PartitionInstance:
    return PartitionInstance(tuple(int(x) for x in text.split(",") if x.strip()))


def even_split(values: Sequence[int]) -> Optional[tuple[int, ...]]:
    """Indices of one half of an even split, or None; exponential, for small inputs only."""
    total = sum(values)
    if total % 2:
        return None
    for mask in range(1 << len(values)):
        if sum(v for i, v in enumerate(values) if mask >> i & 1) * 2 == total:
            return tuple(i for i in range(len(values)) if mask >> i & 1)
    return None

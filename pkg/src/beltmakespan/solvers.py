"""Randomized sequence generators, swap-based local search and an exhaustive oracle.

All random solvers work on full injection sequences (every type exactly
``capacity`` times) and score them by decoding. Randomness comes from a
PCG64 stream seeded with a 64-bit integer, so a fixed seed plus an
iteration budget reproduces a run exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np

from . import _kernels
from .core import (
    Instance,
    InjectionSequence,
    decode,
    makespan,
    multiset_permutation_count,
)
from .errors import TooLarge, UnknownStrategy

STRATEGIES = ("sr", "nr", "sr-loc", "nr-loc", "brute")
GENERATORS = ("uniform", "nr")

DEFAULT_STEPS = 10
DEFAULT_SWAPS = 10
DEFAULT_WALL_MS = 1000.0
DEFAULT_ITERATIONS = 2000
DEFAULT_BRUTE_CAP = 50_000

# sequences drawn per compiled call; smaller when a wall-clock limit applies
_CHUNK = 256
_WALL_CHUNK = 32

_SEED_MASK = (1 << 64) - 1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & _SEED_MASK))


def substream_seed(seed: int, trial: int) -> int:
    """Seed for independent trial ``trial`` of a run seeded with ``seed``."""
    return (seed ^ trial) & _SEED_MASK


@dataclass(frozen=True)
class Budget:
    max_sequences: Optional[int] = None
    max_wall_ms: Optional[float] = None

    def __post_init__(self) -> None:
        if self.max_sequences is None and self.max_wall_ms is None:
            raise ValueError("budget needs a sequence limit, a wall-clock limit, or both")
        if self.max_sequences is not None and self.max_sequences < 1:
            raise ValueError("max_sequences must be >= 1")
        if self.max_wall_ms is not None and self.max_wall_ms < 0:
            raise ValueError("max_wall_ms must be >= 0")

    def exhausted(self, evaluated: int, started: float) -> bool:
        if self.max_sequences is not None and evaluated >= self.max_sequences:
            return True
        if self.max_wall_ms is not None and (time.perf_counter() - started) * 1000.0 >= self.max_wall_ms:
            return True
        return False

    def remaining(self, evaluated: int) -> int:
        if self.max_sequences is None:
            return np.iinfo(np.int64).max
        return self.max_sequences - evaluated

    def to_dict(self) -> dict:
        return {"max_sequences": self.max_sequences, "max_wall_ms": self.max_wall_ms}

    @classmethod
    def from_dict(cls, data: dict) -> Budget:
        return cls(data.get("max_sequences"), data.get("max_wall_ms"))


@dataclass(frozen=True)
class SearchParams:
    steps: int = DEFAULT_STEPS
    swaps: int = DEFAULT_SWAPS

    def __post_init__(self) -> None:
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.swaps < 1:
            raise ValueError("swaps must be >= 1")


@dataclass(frozen=True)
class SolveResult:
    best_sequence: InjectionSequence
    best_makespan: int
    sequences_evaluated: int
    elapsed_ms: float = field(default=0.0, compare=False)
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "best_sequence": list(self.best_sequence.entries),
            "best_makespan": self.best_makespan,
            "sequences_evaluated": self.sequences_evaluated,
            "elapsed_ms": self.elapsed_ms,
            "seed": self.seed,
        }


class _Codec:
    """Integer-coded view of an instance for the compiled kernels."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self.ids = inst.ids
        self.demand = np.array([t.demand for t in inst.types], dtype=np.int64)
        self.capacity = np.array([t.capacity for t in inst.types], dtype=np.int64)
        self.weights = self.demand / self.capacity
        self.base = np.repeat(np.arange(len(inst.types), dtype=np.int64), self.capacity)
        self.n = inst.slots
        self.total = inst.total_demand

    def encode(self, seq: InjectionSequence) -> np.ndarray:
        idx = self.inst.index
        return np.array([idx[a] for a in seq.entries], dtype=np.int64)

    def decode_codes(self, codes: np.ndarray) -> InjectionSequence:
        ids = self.ids
        return InjectionSequence(tuple(ids[c] for c in codes.tolist()))

    def score(self, seqs: np.ndarray) -> np.ndarray:
        return _kernels.makespan_batch(seqs, self.demand, self.n, self.total)


def _draw_uniform(codec: _Codec, rng: np.random.Generator, k: int) -> np.ndarray:
    return rng.permuted(np.tile(codec.base, (k, 1)), axis=1)


def _draw_nr(codec: _Codec, rng: np.random.Generator, k: int) -> np.ndarray:
    return _kernels.nr_fill(codec.weights, codec.capacity, rng.random((k, codec.base.shape[0])))


_DRAW: dict[str, Callable[[_Codec, np.random.Generator, int], np.ndarray]] = {
    "uniform": _draw_uniform,
    "nr": _draw_nr,
}


def _drawer(generator: str):
    try:
        return _DRAW[generator]
    except KeyError:
        raise UnknownStrategy(f"unknown generator {generator!r}; expected one of {GENERATORS}") from None


def uniform_sequence(inst: Instance, rng: np.random.Generator) -> InjectionSequence:
    """Uniformly random arrangement of the full mould multiset."""
    codec = _Codec(inst)
    return codec.decode_codes(_draw_uniform(codec, rng, 1)[0])


def nr_sequence(inst: Instance, rng: np.random.Generator) -> InjectionSequence:
    """Random full sequence favouring types with a large demand-to-capacity ratio."""
    codec = _Codec(inst)
    return codec.decode_codes(_draw_nr(codec, rng, 1)[0])


def run_random(inst: Instance, generator: str, budget: Budget, seed: int) -> SolveResult:
    """Draw sequences until the budget runs out; keep the first one with the smallest makespan."""
    draw = _drawer(generator)
    codec = _Codec(inst)
    rng = make_rng(seed)
    chunk = _CHUNK if budget.max_wall_ms is None else _WALL_CHUNK
    started = time.perf_counter()
    best_codes = None
    best_ms = 0
    evaluated = 0
    while evaluated == 0 or not budget.exhausted(evaluated, started):
        k = min(chunk, budget.remaining(evaluated))
        seqs = draw(codec, rng, k)
        scores = codec.score(seqs)
        r = int(np.argmin(scores))
        if best_codes is None or scores[r] < best_ms:
            best_ms = int(scores[r])
            best_codes = seqs[r].copy()
        evaluated += k
    return SolveResult(
        codec.decode_codes(best_codes),
        best_ms,
        evaluated,
        (time.perf_counter() - started) * 1000.0,
        seed,
    )


def _swap_pairs(rng: np.random.Generator, params: SearchParams, length: int) -> np.ndarray:
    if params.steps == 0:
        return np.zeros((0, params.swaps, 2), dtype=np.int64)
    return rng.integers(0, length, size=(params.steps, params.swaps, 2), dtype=np.int64)


def local_search(
    inst: Instance,
    initial: InjectionSequence,
    params: SearchParams,
    rng: np.random.Generator,
) -> SolveResult:
    """Swap search: each step tries ``swaps`` random position swaps and moves to the best one.

    The move is taken even when it is worse than the current sequence; the
    result is the best sequence seen, so it never loses to ``initial``.
    """
    codec = _Codec(inst)
    started = time.perf_counter()
    init = codec.encode(initial)
    pairs = _swap_pairs(rng, params, init.shape[0])
    best, best_ms, evals = _kernels.local_search_codes(
        init, codec.demand, codec.n, codec.total, pairs, np.iinfo(np.int64).max
    )
    return SolveResult(
        codec.decode_codes(best), int(best_ms), int(evals), (time.perf_counter() - started) * 1000.0
    )


def run_restarts(
    inst: Instance,
    generator: str,
    params: SearchParams,
    budget: Budget,
    seed: int,
) -> SolveResult:
    """Random restarts, each followed by a local search; every decoded sequence counts toward the budget."""
    draw = _drawer(generator)
    codec = _Codec(inst)
    rng = make_rng(seed)
    started = time.perf_counter()
    best_codes = None
    best_ms = 0
    evaluated = 0
    while evaluated == 0 or not budget.exhausted(evaluated, started):
        init = draw(codec, rng, 1)[0]
        pairs = _swap_pairs(rng, params, init.shape[0])
        cand, ms, evals = _kernels.local_search_codes(
            init, codec.demand, codec.n, codec.total, pairs, budget.remaining(evaluated)
        )
        evaluated += int(evals)
        if best_codes is None or ms < best_ms:
            best_ms = int(ms)
            best_codes = cand
    return SolveResult(
        codec.decode_codes(best_codes),
        best_ms,
        evaluated,
        (time.perf_counter() - started) * 1000.0,
        seed,
    )


def distinct_permutations(counts: dict[str, int]) -> Iterator[tuple[str, ...]]:
    """Each distinct arrangement of a multiset exactly once, in lexicographic key order."""
    keys = list(counts)
    left = [counts[k] for k in keys]
    length = sum(left)
    buf: list[str] = [""] * length

    def rec(pos: int) -> Iterator[tuple[str, ...]]:
        if pos == length:
            yield tuple(buf)
            return
        for t, key in enumerate(keys):
            if left[t]:
                left[t] -= 1
                buf[pos] = key
                yield from rec(pos + 1)
                left[t] += 1

    return rec(0)


def brute_force(inst: Instance, cap: int = DEFAULT_BRUTE_CAP) -> SolveResult:
    """Exact optimum by decoding every distinct full sequence."""
    count = multiset_permutation_count(t.capacity for t in inst.types)
    if count > cap:
        raise TooLarge(f"{count} distinct sequences exceed the cap of {cap}")
    started = time.perf_counter()
    best_seq = None
    best_ms = 0
    for entries in distinct_permutations(inst.capacity):
        seq = InjectionSequence(entries)
        ms = makespan(decode(inst, seq))
        if best_seq is None or ms < best_ms:
            best_seq, best_ms = seq, ms
    return SolveResult(best_seq, best_ms, count, (time.perf_counter() - started) * 1000.0)


def solve(
    inst: Instance,
    strategy: str,
    budget: Budget,
    seed: int,
    params: SearchParams = SearchParams(),
    cap: int = DEFAULT_BRUTE_CAP,
) -> SolveResult:
    """Run one of the named strategies (``sr``, ``nr``, ``sr-loc``, ``nr-loc``, ``brute``)."""
    if strategy == "sr":
        return run_random(inst, "uniform", budget, seed)
    if strategy == "nr":
        return run_random(inst, "nr", budget, seed)
    if strategy == "sr-loc":
        return run_restarts(inst, "uniform", params, budget, seed)
    if strategy == "nr-loc":
        return run_restarts(inst, "nr", params, budget, seed)
    if strategy == "brute":
        return brute_force(inst, cap)
    raise UnknownStrategy(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")

"""Acceptance criteria 1-10. Each test appends one PASS/FAIL line to the terminal summary.

Criteria 8 and 10 run the full synthetic benchmark twice (several minutes).
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from itertools import combinations_with_replacement

import numpy as np
import pytest

from beltmakespan.core import (
    Instance,
    InjectionSequence,
    TypeSpec,
    check_assignment,
    decode,
    load_profile,
    lower_bound,
    makespan,
    multiset_permutation_count,
    short_injection_sequence,
    worst_case_bound,
)
from beltmakespan.data import CorpusProfile, generate_corpus, ingest_log, synthesize_log
from beltmakespan.hardness import PartitionInstance, decide_partition_via_belt, subset_sum_oracle
from beltmakespan.harness import CI_BUDGET, RANDOM_STRATEGIES, BenchConfig, run_benchmark
from beltmakespan.solvers import (
    Budget,
    SearchParams,
    brute_force,
    distinct_permutations,
    local_search,
    make_rng,
    nr_sequence,
    run_random,
)

from .conftest import ACCEPTANCE_LINES, random_instance, random_sequence

LOADS = {"checked": 0, "failed": 0, "sources": set()}
BENCH: dict[str, str] = {}


@contextmanager
def criterion(num: int, title: str):
    info: list[str] = []
    t0 = time.perf_counter()
    try:
        yield info
    except BaseException:
        ACCEPTANCE_LINES.append(f"C{num:<2} FAIL  {title}  {'; '.join(info)}")
        raise
    detail = "; ".join(info + [f"{time.perf_counter() - t0:.1f}s"])
    ACCEPTANCE_LINES.append(f"C{num:<2} PASS  {title}  ({detail})")


def conserve(inst: Instance, b, source: str) -> None:
    LOADS["checked"] += 1
    LOADS["sources"].add(source)
    if sum(load_profile(b).per_round) != inst.total_demand:
        LOADS["failed"] += 1


def small_instances(seed: int = 20240601, count: int = 240) -> list[Instance]:
    """|T| <= 3, N in {2,3,4}, d <= 6, c <= min(3, N), sum of capacities <= 7."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(2, 5))
        k = int(rng.integers(1, 4))
        caps = rng.integers(1, min(3, n) + 1, size=k)
        if caps.sum() > 7:
            continue
        dem = rng.integers(1, 7, size=k)
        out.append(Instance(n, tuple(TypeSpec(f"T{i}", int(d), int(c)) for i, (d, c) in enumerate(zip(dem, caps)))))
    return out


SMALL = small_instances()


def test_c1_oracle_equivalence():
    with criterion(1, "oracle equivalence on small instances") as info:
        checked = 0
        for inst in SMALL:
            lb, wcb = lower_bound(inst), worst_case_bound(inst)
            assert wcb <= 2 * lb
            assert brute_force(inst).best_makespan >= lb
            for perm in distinct_permutations(inst.capacity):
                b = decode(inst, InjectionSequence(perm))
                assert lb <= makespan(b) <= wcb
                conserve(inst, b, "C1")
                checked += 1
        info.append(f"{len(SMALL)} instances, {checked} decoded sequences")


def test_c2_uniform_sampling_finds_optimum():
    with criterion(2, "SR with 3x permutation budget hits the optimum") as info:
        optimum = [brute_force(inst).best_makespan for inst in SMALL]
        rates = []
        for batch in range(5):
            hits = 0
            for k, inst in enumerate(SMALL):
                budget = Budget(max_sequences=3 * multiset_permutation_count(inst.capacity.values()))
                res = run_random(inst, "uniform", budget, batch * 1000 + k)
                conserve(inst, decode(inst, res.best_sequence), "C2")
                hits += res.best_makespan == optimum[k]
            rates.append(hits / len(SMALL))
        info.append("hit rates per batch " + ", ".join(f"{r:.3f}" for r in rates))
        assert min(rates) >= 0.95


def test_c3_reduction_agreement():
    with criterion(3, "partition reduction agrees with subset-sum") as info:
        count = 0
        for size in range(1, 5):
            for values in combinations_with_replacement(range(1, 5), size):
                p = PartitionInstance(values)
                assert decide_partition_via_belt(p, 3) == subset_sum_oracle(p), values
                count += 1
        info.append(f"{count} multisets")


def test_c4_normal_form_and_round_trip():
    with criterion(4, "normal form flags and decode round trip") as info:
        rng = np.random.default_rng(4)
        for _ in range(1000):
            inst = random_instance(rng, slots=(1, 20), types=(1, 6), demand=(1, 60), capacity=8)
            # normal form is a property of full sequences (every mould injected once)
            b = decode(inst, random_sequence(rng, inst, full=True))
            rep = check_assignment(inst, b)
            assert rep.ok and all(
                (rep.cond_demand, rep.cond_persistence, rep.cond_capacity, rep.econom, rep.more_moulds)
            )
            assert decode(inst, short_injection_sequence(b)) == b
            conserve(inst, b, "C4")
        info.append("1000 pairs")


def test_c5_nr_first_draw():
    with criterion(5, "NR first-draw frequency of A is 0.40 +- 0.02") as info:
        inst = Instance.build(3, {"A": (4, 2), "B": (3, 1)})
        rng = make_rng(5)
        draws = [nr_sequence(inst, rng) for _ in range(10_000)]
        freq = sum(s.entries[0] == "A" for s in draws) / len(draws)
        for s in draws[:50]:
            conserve(inst, decode(inst, s), "C5")
        info.append(f"frequency {freq:.4f}")
        assert abs(freq - 0.40) <= 0.02


def test_c6_local_search_contract():
    with criterion(6, "local search never worsens; Steps=0 is identity") as info:
        rng = np.random.default_rng(6)
        improved = 0
        for run in range(500):
            inst = random_instance(rng, slots=(2, 20), types=(1, 6), demand=(1, 80), capacity=8)
            init = random_sequence(rng, inst, full=True)
            start = makespan(decode(inst, init))
            res = local_search(inst, init, SearchParams(10, 10), make_rng(run))
            b = decode(inst, res.best_sequence)
            assert res.best_makespan == makespan(b) <= start
            conserve(inst, b, "C6")
            improved += res.best_makespan < start
            same = local_search(inst, init, SearchParams(0, 10), make_rng(run))
            assert same.best_sequence == init and same.best_makespan == start
        info.append(f"500 runs, {improved} improved")


def test_c7_ingestion():
    with criterion(7, "log ingestion round trip and 900 s gap") as info:
        rng = np.random.default_rng(7)
        gap_cases = 0
        for k in range(300):
            inst = random_instance(rng, slots=(1, 20), types=(1, 6), demand=(1, 60), capacity=8)
            b = decode(inst, random_sequence(rng, inst, full=True))
            conserve(inst, b, "C7")
            plain = synthesize_log(inst, b, 30, job_id=f"c7-{k}")
            res = ingest_log(plain, inst, 600)
            assert res.human_sequence == short_injection_sequence(b)
            assert res.inconsistencies == () and res.instance == inst
            assert res.adjusted_time == plain.raw_time
            if inst.total_demand >= 3:
                after = int(rng.integers(0, len(b.steps)))
                gapped = synthesize_log(inst, b, 30, [(after, 900.0)], job_id=f"c7-{k}")
                assert ingest_log(gapped, inst, 600).adjusted_time == gapped.raw_time - 900
                gap_cases += 1
        info.append(f"300 round trips, {gap_cases} gap logs")


@pytest.fixture(scope="module")
def bench_corpus():
    return generate_corpus(CorpusProfile())


def _bench(jobs):
    config = BenchConfig(strategies=RANDOM_STRATEGIES, budget=CI_BUDGET, repeats=10, seed=0)
    return run_benchmark(jobs, config)


@pytest.mark.slow
def test_c8_synthetic_benchmark(bench_corpus):
    with criterion(8, "synthetic corpus benchmark ratios in [1, 2]") as info:
        jobs = bench_corpus
        total = sum(j.instance.total_demand for j in jobs)
        info.append(f"{len(jobs)} jobs, demand {total}")
        assert len(jobs) == 349
        assert abs(total - 250_000) <= 25_000
        assert all(j.instance.slots == 20 for j in jobs)
        assert all(1 <= t.capacity <= 8 for j in jobs for t in j.instance.types)

        report = _bench(jobs)
        BENCH["first"] = report.to_json()
        for r in report.jobs:
            for s in RANDOM_STRATEGIES:
                st = r.stats[s]
                assert r.lower_bound <= st.min <= st.mean <= r.worst_case_bound
                conserve(r.instance, decode(r.instance, InjectionSequence(st.best_sequence)), "C8")
            conserve(r.instance, decode(r.instance, InjectionSequence(r.human_sequence)), "C8")
        for s, ratio in report.ratios.items():
            info.append(f"{s} {ratio['vs_lower_bound']:.4f}")
        for s, target in report.metadata["soft_targets"].items():
            info.append(f"soft {s}<=1.05 {'met' if target['met'] else 'missed'}")
        for s in RANDOM_STRATEGIES:
            assert 1.0 <= report.ratios[s]["vs_lower_bound"] <= 2.0


def test_c9_load_conservation():
    with criterion(9, "load conservation over decoded assignments") as info:
        info.append(f"{LOADS['checked']} assignments from {','.join(sorted(LOADS['sources']))}")
        assert LOADS["checked"] > 0
        assert LOADS["failed"] == 0


@pytest.mark.slow
def test_c10_determinism(bench_corpus):
    with criterion(10, "benchmark rerun is bit-identical") as info:
        first = BENCH.get("first")
        if first is None:
            first = _bench(bench_corpus).to_json()
        second = _bench(bench_corpus).to_json()
        info.append(f"{len(second)} bytes")
        assert second == first

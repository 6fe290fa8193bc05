from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from beltmakespan.core import Instance, InjectionSequence, TypeSpec

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def two_by_one() -> Instance:
    return Instance.build(3, {"A": (2, 1), "B": (2, 1)})


@pytest.fixture
def mixed() -> Instance:
    return Instance.build(3, {"A": (4, 2), "B": (3, 1)})


@st.composite
def instances(draw, max_slots=5, max_types=3, max_demand=8, max_capacity=3):
    slots = draw(st.integers(1, max_slots))
    k = draw(st.integers(1, max_types))
    types = tuple(
        TypeSpec(
            f"T{i}",
            draw(st.integers(1, max_demand)),
            draw(st.integers(1, min(slots, max_capacity))),
        )
        for i in range(k)
    )
    return Instance(slots, types)


@st.composite
def instance_and_sequence(draw, full=False, **kw):
    inst = draw(instances(**kw))
    entries = []
    for t in inst.types:
        count = t.capacity if full else draw(st.integers(1, t.capacity))
        entries += [t.id] * count
    entries = draw(st.permutations(entries))
    return inst, InjectionSequence(tuple(entries))


def random_instance(rng: np.random.Generator, slots=(1, 8), types=(1, 5), demand=(1, 30), capacity=5) -> Instance:
    n = int(rng.integers(slots[0], slots[1] + 1))
    k = int(rng.integers(types[0], types[1] + 1))
    return Instance(
        n,
        tuple(
            TypeSpec(f"T{i}", int(rng.integers(demand[0], demand[1] + 1)), int(rng.integers(1, min(n, capacity) + 1)))
            for i in range(k)
        ),
    )


def random_sequence(rng: np.random.Generator, inst: Instance, full=False) -> InjectionSequence:
    entries = []
    for t in inst.types:
        count = t.capacity if full else int(rng.integers(1, t.capacity + 1))
        entries += [t.id] * count
    rng.shuffle(entries)
    return InjectionSequence(tuple(entries))

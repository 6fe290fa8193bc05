"""Scheduling moulds on a circular conveyor belt to minimise job makespan."""

from .core import (
    EMPTY,
    AssignmentReport,
    BeltAssignment,
    InjectionEvent,
    InjectionSequence,
    Instance,
    LoadProfile,
    TypeSpec,
    check_assignment,
    decode,
    injections,
    load_profile,
    lower_bound,
    makespan,
    short_injection_sequence,
    validate_instance,
    worst_case_bound,
)
from .solvers import (
    Budget,
    SearchParams,
    SolveResult,
    brute_force,
    local_search,
    make_rng,
    nr_sequence,
    run_random,
    run_restarts,
    solve,
    uniform_sequence,
)

__version__ = "0.1.0"

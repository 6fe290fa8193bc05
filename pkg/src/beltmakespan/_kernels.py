"""Compiled inner loops for the solvers.

Sequences are int64 arrays of type codes (positions in ``Instance.types``).
Every routine here mirrors a pure-Python counterpart in ``core`` or
``solvers``; the test-suite checks them against each other.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def makespan_codes(seq, demand, n, total):
    placed = np.zeros(demand.shape[0], np.int64)
    belt = np.full(n, -1, np.int64)  # belt[i % n] holds the content of step i - n
    length = seq.shape[0]
    limit = n * total + n
    j = 0
    done = 0
    last = -1
    i = 0
    pos = 0
    while done < total:
        if i > limit:
            return -1
        a = belt[pos]
        while a < 0 or placed[a] == demand[a]:
            if j >= length:
                a = -1
                break
            a = seq[j]
            j += 1
        belt[pos] = a
        if a >= 0:
            placed[a] += 1
            done += 1
            last = i
        i += 1
        pos += 1
        if pos == n:
            pos = 0
    return last + n


@njit(cache=True)
def makespan_batch(seqs, demand, n, total):
    out = np.empty(seqs.shape[0], np.int64)
    for r in range(seqs.shape[0]):
        out[r] = makespan_codes(seqs[r], demand, n, total)
    return out


@njit(cache=True)
def nr_fill(weights, capacity, uniforms):
    """Weighted draws without replacement of moulds; one row of ``uniforms`` per sequence.

    A type with moulds left is picked with probability proportional to its
    weight; the weight drops out once the type's last mould is drawn.
    """
    rows, length = uniforms.shape
    n_types = weights.shape[0]
    out = np.empty((rows, length), np.int64)
    for r in range(rows):
        left = capacity.copy()
        total = 0.0
        for t in range(n_types):
            total += weights[t]
        for k in range(length):
            x = uniforms[r, k] * total
            acc = 0.0
            chosen = -1
            for t in range(n_types):
                if left[t] > 0:
                    acc += weights[t]
                    chosen = t
                    if x < acc:
                        break
            out[r, k] = chosen
            left[chosen] -= 1
            if left[chosen] == 0:
                total -= weights[chosen]
    return out


@njit(cache=True)
def local_search_codes(initial, demand, n, total, pairs, max_evals):
    """Best-improvement swap search over pre-drawn position pairs.

    ``pairs`` has shape (steps, swaps, 2). Every candidate evaluation counts
    against ``max_evals`` (the initial sequence included). Returns the best
    visited sequence, its makespan and the number of evaluations spent.
    """
    cur = initial.copy()
    best = initial.copy()
    if max_evals < 1:
        return best, -1, 0
    best_ms = makespan_codes(cur, demand, n, total)
    evals = 1
    n_steps = pairs.shape[0]
    n_swaps = pairs.shape[1]
    for k in range(n_steps):
        step_ms = -1
        sa = 0
        sb = 0
        for t in range(n_swaps):
            if evals >= max_evals:
                return best, best_ms, evals
            a = pairs[k, t, 0]
            b = pairs[k, t, 1]
            tmp = cur[a]
            cur[a] = cur[b]
            cur[b] = tmp
            ms = makespan_codes(cur, demand, n, total)
            evals += 1
            if ms < best_ms:
                best_ms = ms
                best[:] = cur
            if step_ms < 0 or ms < step_ms:
                step_ms = ms
                sa = a
                sb = b
            tmp = cur[a]
            cur[a] = cur[b]
            cur[b] = tmp
        tmp = cur[sa]
        cur[sa] = cur[sb]
        cur[sb] = tmp
    return best, best_ms, evals

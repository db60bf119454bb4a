"""Frozen reference implementations the tests score against.

These are written for obviousness, not speed: recursive LCS, exhaustive
alignment search, nested-loop aggregation. They must stay independent of the
library's implementations.
"""

from __future__ import annotations

import sys
from functools import lru_cache
from itertools import permutations


def lcs_recursive(a, b) -> int:
    """Longest common subsequence length, straight from the recurrence."""
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def rec(i: int, j: int) -> int:
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + rec(i + 1, j + 1)
        return max(rec(i + 1, j), rec(i, j + 1))

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(10000)
    try:
        return rec(0, 0)
    finally:
        sys.setrecursionlimit(old)


def rouge_l_reference(candidate, reference, beta: float = 1.0) -> float:
    lcs = lcs_recursive(candidate, reference)
    if lcs == 0:
        return 0.0
    p = lcs / len(candidate)
    r = lcs / len(reference)
    return (1 + beta * beta) * p * r / (r + beta * beta * p)


def chunk_count(pairs) -> int:
    """Chunks of an alignment given as (candidate index, reference index)
    pairs: maximal runs adjacent on both sides."""
    pairs = sorted(pairs)
    chunks = 0
    prev = None
    for ci, ri in pairs:
        if prev is None or ci != prev[0] + 1 or ri != prev[1] + 1:
            chunks += 1
        prev = (ci, ri)
    return chunks


def best_alignment_exhaustive(allowed) -> tuple[int, int]:
    """Search every injective alignment; return (max matches, min chunks
    among maximum-match alignments). ``allowed[i]`` lists the reference
    indices candidate token i may match.

    Exhaustive recursion with memoization over (position, used references,
    previous match); feasible for the short phrases these metrics target.
    """
    n = len(allowed)

    @lru_cache(maxsize=None)
    def rec(i: int, used: frozenset, last: tuple | None) -> tuple[int, int]:
        if i == n:
            return (0, 0)
        # option 1: leave token i unaligned
        best_m, best_negc = rec(i + 1, used, None)
        # option 2: align it to any free compatible reference token
        for j in allowed[i]:
            if j in used:
                continue
            adjacent = last is not None and j == last + 1
            m, negc = rec(i + 1, used | {j}, j)
            m, negc = m + 1, negc - (0 if adjacent else 1)
            if (m, negc) > (best_m, best_negc):
                best_m, best_negc = m, negc
        return (best_m, best_negc)

    matches, negc = rec(0, frozenset(), None)
    return matches, -negc


def best_alignment_tiny(allowed) -> tuple[int, int]:
    """Independent cross-check of the oracle itself, pure enumeration.

    Only usable for very short inputs: tries every subset of candidate
    positions and every permutation of reference assignments.
    """
    n = len(allowed)
    best = (0, 0)  # (matches, -chunks)
    positions = list(range(n))
    for mask in range(1 << n):
        chosen = [i for i in positions if mask >> i & 1]
        refs = sorted({j for i in chosen for j in allowed[i]})
        for perm in permutations(refs, len(chosen)):
            if any(perm[k] not in allowed[i] for k, i in enumerate(chosen)):
                continue
            pairs = list(zip(chosen, perm))
            score = (len(pairs), -chunk_count(pairs))
            if score > best:
                best = score
    return best[0], -best[1]


def meteor_reference(matches: int, chunks: int, len_c: int, len_r: int) -> float:
    if matches == 0:
        return 0.0
    p = matches / len_c
    r = matches / len_r
    fmean = 10 * p * r / (r + 9 * p)
    penalty = 0.5 * (chunks / matches) ** 3
    return fmean * (1 - penalty)


def aggregate_reference(system: dict, references: dict, score_fn) -> float:
    """Mean over NCs of (mean over system outputs of (max over references))."""
    per_nc = []
    for nc in system:
        per_output = []
        for out in system[nc]:
            best = max(score_fn(out, ref) for ref in references[nc])
            per_output.append(best)
        per_nc.append(sum(per_output) / len(per_output))
    return sum(per_nc) / len(per_nc)

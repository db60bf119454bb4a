"""Paraphrase metrics: LCS-based ROUGE-L, METEOR (2007 parameters), and the
mean-mean-max aggregation over multi-reference test sets.

METEOR's unigram alignment is staged (exact, then Porter stem, then WordNet
synonym); among alignments with the maximum number of matches the one with the
fewest chunks is chosen, found exactly by dynamic programming over (candidate
position, used-reference set, last matched reference).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from . import NCKitError
from .corpus import normalize_text
from .porter import stem
from .wordnet import PartOfSpeech, WordNetKB

METRIC_IDS = ("rouge_l", "meteor", "external")

# Exact DP state budget; beyond this the alignment search keeps only the best
# states (never reached at realistic paraphrase lengths).
_ALIGN_STATE_BEAM = 20000


class MetricsError(NCKitError):
    """Evaluation inputs are inconsistent (e.g. NCs without references)."""


@dataclass(frozen=True)
class MetricScore:
    value: float
    metric: str

    def __post_init__(self):
        if self.metric not in METRIC_IDS:
            raise ValueError(f"unknown metric id {self.metric!r}")
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"metric value {self.value!r} outside [0, 1]")


def _tokens(text_or_tokens: str | Sequence[str]) -> list[str]:
    if isinstance(text_or_tokens, str):
        return normalize_text(text_or_tokens)
    return list(text_or_tokens)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str | Sequence[str], reference: str | Sequence[str], beta: float = 1.0) -> MetricScore:
    """LCS F-score: P = LCS/|cand|, R = LCS/|ref|, F = (1+b^2)PR / (R + b^2 P)."""
    c = _tokens(candidate)
    r = _tokens(reference)
    lcs = lcs_length(c, r)
    if lcs == 0:
        return MetricScore(0.0, "rouge_l")
    p = lcs / len(c)
    rec = lcs / len(r)
    b2 = beta * beta
    return MetricScore((1 + b2) * p * rec / (rec + b2 * p), "rouge_l")


def _synonym_match(kb: WordNetKB, a: str, b: str) -> bool:
    for pos in PartOfSpeech:
        offsets_a = kb.lemma_index[pos].get(a)
        if not offsets_a:
            continue
        offsets_b = kb.lemma_index[pos].get(b)
        if offsets_b and not set(offsets_a).isdisjoint(offsets_b):
            return True
    return False


def unigram_match(kb: WordNetKB | None, a: str, b: str) -> bool:
    """Staged matcher: exact, Porter stem, then shared WordNet synset."""
    if a == b:
        return True
    if stem(a) == stem(b):
        return True
    return kb is not None and _synonym_match(kb, a, b)


def align(
    candidate: Sequence[str],
    reference: Sequence[str],
    kb: WordNetKB | None = None,
    match: Callable[[str, str], bool] | None = None,
) -> tuple[int, int]:
    """Best unigram alignment as (matches, chunks): maximize matches, then
    minimize chunks. Exact within the state budget."""
    if match is None:
        match = lambda a, b: unigram_match(kb, a, b)
    allowed = [[j for j, rt in enumerate(reference) if match(ct, rt)] for ct in candidate]
    # States: (used-reference mask over matchable refs, ref index matched by the
    # previous candidate token or -1) -> best (matches, -chunks).
    matchable = sorted({j for row in allowed for j in row})
    bit_of = {j: 1 << k for k, j in enumerate(matchable)}
    states: dict[tuple[int, int], tuple[int, int]] = {(0, -1): (0, 0)}
    for row in allowed:
        nxt: dict[tuple[int, int], tuple[int, int]] = {}

        def push(key, val):
            cur = nxt.get(key)
            if cur is None or (val[0], -val[1]) > (cur[0], -cur[1]):
                nxt[key] = val

        for (mask, last_j), (mt, ch) in states.items():
            push((mask, -1), (mt, ch))
            for j in row:
                bit = bit_of[j]
                if mask & bit:
                    continue
                contiguous = last_j >= 0 and j == last_j + 1
                push((mask | bit, j), (mt + 1, ch + (0 if contiguous else 1)))
        if len(nxt) > _ALIGN_STATE_BEAM:
            keep = sorted(nxt.items(), key=lambda kv: (kv[1][0], -kv[1][1]), reverse=True)
            nxt = dict(keep[:_ALIGN_STATE_BEAM])
        states = nxt
    matches, chunks = max(states.values(), key=lambda v: (v[0], -v[1]))
    return matches, chunks


def meteor(
    candidate: str | Sequence[str], reference: str | Sequence[str], kb: WordNetKB | None = None
) -> MetricScore:
    """Fmean = 10PR/(R+9P); Penalty = 0.5 (chunks/m)^3; score = Fmean (1-Penalty)."""
    c = _tokens(candidate)
    r = _tokens(reference)
    if not c or not r:
        return MetricScore(0.0, "meteor")
    m, chunks = align(c, r, kb)
    if m == 0:
        return MetricScore(0.0, "meteor")
    p = m / len(c)
    rec = m / len(r)
    fmean = 10 * p * rec / (rec + 9 * p)
    penalty = 0.5 * (chunks / m) ** 3
    return MetricScore(fmean * (1 - penalty), "meteor")


@dataclass
class NCEvalRow:
    nc: str
    best_scores: list[float]

    @property
    def mean(self) -> float:
        return sum(self.best_scores) / len(self.best_scores)


@dataclass
class EvalReport:
    metric: str
    test_set: str
    rows: list[NCEvalRow]

    @property
    def aggregate(self) -> float:
        return sum(row.mean for row in self.rows) / len(self.rows)


def aggregate_score(
    system: Mapping[str, Sequence[str]],
    references: Mapping[str, Sequence[str]],
    metric: Callable[[str, str], float | MetricScore],
    metric_id: str = "rouge_l",
    test_set: str = "test",
) -> EvalReport:
    """Mean over NCs of (mean over system paraphrases of (max over references)).

    ``metric`` is called on raw texts (each metric normalizes internally).
    """
    missing = sorted(nc for nc in system if not references.get(nc))
    if missing:
        raise MetricsError(f"NCs missing references: {', '.join(missing)}")
    empty = sorted(nc for nc, paraphrases in system.items() if not paraphrases)
    if empty:
        raise MetricsError(f"NCs with no system paraphrases: {', '.join(empty)}")
    if not system:
        raise MetricsError("empty system output: nothing to score")
    rows = []
    for nc in sorted(system):
        best_scores = []
        for paraphrase in system[nc]:
            best = 0.0
            for ref in references[nc]:
                value = metric(paraphrase, ref)
                value = value.value if isinstance(value, MetricScore) else float(value)
                best = max(best, value)
            best_scores.append(best)
        rows.append(NCEvalRow(nc=nc, best_scores=best_scores))
    return EvalReport(metric=metric_id, test_set=test_set, rows=rows)


def external_score(pairs: Sequence[tuple[str, str]], scorer) -> list[MetricScore]:
    """Score (candidate, reference) pairs through an external plugin client.

    ``scorer`` needs a ``score(candidate, reference) -> float`` method; see
    scorer_client.ExternalScorer.
    """
    return [MetricScore(scorer.score(c, r), "external") for c, r in pairs]

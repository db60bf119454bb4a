"""Bucketed n-gram overlap between labeled paraphrases and a reference corpus.

Every n-gram of every paraphrase (token-level, duplicates retained) is looked
up in the index and classified ZERO / LOW / HIGH by its saturated count;
percentages are reported per (test set, label, n) group, plus the share of
copied (non-ZERO) n-grams that came from correct paraphrases.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .corpus import normalize_text
from .dataset import Paraphrase
from .hashing import combine_windows, token_hash
from .ngram_index import CountBucket, NGramIndex

_LABELS = ("correct", "incorrect")
_BUCKET_ORDER = (CountBucket.ZERO, CountBucket.LOW, CountBucket.HIGH)


def extract_ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    """All sliding n-token windows, in order; empty when the text is shorter."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


@dataclass
class OverlapStats:
    n_values: tuple[int, ...]
    test_sets: tuple[str, ...]
    counts: dict[tuple[str, str, int, CountBucket], int] = field(default_factory=dict)

    def count(self, test_set: str, label: str, n: int, bucket: CountBucket) -> int:
        return self.counts.get((test_set, label, n, bucket), 0)

    def group_total(self, test_set: str, label: str, n: int) -> int:
        return sum(self.count(test_set, label, n, b) for b in _BUCKET_ORDER)

    def percent(self, test_set: str, label: str, n: int, bucket: CountBucket) -> float:
        total = self.group_total(test_set, label, n)
        if total == 0:
            return 0.0
        return 100.0 * self.count(test_set, label, n, bucket) / total


def overlap_stats(
    labeled: Iterable[tuple[Paraphrase | str, str, str]], index: NGramIndex
) -> OverlapStats:
    """Bucket the n-grams of (paraphrase, label, test-set) triples.

    Labels must be "correct" or "incorrect"; callers exclude unjudged items.
    """
    counts: dict[tuple[str, str, int, CountBucket], int] = {}
    test_sets: list[str] = []
    for paraphrase, label, test_set in labeled:
        if label not in _LABELS:
            raise ValueError(f"label must be one of {_LABELS}, got {label!r}")
        if test_set not in test_sets:
            test_sets.append(test_set)
        text = paraphrase.text if isinstance(paraphrase, Paraphrase) else paraphrase
        tokens = normalize_text(text)
        if not tokens:
            continue
        hashes = np.fromiter((token_hash(t) for t in tokens), dtype=np.uint64, count=len(tokens))
        for n in index.n_values:
            window_hashes = combine_windows(hashes, n)
            if window_hashes.size == 0:
                continue
            grams_counts = index.counts_for_hashes(n, window_hashes)
            zero = int((grams_counts == 0).sum())
            high = int((grams_counts >= 6).sum())
            low = int(grams_counts.size) - zero - high
            for bucket, c in (
                (CountBucket.ZERO, zero),
                (CountBucket.LOW, low),
                (CountBucket.HIGH, high),
            ):
                if c:
                    key = (test_set, label, n, bucket)
                    counts[key] = counts.get(key, 0) + c
    return OverlapStats(n_values=index.n_values, test_sets=tuple(test_sets), counts=counts)


def copied_correct_share(stats: OverlapStats) -> dict[tuple[str, int | str], float | None]:
    """Per (test set, n) and pooled: % of copied (non-ZERO) n-grams that came
    from correct paraphrases; None where nothing was copied."""
    out: dict[tuple[str, int | str], float | None] = {}
    for test_set in stats.test_sets:
        pooled_correct = 0
        pooled_total = 0
        for n in stats.n_values:
            copied_correct = sum(
                stats.count(test_set, "correct", n, b) for b in (CountBucket.LOW, CountBucket.HIGH)
            )
            copied_total = copied_correct + sum(
                stats.count(test_set, "incorrect", n, b) for b in (CountBucket.LOW, CountBucket.HIGH)
            )
            pooled_correct += copied_correct
            pooled_total += copied_total
            out[(test_set, n)] = 100.0 * copied_correct / copied_total if copied_total else None
        out[(test_set, "pooled")] = 100.0 * pooled_correct / pooled_total if pooled_total else None
    return out


def overlap_csv(stats: OverlapStats, header: str | None = None) -> str:
    """Long-format table mirroring the analysis axes: one row per
    (test_set, label, n, bucket) with count and within-group percent."""
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    buf.write("test_set,label,n,bucket,count,percent\n")
    for test_set in stats.test_sets:
        for label in _LABELS:
            for n in stats.n_values:
                for bucket in _BUCKET_ORDER:
                    count = stats.count(test_set, label, n, bucket)
                    percent = stats.percent(test_set, label, n, bucket)
                    buf.write(f"{test_set},{label},{n},{bucket.value},{count},{percent:.4f}\n")
    return buf.getvalue()


def share_csv(stats: OverlapStats, header: str | None = None) -> str:
    """Copied-correct share per (test_set, n) plus a pooled row per test set;
    the share field is empty when nothing was copied."""
    shares = copied_correct_share(stats)
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    buf.write("test_set,n,copied_correct_percent\n")
    for test_set in stats.test_sets:
        for n in (*stats.n_values, "pooled"):
            value = shares[(test_set, n)]
            rendered = "" if value is None else f"{value:.4f}"
            buf.write(f"{test_set},{n},{rendered}\n")
    return buf.getvalue()

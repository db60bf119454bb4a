"""Mining rare noun compounds: noun-noun bigram extraction with triage flags,
then frequency filtering against a reference corpus.

The noun test is WordNet lexicon membership (via morphy), which admits some
noise; the flags (named_entity, spelling, larger_expression) exist so a human
pass can discard it, mirroring a semi-automatic pipeline. In strict mode both
constituents must be known nouns, which makes the spelling flag unreachable by
construction; permissive mode also admits unknown alphabetic tokens as
constituents and flags them there.
"""

from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from .corpus import Document
from .dataset import NounCompound
from .wordnet import PartOfSpeech, WordNetKB

_RAW_TOKEN_RE = re.compile(r"\w+|[^\w\s]")

# Small closed-class list; these never become compound constituents even when
# the lexicon happens to contain them as nouns (e.g. the letter "a").
STOPWORDS = frozenset(
    """a an the this that these those i you he she it we they me him her us them
    my your his its our their and or but nor so yet if then else when while of
    in on at by for with about against to from up down out off over under again
    is are was were be been being am do does did have has had will would can
    could shall should may might must not no yes as than too very such own same
    s t don now there here what which who whom where why how all any both each
    few more most other some only until during before after above below between
    into through further once""".split()
)

# A bigram dominated by one containing trigram beyond this share is probably a
# fragment of a larger fixed expression.
LARGER_EXPRESSION_SHARE = 0.9

CANDIDATE_FLAGS = ("named_entity", "spelling", "larger_expression")


@dataclass(frozen=True)
class NCCandidate:
    nc: NounCompound
    corpus_frequency: int
    flags: frozenset[str] = frozenset()


def _sentence_initial_positions(tokens: list[str]) -> set[int]:
    initial = {0}
    for i, tok in enumerate(tokens[:-1]):
        if tok in {".", "!", "?"}:
            initial.add(i + 1)
    return initial


def extract_candidates(
    corpus: Iterable[Document],
    kb: WordNetKB,
    wordlist: frozenset[str] | set[str] | None = None,
    permissive: bool = False,
) -> list[NCCandidate]:
    """Scan a corpus for adjacent noun-noun pairs, keyed by lemmatized form.

    Counts are exact within the scanned corpus. Flags: named_entity when the
    pair is capitalized in more than half of its non-sentence-initial
    occurrences; spelling (permissive mode) when a constituent is unknown to
    both the lexicon and the wordlist; larger_expression when >90% of the
    pair's occurrences sit inside one dominating trigram context.
    """
    counts: Counter[tuple[str, str]] = Counter()
    noninitial: Counter[tuple[str, str]] = Counter()
    capitalized: Counter[tuple[str, str]] = Counter()
    contexts: dict[tuple[str, str], Counter] = {}
    spelling_pairs: set[tuple[str, str]] = set()

    lemma_cache: dict[str, tuple[str | None, bool]] = {}

    def constituent(token: str) -> tuple[str | None, bool]:
        """(lemma or None, admitted-without-lexicon-backing) for one token."""
        if token in lemma_cache:
            return lemma_cache[token]
        lemma = None
        unknown = False
        if token.isalpha() and token not in STOPWORDS:
            resolved = kb.morphy(token, PartOfSpeech.NOUN)
            if resolved:
                lemma = resolved[0]
            elif permissive and len(token) >= 3:
                lemma = token
                unknown = True
        lemma_cache[token] = (lemma, unknown)
        return lemma, unknown

    for doc in corpus:
        raw_tokens = _RAW_TOKEN_RE.findall(unicodedata.normalize("NFC", doc.text))
        tokens = [t.lower() for t in raw_tokens]
        initial = _sentence_initial_positions(tokens)
        lemmas: list[str | None] = []
        unknown: list[bool] = []
        for t in tokens:
            lemma, is_unknown = constituent(t)
            lemmas.append(lemma)
            unknown.append(is_unknown)
        for i in range(len(tokens) - 1):
            a, b = lemmas[i], lemmas[i + 1]
            if a is None or b is None:
                continue
            pair = (a, b)
            counts[pair] += 1
            if unknown[i] and tokens[i] not in (wordlist or ()):
                spelling_pairs.add(pair)
            if unknown[i + 1] and tokens[i + 1] not in (wordlist or ()):
                spelling_pairs.add(pair)
            if i not in initial:
                noninitial[pair] += 1
                if raw_tokens[i][:1].isupper() and raw_tokens[i + 1][:1].isupper():
                    capitalized[pair] += 1
            ctx = contexts.setdefault(pair, Counter())
            if i > 0:
                ctx[("L", tokens[i - 1])] += 1
            if i + 2 < len(tokens):
                ctx[("R", tokens[i + 2])] += 1

    out = []
    for pair in sorted(counts):
        flags = set()
        if noninitial[pair] and capitalized[pair] * 2 > noninitial[pair]:
            flags.add("named_entity")
        if pair in spelling_pairs:
            flags.add("spelling")
        ctx = contexts.get(pair)
        if ctx:
            dominant = max(ctx.values())
            if dominant > LARGER_EXPRESSION_SHARE * counts[pair]:
                flags.add("larger_expression")
        out.append(
            NCCandidate(
                nc=NounCompound(modifier=pair[0], head=pair[1]),
                corpus_frequency=counts[pair],
                flags=frozenset(flags),
            )
        )
    return out


def filter_by_frequency(
    candidates: Iterable[NCCandidate],
    reference_counts: Mapping[str, int],
    max_freq: int,
    take: int | None = None,
) -> list[NCCandidate]:
    """Keep unflagged candidates whose reference-corpus count is <= max_freq
    (inclusive), re-keying corpus_frequency to the reference corpus; sort by
    (count, surface) ascending; optionally keep only the first ``take``."""
    if max_freq < 0:
        raise ValueError(f"max_freq must be non-negative, got {max_freq}")
    if take is not None and take < 1:
        raise ValueError(f"take must be positive, got {take}")
    kept = []
    for c in candidates:
        if c.flags:
            continue
        ref = int(reference_counts.get(c.nc.surface, 0))
        if ref <= max_freq:
            kept.append(replace(c, corpus_frequency=ref))
    kept.sort(key=lambda c: (c.corpus_frequency, c.nc.surface))
    return kept[:take] if take is not None else kept

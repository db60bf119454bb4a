"""Dataset revision tooling: cross-split overlap, catch-all filtering,
normalization lint, and WordNet-driven paraphrase augmentation.

Everything here surfaces findings or review candidates; nothing is judged
correct automatically. Semantic errors (wrong-word paraphrases) are out of
scope for detection — they stay human work.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .corpus import normalize_text
from .dataset import DatasetEntry, NounCompound, Paraphrase, normalized_key
from .wordnet import PartOfSpeech, WordNetKB

RELATIVIZERS = ("that", "which", "who")
COPULAS = ("is", "are", "was", "were")

# Copula/auxiliary surfaces never treated as substitutable verbs.
_AUX_FORMS = frozenset({"is", "are", "was", "were", "be", "been", "being", "am"})

# Prepositions recognized as the slot between verb group and modifier. "using"
# behaves prepositionally in this frame ("powered using steam").
SLOT_PREPOSITIONS = frozenset(
    "of for from with in on to at by about against under over through during via using".split()
)

_EDGE_PUNCT = ".?!,;:"

_SPLIT_ORDER = {"train": 0, "dev": 1, "test": 2}

LINT_RULES = ("split_overlap", "catch_all", "duplicate", "normalization")
LINT_ACTIONS = ("remove", "fix", "review")


@dataclass(frozen=True)
class CatchAllRuleSet:
    """Generic templates whose instantiations carry no information beyond the NC."""

    prepositions: tuple[str, ...] = ("of",)
    verb_phrases: tuple[str, ...] = (
        "based on",
        "involving",
        "associated with",
        "concerned with",
        "coming from",
    )

    def __post_init__(self):
        for group in (self.prepositions, self.verb_phrases):
            for template in group:
                if not template or template != template.lower():
                    raise ValueError(f"template must be nonempty lowercase, got {template!r}")


DEFAULT_CATCH_ALL_RULES = CatchAllRuleSet()


@dataclass(frozen=True)
class LintFinding:
    nc: NounCompound
    split: str
    paraphrase: str
    rule: str
    action: str
    detail: str
    fix: str | None = None

    def __post_init__(self):
        if self.rule not in LINT_RULES:
            raise ValueError(f"unknown lint rule {self.rule!r}")
        if self.action not in LINT_ACTIONS:
            raise ValueError(f"unknown lint action {self.action!r}")


@dataclass(frozen=True)
class AugmentCandidate:
    nc: NounCompound
    text: str
    provenance: str  # synonym_substitution | merge
    needs_review: bool = True


def find_split_overlap(
    train: Iterable[DatasetEntry], test: Iterable[DatasetEntry]
) -> list[NounCompound]:
    """NCs whose surface appears in both splits, sorted lexicographically."""
    train_surfaces = {e.nc.surface for e in train}
    overlap = {e.nc.surface: e.nc for e in test if e.nc.surface in train_surfaces}
    return [overlap[s] for s in sorted(overlap)]


def is_catch_all(
    paraphrase: Paraphrase | str,
    nc: NounCompound,
    rules: CatchAllRuleSet = DEFAULT_CATCH_ALL_RULES,
) -> bool:
    """True iff the whole paraphrase is one generic template instantiation.

    Prepositional rules need exactly "<head> <prep> <modifier>"; verb rules
    allow an optional relativizer and copula before the verb phrase. A generic
    phrase embedded in a longer paraphrase does not match.
    """
    text = paraphrase.text if isinstance(paraphrase, Paraphrase) else paraphrase
    tokens = normalize_text(text)
    if len(tokens) < 3 or tokens[0] != nc.head or tokens[-1] != nc.modifier:
        return False
    middle = tokens[1:-1]
    for prep in rules.prepositions:
        if middle == prep.split():
            return True
    stripped = list(middle)
    if stripped and stripped[0] in RELATIVIZERS:
        stripped = stripped[1:]
    if stripped and stripped[0] in COPULAS:
        stripped = stripped[1:]
    for phrase in rules.verb_phrases:
        if stripped == phrase.split():
            return True
    return False


def normalize_paraphrase_text(text: str) -> str:
    """Fix superficial problems: collapse whitespace, strip edge punctuation."""
    t = " ".join(text.split())
    while t and t[-1] in _EDGE_PUNCT:
        t = t[:-1].rstrip()
    while t and t[0] in _EDGE_PUNCT:
        t = t[1:].lstrip()
    return t


def lint(
    entries: Sequence[DatasetEntry], rules: CatchAllRuleSet = DEFAULT_CATCH_ALL_RULES
) -> list[LintFinding]:
    """Findings for duplicates, catch-alls, normalization issues, and NCs that
    leak across splits (the entry in the later split is the one removed)."""
    findings: list[LintFinding] = []

    splits_of: dict[str, set[str]] = {}
    for entry in entries:
        splits_of.setdefault(entry.nc.surface, set()).add(entry.split)
    for surface, splits in sorted(splits_of.items()):
        if len(splits) < 2:
            continue
        keep = min(splits, key=_SPLIT_ORDER.__getitem__)
        for split in sorted(splits - {keep}, key=_SPLIT_ORDER.__getitem__):
            findings.append(
                LintFinding(
                    nc=NounCompound.parse(surface),
                    split=split,
                    paraphrase="",
                    rule="split_overlap",
                    action="remove",
                    detail=f"NC also appears in {keep!r}; removed from {split!r}",
                )
            )

    for entry in entries:
        seen: set[str] = set()
        for p in entry.paraphrases:
            fixed = normalize_paraphrase_text(p.text)
            if not fixed:
                findings.append(
                    LintFinding(
                        nc=entry.nc,
                        split=entry.split,
                        paraphrase=p.text,
                        rule="normalization",
                        action="remove",
                        detail="empty after normalization",
                    )
                )
                continue
            if fixed != p.text:
                findings.append(
                    LintFinding(
                        nc=entry.nc,
                        split=entry.split,
                        paraphrase=p.text,
                        rule="normalization",
                        action="fix",
                        detail="whitespace/punctuation normalized",
                        fix=fixed,
                    )
                )
            key = normalized_key(fixed)
            if key in seen:
                findings.append(
                    LintFinding(
                        nc=entry.nc,
                        split=entry.split,
                        paraphrase=p.text,
                        rule="duplicate",
                        action="remove",
                        detail="duplicate of an earlier paraphrase",
                    )
                )
                continue
            seen.add(key)
            if is_catch_all(fixed, entry.nc, rules):
                findings.append(
                    LintFinding(
                        nc=entry.nc,
                        split=entry.split,
                        paraphrase=p.text,
                        rule="catch_all",
                        action="remove",
                        detail="generic template paraphrase",
                    )
                )

    return findings


def apply_lint(
    entries: Sequence[DatasetEntry], findings: Sequence[LintFinding]
) -> tuple[list[DatasetEntry], dict[str, int]]:
    """Apply removes and fixes; entries left without paraphrases are dropped.

    Returns the revised entries plus a summary of applied actions.
    """
    entry_removals = {
        (f.nc.surface, f.split) for f in findings if f.rule == "split_overlap"
    }
    removals: set[tuple[str, str, str]] = set()
    fixes: dict[tuple[str, str, str], str] = {}
    for f in findings:
        key = (f.nc.surface, f.split, f.paraphrase)
        if f.action == "remove" and f.rule != "split_overlap":
            removals.add(key)
        elif f.action == "fix" and f.fix is not None:
            fixes[key] = f.fix

    summary = {
        "entries_removed": 0,
        "paraphrases_removed": 0,
        "paraphrases_fixed": 0,
        "entries_emptied": 0,
    }
    out: list[DatasetEntry] = []
    for entry in entries:
        if (entry.nc.surface, entry.split) in entry_removals:
            summary["entries_removed"] += 1
            continue
        kept: list[Paraphrase] = []
        for p in entry.paraphrases:
            key = (entry.nc.surface, entry.split, p.text)
            if key in removals:
                summary["paraphrases_removed"] += 1
                continue
            if key in fixes:
                summary["paraphrases_fixed"] += 1
                p = replace(p, text=fixes[key])
            kept.append(p)
        if not kept:
            summary["entries_emptied"] += 1
            continue
        out.append(DatasetEntry(nc=entry.nc, paraphrases=kept, split=entry.split))
    return out, summary


# -- augmentation -------------------------------------------------------------


def _one_vowel_group(word: str) -> bool:
    groups = 0
    prev = False
    for ch in word:
        is_v = ch in "aeiouy"
        if is_v and not prev:
            groups += 1
        prev = is_v
    return groups == 1


def _doubles_final_consonant(lemma: str) -> bool:
    """Single-syllable stems ending consonant-vowel-consonant double the final
    letter (hop -> hopped) -- but only after a lone vowel letter, so vowel
    digraphs stay single (fuel -> fueled)."""
    return (
        _one_vowel_group(lemma)
        and len(lemma) >= 3
        and lemma[-1] not in "aeiouwxy"
        and lemma[-2] in "aeiou"
        and lemma[-3] not in "aeiou"
    )


def _inflect_ing(lemma: str) -> str:
    if lemma.endswith("ie"):
        return lemma[:-2] + "ying"
    if lemma.endswith("e") and not lemma.endswith("ee"):
        return lemma[:-1] + "ing"
    if _doubles_final_consonant(lemma):
        return lemma + lemma[-1] + "ing"
    return lemma + "ing"


def _inflect_ed(lemma: str) -> str:
    if lemma.endswith("e"):
        return lemma + "d"
    if lemma.endswith("y") and len(lemma) > 1 and lemma[-2] not in "aeiou":
        return lemma[:-1] + "ied"
    if _doubles_final_consonant(lemma):
        return lemma + lemma[-1] + "ed"
    return lemma + "ed"


def _inflect_s(lemma: str) -> str:
    if lemma.endswith(("s", "x", "z", "ch", "sh", "o")):
        return lemma + "es"
    if lemma.endswith("y") and len(lemma) > 1 and lemma[-2] not in "aeiou":
        return lemma[:-1] + "ies"
    return lemma + "s"


def reinflect(lemma: str, original_form: str, original_lemma: str) -> str:
    """Give ``lemma`` the surface inflection that ``original_form`` carries
    relative to ``original_lemma`` (rule-based: -s, -ed, -ing)."""
    if original_form == original_lemma:
        return lemma
    if original_form.endswith("ing"):
        return _inflect_ing(lemma)
    if original_form.endswith(("ed", "d")) and original_form != original_lemma:
        return _inflect_ed(lemma)
    if original_form.endswith("s"):
        return _inflect_s(lemma)
    return lemma


def synonym_expand(entry: DatasetEntry, kb: WordNetKB) -> list[AugmentCandidate]:
    """One candidate per (paraphrase, verb token, WordNet synonym), re-inflected
    to the original surface form. Everything is flagged for review."""
    existing = {normalized_key(p.text) for p in entry.paraphrases}
    skip = {entry.nc.head, entry.nc.modifier} | _AUX_FORMS
    out: list[AugmentCandidate] = []
    for p in entry.paraphrases:
        tokens = normalize_text(p.text)
        for i, token in enumerate(tokens):
            if token in skip:
                continue
            lemmas = kb.morphy(token, PartOfSpeech.VERB)
            if not lemmas:
                continue
            lemma = lemmas[0]
            for synonym in sorted(kb.synonyms(lemma, PartOfSpeech.VERB)):
                if "_" in synonym:
                    continue  # multi-word lemmas excluded from single-token swap
                new_tokens = list(tokens)
                new_tokens[i] = reinflect(synonym, token, lemma)
                text = " ".join(new_tokens)
                key = normalized_key(text)
                if key in existing:
                    continue
                existing.add(key)
                out.append(AugmentCandidate(nc=entry.nc, text=text, provenance="synonym_substitution"))
    return out


@dataclass(frozen=True)
class _Frame:
    relativizer: str | None
    verb: str
    voice: str  # active | passive
    preposition: str | None


def _parse_frame(text: str, nc: NounCompound) -> _Frame | None:
    tokens = normalize_text(text)
    if len(tokens) < 3 or tokens[0] != nc.head or tokens[-1] != nc.modifier:
        return None
    middle = list(tokens[1:-1])
    relativizer = None
    if middle and middle[0] in RELATIVIZERS:
        relativizer = middle.pop(0)
    copula = None
    if middle and middle[0] in COPULAS:
        copula = middle.pop(0)
    preposition = None
    if middle and middle[-1] in SLOT_PREPOSITIONS:
        preposition = middle.pop()
    if len(middle) != 1:
        return None
    verb = middle[0]
    passive = verb.endswith("ed") if copula is None else True
    if copula is None and verb.endswith("ed") and preposition is None:
        # "road provided access" is indistinguishable from simple past; treat as
        # passive only when a preposition marks the agent/instrument slot.
        passive = False
    return _Frame(
        relativizer=relativizer,
        verb=verb,
        voice="passive" if passive else "active",
        preposition=preposition,
    )


def _verb_lemma_surface(form: str) -> str:
    """Orthographic verb lemma (no lexicon): inverse of -s/-es/-ies/-ed/-ing."""
    if form.endswith("ies"):
        return form[:-3] + "y"
    if form.endswith("es") and form[:-2].endswith(("s", "x", "z", "ch", "sh", "o")):
        return form[:-2]
    if form.endswith("s") and not form.endswith("ss"):
        return form[:-1]
    if form.endswith("ing"):
        return form[:-3]
    return form


def _participle(frame: _Frame) -> str:
    if frame.voice == "passive":
        return frame.verb
    return _inflect_ed(_verb_lemma_surface(frame.verb))


def _render(
    relativizer: str | None, verb_frame: _Frame, preposition: str | None, nc: NounCompound
) -> str:
    passive = preposition == "by" or verb_frame.voice == "passive"
    parts = [nc.head]
    if passive:
        if relativizer:
            parts += [relativizer, "is", _participle(verb_frame)]
        else:
            parts.append(_participle(verb_frame))
    else:
        if relativizer:
            parts += [relativizer, verb_frame.verb]
        else:
            parts.append(verb_frame.verb)
    if preposition:
        parts.append(preposition)
    parts.append(nc.modifier)
    return " ".join(parts)


def merge_paraphrases(
    p1: Paraphrase | str, p2: Paraphrase | str, nc: NounCompound
) -> list[AugmentCandidate]:
    """Cross-combine two slot-grammar paraphrases, exchanging verb groups and
    prepositions between them, with voice adjusted by rule ("by" forces the
    passive participle; a relativized passive takes "is" + participle)."""
    text1 = p1.text if isinstance(p1, Paraphrase) else p1
    text2 = p2.text if isinstance(p2, Paraphrase) else p2
    f1 = _parse_frame(text1, nc)
    f2 = _parse_frame(text2, nc)
    if f1 is None or f2 is None:
        return []
    originals = {normalized_key(text1), normalized_key(text2)}
    seen = set(originals)
    out: list[AugmentCandidate] = []
    for verb_frame in (f1, f2):
        for prep_source in (f1, f2):
            for shape in (f1, f2):
                text = _render(shape.relativizer, verb_frame, prep_source.preposition, nc)
                key = normalized_key(text)
                if key in seen:
                    continue
                seen.add(key)
                out.append(AugmentCandidate(nc=nc, text=text, provenance="merge"))
    return out


def augment_entry(
    entry: DatasetEntry, kb: WordNetKB | None = None
) -> list[AugmentCandidate]:
    """All augmentation candidates for one entry (synonym swaps + pairwise
    merges), deduplicated against the entry and each other."""
    out: list[AugmentCandidate] = []
    seen = {normalized_key(p.text) for p in entry.paraphrases}
    if kb is not None:
        for candidate in synonym_expand(entry, kb):
            key = normalized_key(candidate.text)
            if key not in seen:
                seen.add(key)
                out.append(candidate)
    paraphrases = entry.paraphrases
    for i in range(len(paraphrases)):
        for j in range(i + 1, len(paraphrases)):
            for candidate in merge_paraphrases(paraphrases[i], paraphrases[j], entry.nc):
                key = normalized_key(candidate.text)
                if key not in seen:
                    seen.add(key)
                    out.append(candidate)
    return out

"""Parser for WordNet's WNDB database files: POS membership, synonyms, morphy.

Reads the standard distribution files (index.noun/verb/adj/adv, data.*,
*.exc) directly, keeping only what downstream consumers need: the lemma ->
synset-offset index, synset member lists, and the irregular-inflection
exception maps. License header lines (leading whitespace) are skipped; any
other malformed line is a fatal parse error with its line number, since a
lexical resource that does not parse cleanly should never be half-loaded.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from pathlib import Path

from . import NCKitError


class WordNetError(NCKitError):
    """A database file is missing or malformed."""


class PartOfSpeech(enum.Enum):
    NOUN = "n"
    VERB = "v"
    ADJ = "a"
    ADV = "r"


_FILE_SUFFIX = {
    PartOfSpeech.NOUN: "noun",
    PartOfSpeech.VERB: "verb",
    PartOfSpeech.ADJ: "adj",
    PartOfSpeech.ADV: "adv",
}

# Which ss_type letters may appear in each data file ('s' = adjective satellite).
_DATA_SS_TYPES = {
    PartOfSpeech.NOUN: {"n"},
    PartOfSpeech.VERB: {"v"},
    PartOfSpeech.ADJ: {"a", "s"},
    PartOfSpeech.ADV: {"r"},
}

# Morphy suffix-detachment rules, applied in order: (suffix, replacement).
DETACHMENT_RULES = {
    PartOfSpeech.NOUN: (
        ("s", ""),
        ("ses", "s"),
        ("xes", "x"),
        ("zes", "z"),
        ("ches", "ch"),
        ("shes", "sh"),
        ("men", "man"),
        ("ies", "y"),
    ),
    PartOfSpeech.VERB: (
        ("s", ""),
        ("ies", "y"),
        ("es", "e"),
        ("es", ""),
        ("ed", "e"),
        ("ed", ""),
        ("ing", "e"),
        ("ing", ""),
    ),
    PartOfSpeech.ADJ: (
        ("er", ""),
        ("est", ""),
        ("er", "e"),
        ("est", "e"),
    ),
    PartOfSpeech.ADV: (),
}

_ADJ_MARKER = re.compile(r"\((a|p|ip)\)$")


@dataclass
class WordNetKB:
    """Immutable-after-load view of one WNDB directory."""

    version: str
    lemma_index: dict[PartOfSpeech, dict[str, tuple[int, ...]]] = field(default_factory=dict)
    synsets: dict[PartOfSpeech, dict[int, tuple[str, ...]]] = field(default_factory=dict)
    exceptions: dict[PartOfSpeech, dict[str, tuple[str, ...]]] = field(default_factory=dict)
    data_record_counts: dict[PartOfSpeech, int] = field(default_factory=dict)

    def has_lemma(self, lemma: str, pos: PartOfSpeech) -> bool:
        return lemma in self.lemma_index[pos]

    def n_lemmas(self, pos: PartOfSpeech) -> int:
        return len(self.lemma_index[pos])

    def n_synsets(self, pos: PartOfSpeech) -> int:
        return len(self.synsets[pos])

    def synonyms(self, lemma: str, pos: PartOfSpeech) -> set[str]:
        """Union of co-members over all synsets of (lemma, pos), minus the lemma."""
        members: set[str] = set()
        for offset in self.lemma_index[pos].get(lemma, ()):
            members.update(self.synsets[pos][offset])
        members.discard(lemma)
        return members

    def morphy(self, form: str, pos: PartOfSpeech) -> list[str]:
        """Candidate lemmas for an inflected form, KB-resolvable ones only.

        Exception lists are consulted first, then the detachment rules; the
        original form leads the list when it is itself an entry.
        """
        out: list[str] = []
        index = self.lemma_index[pos]
        if form in index:
            out.append(form)
        for lemma in self.exceptions[pos].get(form, ()):
            if lemma in index and lemma not in out:
                out.append(lemma)
        for suffix, replacement in DETACHMENT_RULES[pos]:
            if form.endswith(suffix):
                candidate = form[: -len(suffix)] + replacement
                if candidate and candidate in index and candidate not in out:
                    out.append(candidate)
        return out

    def is_noun(self, lemma: str) -> bool:
        """True iff the form resolves (directly or via morphy) to a noun entry."""
        return bool(self.morphy(lemma, PartOfSpeech.NOUN))


def _iter_content_lines(path: Path):
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if line.startswith(" ") or not line.strip():
                    continue  # license header / padding
                yield lineno, line.rstrip("\n")
    except OSError as exc:
        raise WordNetError(f"cannot read {path}: {exc}") from exc


def _parse_index_file(path: Path, pos: PartOfSpeech) -> dict[str, tuple[int, ...]]:
    index: dict[str, tuple[int, ...]] = {}
    for lineno, line in _iter_content_lines(path):
        parts = line.split()
        try:
            lemma = parts[0].lower()
            pos_letter = parts[1]
            synset_cnt = int(parts[2])
            p_cnt = int(parts[3])
            cursor = 4 + p_cnt
            int(parts[cursor])  # sense_cnt
            int(parts[cursor + 1])  # tagsense_cnt
            offsets = tuple(int(o) for o in parts[cursor + 2 : cursor + 2 + synset_cnt])
            if pos_letter != pos.value or synset_cnt < 1 or len(offsets) != synset_cnt:
                raise ValueError("field mismatch")
            if len(parts) != cursor + 2 + synset_cnt:
                raise ValueError("trailing fields")
        except (IndexError, ValueError) as exc:
            raise WordNetError(f"{path}:{lineno}: malformed index line ({exc})") from exc
        index[lemma] = offsets
    return index


def _parse_data_file(path: Path, pos: PartOfSpeech) -> tuple[dict[int, tuple[str, ...]], int]:
    synsets: dict[int, tuple[str, ...]] = {}
    records = 0
    allowed = _DATA_SS_TYPES[pos]
    for lineno, line in _iter_content_lines(path):
        parts = line.split()
        try:
            offset = int(parts[0])
            int(parts[1])  # lex_filenum
            ss_type = parts[2]
            if ss_type not in allowed:
                raise ValueError(f"ss_type {ss_type!r} not valid here")
            w_cnt = int(parts[3], 16)
            if w_cnt < 1:
                raise ValueError("w_cnt must be >= 1")
            words = []
            for i in range(w_cnt):
                word = parts[4 + 2 * i]
                int(parts[5 + 2 * i], 16)  # lex_id
                words.append(_ADJ_MARKER.sub("", word).lower())
        except (IndexError, ValueError) as exc:
            raise WordNetError(f"{path}:{lineno}: malformed data line ({exc})") from exc
        synsets[offset] = tuple(words)
        records += 1
    return synsets, records


def _parse_exception_file(path: Path) -> dict[str, tuple[str, ...]]:
    exceptions: dict[str, tuple[str, ...]] = {}
    for lineno, line in _iter_content_lines(path):
        parts = line.split()
        if len(parts) < 2:
            raise WordNetError(f"{path}:{lineno}: malformed exception line")
        exceptions[parts[0].lower()] = tuple(p.lower() for p in parts[1:])
    return exceptions


def load(wndb_dir: Path | str, version: str | None = None) -> WordNetKB:
    """Load a WNDB directory. Read-only, repeatable, strict."""
    wndb_dir = Path(wndb_dir)
    kb = WordNetKB(version=version or wndb_dir.name)
    for pos in PartOfSpeech:
        suffix = _FILE_SUFFIX[pos]
        index_path = wndb_dir / f"index.{suffix}"
        data_path = wndb_dir / f"data.{suffix}"
        exc_path = wndb_dir / f"{suffix}.exc"
        for p in (index_path, data_path, exc_path):
            if not p.exists():
                raise WordNetError(f"missing index file: {p}" if p is index_path else f"missing file: {p}")
        kb.lemma_index[pos] = _parse_index_file(index_path, pos)
        kb.synsets[pos], kb.data_record_counts[pos] = _parse_data_file(data_path, pos)
        kb.exceptions[pos] = _parse_exception_file(exc_path)
        for lemma, offsets in kb.lemma_index[pos].items():
            for offset in offsets:
                if offset not in kb.synsets[pos]:
                    raise WordNetError(
                        f"{index_path}: lemma {lemma!r} references synset offset "
                        f"{offset} absent from {data_path}"
                    )
    return kb

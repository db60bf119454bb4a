"""Canonical data model and line-delimited file format for NC paraphrase datasets.

One JSON object per line:

    {"nc": "access road",
     "paraphrases": [{"text": "...", "source": "human|augmented|model",
                      "label": "correct|incorrect|unjudged",
                      "votes": [true,false,true]?}],
     "split": "train|dev|test"}

Strict parsing enforces every invariant (single-token lowercase constituents,
nonempty texts, no duplicate paraphrases, majority-consistent votes, no
duplicate NC within a split). Permissive parsing downgrades repairable
violations to collected warnings so lint can load dirty data and fix it.
Lines starting with ``#`` are comments (used for provenance headers).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from . import NCKitError
from .corpus import normalize_text

SOURCES = ("human", "augmented", "model")
LABELS = ("correct", "incorrect", "unjudged")
SPLITS = ("train", "dev", "test")


class DatasetError(NCKitError):
    """A dataset file violates the schema; message carries file:line context."""


def normalized_key(text: str) -> str:
    """Duplicate-detection key: space-join of the normalized tokens."""
    return " ".join(normalize_text(text))


def majority_label(votes: Sequence[bool]) -> str:
    """Majority rule over exactly three judge votes: >= 2 true -> correct."""
    if len(votes) != 3:
        raise ValueError(f"expected exactly 3 votes, got {len(votes)}")
    return "correct" if sum(bool(v) for v in votes) >= 2 else "incorrect"


@dataclass(frozen=True)
class NounCompound:
    """A two-noun compound: modifier (n1) + head (n2)."""

    modifier: str
    head: str

    def __post_init__(self):
        for name, value in (("modifier", self.modifier), ("head", self.head)):
            if not value or len(value.split()) != 1 or value != value.lower():
                raise ValueError(
                    f"{name} must be a nonempty single lowercase token, got {value!r}"
                )

    @property
    def surface(self) -> str:
        return f"{self.modifier} {self.head}"

    @classmethod
    def parse(cls, surface: str) -> "NounCompound":
        parts = surface.split()
        if len(parts) != 2:
            raise ValueError(f"noun compound must be two tokens, got {surface!r}")
        return cls(modifier=parts[0], head=parts[1])


@dataclass(frozen=True)
class Paraphrase:
    text: str
    source: str = "human"
    label: str = "unjudged"
    votes: tuple[bool, bool, bool] | None = None

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        if self.votes is not None:
            object.__setattr__(self, "votes", tuple(bool(v) for v in self.votes))
            if len(self.votes) != 3:
                raise ValueError("votes must be a triple")


@dataclass
class DatasetEntry:
    nc: NounCompound
    paraphrases: list[Paraphrase]
    split: str

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")


@dataclass
class SplitStats:
    ncs: int = 0
    paraphrases: int = 0
    by_source: dict[str, int] = field(default_factory=lambda: {s: 0 for s in SOURCES})
    by_label: dict[str, int] = field(default_factory=lambda: {l: 0 for l in LABELS})


@dataclass
class StatsReport:
    splits: dict[str, SplitStats]

    @property
    def total(self) -> SplitStats:
        agg = SplitStats()
        for s in self.splits.values():
            agg.ncs += s.ncs
            agg.paraphrases += s.paraphrases
            for k in SOURCES:
                agg.by_source[k] += s.by_source[k]
            for k in LABELS:
                agg.by_label[k] += s.by_label[k]
        return agg


def _paraphrase_from_obj(obj: dict, where: str, strict: bool, warnings: list[str]) -> Paraphrase | None:
    if not isinstance(obj, dict):
        raise DatasetError(f"{where}: paraphrase must be an object")
    unknown = set(obj) - {"text", "source", "label", "votes"}
    if unknown:
        raise DatasetError(f"{where}: unknown paraphrase fields {sorted(unknown)}")
    text = obj.get("text")
    if not isinstance(text, str):
        raise DatasetError(f"{where}: paraphrase field 'text' must be a string")
    source = obj.get("source", "human")
    label = obj.get("label", "unjudged")
    votes = obj.get("votes")
    if votes is not None:
        if not (isinstance(votes, list) and len(votes) == 3 and all(isinstance(v, bool) for v in votes)):
            raise DatasetError(f"{where}: field 'votes' must be three booleans")
        votes = tuple(votes)
        expected = majority_label(votes)
        if "label" in obj and label != expected:
            msg = f"{where}: label {label!r} contradicts votes (majority says {expected!r})"
            if strict:
                raise DatasetError(msg)
            warnings.append(msg)
        label = expected
    if source not in SOURCES:
        raise DatasetError(f"{where}: unknown source {source!r}")
    if label not in LABELS:
        raise DatasetError(f"{where}: unknown label {label!r}")
    if not normalized_key(text):
        msg = f"{where}: paraphrase text is empty after normalization"
        if strict:
            raise DatasetError(msg)
        warnings.append(msg)
    return Paraphrase(text=text, source=source, label=label, votes=votes)


def entry_from_json(
    obj: dict, where: str = "<record>", strict: bool = True, warnings: list[str] | None = None
) -> DatasetEntry:
    warnings = warnings if warnings is not None else []
    if not isinstance(obj, dict):
        raise DatasetError(f"{where}: record must be an object")
    unknown = set(obj) - {"nc", "paraphrases", "split"}
    if unknown:
        raise DatasetError(f"{where}: unknown fields {sorted(unknown)}")
    surface = obj.get("nc")
    if not isinstance(surface, str):
        raise DatasetError(f"{where}: field 'nc' must be a string")
    split = obj.get("split")
    if split not in SPLITS:
        raise DatasetError(f"{where}: field 'split' must be one of {list(SPLITS)}")
    raw_paraphrases = obj.get("paraphrases")
    if not isinstance(raw_paraphrases, list):
        raise DatasetError(f"{where}: field 'paraphrases' must be a list")

    if surface != surface.lower():
        msg = f"{where}: nc {surface!r} is not lowercase"
        if strict:
            raise DatasetError(msg)
        warnings.append(msg)
        surface = surface.lower()
    try:
        nc = NounCompound.parse(surface)
    except ValueError as exc:
        raise DatasetError(f"{where}: {exc}") from exc

    paraphrases: list[Paraphrase] = []
    seen: set[str] = set()
    for i, p_obj in enumerate(raw_paraphrases):
        p = _paraphrase_from_obj(p_obj, f"{where}: paraphrase {i + 1}", strict, warnings)
        key = normalized_key(p.text)
        if key and key in seen:
            msg = f"{where}: paraphrase {i + 1}: duplicate text {p.text!r}"
            if strict:
                raise DatasetError(msg)
            warnings.append(msg)
        seen.add(key)
        paraphrases.append(p)
    return DatasetEntry(nc=nc, paraphrases=paraphrases, split=split)


def entry_to_json(entry: DatasetEntry) -> dict:
    out = {"nc": entry.nc.surface, "paraphrases": [], "split": entry.split}
    for p in entry.paraphrases:
        p_obj = {"text": p.text, "source": p.source, "label": p.label}
        if p.votes is not None:
            p_obj["votes"] = list(p.votes)
        out["paraphrases"].append(p_obj)
    return out


def parse_dataset_lines(
    lines: Iterable[str],
    source_name: str = "<stream>",
    strict: bool = True,
    warnings: list[str] | None = None,
) -> list[DatasetEntry]:
    warnings = warnings if warnings is not None else []
    entries: list[DatasetEntry] = []
    seen_nc: dict[tuple[str, str], int] = {}
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        where = f"{source_name}:{lineno}"
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{where}: invalid JSON ({exc.msg})") from exc
        entry = entry_from_json(obj, where, strict, warnings)
        key = (entry.nc.surface, entry.split)
        if key in seen_nc:
            msg = f"{where}: duplicate NC {entry.nc.surface!r} in split {entry.split!r} (first at line {seen_nc[key]})"
            if strict:
                raise DatasetError(msg)
            warnings.append(msg)
        else:
            seen_nc[key] = lineno
        entries.append(entry)
    return entries


def parse_dataset(
    path: Path | str, strict: bool = True, warnings: list[str] | None = None
) -> list[DatasetEntry]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read dataset {path}: {exc}") from exc
    return parse_dataset_lines(text.splitlines(), str(path), strict, warnings)


def serialize_entries(entries: Iterable[DatasetEntry], header: str | None = None) -> str:
    """Render entries to the canonical line format (fixed key order)."""
    lines = []
    if header is not None:
        lines.append(f"# {header}")
    for entry in entries:
        lines.append(json.dumps(entry_to_json(entry), ensure_ascii=False))
    return "\n".join(lines) + "\n" if lines else ""


def write_dataset(entries: Iterable[DatasetEntry], path: Path | str, header: str | None = None) -> None:
    Path(path).write_text(serialize_entries(entries, header), encoding="utf-8")


def dataset_stats(entries: Iterable[DatasetEntry]) -> StatsReport:
    report = StatsReport(splits={})
    for entry in entries:
        stats = report.splits.setdefault(entry.split, SplitStats())
        stats.ncs += 1
        stats.paraphrases += len(entry.paraphrases)
        for p in entry.paraphrases:
            stats.by_source[p.source] += 1
            stats.by_label[p.label] += 1
    return report


def build_fewshot_prompt(
    examples: Sequence[tuple[NounCompound, Paraphrase | str]], target: NounCompound
) -> str:
    """Render the question/answer prompt: Q/A per example, then the target's Q
    and a bare ``A:`` (no space after the colon, single newlines throughout)."""
    if not examples:
        raise ValueError("examples must be nonempty")
    lines = []
    for nc, paraphrase in examples:
        text = paraphrase.text if isinstance(paraphrase, Paraphrase) else paraphrase
        lines.append(f"Q: what is the meaning of {nc.surface}?")
        lines.append(f"A:{text}")
    lines.append(f"Q: what is the meaning of {target.surface}?")
    lines.append("A:")
    return "\n".join(lines)


def sample_fewshot(
    entries: Sequence[DatasetEntry], k: int, seed: int
) -> list[tuple[NounCompound, Paraphrase]]:
    """Seeded sample of k (NC, paraphrase) example pairs from a dataset."""
    pool = [e for e in entries if e.paraphrases]
    if k < 1 or k > len(pool):
        raise ValueError(f"cannot sample {k} examples from {len(pool)} usable entries")
    rng = random.Random(seed)
    return [(e.nc, rng.choice(e.paraphrases)) for e in rng.sample(pool, k)]


def convert_semeval(
    lines: Iterable[str], split: str, source_name: str = "<semeval>"
) -> list[DatasetEntry]:
    """Convert the original tab-separated layout: ``modifier head<TAB>paraphrase[<TAB>weight]``.

    Consecutive lines sharing an NC are grouped into one entry; a trailing
    numeric weight column is tolerated and ignored.
    """
    grouped: dict[str, list[Paraphrase]] = {}
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(("#", "%")):
            continue
        cols = stripped.split("\t")
        if len(cols) < 2:
            raise DatasetError(f"{source_name}:{lineno}: expected 'nc<TAB>paraphrase'")
        surface = cols[0].strip().lower()
        text = cols[1].strip()
        if not text:
            raise DatasetError(f"{source_name}:{lineno}: empty paraphrase")
        grouped.setdefault(surface, [])
        key = normalized_key(text)
        if key not in {normalized_key(p.text) for p in grouped[surface]}:
            grouped[surface].append(Paraphrase(text=text, source="human", label="unjudged"))
    entries = []
    for surface, paraphrases in grouped.items():
        try:
            nc = NounCompound.parse(surface)
        except ValueError as exc:
            raise DatasetError(f"{source_name}: {exc}") from exc
        entries.append(DatasetEntry(nc=nc, paraphrases=paraphrases, split=split))
    return entries

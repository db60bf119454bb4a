"""Shared fixtures: a synthetic WNDB directory, toy corpora, stub scorers.

The WNDB fixture writes real-format database files (license headers, index
and data line grammar, exception lists) with a small vocabulary that the
morphology, curation, mining, and metrics tests all draw from.
"""

from __future__ import annotations

import gzip
from pathlib import Path

import pytest

# -- synthetic WNDB ----------------------------------------------------------

_LICENSE = (
    "  1 This synthetic database file is test data.\n"
    "  2 Lines with leading whitespace are header lines and must be skipped.\n"
)

NOUN_SYNSETS = {
    1740: ("cat", "feline"),
    2000: ("car", "automobile"),
    2010: ("car", "machine"),
    3000: ("dog",),
    4000: ("man",),
    4100: ("woman",),
    5000: ("bunny", "rabbit"),
    6000: ("train",),
    6100: ("steam",),
    6200: ("road",),
    6300: ("access",),
    6400: ("coffee",),
    6500: ("cup",),
    6600: ("mountain",),
    7000: ("agreement",),
    7100: ("box",),
    7200: ("church",),
    7300: ("dish",),
    7400: ("gas",),
    7500: ("power",),
    7600: ("water",),
    7700: ("glass",),
    7800: ("body",),
    8000: ("engine",),
    8100: ("fuel",),
    8200: ("weather",),
    8300: ("vane",),
    8400: ("apple",),
    8500: ("juice",),
    8600: ("paper",),
    8700: ("boat",),
    8800: ("century",),
    8900: ("park",),
    9000: ("oil",),
    9100: ("story",),
    9200: ("wish",),
}

VERB_SYNSETS = {
    10000: ("operate",),
    10100: ("power", "fuel"),
    10200: ("provide",),
    10300: ("go",),
    10400: ("run",),
    10500: ("be",),
    10600: ("make", "produce"),
    10700: ("filter",),
    10800: ("sit",),
    10900: ("say",),
    11000: ("use",),
    11100: ("brew",),
    11300: ("carry",),
}

ADJ_SYNSETS = {
    20000: ("fast",),
    20100: ("quick",),
    20200: ("galore(ip)",),
    20300: ("big", "large"),
}
ADJ_SS_TYPES = {20100: "s"}  # satellite adjective

ADV_SYNSETS = {
    30000: ("quickly",),
    30200: ("really",),
}

NOUN_EXC = [("bunnies", "bunny"), ("men", "man"), ("women", "woman"), ("feet", "foot")]
VERB_EXC = [
    ("went", "go"),
    ("gone", "go"),
    ("ran", "run"),
    ("is", "be"),
    ("are", "be"),
    ("was", "be"),
    ("were", "be"),
    ("been", "be"),
    ("being", "be"),
    ("am", "be"),
    ("said", "say"),
    ("sat", "sit"),
    ("carried", "carry"),
]
ADJ_EXC = [("faster", "fast")]
ADV_EXC: list[tuple[str, str]] = []


def _strip_marker(word: str) -> str:
    for marker in ("(a)", "(p)", "(ip)"):
        if word.endswith(marker):
            return word[: -len(marker)]
    return word


def write_wndb(
    root: Path,
    nouns=NOUN_SYNSETS,
    verbs=VERB_SYNSETS,
    adjs=ADJ_SYNSETS,
    advs=ADV_SYNSETS,
    noun_exc=NOUN_EXC,
    verb_exc=VERB_EXC,
    adj_exc=ADJ_EXC,
    adv_exc=ADV_EXC,
) -> Path:
    """Write a WNDB-format directory and return its path."""
    root.mkdir(parents=True, exist_ok=True)
    plan = [
        ("noun", "n", nouns, noun_exc, {}),
        ("verb", "v", verbs, verb_exc, {}),
        ("adj", "a", adjs, adj_exc, ADJ_SS_TYPES if adjs is ADJ_SYNSETS else {}),
        ("adv", "r", advs, adv_exc, {}),
    ]
    for suffix, letter, synsets, exceptions, ss_types in plan:
        lemma_offsets: dict[str, list[int]] = {}
        data_lines = []
        for offset in sorted(synsets):
            words = synsets[offset]
            ss_type = ss_types.get(offset, letter)
            fields = [f"{offset:08d}", "03", ss_type, f"{len(words):02x}"]
            for word in words:
                fields += [word, "0"]
            fields += ["001", "@", f"{offset:08d}", letter, "0000", "|", "a synthetic gloss"]
            data_lines.append(" ".join(fields))
            for word in words:
                lemma_offsets.setdefault(_strip_marker(word).lower(), []).append(offset)
        index_lines = []
        for lemma in sorted(lemma_offsets):
            offsets = lemma_offsets[lemma]
            fields = [lemma, letter, str(len(offsets)), "1", "@", str(len(offsets)), "0"]
            fields += [f"{o:08d}" for o in offsets]
            index_lines.append(" ".join(fields))
        (root / f"index.{suffix}").write_text(_LICENSE + "\n".join(index_lines) + "\n")
        (root / f"data.{suffix}").write_text(_LICENSE + "\n".join(data_lines) + "\n")
        exc_lines = [f"{form} {lemma}" for form, lemma in exceptions]
        (root / f"{suffix}.exc").write_text(_LICENSE + "\n".join(exc_lines) + ("\n" if exc_lines else ""))
    return root


@pytest.fixture(scope="session")
def wndb_dir(tmp_path_factory) -> Path:
    return write_wndb(tmp_path_factory.mktemp("wndb"))


@pytest.fixture(scope="session")
def kb(wndb_dir):
    from nckit import wordnet

    return wordnet.load(wndb_dir)


# -- toy corpora -------------------------------------------------------------


def write_corpus(root: Path, shards: dict[str, list[str]]) -> Path:
    """Write text shards plus a manifest listing them; return the manifest path."""
    root.mkdir(parents=True, exist_ok=True)
    names = []
    for name, docs in shards.items():
        body = "\n".join(docs) + "\n"
        if name.endswith(".gz"):
            with gzip.open(root / name, "wt", encoding="utf-8") as fh:
                fh.write(body)
        else:
            (root / name).write_text(body, encoding="utf-8")
        names.append(name)
    manifest = root / "manifest.txt"
    manifest.write_text("# test corpus\n" + "\n".join(names) + "\n")
    return manifest


TOY_DOCS = [
    "the cat sat on the mat",
    "a b c a b c a b c a b c a b c a b c a b c",
    "the cat sat on the mat again",
    "hello world ! the cat sat on a hat",
]


@pytest.fixture(scope="session")
def toy_index(tmp_path_factory):
    """A small built index over TOY_DOCS with default config."""
    from nckit.ngram_index import NGramConfig, build_index

    root = tmp_path_factory.mktemp("toyidx")
    manifest = write_corpus(root / "corpus", {"docs.txt": TOY_DOCS})
    index = build_index(manifest, root / "index", NGramConfig(), workers=1)
    yield index
    index.close()


# -- stub external scorers ----------------------------------------------------

STUB_DIR = Path(__file__).parent / "stubs"


def scorer_cmd(name: str) -> list[str]:
    import sys

    return [sys.executable, str(STUB_DIR / name)]

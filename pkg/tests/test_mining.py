import pytest

from nckit.corpus import Document
from nckit.mining import NCCandidate, extract_candidates, filter_by_frequency

DOCS = [
    "we rode the steam train to town . the steam train was late",
    "steam trains carry coal",
    "a coffee cup and another coffee cup",
    "we met at Century Park today . Century Park is big",
    "fresh apple juice . we drank fresh apple juice . fresh apple juice again . more fresh apple juice",
    "the flixium boat sailed",
]


def corpus():
    return [Document(id=str(i), text=t) for i, t in enumerate(DOCS)]


def by_surface(candidates):
    return {c.nc.surface: c for c in candidates}


def test_counts_are_keyed_by_lemma(kb):
    found = by_surface(extract_candidates(corpus(), kb))
    # "steam trains" folds into "steam train" through the noun lemmatizer
    assert found["steam train"].corpus_frequency == 3
    assert found["coffee cup"].corpus_frequency == 2
    assert found["apple juice"].corpus_frequency == 4


def test_stopwords_and_non_nouns_block_pairs(kb):
    surfaces = set(by_surface(extract_candidates(corpus(), kb)))
    assert not any("the" in s.split() for s in surfaces)
    assert "carry coal" not in surfaces  # "carry" is no noun; "coal" unknown
    assert "train was" not in surfaces


def test_named_entity_flag(kb):
    found = by_surface(extract_candidates(corpus(), kb))
    assert "named_entity" in found["century park"].flags
    assert "named_entity" not in found["steam train"].flags


def test_sentence_initial_capitalization_is_ignored(kb):
    # only capitalized at sentence starts -> not a named entity
    docs = [Document(id="0", text="Steam train left . Steam train returned . we saw the steam train")]
    found = by_surface(extract_candidates(docs, kb))
    assert "named_entity" not in found["steam train"].flags


def test_larger_expression_flag(kb):
    found = by_surface(extract_candidates(corpus(), kb))
    assert "larger_expression" in found["apple juice"].flags
    assert "larger_expression" not in found["steam train"].flags


def test_spelling_flag_permissive_only(kb):
    strict = by_surface(extract_candidates(corpus(), kb))
    assert "flixium boat" not in strict  # unknown word inadmissible when strict
    permissive = by_surface(extract_candidates(corpus(), kb, permissive=True))
    assert "spelling" in permissive["flixium boat"].flags
    rescued = by_surface(
        extract_candidates(corpus(), kb, wordlist=frozenset({"flixium"}), permissive=True)
    )
    assert "spelling" not in rescued["flixium boat"].flags


def test_extraction_is_deterministic(kb):
    a = extract_candidates(corpus(), kb)
    b = extract_candidates(corpus(), kb)
    assert a == b
    assert [c.nc.surface for c in a] == sorted(c.nc.surface for c in a)


# -- frequency filter -------------------------------------------------------------


def cand(surface, freq, flags=()):
    mod, head = surface.split()
    from nckit.dataset import NounCompound

    return NCCandidate(
        nc=NounCompound(modifier=mod, head=head),
        corpus_frequency=freq,
        flags=frozenset(flags),
    )


def test_threshold_is_inclusive():
    candidates = [cand("a b", 10), cand("c d", 10)]
    reference = {"a b": 250, "c d": 251}
    kept = filter_by_frequency(candidates, reference, max_freq=250)
    assert [c.nc.surface for c in kept] == ["a b"]
    assert kept[0].corpus_frequency == 250  # re-keyed to the reference corpus


def test_unseen_in_reference_counts_as_zero():
    kept = filter_by_frequency([cand("a b", 3)], {}, max_freq=250)
    assert kept[0].corpus_frequency == 0


def test_flagged_candidates_are_dropped():
    candidates = [
        cand("a b", 5),
        cand("c d", 5, flags=("named_entity",)),
        cand("e f", 5, flags=("spelling",)),
    ]
    kept = filter_by_frequency(candidates, {s: 1 for s in ("a b", "c d", "e f")}, max_freq=250)
    assert [c.nc.surface for c in kept] == ["a b"]


def test_rarest_first_ordering_and_take():
    candidates = [cand(s, 1) for s in ("a b", "c d", "e f", "g h")]
    reference = {"a b": 40, "c d": 10, "e f": 10, "g h": 0}
    kept = filter_by_frequency(candidates, reference, max_freq=250)
    assert [c.nc.surface for c in kept] == ["g h", "c d", "e f", "a b"]
    top = filter_by_frequency(candidates, reference, max_freq=250, take=2)
    assert [c.nc.surface for c in top] == ["g h", "c d"]


def test_filter_validates_arguments():
    with pytest.raises(ValueError):
        filter_by_frequency([], {}, max_freq=-1)
    with pytest.raises(ValueError):
        filter_by_frequency([], {}, max_freq=10, take=0)


def test_filtering_tighter_threshold_is_monotone():
    candidates = [cand(s, 1) for s in ("a b", "c d", "e f")]
    reference = {"a b": 5, "c d": 100, "e f": 300}
    wide = {c.nc.surface for c in filter_by_frequency(candidates, reference, max_freq=300)}
    narrow = {c.nc.surface for c in filter_by_frequency(candidates, reference, max_freq=50)}
    assert narrow <= wide

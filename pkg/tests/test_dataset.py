import json

import pytest

from nckit.dataset import (
    DatasetEntry,
    DatasetError,
    NounCompound,
    Paraphrase,
    build_fewshot_prompt,
    convert_semeval,
    dataset_stats,
    entry_from_json,
    entry_to_json,
    majority_label,
    normalized_key,
    parse_dataset_lines,
    sample_fewshot,
    serialize_entries,
)


def make_entry(nc="steam train", split="train", texts=("train powered by steam",)):
    return DatasetEntry(
        nc=NounCompound.parse(nc),
        paraphrases=[Paraphrase(text=t) for t in texts],
        split=split,
    )


# -- atoms -------------------------------------------------------------------


def test_nc_parse_and_surface():
    nc = NounCompound.parse("steam train")
    assert (nc.modifier, nc.head) == ("steam", "train")
    assert nc.surface == "steam train"


@pytest.mark.parametrize("bad", ["train", "a b c", "Steam train", "steam  ", ""])
def test_nc_parse_rejects(bad):
    with pytest.raises(ValueError):
        NounCompound.parse(bad)


def test_paraphrase_validation():
    with pytest.raises(ValueError):
        Paraphrase(text="x", source="robot")
    with pytest.raises(ValueError):
        Paraphrase(text="x", label="maybe")
    with pytest.raises(ValueError):
        Paraphrase(text="x", votes=(True, False))  # must be exactly three


@pytest.mark.parametrize(
    "votes,expected",
    [
        ((True, True, True), "correct"),
        ((True, True, False), "correct"),
        ((True, False, True), "correct"),
        ((False, True, True), "correct"),
        ((True, False, False), "incorrect"),
        ((False, True, False), "incorrect"),
        ((False, False, True), "incorrect"),
        ((False, False, False), "incorrect"),
    ],
)
def test_majority_label_all_combinations(votes, expected):
    assert majority_label(votes) == expected


def test_normalized_key_folds_case_and_spacing():
    assert normalized_key("Train  powered by Steam.") == normalized_key("train powered by steam .")


# -- json round trip -----------------------------------------------------------


def test_entry_round_trip():
    entry = DatasetEntry(
        nc=NounCompound.parse("access road"),
        paraphrases=[
            Paraphrase(text="road that provides access", source="human", label="correct",
                       votes=(True, True, False)),
            Paraphrase(text="road of access", source="model", label="incorrect"),
        ],
        split="test",
    )
    again = entry_from_json(entry_to_json(entry))
    assert again == entry


def test_entry_json_key_order_is_stable():
    blob = json.dumps(entry_to_json(make_entry()))
    assert blob.index('"nc"') < blob.index('"paraphrases"') < blob.index('"split"')


def test_votes_must_agree_with_label_strict():
    obj = {
        "nc": "steam train",
        "split": "train",
        "paraphrases": [
            {"text": "x", "source": "human", "label": "incorrect", "votes": [True, True, True]}
        ],
    }
    with pytest.raises(DatasetError, match="votes"):
        entry_from_json(obj)
    warnings = []
    entry = entry_from_json(obj, strict=False, warnings=warnings)
    assert entry.paraphrases[0].label == "correct"  # recomputed from votes
    assert warnings


def test_unknown_fields_rejected():
    obj = entry_to_json(make_entry())
    obj["extra"] = 1
    with pytest.raises(DatasetError, match="extra"):
        entry_from_json(obj)


def test_uppercase_nc_strict_vs_permissive():
    obj = entry_to_json(make_entry())
    obj["nc"] = "Steam Train"
    with pytest.raises(DatasetError):
        entry_from_json(obj)
    entry = entry_from_json(obj, strict=False, warnings=[])
    assert entry.nc.surface == "steam train"


def test_duplicate_paraphrases_strict_vs_permissive():
    obj = {
        "nc": "steam train",
        "split": "train",
        "paraphrases": [{"text": "a train"}, {"text": "A  train"}],
    }
    with pytest.raises(DatasetError, match="duplicate"):
        entry_from_json(obj)
    # permissive parsing keeps the duplicate (lint removes it later) but warns
    warnings = []
    entry = entry_from_json(obj, strict=False, warnings=warnings)
    assert len(entry.paraphrases) == 2 and warnings


# -- files ---------------------------------------------------------------------


def test_parse_lines_skips_comments_and_blanks():
    lines = [
        "# provenance: {}",
        "",
        json.dumps(entry_to_json(make_entry())),
    ]
    entries = parse_dataset_lines(lines, source_name="mem")
    assert len(entries) == 1


def test_parse_lines_reports_position_on_bad_json():
    with pytest.raises(DatasetError, match="mem:2"):
        parse_dataset_lines(["", "{not json"], source_name="mem")


def test_parse_lines_duplicate_nc_split():
    line = json.dumps(entry_to_json(make_entry()))
    with pytest.raises(DatasetError, match="duplicate"):
        parse_dataset_lines([line, line], source_name="mem")
    warnings = []
    entries = parse_dataset_lines([line, line], source_name="mem", strict=False, warnings=warnings)
    assert len(entries) == 2 and warnings


def test_serialize_round_trip_with_header():
    entries = [make_entry(), make_entry(nc="access road", split="test")]
    text = serialize_entries(entries, header="provenance: {}")
    assert text.startswith("# provenance: {}\n")
    assert parse_dataset_lines(text.splitlines(), source_name="mem") == entries


def test_dataset_stats_counts():
    entries = [
        make_entry(texts=("a", "b")),
        make_entry(nc="access road", split="test", texts=("c",)),
    ]
    report = dataset_stats(entries)
    assert report.splits["train"].ncs == 1
    assert report.splits["train"].paraphrases == 2
    assert report.splits["test"].ncs == 1
    assert report.total.paraphrases == 3
    assert report.total.by_source["human"] == 3


# -- prompts ---------------------------------------------------------------------


def test_prompt_exact_bytes():
    examples = [
        (NounCompound.parse("access road"), "road that provides access"),
        (NounCompound.parse("steam train"), Paraphrase(text="train powered by steam")),
    ]
    prompt = build_fewshot_prompt(examples, NounCompound.parse("chocolate crocodile"))
    assert prompt == (
        "Q: what is the meaning of access road?\n"
        "A:road that provides access\n"
        "Q: what is the meaning of steam train?\n"
        "A:train powered by steam\n"
        "Q: what is the meaning of chocolate crocodile?\n"
        "A:"
    )


def test_prompt_shape_for_k_examples():
    examples = [(NounCompound.parse(f"mod{i} head{i}"), f"p{i}") for i in range(7)]
    prompt = build_fewshot_prompt(examples, NounCompound.parse("a b"))
    lines = prompt.split("\n")
    assert len(lines) == 2 * 7 + 2
    assert prompt.endswith("A:") and not prompt.endswith("\n")
    assert "\n\n" not in prompt


def test_prompt_requires_examples():
    with pytest.raises(ValueError):
        build_fewshot_prompt([], NounCompound.parse("a b"))


def test_sample_fewshot_is_seeded():
    entries = [make_entry(nc=f"mod{i} head{i}", texts=(f"p{i}", f"q{i}")) for i in range(30)]
    first = sample_fewshot(entries, 5, seed=42)
    second = sample_fewshot(entries, 5, seed=42)
    other = sample_fewshot(entries, 5, seed=43)
    assert first == second
    assert first != other
    assert len({nc.surface for nc, _ in first}) == 5


def test_sample_fewshot_bounds():
    entries = [make_entry()]
    with pytest.raises(ValueError):
        sample_fewshot(entries, 2, seed=0)
    with pytest.raises(ValueError):
        sample_fewshot(entries, 0, seed=0)


# -- legacy layout conversion -----------------------------------------------------


def test_convert_semeval_groups_consecutive_lines():
    lines = [
        "% comment",
        "access road\troad that provides access\t4",
        "access road\troad allowing access",
        "steam train\ttrain powered by steam\t7",
    ]
    entries = convert_semeval(lines, split="train")
    assert [e.nc.surface for e in entries] == ["access road", "steam train"]
    assert [p.text for p in entries[0].paraphrases] == [
        "road that provides access",
        "road allowing access",
    ]
    assert entries[0].split == "train"
    assert all(p.label == "unjudged" for e in entries for p in e.paraphrases)


def test_convert_semeval_rejects_bad_rows():
    with pytest.raises(DatasetError, match=":1"):
        convert_semeval(["no tab here"], split="train")

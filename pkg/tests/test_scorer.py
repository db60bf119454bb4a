"""Wire-protocol conformance for the external scorer client, driven by small
stub plugins in tests/stubs/."""

import sys

import pytest

from nckit.scorer_client import ExternalScorer, ScorerError, ScorerProtocolError

from conftest import scorer_cmd


def test_good_scorer_round_trip():
    with ExternalScorer(scorer_cmd("good_scorer.py")) as scorer:
        assert scorer.score("road that provides access", "road that provides access") == 1.0
        assert scorer.score("completely different text", "no shared words at all") == 0.0
        mid = scorer.score("train powered by steam", "train powered by diesel")
        assert 0.0 < mid < 1.0


def test_good_scorer_many_requests_ids_advance():
    with ExternalScorer(scorer_cmd("good_scorer.py")) as scorer:
        for i in range(50):
            assert scorer.score(f"w{i}", f"w{i}") == 1.0


def test_handshake_reports_name_and_version():
    scorer = ExternalScorer(scorer_cmd("good_scorer.py"))
    with scorer:
        scorer.start()
        assert scorer.info["name"] == "jaccard-stub"
        assert scorer.info["version"] == "1.0"


def test_bad_handshake_is_protocol_error():
    scorer = ExternalScorer(scorer_cmd("bad_handshake_scorer.py"))
    with pytest.raises(ScorerProtocolError, match=r"\[0, 10\]"):
        scorer.start()
    scorer.close()


def test_wrong_id_echo_is_protocol_error():
    with ExternalScorer(scorer_cmd("bad_id_scorer.py")) as scorer:
        with pytest.raises(ScorerProtocolError, match="id"):
            scorer.score("a", "b")


def test_malformed_response_quotes_offending_line():
    with ExternalScorer(scorer_cmd("malformed_scorer.py")) as scorer:
        with pytest.raises(ScorerProtocolError, match="this is not json"):
            scorer.score("a", "b")


def test_out_of_range_score_is_protocol_error():
    with ExternalScorer(scorer_cmd("out_of_range_scorer.py")) as scorer:
        with pytest.raises(ScorerProtocolError, match="1.5"):
            scorer.score("a", "b")


def test_crash_recovery_restarts_plugin():
    # each stub process serves exactly one request; every subsequent score
    # must transparently retry against a fresh process
    with ExternalScorer(scorer_cmd("crash_once_scorer.py"), retries=2) as scorer:
        assert scorer.score("a", "b") == 0.25
        assert scorer.score("c", "d") == 0.25
        assert scorer.score("e", "f") == 0.25


def test_timeout_is_bounded_and_reported():
    scorer = ExternalScorer(scorer_cmd("hang_scorer.py"), timeout=0.3, retries=1)
    with scorer:
        with pytest.raises(ScorerError, match="after 2 attempts"):
            scorer.score("a", "b")


def test_missing_command_fails_to_start():
    scorer = ExternalScorer([sys.executable, "/nonexistent/plugin.py"])
    with pytest.raises(ScorerError):
        scorer.score("a", "b")


def test_command_string_is_shlexed():
    cmd = " ".join(scorer_cmd("good_scorer.py"))
    with ExternalScorer(cmd) as scorer:
        assert scorer.score("x", "x") == 1.0


def test_close_is_idempotent():
    scorer = ExternalScorer(scorer_cmd("good_scorer.py"))
    scorer.start()
    scorer.close()
    scorer.close()

"""Schema, determinism, and CLI behaviour of the comment scorer.

The bundled checkpoints under fixtures/models are tiny random-weight
stand-ins (see fixtures/make_models.py), so nothing here asserts
classifier quality; the one test against real pretrained checkpoints
skips when they cannot be resolved.
"""

import csv
from pathlib import Path

import pytest

from affect_extractor import (
    AFFECT_HEADER,
    InputError,
    ModelResolutionError,
    load_emotion_model,
    load_sentiment_model,
    score_comments,
)
from affect_extractor.cli import main
from affect_extractor.models import sentiment_polarity
from cryptomove.ingest import read_affect_records

FIXTURES = Path(__file__).parent / "fixtures"
SENTIMENT = FIXTURES / "models" / "sentiment-tiny"
EMOTION = FIXTURES / "models" / "emotion-tiny"

EMOTION_COLUMNS = ("love", "joy", "anger", "sadness")


@pytest.fixture(scope="module")
def models():
    return (
        load_sentiment_model(str(SENTIMENT), offline=True),
        load_emotion_model(str(EMOTION), offline=True),
    )


def score(tmp_path, models, name="comments.csv", out_name="affect.csv"):
    sentiment, emotion = models
    return score_comments(
        FIXTURES / name,
        tmp_path / out_name,
        sentiment_model=sentiment,
        emotion_model=emotion,
    )


class TestRoundTrip:
    def test_ten_comments_become_ten_ingestible_rows(self, tmp_path, models):
        summary = score(tmp_path, models)
        assert (summary.rows_read, summary.rows_written, summary.rows_skipped) == (10, 10, 0)
        records = read_affect_records(summary.output_path).records
        assert len(records) == 10

    def test_rows_are_schema_exact(self, tmp_path, models):
        summary = score(tmp_path, models)
        with open(summary.output_path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert tuple(rows[0]) == AFFECT_HEADER
        for row in rows[1:]:
            assert row[3] in ("-1", "0", "1")
            onehot = [int(cell) for cell in row[4:8]]
            assert sorted(onehot) == [0, 0, 0, 1]
            assert row[8:11] == ["0", "0", "0"]

    def test_rows_keep_input_order_and_identity(self, tmp_path, models):
        summary = score(tmp_path, models)
        with open(FIXTURES / "comments.csv", newline="") as fh:
            wanted = [(row[0], row[1], row[2]) for row in list(csv.reader(fh))[1:]]
        with open(summary.output_path, newline="") as fh:
            got = [(row[0], row[1], row[2]) for row in list(csv.reader(fh))[1:]]
        assert got == wanted

    def test_predictions_vary_with_text(self, tmp_path, models):
        summary = score(tmp_path, models)
        with open(summary.output_path, newline="") as fh:
            rows = list(csv.reader(fh))[1:]
        assert len({row[3] for row in rows}) >= 2
        assert len({tuple(row[4:8]) for row in rows}) >= 2


class TestDeterminism:
    def test_reruns_are_byte_identical(self, tmp_path, models):
        first = score(tmp_path, models, out_name="a.csv")
        second = score(tmp_path, models, out_name="b.csv")
        assert first.output_path.read_bytes() == second.output_path.read_bytes()
        assert first.sidecar_path.read_bytes() == second.sidecar_path.read_bytes()


class TestMalformedRows:
    def test_bad_rows_are_skipped_and_logged(self, tmp_path, models):
        summary = score(tmp_path, models, name="comments_malformed.csv")
        assert (summary.rows_read, summary.rows_written, summary.rows_skipped) == (6, 2, 4)
        log = summary.sidecar_path.read_text().splitlines()
        assert log[-1] == "skipped 4 of 6 data rows"
        assert len(log) == 5
        reasons = "\n".join(log)
        assert "not unix seconds" in reasons
        assert "source must be one of" in reasons
        assert "empty text" in reasons
        assert "expected 4 columns" in reasons
        records = read_affect_records(summary.output_path).records
        assert len(records) == 2

    def test_empty_input_writes_header_only(self, tmp_path, models):
        src = tmp_path / "empty.csv"
        src.write_text("timestamp,source,channel,text\n")
        sentiment, emotion = models
        summary = score_comments(
            src, tmp_path / "out.csv", sentiment_model=sentiment, emotion_model=emotion
        )
        assert (summary.rows_read, summary.rows_written, summary.rows_skipped) == (0, 0, 0)
        assert summary.output_path.read_text() == ",".join(AFFECT_HEADER) + "\n"
        assert read_affect_records(summary.output_path).records == []

    def test_wrong_header_is_an_input_error(self, tmp_path, models):
        src = tmp_path / "bad.csv"
        src.write_text("time,who,where,what\n1,github,core,hi\n")
        sentiment, emotion = models
        with pytest.raises(InputError, match="expected header"):
            score_comments(src, tmp_path / "out.csv",
                           sentiment_model=sentiment, emotion_model=emotion)

    def test_missing_file_is_an_input_error(self, tmp_path, models):
        sentiment, emotion = models
        with pytest.raises(InputError, match="cannot read"):
            score_comments(tmp_path / "nope.csv", tmp_path / "out.csv",
                           sentiment_model=sentiment, emotion_model=emotion)


class TestModelResolution:
    def test_unresolvable_offline_model_raises(self, tmp_path):
        with pytest.raises(ModelResolutionError, match="offline"):
            load_sentiment_model(str(tmp_path / "no-such-checkpoint"), offline=True)

    def test_polarity_word_labels(self):
        assert sentiment_polarity({0: "NEGATIVE", 1: "POSITIVE"}) == {0: -1, 1: 1}
        assert sentiment_polarity({0: "negative", 1: "neutral", 2: "positive"}) == {
            0: -1, 1: 0, 2: 1,
        }

    def test_generic_labels_read_negative_to_positive(self):
        assert sentiment_polarity({0: "LABEL_0", 1: "LABEL_1"}) == {0: -1, 1: 1}
        assert sentiment_polarity({0: "LABEL_0", 1: "LABEL_1", 2: "LABEL_2"}) == {
            0: -1, 1: 0, 2: 1,
        }

    def test_unmappable_labels_raise(self):
        with pytest.raises(ModelResolutionError, match="unmappable"):
            sentiment_polarity({0: "bullish", 1: "bearish"})
        with pytest.raises(ModelResolutionError, match="expected 2 or 3"):
            sentiment_polarity({i: f"LABEL_{i}" for i in range(4)})

    def test_emotionless_model_raises(self):
        with pytest.raises(ModelResolutionError, match="predicts none"):
            load_emotion_model(str(SENTIMENT), offline=True)


class TestCli:
    def test_score_round_trip(self, tmp_path):
        out = tmp_path / "affect.csv"
        code = main([
            "score", "--in", str(FIXTURES / "comments.csv"), "--out", str(out),
            "--sentiment-model", str(SENTIMENT), "--emotion-model", str(EMOTION),
            "--offline",
        ])
        assert code == 0
        assert len(read_affect_records(out).records) == 10
        assert out.with_name("affect.csv.skipped.log").exists()

    def test_missing_input_exits_3(self, tmp_path, capsys):
        code = main([
            "score", "--in", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o.csv"),
            "--sentiment-model", str(SENTIMENT), "--emotion-model", str(EMOTION),
            "--offline",
        ])
        assert code == 3
        assert "error:" in capsys.readouterr().err

    def test_unresolvable_model_exits_2(self, tmp_path, capsys):
        code = main([
            "score", "--in", str(FIXTURES / "comments.csv"), "--out", str(tmp_path / "o.csv"),
            "--sentiment-model", str(tmp_path / "missing"), "--emotion-model", str(EMOTION),
            "--offline",
        ])
        assert code == 2
        assert "cannot resolve model" in capsys.readouterr().err


class TestPretrainedCheckpoints:
    SENTIMENT_ID = "distilbert-base-uncased-finetuned-sst-2-english"
    EMOTION_ID = "bhadresh-savani/distilbert-base-uncased-emotion"

    def test_clearly_positive_sentence_scores_positive(self, tmp_path):
        try:
            sentiment = load_sentiment_model(self.SENTIMENT_ID)
            emotion = load_emotion_model(self.EMOTION_ID)
        except ModelResolutionError as exc:
            pytest.skip(f"pretrained checkpoints unreachable: {exc}")
        src = tmp_path / "one.csv"
        src.write_text(
            "timestamp,source,channel,text\n"
            '1600000000,reddit,cryptocurrency,"I absolutely love this, it is wonderful"\n'
        )
        summary = score_comments(
            src, tmp_path / "out.csv", sentiment_model=sentiment, emotion_model=emotion
        )
        records = read_affect_records(summary.output_path).records
        assert len(records) == 1
        assert records[0].sentiment == 1

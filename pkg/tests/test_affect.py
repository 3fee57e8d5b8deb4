"""VAD scoring and affect aggregation behaviour."""

import numpy as np
import pytest

from cryptomove.affect import (
    AFFECT_METRICS,
    aggregate_affect,
    read_affect_series,
    score_vad,
    write_affect_series,
)
from cryptomove.errors import ParseError, ValidationError
from cryptomove.ingest import AffectRecord, AffectRecordSet, VadLexicon

H, D = 3600, 86400


def record(ts, source="reddit", channel="technical", sentiment=0, **metrics):
    values = {m: 0.0 for m in ("love", "joy", "anger", "sadness", "valence", "arousal", "dominance")}
    values.update(metrics)
    return AffectRecord(ts, source, channel, sentiment, **values)


class TestScoreVad:
    def test_repeated_token(self):
        lex = VadLexicon({"good": (3.0, 2.0, 2.5)})
        assert score_vad("good good", lex) == (3.0, 2.0, 2.5)

    def test_no_hits(self):
        lex = VadLexicon({"good": (3.0, 2.0, 2.5)})
        assert score_vad("unrelated words entirely", lex) == (0.0, 0.0, 0.0)
        assert score_vad("", lex) == (0.0, 0.0, 0.0)

    def test_two_token_mean(self):
        lex = VadLexicon({"good": (3.0, 2.0, 2.0), "bad": (1.0, 2.0, 4.0)})
        assert score_vad("good bad", lex) == (2.0, 2.0, 3.0)

    def test_case_and_punctuation(self):
        lex = VadLexicon({"good": (3.0, 2.0, 2.0), "bad": (1.0, 2.0, 4.0)})
        assert score_vad("GOOD,bad!!", lex) == (2.0, 2.0, 3.0)

    def test_tokens_split_on_non_alphanumeric(self):
        lex = VadLexicon({"a1": (1.0, 1.0, 1.0)})
        # "a1" survives as one token; "a-1" splits into "a" and "1", no hits
        assert score_vad("a1", lex) == (1.0, 1.0, 1.0)
        assert score_vad("a-1", lex) == (0.0, 0.0, 0.0)

    def test_unmatched_tokens_ignored(self):
        lex = VadLexicon({"joy": (2.5, 1.5, 0.5)})
        assert score_vad("pure joy indeed", lex) == (2.5, 1.5, 0.5)


class TestAggregate:
    def test_single_hour_mean(self):
        axis = [H * 10]
        records = AffectRecordSet([record(H * 10 + i * 60, anger=float(i)) for i in range(3)])
        series = aggregate_affect(records, "hourly", axis)
        assert series.columns["reddit.technical.anger"][0] == 1.0
        assert series.columns["reddit.technical.comment_count"][0] == 3.0

    def test_empty_hour_zeros(self):
        axis = [H * 10, H * 11]
        records = AffectRecordSet([record(H * 10, joy=2.0)])
        series = aggregate_affect(records, "hourly", axis)
        for metric in AFFECT_METRICS:
            assert series.columns[f"reddit.technical.{metric}"][1] == 0.0

    def test_daily_sentiment_mean(self):
        axis = [D * 5]
        records = AffectRecordSet([record(D * 5 + i * H, sentiment=s) for i, s in enumerate((1, -1, 0, 1))])
        series = aggregate_affect(records, "daily", axis)
        assert series.columns["reddit.technical.sentiment"][0] == 0.25
        assert series.columns["reddit.technical.comment_count"][0] == 4.0

    def test_out_of_span_counted_and_excluded(self):
        axis = [H * 10]
        records = AffectRecordSet(
            [record(H * 10, joy=1.0), record(H * 12, joy=5.0), record(H * 9, joy=5.0)]
        )
        series = aggregate_affect(records, "hourly", axis)
        assert series.excluded == 2
        assert series.columns["reddit.technical.joy"][0] == 1.0
        assert series.columns["reddit.technical.comment_count"][0] == 1.0

    def test_count_conservation(self):
        rng = np.random.default_rng(3)
        axis = H * np.arange(100, 148)
        stamps = rng.integers(H * 100, H * 148, size=400)
        records = AffectRecordSet([record(int(t), joy=float(rng.normal())) for t in stamps])
        series = aggregate_affect(records, "hourly", axis)
        total = series.columns["reddit.technical.comment_count"].sum()
        assert total + series.excluded == 400
        assert series.excluded == 0

    def test_permutation_invariance_exact(self):
        rng = np.random.default_rng(4)
        axis = H * np.arange(50, 60)
        base = [
            record(int(t), sentiment=int(rng.integers(-1, 2)), joy=float(rng.normal()),
                   valence=float(rng.normal()))
            for t in rng.integers(H * 50, H * 60, size=120)
        ]
        first = aggregate_affect(AffectRecordSet(list(base)), "hourly", axis)
        shuffled = list(base)
        rng.shuffle(shuffled)
        second = aggregate_affect(AffectRecordSet(shuffled), "hourly", axis)
        for name in first.names:
            assert (first.columns[name] == second.columns[name]).all(), name

    def test_values_within_bucket_range(self):
        rng = np.random.default_rng(5)
        axis = H * np.arange(10, 14)
        records = [record(int(t), anger=float(rng.uniform(0, 3))) for t in rng.integers(H * 10, H * 14, size=60)]
        series = aggregate_affect(AffectRecordSet(records), "hourly", axis)
        for i, start in enumerate(axis):
            bucket = [r.anger for r in records if start <= r.timestamp < start + H]
            got = series.columns["reddit.technical.anger"][i]
            if bucket:
                assert min(bucket) <= got <= max(bucket)
            else:
                assert got == 0.0

    def test_daily_refines_hourly(self):
        rng = np.random.default_rng(6)
        hourly_axis = H * np.arange(24 * 40, 24 * 43)  # three whole days
        daily_axis = D * np.arange(int(40 * 24 * H / D), int(43 * 24 * H / D))
        records = AffectRecordSet(
            [record(int(t), valence=float(rng.normal()), sentiment=int(rng.integers(-1, 2)))
             for t in rng.integers(hourly_axis[0], hourly_axis[-1] + H, size=500)]
        )
        hourly = aggregate_affect(records, "hourly", hourly_axis)
        daily = aggregate_affect(records, "daily", daily_axis)
        counts = hourly.columns["reddit.technical.comment_count"]
        for metric in ("valence", "sentiment"):
            means = hourly.columns[f"reddit.technical.{metric}"]
            for day in range(3):
                sl = slice(day * 24, (day + 1) * 24)
                total = counts[sl].sum()
                weighted = (means[sl] * counts[sl]).sum() / total if total else 0.0
                assert daily.columns[f"reddit.technical.{metric}"][day] == pytest.approx(weighted, abs=1e-12)

    def test_two_channels_column_groups(self):
        axis = [H * 7]
        records = AffectRecordSet(
            [record(H * 7, channel="technical", joy=1.0),
             record(H * 7, source="github", channel="core", joy=3.0)]
        )
        series = aggregate_affect(records, "hourly", axis)
        assert series.channels == ["reddit.technical", "github.core"]
        assert len(series.names) == 18
        assert series.columns["reddit.technical.joy"][0] == 1.0
        assert series.columns["github.core.joy"][0] == 3.0
        assert series.matrix().shape == (1, 18)

    def test_axis_validation(self):
        records = AffectRecordSet([])
        with pytest.raises(ValidationError):
            aggregate_affect(records, "hourly", [H * 2, H * 1])
        with pytest.raises(ValidationError):
            aggregate_affect(records, "hourly", [H + 5])
        with pytest.raises(ValueError):
            aggregate_affect(records, "weekly", [0])

    def test_empty_records_empty_axis(self):
        series = aggregate_affect(AffectRecordSet([]), "hourly", [])
        assert len(series) == 0 and series.channels == [] and series.excluded == 0


class TestCsv:
    def build(self):
        rng = np.random.default_rng(7)
        axis = H * np.arange(30, 42)
        records = AffectRecordSet(
            [record(int(t), sentiment=int(rng.integers(-1, 2)), love=float(rng.uniform()),
                    joy=float(rng.uniform()), valence=float(rng.normal()))
             for t in rng.integers(H * 30, H * 42, size=80)]
            + [record(int(t), source="github", channel="core", anger=float(rng.uniform()))
               for t in rng.integers(H * 30, H * 42, size=40)]
        )
        return aggregate_affect(records, "hourly", axis)

    def test_round_trip(self, tmp_path):
        series = self.build()
        path = tmp_path / "affect.csv"
        write_affect_series(series, path)
        again = read_affect_series(path)
        assert again.frequency == "hourly"
        assert again.channels == series.channels
        assert (again.timestamps == series.timestamps).all()
        for name in series.names:
            assert (again.columns[name] == series.columns[name]).all(), name

    def test_header_shape(self, tmp_path):
        series = self.build()
        path = tmp_path / "affect.csv"
        write_affect_series(series, path)
        header = path.read_text().splitlines()[0].split(",")
        assert header[0] == "timestamp"
        assert header[1] == "reddit.technical.sentiment"
        assert len(header) == 1 + 18

    def test_counts_written_as_integers(self, tmp_path):
        series = self.build()
        path = tmp_path / "affect.csv"
        write_affect_series(series, path)
        header = path.read_text().splitlines()[0].split(",")
        row = path.read_text().splitlines()[1].split(",")
        count_cols = [i for i, name in enumerate(header) if name.endswith(".comment_count")]
        assert count_cols and all("." not in row[i] for i in count_cols)

    def test_incomplete_group_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("timestamp,reddit.technical.sentiment\n3600,0.5\n")
        with pytest.raises(ParseError, match="nine-metric"):
            read_affect_series(path)

    def test_unknown_metric_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("timestamp,reddit.technical.vibes\n3600,0.5\n")
        with pytest.raises(ParseError, match="vibes"):
            read_affect_series(path)

    def test_fractional_count_rejected(self, tmp_path):
        series = self.build()
        path = tmp_path / "affect.csv"
        write_affect_series(series, path)
        lines = path.read_text().splitlines()
        cells = lines[1].split(",")
        cells[9] = "1.5"  # the first channel's comment_count column
        lines[1] = ",".join(cells)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValidationError, match="comment_count"):
            read_affect_series(path)

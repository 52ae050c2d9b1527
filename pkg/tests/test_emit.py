import csv

import pytest

from nudec import emit
from nudec.verdict import CSV_COLUMNS, Kind, TrialStats, Verdict


def stats():
    st = TrialStats(16, 0.12, ("y2_nonunique", "y2_aux"))
    st.record({"y2_nonunique": Verdict(Kind.CORRECT, (0, 0)), "y2_aux": Verdict(Kind.AMBIGUOUS)})
    st.record({"y2_nonunique": Verdict(Kind.WRONG, (1, 0)), "y2_aux": Verdict(Kind.NO_CANDIDATE)})
    return st


def test_empty_stats_give_header_only(tmp_path):
    p = emit.emit_csv([], tmp_path / "e.csv")
    assert p.read_bytes() == (",".join(CSV_COLUMNS) + "\r\n").encode()


def test_rewrite_is_byte_identical(tmp_path):
    a = emit.emit_csv(stats().rows(), tmp_path / "a.csv").read_bytes()
    b = emit.emit_csv(stats().rows(), tmp_path / "a.csv").read_bytes()
    assert a == b


def test_trial_stats_columns(tmp_path):
    p = emit.emit_csv(stats().rows(), tmp_path / "s.csv")
    with open(p, newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS == (
        "decoder", "n", "eps", "trials", "correct", "wrong", "ambiguous",
        "no_candidate", "enc_fail", "error_rate", "ci95_halfwidth")
    assert rows[1][:10] == ["y2_nonunique", "16", "0.12", "2", "1", "1", "0", "0", "0", "0.5"]
    assert rows[2][9] == "1"


def test_float_format():
    assert emit.fmt(1 / 3) == "0.333333333333"
    assert emit.fmt(2.0) == "2"
    assert emit.fmt(True) == "true"
    assert emit.fmt(float("nan")) == "nan"
    assert emit.fmt(None) == ""


def test_unknown_columns_rejected(tmp_path):
    with pytest.raises(ValueError):
        emit.emit_csv([{"decoder": "x", "bogus": 1}], tmp_path / "x.csv")

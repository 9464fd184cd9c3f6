import io as stdio
import json

import numpy as np
import pytest

from memdecay import io
from memdecay.core import DecayCurve, FitConfig, VideoScoreTable
from memdecay.errors import EmptyInput, SchemaError
from memdecay.fitting import fit_all
from memdecay.simulate import SimSpec, simulate_dataset

VALID = "video_id,participant_id,lag,response\nv1,p1,10,1\nv1,p2,50,0\nv2,p1,120,1\n"


def _write(tmp_path, text, name="a.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_four_line_file(tmp_path, caplog):
    caplog.set_level("INFO", logger="memdecay")
    recs = io.ingest(_write(tmp_path, VALID))
    assert len(recs) == 3
    s = recs.summary()
    assert (s["n_videos"], s["n_participants"], s["lag_min"], s["lag_max"]) == (2, 2, 10, 120)
    assert "3 records" in caplog.text and "lags 10..120" in caplog.text


def test_bad_response_names_line(tmp_path):
    path = _write(tmp_path, "video_id,participant_id,lag,response\nv1,p1,10,1\nv1,p2,50,2\n")
    with pytest.raises(ValueError, match="line 3") as exc:
        io.read_annotations(path)
    assert isinstance(exc.value, SchemaError) and exc.value.line == 3


@pytest.mark.parametrize(
    "row, message",
    [("v1,p1,0,1", "lag must be >= 1"), ("v1,p1,x,1", "integer"), (",p1,5,1", "video_id"), ("v1,p1,5", "fields")],
)
def test_row_validation(tmp_path, row, message):
    path = _write(tmp_path, "video_id,participant_id,lag,response\n" + row + "\n")
    with pytest.raises(SchemaError, match=message):
        io.read_annotations(path)


def test_header_must_be_exact(tmp_path):
    with pytest.raises(SchemaError, match="line 1"):
        io.read_annotations(_write(tmp_path, "video,participant_id,lag,response\nv1,p1,10,1\n"))
    with pytest.raises(SchemaError, match="header"):
        io.read_annotations(_write(tmp_path, ""))


def test_comments_and_header_only(tmp_path):
    recs = io.read_annotations(_write(tmp_path, "# format_version: 1\n" + VALID))
    assert len(recs) == 3
    assert len(io.read_annotations(_write(tmp_path, "video_id,participant_id,lag,response\n"))) == 0


def test_column_map(tmp_path):
    text = "worker,clip,extra,gap,hit\np1,v1,z,10,1\np2,v2,z,20,0\n"
    cmap = io.parse_column_map("video_id=clip,participant_id=worker,lag=gap,response=hit")
    recs = io.read_annotations(_write(tmp_path, text), cmap)
    assert recs.video_ids == ("v1", "v2") and recs.lags.tolist() == [10, 20]
    with pytest.raises(SchemaError, match="unknown column"):
        io.parse_column_map("clip=video_id")
    with pytest.raises(SchemaError, match="lacks"):
        io.read_annotations(_write(tmp_path, text), {"video_id": "nope"})


def test_simulated_file_round_trips(tmp_path):
    sim = simulate_dataset(SimSpec(n_videos=30, annotations_per_video=20, seed=4))
    path = tmp_path / "sim.csv"
    io.write_annotations(path, sim.records)
    assert io.read_annotations(path) == sim.records


def test_score_file_round_trip(tmp_path):
    sim = simulate_dataset(SimSpec(n_videos=25, seed=8))
    table = fit_all(sim.records, FitConfig(iterations=7), source_digest="ab" * 32)
    path = tmp_path / "s.jsonl"
    io.write_scores(path, table)
    back = io.read_scores(path)
    assert back == table
    assert back.config == table.config and back.source_digest == table.source_digest
    for vid in table:
        assert back[vid].m_T == table[vid].m_T and back[vid].alpha == table[vid].alpha
    # second write is byte-identical
    buf = stdio.StringIO()
    io.write_scores(buf, back)
    assert buf.getvalue() == path.read_text()


def test_score_file_shortest_repr(tmp_path):
    table = VideoScoreTable((("v", DecayCurve(0.1 + 0.2, -1e-4 / 3)),))
    buf = stdio.StringIO()
    io.write_scores(buf, table)
    record = buf.getvalue().splitlines()[1]
    assert '"m80": 0.30000000000000004' in record
    assert json.loads(record)["alpha"] == -1e-4 / 3


@pytest.mark.parametrize(
    "line, message",
    [
        ('{"video_id": "v", "m80": "x", "alpha": 0, "ref_lag": 80, "n": 1}', "m80"),
        ('{"video_id": "v", "m80": 0.5, "alpha": 0, "ref_lag": 80.5, "n": 1}', "ref_lag"),
        ('{"video_id": "", "m80": 0.5, "alpha": 0, "ref_lag": 80, "n": 1}', "video_id"),
        ("not json", "invalid JSON"),
        ('{"format_version": 9, "meta": {}}', "format_version"),
    ],
)
def test_score_file_validation(tmp_path, line, message):
    with pytest.raises(SchemaError, match=message):
        io.read_scores(_write(tmp_path, line + "\n", "s.jsonl"))


def test_score_file_duplicates_and_empty(tmp_path):
    rec = '{"video_id": "v", "m80": 0.5, "alpha": 0, "ref_lag": 80, "n": 1}\n'
    with pytest.raises(SchemaError, match="duplicate"):
        io.read_scores(_write(tmp_path, rec * 2, "s.jsonl"))
    with pytest.raises(EmptyInput):
        io.read_scores(_write(tmp_path, "", "s.jsonl"))


def test_plot_table_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    io.write_table(path, ("a", "b"), [(1, 0.5), (2, None), (np.int64(3), np.float64(0.25))], {"k": "v", "n": 3})
    meta, header, rows = io.read_table(path)
    assert meta == {"format_version": "1", "k": "v", "n": "3"}
    assert header == ["a", "b"]
    assert rows == [["1", "0.5"], ["2", ""], ["3", "0.25"]]

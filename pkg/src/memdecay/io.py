"""File formats.

Annotation file (CSV)
    Optional ``#`` comment lines, then the header
    ``video_id,participant_id,lag,response`` and one row per annotation.
    Written files start with ``# format_version: 1``.

Score file (JSON lines)
    An optional first line ``{"format_version": 1, "meta": {...}}`` holding
    the fit settings and the SHA-256 of the annotation file, then one object
    per video: ``{"video_id", "m80", "alpha", "ref_lag", "n"}``. ``m80`` is
    the score at ``ref_lag`` (80 unless configured otherwise).

Plot tables (CSV)
    ``# format_version: 1`` and ``# key: value`` metadata comments, then a
    header row. Empty cells mean "no data".

Floats are written in shortest round-trip form (``repr``).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
from contextlib import contextmanager
from typing import Iterable, Mapping

import numpy as np

from memdecay.core import AnnotationSet, DecayCurve, FitConfig, VideoScoreTable
from memdecay.errors import EmptyInput, MemDecayError, SchemaError

log = logging.getLogger("memdecay")

FORMAT_VERSION = 1
ANNOTATION_COLUMNS = ("video_id", "participant_id", "lag", "response")


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def parse_column_map(text: str | None) -> dict[str, str]:
    """Parse ``video_id=clip,participant_id=worker,...`` into a mapping."""
    if not text:
        return {}
    mapping = {}
    for item in text.split(","):
        key, sep, value = item.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not value:
            raise SchemaError(f"bad column mapping entry {item!r}; expected NAME=COLUMN")
        if key not in ANNOTATION_COLUMNS:
            raise SchemaError(f"unknown column {key!r} in mapping; expected one of {', '.join(ANNOTATION_COLUMNS)}")
        mapping[key] = value
    return mapping


def _data_lines(fh):
    """Yield ``(line_number, text)`` skipping comment and blank lines."""
    for lineno, line in enumerate(fh, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, line


def read_annotations(path, column_map: Mapping[str, str] | None = None) -> AnnotationSet:
    """Read and validate an annotation CSV.

    Without ``column_map`` the header must be exactly
    ``video_id,participant_id,lag,response``. With it, the named source
    columns are picked out of any header (extra columns are ignored).
    """
    column_map = dict(column_map or {})
    source = {c: column_map.get(c, c) for c in ANNOTATION_COLUMNS}
    vids, pids, lags, responses = [], [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        lines = _data_lines(fh)
        try:
            header_line, header_text = next(lines)
        except StopIteration:
            raise SchemaError("missing header row", path=path) from None
        header = [h.strip() for h in next(csv.reader([header_text]))]
        if not column_map:
            if tuple(header) != ANNOTATION_COLUMNS:
                raise SchemaError(
                    f"header must be {','.join(ANNOTATION_COLUMNS)}, got {','.join(header)}",
                    line=header_line, path=path,
                )
            positions = list(range(4))
        else:
            absent = [source[c] for c in ANNOTATION_COLUMNS if source[c] not in header]
            if absent:
                raise SchemaError(f"header lacks column(s) {', '.join(absent)}", line=header_line, path=path)
            positions = [header.index(source[c]) for c in ANNOTATION_COLUMNS]
        width = len(header)
        for lineno, text in lines:
            row = next(csv.reader([text]))
            if len(row) != width:
                raise SchemaError(f"expected {width} fields, got {len(row)}", line=lineno, path=path)
            vid, pid, lag_s, resp_s = (row[i].strip() for i in positions)
            if not vid:
                raise SchemaError("empty video_id", line=lineno, path=path)
            if not pid:
                raise SchemaError("empty participant_id", line=lineno, path=path)
            try:
                lag = int(lag_s)
            except ValueError:
                raise SchemaError(f"lag must be an integer, got {lag_s!r}", line=lineno, path=path) from None
            if lag < 1:
                raise SchemaError(f"lag must be >= 1, got {lag}", line=lineno, path=path)
            if resp_s not in ("0", "1"):
                raise SchemaError(f"response must be 0 or 1, got {resp_s!r}", line=lineno, path=path)
            vids.append(vid)
            pids.append(pid)
            lags.append(lag)
            responses.append(int(resp_s))
    return AnnotationSet.from_columns(vids, pids, np.array(lags, dtype=np.int64), np.array(responses, dtype=np.int64))


def ingest(path, column_map: Mapping[str, str] | None = None) -> AnnotationSet:
    """Read an annotation file and log a one-line summary."""
    annotations = read_annotations(path, column_map)
    s = annotations.summary()
    if s["n_records"]:
        log.info(
            "%s: %d records, %d videos, %d participants, lags %d..%d, hit rate %.4f",
            path, s["n_records"], s["n_videos"], s["n_participants"], s["lag_min"], s["lag_max"], s["hit_rate"],
        )
    else:
        log.info("%s: 0 records", path)
    return annotations


@contextmanager
def _sink(target):
    """Text handle for a path, an open handle, or ``None``/``"-"`` (stdout)."""
    if target is None or target == "-":
        import sys

        yield sys.stdout
    elif hasattr(target, "write"):
        yield target
    else:
        with open(target, "w", newline="", encoding="utf-8") as fh:
            yield fh


def write_annotations(target, annotations: AnnotationSet) -> None:
    with _sink(target) as fh:
        fh.write(f"# format_version: {FORMAT_VERSION}\n")
        fh.write(",".join(ANNOTATION_COLUMNS) + "\n")
        vids = annotations.video_ids
        pids = annotations.participant_ids
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for v, p, t, x in zip(annotations.video_codes, annotations.participant_codes, annotations.lags, annotations.responses):
            w.writerow((vids[v], pids[p], int(t), int(x)))
        fh.write(buf.getvalue())


def score_lines(table: VideoScoreTable) -> Iterable[str]:
    meta = {
        "fit_config": table.config.to_dict() if table.config is not None else None,
        "source_sha256": table.source_digest,
    }
    yield json.dumps({"format_version": FORMAT_VERSION, "meta": meta}, sort_keys=True)
    for vid, c in table.curves:
        yield json.dumps(
            {"video_id": vid, "m80": float(c.m_T), "alpha": float(c.alpha), "ref_lag": int(c.ref_lag), "n": int(c.n_annotations)}
        )


def write_scores(target, table: VideoScoreTable) -> None:
    with _sink(target) as fh:
        for line in score_lines(table):
            fh.write(line + "\n")


def _float(obj, key, lineno, path):
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"field {key!r} must be a number, got {value!r}", line=lineno, path=path)
    return float(value)


def _int(obj, key, lineno, path):
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"field {key!r} must be an integer, got {value!r}", line=lineno, path=path)
    return value


def read_scores(path) -> VideoScoreTable:
    curves = []
    config = digest = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc.msg}", line=lineno, path=path) from None
            if not isinstance(obj, dict):
                raise SchemaError("each line must be a JSON object", line=lineno, path=path)
            if "meta" in obj:
                version = obj.get("format_version")
                if version != FORMAT_VERSION:
                    raise SchemaError(f"unsupported format_version {version!r}", line=lineno, path=path)
                meta = obj["meta"] or {}
                if meta.get("fit_config") is not None:
                    config = FitConfig(**meta["fit_config"])
                digest = meta.get("source_sha256")
                continue
            vid = obj.get("video_id")
            if not isinstance(vid, str) or not vid:
                raise SchemaError(f"field 'video_id' must be a non-empty string, got {vid!r}", line=lineno, path=path)
            try:
                curve = DecayCurve(
                    m_T=_float(obj, "m80", lineno, path),
                    alpha=_float(obj, "alpha", lineno, path),
                    ref_lag=_int(obj, "ref_lag", lineno, path),
                    n_annotations=_int(obj, "n", lineno, path),
                )
            except SchemaError:
                raise
            except MemDecayError as exc:
                raise SchemaError(str(exc), line=lineno, path=path) from None
            curves.append((vid, curve))
    if not curves:
        raise EmptyInput(f"{path}: no score records")
    try:
        return VideoScoreTable(tuple(curves), config=config, source_digest=digest)
    except MemDecayError as exc:
        raise SchemaError(str(exc), path=path) from None


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return "" if value != value else repr(value)
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_table(target, header, rows, metadata: Mapping | None = None) -> None:
    with _sink(target) as fh:
        fh.write(f"# format_version: {FORMAT_VERSION}\n")
        for key, value in (metadata or {}).items():
            fh.write(f"# {key}: {json.dumps(value) if not isinstance(value, str) else value}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def read_table(path) -> tuple[dict, list[str], list[list[str]]]:
    """Read a plot table back as ``(metadata, header, rows)`` of strings."""
    meta, header, rows = {}, None, []
    with open(path, newline="", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = value.strip()
                continue
            row = next(csv.reader([line]))
            if header is None:
                header = row
            else:
                rows.append(row)
    return meta, header or [], rows


def ensure_parent(path) -> None:
    if path and path != "-":
        parent = os.path.dirname(os.path.abspath(path))
        os.makedirs(parent, exist_ok=True)

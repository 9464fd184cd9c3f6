"""Synthetic memory-game data drawn from known decay curves.

Two levels of detail are offered. :func:`simulate_dataset` draws annotation
records directly (lag, response) for every video, which is what the fitting
and consistency code consumes. :func:`simulate_stream_session` lays out an
explicit presentation stream for one participant, with filler videos,
repeat pairs and false-alarm keypresses.

Randomness is derived from ``SimSpec.seed`` through independent Philox
streams: one for the ground-truth curves, one per video, and one per
participant session. Annotation ``j`` of a video always consumes the same
two uniforms of that video's stream, so raising ``annotations_per_video``
extends a dataset without changing the records already drawn.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from memdecay.core import AnnotationSet, DecayCurve, VideoScoreTable, score_at_lag
from memdecay.errors import InvalidSpec

_CURVES, _VIDEO, _SESSION = 0, 1, 2


@dataclass(frozen=True)
class Dist:
    """Distribution of one curve parameter across videos.

    ``kind`` is ``"uniform"`` (``params = (lo, hi)``), ``"const"``
    (``params = (value,)``) or ``"list"`` (explicit values, repeated
    cyclically over the videos).
    """

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind not in ("uniform", "const", "list"):
            raise InvalidSpec(f"unknown distribution kind {self.kind!r}")
        if not self.params or not all(math.isfinite(p) for p in self.params):
            raise InvalidSpec(f"{self.kind} distribution needs finite parameters, got {self.params}")
        if self.kind == "uniform" and (len(self.params) != 2 or self.params[0] > self.params[1]):
            raise InvalidSpec(f"uniform distribution needs lo <= hi, got {self.params}")
        if self.kind == "const" and len(self.params) != 1:
            raise InvalidSpec(f"const distribution takes one value, got {self.params}")

    @classmethod
    def parse(cls, text: str) -> Dist:
        """Parse ``uniform:LO,HI``, ``const:V`` or ``list:V1,V2,...``."""
        kind, _, rest = text.partition(":")
        try:
            params = tuple(float(p) for p in rest.split(",") if p.strip())
        except ValueError as exc:
            raise InvalidSpec(f"bad distribution {text!r}: {exc}") from None
        return cls(kind.strip(), params)

    def __str__(self):
        return f"{self.kind}:{','.join(repr(p) for p in self.params)}"

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "uniform":
            lo, hi = self.params
            return lo + (hi - lo) * rng.random(n)
        if self.kind == "const":
            return np.full(n, self.params[0])
        return np.resize(np.array(self.params), n)


def uniform(lo: float, hi: float) -> Dist:
    return Dist("uniform", (lo, hi))


def const(value: float) -> Dist:
    return Dist("const", (value,))


def values(*vals: float) -> Dist:
    return Dist("list", vals)


@dataclass(frozen=True)
class SimSpec:
    n_videos: int = 200
    annotations_per_video: int = 90
    lag_lo: int = 9
    lag_hi: int = 200
    m80_dist: Dist = field(default_factory=lambda: uniform(0.5, 0.95))
    alpha_dist: Dist = field(default_factory=lambda: uniform(-1e-3, 0.0))
    false_alarm_rate: float = 0.0
    seed: int = 0
    n_participants: int = 200
    ref_lag: int = 80

    def __post_init__(self):
        if self.n_videos < 1:
            raise InvalidSpec(f"n_videos must be >= 1, got {self.n_videos}")
        if self.annotations_per_video < 1:
            raise InvalidSpec(f"annotations_per_video must be >= 1, got {self.annotations_per_video}")
        if not 1 <= self.lag_lo <= self.lag_hi:
            raise InvalidSpec(f"need 1 <= lag_lo <= lag_hi, got [{self.lag_lo}, {self.lag_hi}]")
        if not 0.0 <= self.false_alarm_rate < 1.0:
            raise InvalidSpec(f"false_alarm_rate must lie in [0, 1), got {self.false_alarm_rate}")
        if self.n_participants < 1:
            raise InvalidSpec(f"n_participants must be >= 1, got {self.n_participants}")
        if self.ref_lag < 1:
            raise InvalidSpec(f"ref_lag must be >= 1, got {self.ref_lag}")
        if self.seed < 0:
            raise InvalidSpec(f"seed must be non-negative, got {self.seed}")

    def video_ids(self) -> list[str]:
        width = max(5, len(str(self.n_videos - 1)))
        return [f"v{i:0{width}d}" for i in range(self.n_videos)]

    def participant_ids(self) -> list[str]:
        width = max(4, len(str(self.n_participants - 1)))
        return [f"p{i:0{width}d}" for i in range(self.n_participants)]


@dataclass(frozen=True)
class SimResult:
    truth: VideoScoreTable
    records: AnnotationSet
    participants: tuple[str, ...]


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def true_curves(spec: SimSpec) -> VideoScoreTable:
    rng = _stream(spec.seed, _CURVES)
    m80 = spec.m80_dist.draw(rng, spec.n_videos)
    alpha = spec.alpha_dist.draw(rng, spec.n_videos)
    curves = tuple(
        (vid, DecayCurve(float(m), float(a), spec.ref_lag, spec.annotations_per_video))
        for vid, m, a in zip(spec.video_ids(), m80, alpha)
    )
    return VideoScoreTable(curves)


def _draw_lags(u: np.ndarray, lo: int, hi: int) -> np.ndarray:
    lags = lo + np.floor(u * (hi - lo + 1)).astype(np.int64)
    return np.minimum(lags, hi)


def simulate_dataset(spec: SimSpec) -> SimResult:
    """Draw a full annotation dataset from ``spec``.

    Every annotation draws its lag uniformly from ``[lag_lo, lag_hi]`` and
    its response from a Bernoulli whose parameter is the true curve at that
    lag, clamped into [0, 1]. Annotation ``j`` of video ``i`` goes to
    participant ``(i * annotations_per_video + j) % n_participants``.
    """
    truth = true_curves(spec)
    a = spec.annotations_per_video
    n_total = spec.n_videos * a
    lags = np.empty(n_total, dtype=np.int64)
    responses = np.empty(n_total, dtype=np.int64)
    for i, (_, curve) in enumerate(truth.curves):
        u = _stream(spec.seed, _VIDEO, i).random((a, 2))
        t = _draw_lags(u[:, 0], spec.lag_lo, spec.lag_hi)
        p = score_at_lag(curve, t, clamp=True)
        lags[i * a : (i + 1) * a] = t
        responses[i * a : (i + 1) * a] = u[:, 1] < p
    video_codes = np.repeat(np.arange(spec.n_videos, dtype=np.int64), a)
    participant_codes = np.arange(n_total, dtype=np.int64) % spec.n_participants
    used = np.unique(participant_codes)
    pids = spec.participant_ids()
    records = AnnotationSet(spec.video_ids(), [pids[k] for k in used], video_codes,
                            np.searchsorted(used, participant_codes), lags, responses)
    return SimResult(truth=truth, records=records, participants=tuple(pids[k] for k in used))


@dataclass(frozen=True)
class Presentation:
    position: int
    video_id: str
    is_repeat: bool
    lag: int | None
    keypress: int


@dataclass(frozen=True)
class StreamSession:
    participant_id: str
    presentations: tuple[Presentation, ...]

    def repeats(self) -> list[Presentation]:
        return [p for p in self.presentations if p.is_repeat]

    def to_records(self) -> AnnotationSet:
        """Target repeats only, as annotation records."""
        reps = self.repeats()
        return AnnotationSet.from_columns(
            [p.video_id for p in reps],
            [self.participant_id] * len(reps),
            np.array([p.lag for p in reps], dtype=np.int64),
            np.array([p.keypress for p in reps], dtype=np.int64),
        )


def _participant_key(participant_id) -> int:
    digest = hashlib.sha256(str(participant_id).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def max_repeat_pairs(spec: SimSpec, session_length: int) -> int:
    """Largest number of repeat pairs that always fits in a session.

    A pair with the longest lag ``hi`` has ``L - hi - 1`` possible start
    positions and each pair already placed blocks at most four of them, so
    ``(L - hi - 2) // 4 + 1`` pairs always fit without rejecting a drawn
    lag. Each video is used in at most one pair per session.
    """
    hi = min(spec.lag_hi, session_length - 2)
    if hi < spec.lag_lo:
        return 0
    return min((session_length - hi - 2) // 4 + 1, spec.n_videos)


def simulate_stream_session(
    spec: SimSpec, participant_id, session_length: int, n_pairs: int | None = None
) -> StreamSession:
    """Lay out one participant's continuous presentation stream.

    Repeat pairs occupy positions ``s`` and ``s + lag + 1``; the remaining
    slots hold one-off filler videos. Lags are drawn uniformly from
    ``[lag_lo, min(lag_hi, session_length - 2)]`` and every drawn pair is
    placed, so the lag distribution is not distorted by packing. Repeat
    keypresses follow the clamped true curve; first presentations and
    fillers trigger a keypress with probability ``false_alarm_rate``.
    """
    if session_length < spec.lag_lo + 2:
        raise InvalidSpec(
            f"session_length {session_length} too short for a repeat at lag {spec.lag_lo} "
            f"(need >= {spec.lag_lo + 2})"
        )
    limit = max_repeat_pairs(spec, session_length)
    if n_pairs is None:
        n_pairs = limit
    if not 1 <= n_pairs <= limit:
        raise InvalidSpec(f"n_pairs must lie in [1, {limit}] for session_length {session_length}, got {n_pairs}")
    hi = min(spec.lag_hi, session_length - 2)
    truth = true_curves(spec)
    ids = truth.video_ids()
    rng = _stream(spec.seed, _SESSION, _participant_key(participant_id))

    lags = _draw_lags(rng.random(n_pairs), spec.lag_lo, hi)
    targets = rng.choice(len(ids), size=n_pairs, replace=False)

    free = np.ones(session_length, dtype=bool)
    slot_video = np.full(session_length, -1, dtype=np.int64)
    slot_lag = np.zeros(session_length, dtype=np.int64)
    # Longest lags first; placement order does not affect which lags occur.
    for k in np.argsort(-lags, kind="stable"):
        gap = int(lags[k]) + 1
        starts = np.flatnonzero(free[: session_length - gap] & free[gap:])
        s = int(starts[rng.integers(len(starts))])
        free[s] = free[s + gap] = False
        slot_video[s] = slot_video[s + gap] = targets[k]
        slot_lag[s + gap] = lags[k]

    u = rng.random(session_length)
    presentations = []
    filler = 0
    for pos in range(session_length):
        if slot_video[pos] < 0:
            vid, is_rep, lag, p = f"filler-{filler:05d}", False, None, spec.false_alarm_rate
            filler += 1
        elif slot_lag[pos] > 0:
            curve = truth[ids[slot_video[pos]]]
            vid, is_rep, lag = ids[slot_video[pos]], True, int(slot_lag[pos])
            p = score_at_lag(curve, lag, clamp=True)
        else:
            vid, is_rep, lag, p = ids[slot_video[pos]], False, None, spec.false_alarm_rate
        presentations.append(Presentation(pos, vid, is_rep, lag, int(u[pos] < p)))
    return StreamSession(str(participant_id), tuple(presentations))


def simulate_sessions(spec: SimSpec, participant_ids: Sequence, session_length: int) -> AnnotationSet:
    """Target records pooled over several independent sessions."""
    parts = [simulate_stream_session(spec, pid, session_length).to_records() for pid in participant_ids]
    return AnnotationSet.from_columns(
        [r.video_ids[c] for r in parts for c in r.video_codes],
        [r.participant_ids[c] for r in parts for c in r.participant_codes],
        np.concatenate([r.lags for r in parts]),
        np.concatenate([r.responses for r in parts]),
    )

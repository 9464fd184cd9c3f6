"""Domain types and evaluation of linear decay curves.

A decay curve says how the probability of recognising a repeated video
falls off with lag (the number of videos shown between the two
presentations)::

    m(t) = m_T + alpha * (t - T)

``m_T`` is the recall probability at the reference lag ``T`` and ``alpha``
the per-lag slope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from memdecay.errors import EmptyInput, MemDecayError

#: Lag range covered by the original memory-game annotations.
STUDIED_LAG_RANGE = (9, 200)


@dataclass(frozen=True)
class AnnotationRecord:
    """One binary repeat-detection outcome."""

    video_id: str
    participant_id: str
    lag: int
    response: int

    def __post_init__(self):
        if int(self.lag) != self.lag or self.lag < 1:
            raise MemDecayError(f"lag must be a positive integer, got {self.lag!r}")
        if self.response not in (0, 1):
            raise MemDecayError(f"response must be 0 or 1, got {self.response!r}")


class AnnotationSet:
    """Columnar collection of annotation records.

    Holds integer codes into sorted ``video_ids`` / ``participant_ids``
    tables together with ``lags`` and ``responses`` arrays. Iterating
    yields :class:`AnnotationRecord` objects, but the numeric code paths
    work on the arrays directly.
    """

    __slots__ = ("video_ids", "participant_ids", "video_codes", "participant_codes", "lags", "responses")

    def __init__(self, video_ids, participant_ids, video_codes, participant_codes, lags, responses):
        self.video_ids = tuple(video_ids)
        self.participant_ids = tuple(participant_ids)
        self.video_codes = np.asarray(video_codes, dtype=np.int64)
        self.participant_codes = np.asarray(participant_codes, dtype=np.int64)
        self.lags = np.asarray(lags, dtype=np.int64)
        self.responses = np.asarray(responses, dtype=np.int64)
        n = self.lags.shape[0]
        for name in ("video_codes", "participant_codes", "responses"):
            if getattr(self, name).shape != (n,):
                raise MemDecayError(f"column {name} has shape {getattr(self, name).shape}, expected ({n},)")
        if n:
            if self.lags.min() < 1:
                raise MemDecayError("lag must be >= 1")
            if not np.isin(self.responses, (0, 1)).all():
                raise MemDecayError("response must be 0 or 1")

    @classmethod
    def from_columns(cls, video_id: Sequence[str], participant_id: Sequence[str], lag, response) -> AnnotationSet:
        vids, vcodes = np.unique(np.asarray(video_id, dtype=object).astype(str), return_inverse=True)
        pids, pcodes = np.unique(np.asarray(participant_id, dtype=object).astype(str), return_inverse=True)
        return cls(vids.tolist(), pids.tolist(), vcodes, pcodes, lag, response)

    @classmethod
    def from_records(cls, records: Iterable[AnnotationRecord]) -> AnnotationSet:
        records = list(records)
        return cls.from_columns(
            [r.video_id for r in records],
            [r.participant_id for r in records],
            np.array([r.lag for r in records], dtype=np.int64),
            np.array([r.response for r in records], dtype=np.int64),
        )

    def __len__(self) -> int:
        return int(self.lags.shape[0])

    def __iter__(self) -> Iterator[AnnotationRecord]:
        for v, p, t, x in zip(self.video_codes, self.participant_codes, self.lags, self.responses):
            yield AnnotationRecord(self.video_ids[v], self.participant_ids[p], int(t), int(x))

    def __eq__(self, other):
        if not isinstance(other, AnnotationSet):
            return NotImplemented
        return (
            self.video_ids == other.video_ids
            and self.participant_ids == other.participant_ids
            and np.array_equal(self.video_codes, other.video_codes)
            and np.array_equal(self.participant_codes, other.participant_codes)
            and np.array_equal(self.lags, other.lags)
            and np.array_equal(self.responses, other.responses)
        )

    def __repr__(self):
        return f"AnnotationSet(n_records={len(self)}, n_videos={len(self.video_ids)}, n_participants={len(self.participant_ids)})"

    def take(self, index) -> AnnotationSet:
        """Subset of rows; id tables are compacted to the ids still in use."""
        index = np.asarray(index)
        return AnnotationSet.from_columns(
            np.asarray(self.video_ids, dtype=object)[self.video_codes[index]],
            np.asarray(self.participant_ids, dtype=object)[self.participant_codes[index]],
            self.lags[index],
            self.responses[index],
        )

    def summary(self) -> dict:
        if not len(self):
            return {"n_records": 0, "n_videos": 0, "n_participants": 0, "lag_min": None, "lag_max": None}
        return {
            "n_records": len(self),
            "n_videos": len(np.unique(self.video_codes)),
            "n_participants": len(np.unique(self.participant_codes)),
            "lag_min": int(self.lags.min()),
            "lag_max": int(self.lags.max()),
            "hit_rate": float(self.responses.mean()),
        }


def as_annotations(records) -> AnnotationSet:
    if isinstance(records, AnnotationSet):
        return records
    return AnnotationSet.from_records(records)


def require_nonempty(records) -> AnnotationSet:
    annotations = as_annotations(records)
    if not len(annotations):
        raise EmptyInput("no annotation records")
    return annotations


@dataclass(frozen=True)
class DecayCurve:
    """Fitted linear decay curve of one video.

    ``m_T`` is stored unclamped; it may leave [0, 1] for extreme items.
    """

    m_T: float
    alpha: float
    ref_lag: int = 80
    n_annotations: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.m_T) and math.isfinite(self.alpha)):
            raise MemDecayError(f"non-finite curve parameters m_T={self.m_T!r} alpha={self.alpha!r}")
        if self.ref_lag < 1:
            raise MemDecayError(f"ref_lag must be >= 1, got {self.ref_lag}")
        if self.n_annotations < 1:
            raise MemDecayError(f"n_annotations must be >= 1, got {self.n_annotations}")

    @property
    def intercept(self) -> float:
        return base_memorability(self)

    def __call__(self, t, clamp: bool = False):
        return score_at_lag(self, t, clamp)


def score_at_lag(curve: DecayCurve, t, clamp: bool = False):
    """Recall probability of ``curve`` at lag ``t``.

    ``t`` may be a scalar or an array. With ``clamp`` the result is
    truncated into [0, 1].
    """
    if np.ndim(t) == 0:
        value = curve.m_T + curve.alpha * (t - curve.ref_lag)
        if clamp:
            value = min(1.0, max(0.0, value))
        return value
    t = np.asarray(t, dtype=np.float64)
    value = curve.m_T + curve.alpha * (t - curve.ref_lag)
    if clamp:
        value = np.clip(value, 0.0, 1.0)
    return value


def base_memorability(curve: DecayCurve) -> float:
    """Intercept of the decay line at lag 0 (not clamped)."""
    return curve.m_T - curve.alpha * curve.ref_lag


@dataclass(frozen=True)
class FitConfig:
    """Settings of the alternating least-squares fit.

    The defaults run exactly ten passes from ``alpha = -5e-4`` at reference
    lag 80. A positive ``convergence_tol`` turns ``iterations`` into an
    upper bound and stops once the parameters have settled.
    """

    ref_lag: int = 80
    alpha_init: float = -5e-4
    iterations: int = 10
    convergence_tol: float = 0.0

    def __post_init__(self):
        if self.ref_lag < 1:
            raise MemDecayError(f"ref_lag must be >= 1, got {self.ref_lag}")
        if self.iterations < 1:
            raise MemDecayError(f"iterations must be >= 1, got {self.iterations}")
        if not (self.convergence_tol >= 0):
            raise MemDecayError(f"convergence_tol must be >= 0, got {self.convergence_tol}")
        if not math.isfinite(self.alpha_init):
            raise MemDecayError("alpha_init must be finite")

    def to_dict(self) -> dict:
        return {
            "ref_lag": self.ref_lag,
            "alpha_init": self.alpha_init,
            "iterations": self.iterations,
            "convergence_tol": self.convergence_tol,
        }


@dataclass(frozen=True)
class VideoScoreTable(Mapping[str, DecayCurve]):
    """Ordered mapping ``video_id -> DecayCurve`` plus fit provenance."""

    curves: tuple[tuple[str, DecayCurve], ...]
    config: FitConfig | None = None
    source_digest: str | None = None
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        curves = tuple((str(k), v) for k, v in self.curves)
        object.__setattr__(self, "curves", curves)
        index = {k: v for k, v in curves}
        if len(index) != len(curves):
            seen, dupes = set(), set()
            for k, _ in curves:
                (dupes if k in seen else seen).add(k)
            raise MemDecayError(f"duplicate video_id(s): {', '.join(sorted(dupes))}")
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_mapping(cls, curves: Mapping[str, DecayCurve], **meta) -> VideoScoreTable:
        return cls(tuple(curves.items()), **meta)

    def __getitem__(self, video_id: str) -> DecayCurve:
        return self._index[video_id]

    def __iter__(self):
        return (k for k, _ in self.curves)

    def __len__(self):
        return len(self.curves)

    def video_ids(self) -> list[str]:
        return [k for k, _ in self.curves]

    def m_T(self) -> np.ndarray:
        return np.array([c.m_T for _, c in self.curves], dtype=np.float64)

    def alphas(self) -> np.ndarray:
        return np.array([c.alpha for _, c in self.curves], dtype=np.float64)

    def scores_at(self, t, clamp: bool = False, video_ids=None) -> np.ndarray:
        ids = self.video_ids() if video_ids is None else video_ids
        return np.array([score_at_lag(self[v], t, clamp) for v in ids], dtype=np.float64)

"""Evaluation statistics for memorability scores and decay curves."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from memdecay import kernels
from memdecay.core import STUDIED_LAG_RANGE, DecayCurve, VideoScoreTable, as_annotations, score_at_lag
from memdecay.errors import (
    InvalidRange,
    LengthMismatch,
    MissingVideos,
    TooFewItems,
    TooFewParticipants,
    ZeroVariance,
)

DEFAULT_EVAL_LAGS = (40, 80, 160)


@dataclass(frozen=True)
class EvalReport:
    rank_correlation: float
    r2_by_lag: dict[int, float]
    curve_mae: float
    n_videos: int
    score_lag: int = 80
    extrapolated_lags: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "rank_correlation": self.rank_correlation,
            "r2_by_lag": {str(k): v for k, v in sorted(self.r2_by_lag.items())},
            "curve_mae": self.curve_mae,
            "n_videos": self.n_videos,
            "score_lag": self.score_lag,
            "extrapolated_lags": list(self.extrapolated_lags),
        }


@dataclass(frozen=True)
class ConsistencyReport:
    mean_rho: float
    per_split_rho: tuple[float, ...]
    split_seed: int
    n_participants: int = 0
    dropped_per_split: tuple[int, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "mean_rho": self.mean_rho,
            "per_split_rho": list(self.per_split_rho),
            "split_seed": self.split_seed,
            "n_splits": len(self.per_split_rho),
            "n_participants": self.n_participants,
            "dropped_per_split": list(self.dropped_per_split),
        }


def _paired(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise LengthMismatch("inputs must be one-dimensional")
    if a.shape != b.shape:
        raise LengthMismatch(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] < 2:
        raise TooFewItems(f"need at least 2 paired items, got {a.shape[0]}")
    return a, b


def _correlate(a, b):
    da = a - a.mean()
    db = b - b.mean()
    saa = np.dot(da, da)
    sbb = np.dot(db, db)
    if saa == 0.0 or sbb == 0.0:
        raise ZeroVariance("correlation undefined: an input is constant")
    r = np.dot(da, db) / np.sqrt(saa * sbb)
    return float(min(1.0, max(-1.0, r)))


def pearson_r(a, b) -> float:
    a, b = _paired(a, b)
    return _correlate(a, b)


def spearman_rc(a, b) -> float:
    """Spearman rank correlation with average ranks for ties."""
    a, b = _paired(a, b)
    return _correlate(kernels.midranks(a), kernels.midranks(b))


def r_squared(truth, pred) -> float:
    """Coefficient of determination ``1 - SS_res / SS_tot``; may be negative."""
    truth, pred = _paired(truth, pred)
    resid = truth - pred
    centred = truth - truth.mean()
    ss_tot = np.dot(centred, centred)
    if ss_tot == 0.0:
        raise ZeroVariance("R^2 undefined: truth is constant")
    return float(1.0 - np.dot(resid, resid) / ss_tot)


def curve_grid(lag_lo: float = 40, lag_hi: float = 180, n_samples: int = 100) -> np.ndarray:
    if not lag_lo < lag_hi:
        raise InvalidRange(f"need lag_lo < lag_hi, got [{lag_lo}, {lag_hi}]")
    if n_samples < 2:
        raise InvalidRange(f"need n_samples >= 2, got {n_samples}")
    return np.linspace(lag_lo, lag_hi, int(n_samples))


def curve_mae(
    truth: DecayCurve, pred: DecayCurve, lag_lo: float = 40, lag_hi: float = 180, n_samples: int = 100
) -> float:
    """Mean absolute gap between two curves on an evenly spaced lag grid.

    The gap between two lines is itself a line, so it is formed from the
    parameter differences. Where it keeps one sign over the grid its mean
    is its value at the grid midpoint; otherwise the grid is summed.
    """
    grid = curve_grid(lag_lo, lag_hi, n_samples)
    T = truth.ref_lag
    d_level = truth.m_T - score_at_lag(pred, T)
    d_slope = truth.alpha - pred.alpha
    ends = d_level + d_slope * (grid[[0, -1]] - T)
    if ends[0] * ends[1] >= 0:
        return abs(float(d_level + d_slope * (0.5 * (grid[0] + grid[-1]) - T)))
    return float(np.mean(np.abs(d_level + d_slope * (grid - T))))


def evaluate_predictions(
    truth: VideoScoreTable,
    pred: VideoScoreTable,
    eval_lags=DEFAULT_EVAL_LAGS,
    score_lag: int = 80,
    mae_range: tuple[float, float, int] = (40, 180, 100),
) -> EvalReport:
    """Compare predicted curves against ground truth.

    Rank correlation uses each curve's score at ``score_lag``; R^2 compares
    unclamped curve values at every lag in ``eval_lags``; curve MAE is
    averaged over videos.
    """
    missing = [v for v in pred if v not in truth]
    if missing:
        raise MissingVideos(missing)
    ids = pred.video_ids()
    if len(ids) < 2:
        raise TooFewItems(f"need at least 2 predicted videos, got {len(ids)}")
    t_scores = truth.scores_at(score_lag, video_ids=ids)
    p_scores = pred.scores_at(score_lag, video_ids=ids)
    lags = sorted({int(t) for t in eval_lags})
    r2 = {t: r_squared(truth.scores_at(t, video_ids=ids), pred.scores_at(t, video_ids=ids)) for t in lags}
    grid = curve_grid(*mae_range)
    t_curves = np.stack([score_at_lag(truth[v], grid) for v in ids])
    p_curves = np.stack([score_at_lag(pred[v], grid) for v in ids])
    per_video_mae = np.mean(np.abs(t_curves - p_curves), axis=1)
    lo, hi = STUDIED_LAG_RANGE
    outside = tuple(t for t in sorted(set(lags) | {score_lag}) if t < lo or t > hi)
    return EvalReport(
        rank_correlation=spearman_rc(t_scores, p_scores),
        r2_by_lag=r2,
        curve_mae=float(per_video_mae.mean()),
        n_videos=len(ids),
        score_lag=score_lag,
        extrapolated_lags=outside,
    )


def hit_rates(annotations, mask=None) -> tuple[np.ndarray, np.ndarray]:
    """Per-video raw hit rate and annotation count, optionally over a row mask."""
    annotations = as_annotations(annotations)
    n_videos = len(annotations.video_ids)
    codes = annotations.video_codes
    x = annotations.responses
    if mask is not None:
        codes = codes[mask]
        x = x[mask]
    counts = np.bincount(codes, minlength=n_videos)
    hits = np.bincount(codes, weights=x, minlength=n_videos)
    with np.errstate(invalid="ignore", divide="ignore"):
        return hits / counts, counts


def _split_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def split_half_consistency(records, n_splits: int = 25, seed: int = 0) -> ConsistencyReport:
    """Human consistency from random halves of the participant pool.

    For every split the participants are shuffled and cut into two halves
    (the first half takes the extra participant when the count is odd);
    videos are ranked by raw hit rate within each half and the two rankings
    are Spearman-correlated. Videos lacking annotations in either half are
    left out of that split and counted in ``dropped_per_split``. Split ``i``
    draws from its own RNG stream derived from ``(seed, i)``.
    """
    annotations = as_annotations(records)
    participants = np.unique(annotations.participant_codes)
    n_part = len(participants)
    if n_part < 2:
        raise TooFewParticipants(f"need at least 2 participants, got {n_part}")
    if n_splits < 1:
        raise TooFewItems("n_splits must be >= 1")
    first_size = (n_part + 1) // 2
    n_codes = len(annotations.participant_ids)
    rhos, dropped = [], []
    for i in range(n_splits):
        perm = _split_rng(seed, i).permutation(participants)
        in_first = np.zeros(n_codes, dtype=bool)
        in_first[perm[:first_size]] = True
        row_first = in_first[annotations.participant_codes]
        rate_a, n_a = hit_rates(annotations, row_first)
        rate_b, n_b = hit_rates(annotations, ~row_first)
        present = (n_a + n_b) > 0
        usable = (n_a > 0) & (n_b > 0)
        dropped.append(int(np.count_nonzero(present & ~usable)))
        try:
            rhos.append(spearman_rc(rate_a[usable], rate_b[usable]))
        except (ZeroVariance, TooFewItems) as exc:
            raise type(exc)(f"split {i}: {exc}") from exc
    return ConsistencyReport(
        mean_rho=float(np.mean(rhos)),
        per_split_rho=tuple(rhos),
        split_seed=seed,
        n_participants=n_part,
        dropped_per_split=tuple(dropped),
    )

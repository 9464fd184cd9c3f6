"""Aggregate views of raw annotations: hit rate against lag.

Lags are integers, so binning spans ``[min_lag - 0.5, max_lag + 0.5]``:
each bin covers whole lag values and, when there are as many bins as
distinct lags, every bin centre is an actual lag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from memdecay.core import VideoScoreTable, require_nonempty
from memdecay.errors import InvalidRange, MissingScores, TooFewBins
from memdecay.metrics import pearson_r

GROUPING = "quantiles of raw m_T (score at the reference lag)"
TIE_BREAK = "video_id ascending"


@dataclass(frozen=True)
class BinnedRates:
    """Mean hit rate per (group, lag bin); empty cells carry ``mean = nan``."""

    group: np.ndarray
    lag_bin_center: np.ndarray
    mean_hit_rate: np.ndarray
    n: np.ndarray
    metadata: dict

    def rows(self):
        for g, c, m, n in zip(self.group, self.lag_bin_center, self.mean_hit_rate, self.n):
            yield int(g), float(c), (None if n == 0 else float(m)), int(n)

    def __len__(self):
        return len(self.n)


def bin_lags(lags: np.ndarray, n_bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Assign each lag to one of ``n_bins`` equal-width bins.

    Returns ``(bin_index, bin_centres)``.
    """
    if n_bins < 1:
        raise InvalidRange(f"lag_bins must be >= 1, got {n_bins}")
    lo = float(lags.min()) - 0.5
    hi = float(lags.max()) + 0.5
    width = (hi - lo) / n_bins
    idx = np.floor((lags - lo) / width).astype(np.int64)
    np.clip(idx, 0, n_bins - 1, out=idx)
    centres = lo + (np.arange(n_bins) + 0.5) * width
    return idx, centres


def _aggregate(group_idx, bin_idx, responses, n_groups, n_bins):
    cell = group_idx * n_bins + bin_idx
    n = np.bincount(cell, minlength=n_groups * n_bins)
    hits = np.bincount(cell, weights=responses, minlength=n_groups * n_bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(n > 0, hits / n, np.nan)
    return mean, n


def group_videos(scores: VideoScoreTable, video_ids, n_groups: int) -> dict[str, int]:
    """Split videos into ``n_groups`` quantile groups by score, lowest = 0.

    Group sizes differ by at most one; the larger groups are the lowest.
    Equal scores are ordered by video id.
    """
    ordered = sorted(video_ids, key=lambda v: (scores[v].m_T, v))
    groups = np.array_split(np.arange(len(ordered)), n_groups)
    return {ordered[i]: g for g, members in enumerate(groups) for i in members}


def decile_curves(records, scores: VideoScoreTable, n_groups: int = 10, lag_bins: int = 20) -> BinnedRates:
    """Hit rate against lag for memorability quantile groups of videos."""
    annotations = require_nonempty(records)
    if n_groups < 2:
        raise InvalidRange(f"n_groups must be >= 2, got {n_groups}")
    if lag_bins < 1:
        raise InvalidRange(f"lag_bins must be >= 1, got {lag_bins}")
    used = np.unique(annotations.video_codes)
    vids = [annotations.video_ids[c] for c in used]
    missing = [v for v in vids if v not in scores]
    if missing:
        raise MissingScores(missing)
    if len(vids) < n_groups:
        raise InvalidRange(f"{len(vids)} videos cannot fill {n_groups} groups")
    assignment = group_videos(scores, vids, n_groups)
    code_group = np.full(len(annotations.video_ids), -1, dtype=np.int64)
    for c, v in zip(used, vids):
        code_group[c] = assignment[v]
    bin_idx, centres = bin_lags(annotations.lags, lag_bins)
    mean, n = _aggregate(code_group[annotations.video_codes], bin_idx, annotations.responses, n_groups, lag_bins)
    sizes = np.bincount(np.fromiter(assignment.values(), dtype=np.int64), minlength=n_groups)
    return BinnedRates(
        group=np.repeat(np.arange(n_groups), lag_bins),
        lag_bin_center=np.tile(centres, n_groups),
        mean_hit_rate=mean,
        n=n,
        metadata={
            "grouping": GROUPING,
            "tie_break": TIE_BREAK,
            "n_groups": n_groups,
            "lag_bins": lag_bins,
            "group_sizes": sizes.tolist(),
        },
    )


def pooled_rates(records, lag_bins: int = 20) -> BinnedRates:
    """Hit rate against lag pooled over every video."""
    annotations = require_nonempty(records)
    bin_idx, centres = bin_lags(annotations.lags, lag_bins)
    mean, n = _aggregate(np.zeros(len(annotations), dtype=np.int64), bin_idx, annotations.responses, 1, lag_bins)
    return BinnedRates(
        group=np.zeros(lag_bins, dtype=np.int64),
        lag_bin_center=centres,
        mean_hit_rate=mean,
        n=n,
        metadata={"lag_bins": lag_bins},
    )


def trend_correlations(centres, rates) -> tuple[float, float]:
    """Pearson r of rate against lag and against log(lag)."""
    centres = np.asarray(centres, dtype=np.float64)
    rates = np.asarray(rates, dtype=np.float64)
    if len(centres) < 3:
        raise TooFewBins(f"need at least 3 non-empty lag bins, got {len(centres)}")
    return pearson_r(centres, rates), pearson_r(np.log(centres), rates)


@dataclass(frozen=True)
class TrendComparison:
    r_linear: float
    r_loglinear: float
    table: BinnedRates

    @property
    def linear_preferred(self) -> bool:
        return abs(self.r_linear) > abs(self.r_loglinear)


def compare_trend_fits(records, lag_bins: int = 20) -> TrendComparison:
    """Is pooled hit rate closer to linear or to log-linear in lag?

    Empty bins are skipped.
    """
    table = pooled_rates(records, lag_bins)
    keep = table.n > 0
    r_lin, r_log = trend_correlations(table.lag_bin_center[keep], table.mean_hit_rate[keep])
    return TrendComparison(r_lin, r_log, table)

"""Per-video decay-curve fitting.

Each video's ``(alpha, m_T)`` minimises the squared error between its binary
responses and the line ``m_T + alpha * (lag - T)``. The minimisation
alternates the two closed-form coordinate updates (slope first, then level)
starting from ``alpha_init`` and the video's mean hit rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from memdecay import kernels
from memdecay.core import DecayCurve, FitConfig, VideoScoreTable, require_nonempty
from memdecay.errors import MemDecayError


@dataclass(frozen=True)
class FitTrace:
    """Parameter history of one fit.

    Row 0 is the starting point; row ``k`` is the state after pass ``k``.
    ``sse`` is the residual sum of squares at each row.
    """

    alpha: np.ndarray
    m_T: np.ndarray
    sse: np.ndarray

    @property
    def passes(self) -> int:
        return len(self.alpha) - 1

    def __len__(self):
        return len(self.alpha)


def _moments(annotations, ref_lag):
    return kernels.group_moments(
        annotations.video_codes, annotations.lags, annotations.responses, ref_lag, len(annotations.video_ids)
    )


def fit_video(records, cfg: FitConfig = FitConfig()) -> tuple[DecayCurve, FitTrace]:
    """Fit one video's decay curve.

    Raises
    ------
    EmptyInput
        If ``records`` is empty.
    MemDecayError
        If the records belong to more than one video.
    """
    annotations = require_nonempty(records)
    if len(annotations.video_ids) != 1:
        raise MemDecayError(f"fit_video expects one video, got {len(annotations.video_ids)}")
    mom = _moments(annotations, cfg.ref_lag)[0]
    rows = kernels.trace(mom, cfg.alpha_init, cfg.iterations, cfg.convergence_tol)
    trace = FitTrace(alpha=rows[:, 0].copy(), m_T=rows[:, 1].copy(), sse=rows[:, 2].copy())
    curve = DecayCurve(
        m_T=float(rows[-1, 1]), alpha=float(rows[-1, 0]), ref_lag=cfg.ref_lag, n_annotations=int(mom[kernels.N])
    )
    return curve, trace


def fit_all(records, cfg: FitConfig = FitConfig(), source_digest: str | None = None) -> VideoScoreTable:
    """Fit every video independently; output is sorted by video id."""
    annotations = require_nonempty(records)
    moments = _moments(annotations, cfg.ref_lag)
    alpha, m_T, _ = kernels.descend(moments, cfg.alpha_init, cfg.iterations, cfg.convergence_tol)
    curves = []
    for i, vid in enumerate(annotations.video_ids):
        n = int(moments[i, kernels.N])
        if n == 0:
            continue
        curves.append((vid, DecayCurve(float(m_T[i]), float(alpha[i]), cfg.ref_lag, n)))
    curves.sort(key=lambda kv: kv[0])
    return VideoScoreTable(tuple(curves), config=cfg, source_digest=source_digest)


def ols_reference(records, ref_lag: int = 80) -> DecayCurve:
    """Closed-form least-squares line of response on ``lag - ref_lag``.

    Independent of the iterative fit; used to check it. When every record
    has the same lag the slope is set to zero.
    """
    annotations = require_nonempty(records)
    d = annotations.lags.astype(np.float64) - ref_lag
    x = annotations.responses.astype(np.float64)
    x_bar = x.mean()
    if annotations.lags.min() == annotations.lags.max():
        return DecayCurve(float(x_bar), 0.0, ref_lag, len(annotations))
    d_bar = d.mean()
    dc = d - d_bar
    alpha = float(np.dot(dc, x - x_bar) / np.dot(dc, dc))
    return DecayCurve(float(x_bar - alpha * d_bar), alpha, ref_lag, len(annotations))


def alternate_once(records, alpha: float, m_T: float, ref_lag: int = 80) -> tuple[float, float]:
    """Apply one slope-then-level update pass starting from ``(alpha, m_T)``."""
    annotations = require_nonempty(records)
    if len(annotations.video_ids) != 1:
        raise MemDecayError(f"alternate_once expects one video, got {len(annotations.video_ids)}")
    mom = _moments(annotations, ref_lag)[0]
    return kernels.single_pass(mom, alpha, m_T)


def residual_sse(records, m_T: float, alpha: float, ref_lag: int = 80) -> float:
    """Residual sum of squares, summed record by record."""
    annotations = require_nonempty(records)
    r = annotations.responses - (m_T + alpha * (annotations.lags - ref_lag))
    return float(np.dot(r, r))

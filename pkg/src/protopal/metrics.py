"""Discrimination metrics: ROC AUC and Harrell's concordance index."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from .errors import MetricError


def auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Probability a positive outscores a negative, ties counted half.

    Mann-Whitney form: average ranks make tied scores contribute 0.5 per pair.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise MetricError("scores and labels must be 1-D arrays of equal length")
    if not np.isfinite(scores).all():
        raise MetricError("scores contain non-finite values")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("AUC needs at least one positive and one negative")
    ranks = rankdata(scores)
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def c_index(scores: np.ndarray, event_times: np.ndarray, censored: np.ndarray) -> float:
    """Harrell's C over comparable pairs.

    Pair (i, j) is comparable when i's event is observed (not censored) and
    strictly earlier than j's recorded time. Concordant when the earlier
    event carries the higher score; score ties count half.
    """
    scores = np.asarray(scores, dtype=np.float64)
    times = np.asarray(event_times, dtype=np.float64)
    cens = np.asarray(censored).astype(bool)
    if not scores.shape == times.shape == cens.shape or scores.ndim != 1:
        raise MetricError("scores, event times and censor flags must be 1-D arrays of equal length")
    if not np.isfinite(scores).all() or not np.isfinite(times).all():
        raise MetricError("scores and event times must be finite")

    concordant = 0.0
    comparable = 0
    n = scores.size
    chunk = 512
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        mask = (~cens[start:stop])[:, None] & (times[start:stop, None] < times[None, :])
        comparable += int(mask.sum())
        s_i = scores[start:stop, None]
        concordant += float((mask & (s_i > scores[None, :])).sum())
        concordant += 0.5 * float((mask & (s_i == scores[None, :])).sum())
    if comparable == 0:
        raise MetricError("no comparable pairs for concordance index")
    return concordant / comparable

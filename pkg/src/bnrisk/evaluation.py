"""Validation through classification: scoring, thresholds, AUC, calibration.

The network scores a row as p(target state | every other variable in the
row); a score at or above the threshold predicts the positive class. The
decision threshold is picked to maximize the G-mean (geometric mean of
sensitivity and specificity), the standard objective for heavily imbalanced
screening problems. Calibration uses equal-count (quantile) bins.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .data import Dataset
from .inference import JOINT_STATE_LIMIT, JointTable, query
from .model import BayesianNetwork

FORMAT_VERSION = "1.0"


class DegenerateLabelsError(ValueError):
    """Both classes are required for threshold selection and AUC."""


@dataclass(frozen=True)
class ScoredPredictions:
    """Per-row true labels and network scores; excluded rows are counted."""

    labels: np.ndarray  # (n,) uint8 in {0,1}
    scores: np.ndarray  # (n,) float64 in [0,1]
    excluded_rows: tuple[int, ...] = ()

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
        scores = np.ascontiguousarray(self.scores, dtype=np.float64)
        if labels.shape != scores.shape or labels.ndim != 1:
            raise ValueError("labels and scores must be equal-length vectors")
        if labels.size and (scores.min() < 0.0 or scores.max() > 1.0):
            raise ValueError("scores must lie in [0, 1]")
        if np.any(labels > 1):
            raise ValueError("labels must be 0 or 1")
        labels.setflags(write=False)
        scores.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "scores", scores)

    @property
    def n_rows(self) -> int:
        return int(self.labels.size)


@dataclass(frozen=True)
class ConfusionMatrix:
    tn: int
    fp: int
    fn: int
    tp: int

    @property
    def sensitivity(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else float("nan")

    @property
    def specificity(self) -> float:
        d = self.tn + self.fp
        return self.tn / d if d else float("nan")

    @property
    def g_mean(self) -> float:
        return math.sqrt(self.sensitivity * self.specificity)

    @property
    def total(self) -> int:
        return self.tn + self.fp + self.fn + self.tp


def score_dataset(
    net: BayesianNetwork, data: Dataset, target: str, target_state: int | str
) -> ScoredPredictions:
    """Score each row as p(target state | the row's other variables).

    Rows whose evidence has probability zero under the network cannot be
    conditioned on; they are excluded and reported, never silently dropped.
    """
    schema = net.schema
    if data.schema != schema:
        raise ValueError("dataset schema does not match the network")
    if not data.is_complete():
        raise ValueError("scoring requires complete rows")
    ts = schema.state_index(target, target_state) if isinstance(target_state, str) else int(target_state)
    t_idx = schema.index(target)
    labels_all = (data.codes[:, t_idx] == ts).astype(np.uint8)

    if net.joint_size() <= JOINT_STATE_LIMIT:
        jt = JointTable(net)
        mass, p_ev = jt.row_scores(data.codes, target)
        ok = p_ev > 0.0
        with np.errstate(invalid="ignore", divide="ignore"):
            scores = mass[:, ts] / p_ev
        excluded = tuple(int(i) for i in np.nonzero(~ok)[0])
        return ScoredPredictions(labels_all[ok], np.clip(scores[ok], 0.0, 1.0), excluded)

    scores_list: list[float] = []
    labels_list: list[int] = []
    excluded_list: list[int] = []
    names = schema.names
    for i, row in enumerate(data.codes):
        ev = {n: int(v) for n, v in zip(names, row) if n != target}
        try:
            res = query(net, ev, target)
        except Exception:
            excluded_list.append(i)
            continue
        scores_list.append(float(res.distribution[ts]))
        labels_list.append(int(labels_all[i]))
    return ScoredPredictions(
        np.asarray(labels_list, dtype=np.uint8),
        np.clip(np.asarray(scores_list, dtype=np.float64), 0.0, 1.0),
        tuple(excluded_list),
    )


def confusion_at(preds: ScoredPredictions, threshold: float) -> ConfusionMatrix:
    """Counts under the inclusive rule: score >= threshold predicts positive."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    pred_pos = preds.scores >= threshold
    pos = preds.labels == 1
    tp = int(np.count_nonzero(pred_pos & pos))
    fp = int(np.count_nonzero(pred_pos & ~pos))
    fn = int(np.count_nonzero(~pred_pos & pos))
    tn = int(np.count_nonzero(~pred_pos & ~pos))
    return ConfusionMatrix(tn=tn, fp=fp, fn=fn, tp=tp)


@dataclass(frozen=True)
class ThresholdSelection:
    threshold: float
    g_mean: float
    degenerate: bool  # no threshold separates anything (G-mean 0 everywhere)


def select_threshold_gmean(preds: ScoredPredictions) -> ThresholdSelection:
    """Pick the G-mean-maximizing threshold from the finite candidate set.

    Candidates are the midpoints of consecutive distinct scores plus {0, 1}.
    Ties in G-mean break toward higher specificity, then higher threshold.
    """
    n_pos = int(np.count_nonzero(preds.labels == 1))
    n_neg = preds.n_rows - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabelsError("degenerate labels: both classes are required")
    order = np.argsort(preds.scores, kind="stable")
    s = preds.scores[order]
    l = preds.labels[order].astype(np.int64)
    uniq = np.unique(s)
    candidates = np.concatenate([[0.0], (uniq[:-1] + uniq[1:]) / 2.0, [1.0]])
    # rows j.. predict positive at threshold t when s[j] is the first >= t
    split = np.searchsorted(s, candidates, side="left")
    prefix_pos = np.concatenate([[0], np.cumsum(l)])
    tp = n_pos - prefix_pos[split]
    fp = (preds.n_rows - split) - tp
    sens = tp / n_pos
    spec = (n_neg - fp) / n_neg
    g = np.sqrt(sens * spec)
    idx = int(np.lexsort((candidates, spec, g))[-1])
    return ThresholdSelection(
        threshold=float(candidates[idx]), g_mean=float(g[idx]), degenerate=bool(g[idx] == 0.0)
    )


def auc(preds: ScoredPredictions) -> float:
    """Rank-based (Mann-Whitney) AUC with tie correction."""
    pos = preds.labels == 1
    n_pos = int(np.count_nonzero(pos))
    n_neg = preds.n_rows - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabelsError("degenerate labels: both classes are required")
    ranks = rankdata(preds.scores)  # average ranks resolve ties
    r_pos = ranks[pos].sum()
    return float((r_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass(frozen=True)
class CalibrationBin:
    mean_score: float
    positive_rate: float
    count: int


@dataclass(frozen=True)
class CalibrationCurve:
    bins: tuple[CalibrationBin, ...]


def calibration_curve(preds: ScoredPredictions, n_bins: int) -> CalibrationCurve:
    """Equal-count calibration bins ordered by score.

    Rows sort by score (stable) and split into ``n_bins`` bins whose counts
    differ by at most one; when the division is uneven the extra rows go to
    the lowest-score bins.
    """
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    if n_bins > preds.n_rows:
        raise ValueError("more bins than rows")
    order = np.argsort(preds.scores, kind="stable")
    scores = preds.scores[order]
    labels = preds.labels[order]
    base, extra = divmod(preds.n_rows, n_bins)
    bins = []
    start = 0
    for b in range(n_bins):
        size = base + (1 if b < extra else 0)
        sl = slice(start, start + size)
        bins.append(
            CalibrationBin(
                mean_score=float(scores[sl].mean()),
                positive_rate=float(labels[sl].mean()),
                count=size,
            )
        )
        start += size
    return CalibrationCurve(tuple(bins))


def metrics_report(
    preds: ScoredPredictions,
    threshold: float,
    threshold_source: str,
    n_bins: int = 10,
    degenerate_threshold: bool = False,
) -> dict:
    """Versioned metrics document: confusion, G-mean, AUC, calibration."""
    cm = confusion_at(preds, threshold)
    curve = calibration_curve(preds, min(n_bins, max(2, preds.n_rows)))
    return {
        "format": "bnrisk-metrics",
        "format_version": FORMAT_VERSION,
        "n_rows": preds.n_rows,
        "excluded_rows": list(preds.excluded_rows),
        "threshold": {
            "value": threshold,
            "source": threshold_source,
            "degenerate": degenerate_threshold,
        },
        "confusion": {"tn": cm.tn, "fp": cm.fp, "fn": cm.fn, "tp": cm.tp},
        "sensitivity": cm.sensitivity,
        "specificity": cm.specificity,
        "g_mean": cm.g_mean,
        "auc": auc(preds),
        "calibration": {
            "n_bins": len(curve.bins),
            "bins": [
                {"mean_score": b.mean_score, "positive_rate": b.positive_rate, "count": b.count}
                for b in curve.bins
            ],
        },
    }


def metrics_summary(report: dict) -> str:
    out = io.StringIO()
    cm = report["confusion"]
    out.write(
        f"rows {report['n_rows']} (excluded {len(report['excluded_rows'])}), "
        f"threshold {report['threshold']['value']:.6g} ({report['threshold']['source']})\n"
    )
    out.write(f"confusion tn={cm['tn']} fp={cm['fp']} fn={cm['fn']} tp={cm['tp']}\n")
    out.write(
        f"sensitivity {report['sensitivity']:.3f}  specificity {report['specificity']:.3f}  "
        f"g-mean {report['g_mean']:.3f}  auc {report['auc']:.3f}\n"
    )
    out.write("calibration (mean score -> positive rate, count):\n")
    for b in report["calibration"]["bins"]:
        out.write(f"  {b['mean_score']:.4f} -> {b['positive_rate']:.4f}  n={b['count']}\n")
    return out.getvalue()

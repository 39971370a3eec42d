"""Task metrics: accuracy, thresholded P/R/F1, ROC-AUC, PR curves, exports.

All functions are pure and permutation-invariant in their input order.
Zero-denominator conventions: precision is 0 with no positive predictions,
recall is 0 with no positives present, F1 is 0 when precision + recall is.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import rankdata


class LengthMismatch(Exception):
    pass


class OneClassOnly(Exception):
    pass


@dataclass(frozen=True)
class ScoredPair:
    score: float
    label: int  # +1 or -1


def accuracy(predictions: Sequence, labels: Sequence) -> float:
    if len(predictions) != len(labels) or len(labels) == 0:
        raise LengthMismatch(
            f"{len(predictions)} predictions vs {len(labels)} labels")
    hits = sum(1 for p, y in zip(predictions, labels) if p == y)
    return hits / len(labels)


def binary_metrics(pairs: Sequence[ScoredPair],
                   threshold: float = 0.0) -> dict[str, float]:
    """Precision/recall/F1 with positives predicted at score > threshold."""
    if not pairs:
        raise LengthMismatch("no scored pairs")
    tp = fp = fn = 0
    for p in pairs:
        predicted = p.score > threshold
        if predicted and p.label > 0:
            tp += 1
        elif predicted:
            fp += 1
        elif p.label > 0:
            fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    return {"precision": precision, "recall": recall, "f1": f1}


def roc_auc(pairs: Sequence[ScoredPair]) -> float:
    """Rank-based (Mann-Whitney) AUC with midranks for tied scores."""
    labels = np.array([p.label for p in pairs])
    scores = np.array([p.score for p in pairs])
    n_pos = int((labels > 0).sum())
    n_neg = int((labels <= 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise OneClassOnly(f"{n_pos} positives, {n_neg} negatives")
    ranks = rankdata(scores)
    pos_rank_sum = ranks[labels > 0].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def pr_curve(pairs: Sequence[ScoredPair]) -> list[tuple[float, float]]:
    """(recall, precision) points, one per distinct score threshold.

    Thresholds sweep the distinct scores descending; each point counts
    every pair scoring at or above the threshold as predicted positive,
    so the final point has recall 1 and precision equal to prevalence.
    """
    labels = np.array([p.label for p in pairs])
    scores = np.array([p.score for p in pairs])
    n_pos = int((labels > 0).sum())
    if n_pos == 0:
        raise OneClassOnly("no positive pairs")
    order = np.argsort(-scores, kind="stable")
    scores = scores[order]
    positives = (labels[order] > 0).astype(np.int64)
    tp = np.cumsum(positives)
    predicted = np.arange(1, len(pairs) + 1)
    # Keep only the last index of each run of equal scores.
    boundary = np.ones(len(pairs), dtype=bool)
    boundary[:-1] = scores[:-1] != scores[1:]
    points = [(float(tp[i] / n_pos), float(tp[i] / predicted[i]))
              for i in np.nonzero(boundary)[0]]
    return points


def precision_at_recall(pairs: Sequence[ScoredPair], target: float) -> float:
    """Best precision among curve points whose recall reaches the target.

    Interpolation-free and conservative: the maximum precision over points
    with recall >= target, hence non-increasing in the target.
    """
    candidates = [p for r, p in pr_curve(pairs) if r >= target]
    return max(candidates) if candidates else 0.0


def export_distributions(pairs: Sequence[ScoredPair],
                         bins: int = 40) -> dict:
    """Histogram of scores over [-1, 1] per label class (plot-ready)."""
    edges = np.linspace(-1.0, 1.0, bins + 1)
    out: dict = {"bin_edges": edges.tolist()}
    for name, sign in (("positive", 1), ("negative", -1)):
        scores = np.clip([p.score for p in pairs if p.label == sign], -1.0, 1.0)
        counts, _ = np.histogram(scores, bins=edges)
        out[name] = counts.tolist()
    return out


def metrics_report(pairs: Sequence[ScoredPair], *, task: str, variant: str,
                   seed: int,
                   recall_targets: Sequence[float] = (0.8, 0.9, 0.95, 0.99),
                   ) -> dict:
    """Assembled clone-task metrics block for JSON output."""
    report = {
        "task": task,
        "variant": variant,
        "seed": seed,
        **binary_metrics(pairs),
        "roc_auc": roc_auc(pairs),
        "p_at_r": {str(t): precision_at_recall(pairs, t)
                   for t in recall_targets},
        "pr_curve": [[r, p] for r, p in pr_curve(pairs)],
    }
    return report


def embedding_lines(records: Iterable[tuple[object, object, Sequence[float]]]) -> str:
    """JSON-lines export of (id, label, vector) records."""
    lines = []
    for rid, label, vector in records:
        lines.append(json.dumps(
            {"id": rid, "label": label, "vector": list(map(float, vector))},
            sort_keys=False, separators=(",", ":")))
    return "\n".join(lines) + ("\n" if lines else "")

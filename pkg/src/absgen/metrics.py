"""Verification metrics and evaluation protocols.

ROC AUC treats label 1 (different pair) as the positive class, so a
useful scorer emits larger values for different pairs. Two independent
AUC routes are kept side by side: the Mann-Whitney rank form is the
production path and the explicit trapezoid ROC integration exists solely
to cross-check it. Do not collapse them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from absgen import pairs as P
from absgen.corruptions import apply_corruption
from absgen.datasets import LabeledDataset
from absgen.errors import ContractError


def _check_binary(labels):
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if not np.all(np.isin(classes, (0, 1))):
        raise ContractError(f"labels must be 0/1, got values {classes.tolist()}")
    return labels


def roc_auc(scores, labels) -> float:
    """Concordant-pair probability via average ranks; ties count half."""
    scores = np.asarray(scores, float)
    labels = _check_binary(labels)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise ContractError("roc_auc needs both classes present")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    ranks[order] = np.arange(1, len(scores) + 1)
    # average the ranks inside each tie group
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        if j > i:
            ranks[order[i : j + 1]] = 0.5 * (i + 1 + j + 1)
        i = j + 1
    rank_sum = float(np.sum(ranks[labels == 1]))
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def roc_auc_trapezoid(scores, labels) -> float:
    """Independent oracle: build the ROC curve and integrate it.

    Sweeps thresholds across distinct scores, collecting (FPR, TPR)
    vertices, and applies the trapezoid rule. Tied scores move along a
    diagonal segment whose trapezoid equals the half-credit convention.
    """
    scores = np.asarray(scores, float)
    labels = _check_binary(labels)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise ContractError("roc_auc needs both classes present")
    order = np.argsort(-scores, kind="mergesort")
    tps = fps = 0
    points = [(0.0, 0.0)]
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        for k in range(i, j + 1):
            if labels[order[k]] == 1:
                tps += 1
            else:
                fps += 1
        points.append((fps / n_neg, tps / n_pos))
        i = j + 1
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def f1(preds, labels) -> float:
    """Harmonic mean of precision and recall; 0 when P + R = 0."""
    preds = _check_binary(preds)
    labels = _check_binary(labels)
    if len(preds) != len(labels):
        raise ContractError(f"{len(preds)} predictions vs {len(labels)} labels")
    if len(preds) == 0:
        raise ContractError("f1 needs at least one prediction")
    tp = int(np.sum((preds == 1) & (labels == 1)))
    fp = int(np.sum((preds == 1) & (labels == 0)))
    fn = int(np.sum((preds == 0) & (labels == 1)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass
class EvalReport:
    metric: str
    values: list = field(default_factory=list)
    config_fingerprint: str = ""

    @property
    def runs(self) -> int:
        return len(self.values)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def std(self) -> float:
        # population std (denominator R), matching the report contract
        return float(np.std(self.values))

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "values": [float(v) for v in self.values],
            "mean": self.mean,
            "std": self.std,
            "runs": self.runs,
            "config_fingerprint": self.config_fingerprint,
        }


def evaluate_pairs(scorer, probe_ds: LabeledDataset, corruption: str, *,
                   n_pairs: int = 2000, runs: int = 10, threshold: float = 0.5,
                   seed: int = 0, balance: float = 0.5, fingerprint: str = ""):
    """AUC and F1 of a pair scorer on corrupted probe data.

    Each run r corrupts the probe samples and samples pairs with fresh
    streams derived from (seed, r). ``scorer(a, b)`` returns one score per
    pair, larger meaning more likely different; F1 thresholds the scores
    at ``threshold``.
    """
    if runs < 1:
        raise ContractError(f"runs must be >= 1, got {runs}")
    auc_report = EvalReport(metric="auc", config_fingerprint=fingerprint)
    f1_report = EvalReport(metric="f1", config_fingerprint=fingerprint)
    for run in range(runs):
        ss = np.random.SeedSequence([seed, run])
        corrupt_rng, sample_rng = (np.random.default_rng(s) for s in ss.spawn(2))
        corrupted = LabeledDataset(
            apply_corruption(probe_ds.samples, corruption, corrupt_rng),
            probe_ds.labels, split=probe_ds.split,
        )
        a, b, labels = P.sample_pairs(corrupted, n_pairs, sample_rng, balance=balance)
        scores = np.asarray(scorer(a, b), float)
        auc_report.values.append(roc_auc(scores, labels))
        f1_report.values.append(f1((scores >= threshold).astype(int), labels))
    return auc_report, f1_report


def evaluate_oneshot(scorer, probe_ds: LabeledDataset, spec: P.EpisodeSpec, *,
                     trials: int = 400, seed: int = 0, fingerprint: str = "") -> EvalReport:
    """N-way one-shot accuracy of a pair scorer.

    Per query the predicted class is the template with the lowest
    "different" score; exact ties resolve to the first index. Each trial
    uses the stream (seed, trial) so trials are order-independent.
    """
    if trials < 1:
        raise ContractError(f"trials must be >= 1, got {trials}")
    report = EvalReport(metric="accuracy", config_fingerprint=fingerprint)
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, trial]))
        support, queries, query_labels = P.sample_episode(probe_ds, spec, rng)
        correct = 0
        for q, true_slot in zip(queries, query_labels):
            tiled = np.broadcast_to(q, (spec.n_way,) + q.shape)
            scores = np.asarray(scorer(support, tiled), float)
            if scores.shape != (spec.n_way,):
                raise ContractError(f"scorer returned shape {scores.shape} for {spec.n_way} templates")
            if int(np.argmin(scores)) == int(true_slot):
                correct += 1
        report.values.append(correct / len(queries))
    return report

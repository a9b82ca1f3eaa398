"""Evaluation harness: z-score normalization, stratified splitting,
class-weighted logistic regression trained by full-batch gradient descent,
and the confusion / ranking metrics used to compare the rule against the
trained baseline.

Labels are integers, 0 = benign and 1 = malignant (the positive class).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata

FEATURE_NAMES = ("a", "b", "c", "d", "tds")


class EvaluationError(Exception):
    pass


@dataclass(frozen=True)
class Normalizer:
    means: np.ndarray
    stds: np.ndarray


@dataclass(frozen=True)
class LogisticModel:
    weights: np.ndarray
    bias: float
    learning_rate: float
    epochs: int
    seed: int


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    fp: int
    fn: int
    tn: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float

    def as_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "auc": self.auc,
        }


def stratified_split(
    labels: np.ndarray, train_fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-class seeded shuffle, split at round(fraction * class size).

    Returns (train, test) index arrays forming a partition of the input.
    """
    labels = np.asarray(labels)
    if not 0.0 < train_fraction < 1.0:
        raise EvaluationError("train_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for cls in (0, 1):
        members = np.flatnonzero(labels == cls)
        if members.size == 0:
            raise EvaluationError(f"class {cls} has no records")
        perm = rng.permutation(members)
        cut = int(np.floor(train_fraction * members.size + 0.5))
        train_idx.append(perm[:cut])
        test_idx.append(perm[cut:])
    return np.concatenate(train_idx), np.concatenate(test_idx)


def fit_normalizer(features: np.ndarray) -> Normalizer:
    """Per-dimension mean and population standard deviation."""
    features = np.asarray(features, dtype=np.float64)
    if features.size == 0:
        raise EvaluationError("cannot fit a normalizer on an empty training set")
    return Normalizer(features.mean(axis=0), features.std(axis=0))


def apply_normalizer(normalizer: Normalizer, features: np.ndarray) -> np.ndarray:
    """(x - mean) / std; zero-variance dimensions map to 0."""
    features = np.asarray(features, dtype=np.float64)
    centered = features - normalizer.means
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(normalizer.stds > 0.0, centered / normalizer.stds, 0.0)
    return out


def class_weights(labels: np.ndarray) -> np.ndarray:
    """Inverse-frequency weights: w_c = N / (2 * N_c), indexed by class."""
    labels = np.asarray(labels)
    n = labels.size
    counts = np.array([(labels == 0).sum(), (labels == 1).sum()], dtype=np.float64)
    if (counts == 0).any():
        raise EvaluationError("both classes must be present to compute class weights")
    return n / (2.0 * counts)


def weighted_bce_loss(
    weights: np.ndarray,
    bias: float,
    features: np.ndarray,
    labels: np.ndarray,
    sample_weights: np.ndarray,
) -> float:
    """Mean sample-weighted binary cross-entropy of the sigmoid model."""
    z = features @ weights + bias
    # log(sigmoid(z)) and log(1 - sigmoid(z)) via logaddexp for stability.
    log_p = -np.logaddexp(0.0, -z)
    log_1mp = -np.logaddexp(0.0, z)
    losses = -(labels * log_p + (1.0 - labels) * log_1mp)
    return float(np.mean(sample_weights * losses))


def bce_gradient(
    weights: np.ndarray,
    bias: float,
    features: np.ndarray,
    labels: np.ndarray,
    sample_weights: np.ndarray,
) -> tuple[np.ndarray, float]:
    z = features @ weights + bias
    residual = sample_weights * (expit(z) - labels)
    n = features.shape[0]
    return features.T @ residual / n, float(residual.sum() / n)


def train_logistic(
    features: np.ndarray,
    labels: np.ndarray,
    sample_weights: np.ndarray,
    learning_rate: float = 0.1,
    epochs: int = 1000,
    seed: int = 0,
) -> LogisticModel:
    """Full-batch gradient descent from zero-initialized parameters.

    Deterministic: iteration count is fixed and no stochastic steps are
    taken (the seed is recorded for provenance). Raises if the loss goes
    non-finite, reporting the epoch.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    sample_weights = np.asarray(sample_weights, dtype=np.float64)
    if features.ndim != 2:
        raise EvaluationError("features must be a 2-D array")
    if len({0.0, 1.0} | set(np.unique(labels))) > 2:
        raise EvaluationError("labels must be 0/1")
    if np.unique(labels).size < 2:
        raise EvaluationError("training requires examples from both classes")

    w = np.zeros(features.shape[1])
    b = 0.0
    for epoch in range(epochs):
        grad_w, grad_b = bce_gradient(w, b, features, labels, sample_weights)
        w = w - learning_rate * grad_w
        b = b - learning_rate * grad_b
        if not (np.isfinite(w).all() and np.isfinite(b)):
            raise EvaluationError(
                f"training diverged at epoch {epoch}: non-finite parameters "
                f"(learning rate {learning_rate} too large)"
            )
    loss = weighted_bce_loss(w, b, features, labels, sample_weights)
    if not np.isfinite(loss):
        raise EvaluationError(f"training produced a non-finite final loss {loss}")
    return LogisticModel(w, float(b), learning_rate, epochs, seed)


def predict_proba(model: LogisticModel, features: np.ndarray) -> np.ndarray:
    """sigmoid(w . x + b) for each row."""
    features = np.asarray(features, dtype=np.float64)
    return expit(features @ model.weights + model.bias)


def auc_score(labels: np.ndarray, scores: np.ndarray) -> float:
    """Pairwise concordance AUC (ties count 0.5), via average ranks."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise EvaluationError("AUC requires both classes to be present")
    ranks = rankdata(scores, method="average")
    pos_rank_sum = ranks[labels == 1].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def compute_metrics(
    labels: np.ndarray, predictions: np.ndarray, scores: np.ndarray
) -> MetricsReport:
    """Confusion counts plus accuracy, precision, recall, F1, and AUC."""
    labels = np.asarray(labels)
    predictions = np.asarray(predictions)
    scores = np.asarray(scores, dtype=np.float64)
    if not (labels.size == predictions.size == scores.size):
        raise EvaluationError("labels, predictions, and scores must be equal length")
    tp = int(((labels == 1) & (predictions == 1)).sum())
    fp = int(((labels == 0) & (predictions == 1)).sum())
    fn = int(((labels == 1) & (predictions == 0)).sum())
    tn = int(((labels == 0) & (predictions == 0)).sum())
    n = labels.size
    accuracy = (tp + tn) / n
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return MetricsReport(
        tp, fp, fn, tn, accuracy, precision, recall, f1, auc_score(labels, scores)
    )


def evaluate_feature_table(
    features: np.ndarray,
    tds: np.ndarray,
    rule_predictions: np.ndarray,
    labels: np.ndarray,
    seed: int,
    train_fraction: float = 0.8,
    learning_rate: float = 0.1,
    epochs: int = 1000,
) -> dict[str, MetricsReport]:
    """Score the TDS rule and a trained logistic model on the same test split.

    ``features`` is the (N, 5) table of (A, B, C, D, TDS) rows;
    ``rule_predictions`` are the rule's binary calls (1 = malignant) and
    ``tds`` provides its ranking scores.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    train_idx, test_idx = stratified_split(labels, train_fraction, seed)
    if test_idx.size == 0:
        raise EvaluationError("test split is empty")

    normalizer = fit_normalizer(features[train_idx])
    x_train = apply_normalizer(normalizer, features[train_idx])
    x_test = apply_normalizer(normalizer, features[test_idx])
    y_train, y_test = labels[train_idx], labels[test_idx]

    weights_by_class = class_weights(y_train)
    model = train_logistic(
        x_train,
        y_train,
        weights_by_class[y_train],
        learning_rate=learning_rate,
        epochs=epochs,
        seed=seed,
    )
    proba = predict_proba(model, x_test)
    model_report = compute_metrics(y_test, (proba >= 0.5).astype(int), proba)
    rule_report = compute_metrics(
        y_test, np.asarray(rule_predictions)[test_idx], np.asarray(tds)[test_idx]
    )
    return {"rule": rule_report, "model": model_report}

"""Percentage error metrics."""
from typing import Sequence, Tuple

import numpy as np

from shared.errors import MetricError


def _relative_errors(pred: Sequence[float], truth: Sequence[float]) -> np.ndarray:
    pred = np.asarray(pred, dtype=np.float64).ravel()
    truth = np.asarray(truth, dtype=np.float64).ravel()
    if pred.shape != truth.shape:
        raise MetricError(f"{pred.size} predictions for {truth.size} truths")
    if truth.size == 0:
        raise MetricError("no values to compare")
    if np.any(truth == 0):
        raise MetricError("percentage error is undefined for a zero truth")
    return (pred - truth) / truth


def mape(pred: Sequence[float], truth: Sequence[float]) -> float:
    """Mean absolute percentage error, in percent."""
    return float(100.0 * np.mean(np.abs(_relative_errors(pred, truth))))


def rmspe(pred: Sequence[float], truth: Sequence[float]) -> float:
    """Root mean square percentage error, in percent."""
    rel = _relative_errors(pred, truth)
    return float(100.0 * np.sqrt(np.mean(rel * rel)))


def percentage_errors(pred: Sequence[float], truth: Sequence[float]) -> Tuple[float, float]:
    """(MAPE, RMSPE)."""
    return mape(pred, truth), rmspe(pred, truth)

"""Cross-validated polynomial degree selection."""
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, model_validator
from sklearn.model_selection import KFold

from config.settings import settings
from shared.errors import InsufficientDataError, ModelError
from shared.models import PeType, Target
from surrogate.basis import build_basis, n_terms
from surrogate.metrics import mape, rmspe
from surrogate.model import PolySurrogate, compute_scaling, fit, predict_many

logger = structlog.get_logger()


class DegreeScore(BaseModel):
    model_config = ConfigDict(frozen=True)

    cv_mape: float
    cv_rmspe: float


class FitReport(BaseModel):
    """Per-degree CV errors, the chosen degree and held-out errors."""
    model_config = ConfigDict(frozen=True)

    degrees: Dict[int, DegreeScore]
    skipped: Dict[int, str] = {}
    chosen_K: int
    forced: bool = False
    folds: int
    seed: int
    n_train: int
    n_test: int = 0
    heldout_mape: Optional[float] = None
    heldout_rmspe: Optional[float] = None

    @model_validator(mode="after")
    def _chosen_was_tried(self) -> "FitReport":
        if not self.forced and self.chosen_K not in self.degrees:
            raise ValueError(f"chosen degree {self.chosen_K} was not evaluated")
        return self

    def to_document(self) -> dict:
        """JSON form with degrees in ascending order."""
        return {
            "chosen_K": self.chosen_K,
            "forced": self.forced,
            "folds": self.folds,
            "seed": self.seed,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "heldout_mape": self.heldout_mape,
            "heldout_rmspe": self.heldout_rmspe,
            "degrees": {
                str(K): {"cv_mape": s.cv_mape, "cv_rmspe": s.cv_rmspe}
                for K, s in sorted(self.degrees.items())
            },
            "skipped": {str(K): reason for K, reason in sorted(self.skipped.items())},
        }


def kfold_split(n: int, k: int, seed: int) -> List[np.ndarray]:
    """
    k disjoint, shuffled test-index sets covering 0..n-1.

    Fold sizes differ by at most one; the first n % k folds are larger.
    """
    if not 2 <= k <= n:
        raise ModelError(f"fold count must satisfy 2 <= k <= n, got k={k}, n={n}")
    splitter = KFold(n_splits=k, shuffle=True, random_state=seed)
    return [test for _, test in splitter.split(np.zeros((n, 1)))]


def _within(value: float, best: float, rtol: float, atol: float) -> bool:
    return value <= max(best * (1.0 + rtol), best + atol)


def _choose(scores: Dict[int, DegreeScore], rtol: float, atol: float) -> int:
    best_mape = min(s.cv_mape for s in scores.values())
    best_rmspe = min(s.cv_rmspe for s in scores.values())
    for K in sorted(scores):
        s = scores[K]
        if _within(s.cv_mape, best_mape, rtol, atol) and _within(s.cv_rmspe, best_rmspe, rtol, atol):
            return K

    # No degree is near both minima: take the smallest combined excess.
    def excess(K: int) -> float:
        s = scores[K]
        return (
            (s.cv_mape - best_mape) / max(best_mape, atol)
            + (s.cv_rmspe - best_rmspe) / max(best_rmspe, atol)
        )
    return min(sorted(scores), key=excess)


def select_degree(
    X: np.ndarray,
    y: np.ndarray,
    K_range: Sequence[int],
    folds: Optional[int] = None,
    seed: int = 0,
    rtol: Optional[float] = None,
    atol: Optional[float] = None,
) -> Tuple[int, FitReport]:
    """
    Pick the smallest degree whose CV MAPE and CV RMSPE are both near their minima.

    Out-of-fold predictions of every fold are pooled before computing errors.
    Degrees needing more rows than the smallest training fold are skipped.

    Raises:
        InsufficientDataError: every degree was skipped
    """
    folds = folds or settings.cv_folds
    rtol = settings.degree_rtol if rtol is None else rtol
    atol = settings.degree_atol_percent if atol is None else atol
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if not list(K_range):
        raise ModelError("empty degree range")
    n, d = X.shape
    test_sets = kfold_split(n, folds, seed)
    min_train = n - max(len(t) for t in test_sets)
    scaling = compute_scaling(X)

    scores: Dict[int, DegreeScore] = {}
    skipped: Dict[int, str] = {}
    for K in sorted(set(K_range)):
        needed = n_terms(d, K)
        if min_train < needed:
            skipped[K] = f"needs {needed} training rows, smallest training fold has {min_train}"
            logger.warning("degree_skipped", K=K, terms=needed, train_rows=min_train)
            continue
        basis = build_basis(d, K)
        pred = np.empty(n)
        for test in test_sets:
            train = np.setdiff1d(np.arange(n), test, assume_unique=True)
            model = fit(X[train], y[train], basis, scaling=scaling)
            pred[test] = predict_many(model, X[test])
        scores[K] = DegreeScore(cv_mape=mape(pred, y), cv_rmspe=rmspe(pred, y))
        logger.debug("degree_scored", K=K, cv_mape=scores[K].cv_mape, cv_rmspe=scores[K].cv_rmspe)

    if not scores:
        raise InsufficientDataError(f"{n} rows are too few for every degree in {list(K_range)}")
    chosen = _choose(scores, rtol, atol)
    report = FitReport(degrees=scores, skipped=skipped, chosen_K=chosen, folds=folds,
                       seed=seed, n_train=n)
    logger.info("degree_selected", chosen_K=chosen, tried=sorted(scores))
    return chosen, report


def holdout_split(n: int, fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Sorted (train, test) indices; an empty test set when fraction is 0."""
    if not 0 <= fraction < 1:
        raise ModelError(f"holdout fraction must be in [0, 1), got {fraction}")
    n_test = int(round(fraction * n))
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def fit_with_selection(
    X: np.ndarray,
    y: np.ndarray,
    K_range: Sequence[int],
    folds: Optional[int] = None,
    seed: int = 0,
    holdout: Optional[float] = None,
    degree: Optional[int] = None,
    target: Optional[Target] = None,
    pe_type: Optional[PeType] = None,
    feature_names: Sequence[str] = (),
    context: Optional[Dict[str, float]] = None,
    max_rows: Optional[int] = None,
    target_scale: Optional[str] = None,
) -> Tuple[PolySurrogate, FitReport]:
    """
    Hold out a test split, select a degree on the rest (unless forced), refit.

    Args:
        K_range: Candidate degrees
        degree: Forced degree, skipping selection
        max_rows: Seeded subsample before splitting
        target_scale: Recorded on the model; y is already divided by it

    Returns:
        (model fitted on the training split, report with held-out errors)
    """
    holdout = settings.holdout_fraction if holdout is None else holdout
    folds = folds or settings.cv_folds
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    subsample_seed, split_seed = np.random.SeedSequence(seed).generate_state(2)
    if max_rows is not None and X.shape[0] > max_rows:
        rows = np.sort(np.random.default_rng(subsample_seed).choice(X.shape[0], max_rows, replace=False))
        X, y = X[rows], y[rows]
        logger.info("dataset_subsampled", rows=max_rows)

    train, test = holdout_split(X.shape[0], holdout, int(split_seed))
    X_train, y_train = X[train], y[train]
    if degree is not None:
        chosen = degree
        report_fields = dict(degrees={}, forced=True)
    else:
        chosen, cv_report = select_degree(X_train, y_train, K_range, folds, seed)
        report_fields = dict(degrees=cv_report.degrees, skipped=cv_report.skipped)

    model = fit(X_train, y_train, build_basis(X.shape[1], chosen), target=target,
                pe_type=pe_type, feature_names=feature_names, context=context,
                target_scale=target_scale)
    heldout = {}
    if len(test):
        pred = predict_many(model, X[test])
        heldout = dict(heldout_mape=mape(pred, y[test]), heldout_rmspe=rmspe(pred, y[test]))
    report = FitReport(chosen_K=chosen, folds=folds, seed=seed, n_train=len(train),
                       n_test=len(test), **report_fields, **heldout)
    logger.info("surrogate_fitted", target=target.value if target else None,
                pe_type=pe_type.value if pe_type else None, K=chosen, **heldout)
    return model, report

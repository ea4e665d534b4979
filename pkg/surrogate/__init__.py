"""Polynomial surrogate cost models."""
from .basis import MonomialBasis, build_basis, design_matrix, n_terms
from .metrics import mape, rmspe
from .model import (
    PolySurrogate,
    fit,
    load_model,
    predict,
    predict_many,
    save_model,
)
from .selection import FitReport, fit_with_selection, kfold_split, select_degree

__all__ = [
    "FitReport",
    "MonomialBasis",
    "PolySurrogate",
    "build_basis",
    "design_matrix",
    "fit",
    "fit_with_selection",
    "kfold_split",
    "load_model",
    "mape",
    "n_terms",
    "predict",
    "predict_many",
    "rmspe",
    "save_model",
    "select_degree",
]

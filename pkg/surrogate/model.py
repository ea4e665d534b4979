"""Polynomial surrogate models: fit, predict and persistence."""
import json
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from shared.config_loader import dump_document
from shared.errors import InsufficientDataError, ModelError
from shared.models import PeType, Target
from surrogate.basis import MonomialBasis, build_basis, design_matrix

logger = structlog.get_logger()

PREDICT_CHUNK_ROWS = 65536
GRID_BLOCK_ROWS = 256
Scaling = Tuple[Tuple[float, float], ...]


class PolySurrogate(BaseModel):
    """
    F(x) = sum_j c_j prod_i z_i^q_ij with z_i = (x_i - shift_i) / scale_i.

    `context` records characterization conditions the features leave out
    (latency models store the bandwidth). `target_scale` names the quantity
    the target was divided by before fitting; callers multiply it back.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    basis: MonomialBasis
    coefficients: Tuple[float, ...]
    feature_scaling: Scaling
    target: Optional[Target] = None
    pe_type: Optional[PeType] = None
    feature_names: Tuple[str, ...] = ()
    rank_deficient: bool = False
    context: Dict[str, float] = {}
    target_scale: Optional[str] = None

    @model_validator(mode="after")
    def _check_counts(self) -> "PolySurrogate":
        if len(self.coefficients) != len(self.basis.terms):
            raise ValueError(
                f"{len(self.coefficients)} coefficients for {len(self.basis.terms)} terms"
            )
        if len(self.feature_scaling) != self.basis.d:
            raise ValueError(f"{len(self.feature_scaling)} scaling pairs for d={self.basis.d}")
        if self.feature_names and len(self.feature_names) != self.basis.d:
            raise ValueError(f"{len(self.feature_names)} feature names for d={self.basis.d}")
        if any(scale == 0 for _, scale in self.feature_scaling):
            raise ValueError("zero feature scale")
        return self

    @property
    def d(self) -> int:
        return self.basis.d

    @property
    def K(self) -> int:
        return self.basis.K


def identity_scaling(d: int) -> Scaling:
    return tuple((0.0, 1.0) for _ in range(d))


def compute_scaling(X: np.ndarray) -> Scaling:
    """Per-feature (min, max - min); a constant feature gets scale 1."""
    lo, hi = X.min(axis=0), X.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return tuple((float(s), float(w)) for s, w in zip(lo, span))


def _scaled(X: np.ndarray, scaling: Scaling) -> np.ndarray:
    shift = np.array([s for s, _ in scaling])
    scale = np.array([w for _, w in scaling])
    return (X - shift) / scale


def _as_matrix(X, d: Optional[int] = None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ModelError(f"feature array must be 2-D, got shape {X.shape}")
    if d is not None and X.shape[1] != d:
        raise ModelError(f"expected {d} features, got {X.shape[1]}")
    return X


def fit(
    X: np.ndarray,
    y: np.ndarray,
    basis: MonomialBasis,
    target: Optional[Target] = None,
    pe_type: Optional[PeType] = None,
    feature_names: Sequence[str] = (),
    scaling: Optional[Scaling] = None,
    context: Optional[Dict[str, float]] = None,
    target_scale: Optional[str] = None,
) -> PolySurrogate:
    """
    Minimum-norm least-squares coefficients over scaled monomials.

    Args:
        X: (n, d) features
        y: (n,) targets
        basis: Monomial basis with matching d
        scaling: Fixed feature scaling; computed from X when omitted

    Raises:
        InsufficientDataError: fewer rows than basis terms
        ModelError: dimension mismatch or non-finite data
    """
    X = _as_matrix(X, basis.d)
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != X.shape[0]:
        raise ModelError(f"{X.shape[0]} feature rows for {y.shape[0]} targets")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ModelError("features and targets must be finite")
    if X.shape[0] < len(basis.terms):
        raise InsufficientDataError(
            f"{X.shape[0]} rows cannot fit {len(basis.terms)} terms (d={basis.d}, K={basis.K})"
        )

    scaling = scaling or compute_scaling(X)
    A = design_matrix(basis, _scaled(X, scaling))
    coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    rank_deficient = bool(rank < len(basis.terms))
    if rank_deficient:
        logger.info("design_rank_deficient", rank=int(rank), terms=len(basis.terms), K=basis.K)
    return PolySurrogate(
        basis=basis,
        coefficients=tuple(float(c) for c in coef),
        feature_scaling=scaling,
        target=target,
        pe_type=pe_type,
        feature_names=tuple(feature_names),
        rank_deficient=rank_deficient,
        context=dict(context or {}),
        target_scale=target_scale,
    )


def predict_many(model: PolySurrogate, X: np.ndarray) -> np.ndarray:
    """Vectorized evaluation over the rows of X."""
    X = _as_matrix(X, model.d)
    coef = np.asarray(model.coefficients)
    Z = _scaled(X, model.feature_scaling)
    out = np.empty(X.shape[0])
    for start in range(0, X.shape[0], PREDICT_CHUNK_ROWS):
        stop = start + PREDICT_CHUNK_ROWS
        # row-wise reduction keeps each value independent of batch size
        out[start:stop] = (design_matrix(model.basis, Z[start:stop]) * coef).sum(axis=1)
    return out


@lru_cache(maxsize=32)
def _factor_index(terms: Tuple[Tuple[int, ...], ...], start: int, stop: int, K: int):
    """Basis over variables start..stop-1 and, per term, the column of its slice."""
    part = build_basis(stop - start, K)
    position = {q: j for j, q in enumerate(part.terms)}
    return part, np.array([position[q[start:stop]] for q in terms], dtype=np.intp)


def _factor_columns(Z: np.ndarray, basis: MonomialBasis, start: int, stop: int) -> np.ndarray:
    """(n, T) monomials of Z over the exponent slices ``q[start:stop]`` of every term."""
    if stop == start:
        return np.ones((Z.shape[0], len(basis.terms)))
    part, columns = _factor_index(basis.terms, start, stop, basis.K)
    return design_matrix(part, Z)[:, columns]


def predict_grid(model: PolySurrogate, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """
    Model value at every concatenation ``[rows[i], cols[l]]``.

    Monomials factor into a row part and a column part, so the grid is one
    matrix product of (rows x terms) by (terms x cols). Rows are multiplied
    in zero-padded blocks of a fixed shape; each value then depends on its
    own row only, never on how many rows share the call.

    Args:
        model: Fitted surrogate
        rows: (n, s) leading features
        cols: (m, d - s) trailing features

    Returns:
        (n, m) predictions
    """
    rows = _as_matrix(rows)
    cols = _as_matrix(cols)
    split = rows.shape[1]
    if split + cols.shape[1] != model.d:
        raise ModelError(f"expected {model.d} features, got {split} + {cols.shape[1]}")
    scaling = model.feature_scaling
    weighted = _factor_columns(_scaled(rows, scaling[:split]), model.basis, 0, split)
    weighted *= np.asarray(model.coefficients)
    col_terms = _factor_columns(_scaled(cols, scaling[split:]), model.basis, split, model.d).T

    out = np.empty((rows.shape[0], cols.shape[0]))
    block = np.zeros((GRID_BLOCK_ROWS, len(model.basis.terms)))
    for start in range(0, rows.shape[0], GRID_BLOCK_ROWS):
        part = weighted[start:start + GRID_BLOCK_ROWS]
        block[:len(part)] = part
        block[len(part):] = 0.0
        out[start:start + len(part)] = (block @ col_terms)[:len(part)]
    return out


def predict(model: PolySurrogate, x: Sequence[float]) -> float:
    """Evaluate the model at one feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.d:
        raise ModelError(f"expected a vector of {model.d} features, got shape {x.shape}")
    return float(predict_many(model, x.reshape(1, -1))[0])


# Persistence

def model_filename(target: Target, pe: PeType) -> str:
    return f"{target.value}_{pe.value}.json"


def report_filename(target: Target, pe: PeType) -> str:
    return f"{target.value}_{pe.value}.report.json"


def model_to_dict(model: PolySurrogate) -> dict:
    return {
        "d": model.d,
        "K": model.K,
        "exponents": [list(q) for q in model.basis.terms],
        "coefficients": list(model.coefficients),
        "scaling": [list(pair) for pair in model.feature_scaling],
        "target": model.target.value if model.target else None,
        "pe_type": model.pe_type.value if model.pe_type else None,
        "feature_names": list(model.feature_names),
        "rank_deficient": model.rank_deficient,
        "context": dict(model.context),
        "target_scale": model.target_scale,
    }


def model_from_dict(data: dict) -> PolySurrogate:
    """
    Rebuild a model from its persisted form.

    Raises:
        ModelError: missing keys or inconsistent counts
    """
    try:
        basis = MonomialBasis(
            d=data["d"], K=data["K"], terms=tuple(tuple(q) for q in data["exponents"])
        )
        return PolySurrogate(
            basis=basis,
            coefficients=tuple(data["coefficients"]),
            feature_scaling=tuple(tuple(pair) for pair in data["scaling"]),
            target=data.get("target"),
            pe_type=data.get("pe_type"),
            feature_names=tuple(data.get("feature_names", ())),
            rank_deficient=data.get("rank_deficient", False),
            context=data.get("context", {}),
            target_scale=data.get("target_scale"),
        )
    except KeyError as e:
        raise ModelError(f"model document is missing {e.args[0]!r}") from e
    except (TypeError, ValidationError) as e:
        raise ModelError(f"invalid model document: {e}") from e


def save_model(model: PolySurrogate, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_document(model_to_dict(model)), encoding="utf-8")
    logger.info("model_saved", path=str(path), K=model.K, terms=len(model.coefficients))
    return path


def load_model(path: Union[str, Path]) -> PolySurrogate:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ModelError(f"{path.name}: malformed JSON: {e}") from e
    if not isinstance(data, dict):
        raise ModelError(f"{path.name}: model document must be an object")
    return model_from_dict(data)

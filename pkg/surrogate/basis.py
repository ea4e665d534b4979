"""Monomial bases of bounded total degree."""
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb
from typing import Dict, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from shared.errors import ModelError

Exponents = Tuple[int, ...]


class MonomialBasis(BaseModel):
    """Exponent vectors q_j of a polynomial in d variables, constant term first."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    d: int = Field(ge=1)
    K: int = Field(ge=0)
    terms: Tuple[Exponents, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_terms(self) -> "MonomialBasis":
        for q in self.terms:
            if len(q) != self.d:
                raise ValueError(f"exponent vector {q} does not have {self.d} entries")
            if min(q) < 0 or sum(q) > self.K:
                raise ValueError(f"exponent vector {q} outside total degree {self.K}")
        return self

    def __len__(self) -> int:
        return len(self.terms)


def n_terms(d: int, K: int) -> int:
    """C(d + K, K)."""
    return comb(d + K, K)


@lru_cache(maxsize=64)
def _graded_lex(d: int, K: int) -> Tuple[Exponents, ...]:
    terms = []
    for degree in range(K + 1):
        for combo in combinations_with_replacement(range(d), degree):
            q = [0] * d
            for i in combo:
                q[i] += 1
            terms.append(tuple(q))
    return tuple(terms)


def build_basis(d: int, K: int) -> MonomialBasis:
    """
    Every exponent vector of total degree <= K, graded-lexicographic.

    Within a degree, higher powers of earlier variables come first
    (x0^2, x0 x1, ..., x1^2, ...).
    """
    if d < 1 or K < 0:
        raise ModelError(f"basis needs d >= 1 and K >= 0, got d={d}, K={K}")
    return MonomialBasis(d=d, K=K, terms=_graded_lex(d, K))


@lru_cache(maxsize=32)
def _recurrence(terms: Tuple[Exponents, ...]) -> tuple:
    """(variable, parent index) per term; parent None when absent, -1 for constants."""
    index: Dict[Exponents, int] = {}
    steps = []
    for j, q in enumerate(terms):
        nonzero = [i for i, e in enumerate(q) if e]
        if not nonzero:
            steps.append((None, -1))
        else:
            i = nonzero[-1]
            parent = q[:i] + (q[i] - 1,) + q[i + 1:]
            steps.append((i, index.get(parent)))
        index.setdefault(q, j)
    return tuple(steps)


def design_matrix(basis: MonomialBasis, X: np.ndarray) -> np.ndarray:
    """
    Monomials of every row of X.

    Each column is its parent column times one variable, so a column
    costs one multiply when the basis is closed under lowering a degree.
    """
    X = np.asarray(X, dtype=np.float64)
    out = np.empty((X.shape[0], len(basis.terms)))
    for j, (i, parent) in enumerate(_recurrence(basis.terms)):
        if parent == -1:
            out[:, j] = 1.0
        elif parent is not None:
            np.multiply(out[:, parent], X[:, i], out=out[:, j])
        else:
            out[:, j] = np.prod(X ** np.asarray(basis.terms[j], dtype=np.float64), axis=1)
    return out

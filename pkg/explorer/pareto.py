"""Pareto-front extraction over explicit (metric, direction) objectives."""
from enum import Enum
from typing import Any, Callable, Hashable, Mapping, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from shared.errors import ParetoError

logger = structlog.get_logger()


class Direction(str, Enum):
    MINIMIZE = "min"
    MAXIMIZE = "max"


class Objective(BaseModel):
    """A metric name and whether larger or smaller is better."""
    model_config = ConfigDict(frozen=True)

    metric: str
    direction: Direction

    @classmethod
    def parse(cls, text: str) -> "Objective":
        """Parse "metric:min" or "metric:max"."""
        metric, _, direction = text.partition(":")
        try:
            return cls(metric=metric, direction=Direction(direction))
        except ValueError as e:
            raise ParetoError(f"objective must look like metric:min or metric:max, got {text!r}") from e


def minimize(metric: str) -> Objective:
    return Objective(metric=metric, direction=Direction.MINIMIZE)


def maximize(metric: str) -> Objective:
    return Objective(metric=metric, direction=Direction.MAXIMIZE)


class ParetoSet(BaseModel):
    """Non-dominated members of an evaluated set, sorted by the first objective."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    objectives: Tuple[Objective, ...] = Field(min_length=1)
    members: Tuple[Any, ...]
    member_ids: Tuple[Any, ...]

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, point_id: Hashable) -> bool:
        return point_id in set(self.member_ids)


def metric_value(point: Any, metric: str) -> float:
    """Read a metric from a mapping or an attribute."""
    if isinstance(point, Mapping):
        return float(point[metric])
    return float(getattr(point, metric))


def default_point_id(point: Any, position: int) -> Any:
    return getattr(point, "point_id", position)


def dominates(p: Sequence[float], q: Sequence[float]) -> bool:
    """p dominates q when minimizing every coordinate."""
    return all(a <= b for a, b in zip(p, q)) and any(a < b for a, b in zip(p, q))


def nondominated_mask(costs: np.ndarray) -> np.ndarray:
    """
    Mask of non-dominated rows of a cost matrix (every column minimized).

    Rows are visited in lexicographic order, so a dominator is always seen
    before the rows it dominates; each row is tested against the front only.
    Identical rows do not dominate each other.
    """
    costs = np.asarray(costs, dtype=np.float64)
    n = costs.shape[0]
    order = np.lexsort(costs.T[::-1])
    mask = np.zeros(n, dtype=bool)
    front = np.empty((0, costs.shape[1]))
    for i in order:
        row = costs[i]
        if front.shape[0]:
            no_worse = np.all(front <= row, axis=1)
            better = np.any(front < row, axis=1)
            if np.any(no_worse & better):
                continue
        mask[i] = True
        front = np.vstack([front, row])
    return mask


def pareto_front(
    points: Sequence[Any],
    objectives: Sequence[Objective],
    point_id: Optional[Callable[[Any, int], Any]] = None,
) -> ParetoSet:
    """
    Exact dominance filtering.

    Points with identical objective tuples collapse to the one with the
    smallest id. Members are sorted by the first objective (ascending),
    ties by id, so the result does not depend on input order.

    Args:
        points: Mappings or objects exposing the objective metrics
        objectives: (metric, direction) pairs
        point_id: Id of a point; `point.point_id` or its position by default

    Raises:
        ParetoError: no points or no objectives
    """
    if not points:
        raise ParetoError("cannot extract a Pareto front from an empty set")
    if not objectives:
        raise ParetoError("at least one objective is required")
    point_id = point_id or default_point_id
    ids = [point_id(p, i) for i, p in enumerate(points)]
    raw = np.array([[metric_value(p, o.metric) for o in objectives] for p in points])
    signs = np.array([-1.0 if o.direction is Direction.MAXIMIZE else 1.0 for o in objectives])

    keep: dict = {}
    for position, row in enumerate(map(tuple, raw)):
        held = keep.get(row)
        if held is None or ids[position] < ids[held]:
            keep[row] = position
    unique = sorted(keep.values(), key=lambda i: ids[i])

    mask = nondominated_mask(raw[unique] * signs)
    members = [unique[i] for i in np.flatnonzero(mask)]
    members.sort(key=lambda i: (raw[i, 0], ids[i]))
    logger.debug("pareto_front_extracted", points=len(points), members=len(members))
    return ParetoSet(
        objectives=tuple(objectives),
        members=tuple(points[i] for i in members),
        member_ids=tuple(ids[i] for i in members),
    )

"""Normalization of design points against an INT16 reference."""
from enum import Enum
from typing import Dict, List, Sequence, Tuple

import structlog
from pydantic import BaseModel, ConfigDict

from shared.errors import NormalizationError
from shared.models import DesignPoint, PeType

logger = structlog.get_logger()

METRICS = ("power_mw", "latency_s", "area_mm2", "energy_mj", "perf_per_area")


class ReferenceRule(str, Enum):
    """
    BEST_INT16: the INT16 point with the highest performance per area.
    INT16_PER_METRIC: the best INT16 value of each metric on its own
    (lowest cost, highest performance per area).
    """
    BEST_INT16 = "best-int16"
    INT16_PER_METRIC = "int16-per-metric"


class NormalizedPoint(BaseModel):
    """A design point with every metric divided by its reference."""
    model_config = ConfigDict(frozen=True)

    point: DesignPoint
    power_mw: float
    latency_s: float
    area_mm2: float
    energy_mj: float
    perf_per_area: float

    @property
    def point_id(self) -> Tuple[int, str]:
        return self.point.point_id


def reference_values(points: Sequence[DesignPoint], rule: ReferenceRule) -> Dict[str, float]:
    """
    Reference metric values from the INT16 points of a set.

    Raises:
        NormalizationError: no INT16 point
    """
    int16 = [p for p in points if p.pe_type is PeType.INT16]
    if not int16:
        raise NormalizationError("no INT16 design point to normalize against")
    if rule is ReferenceRule.BEST_INT16:
        best = min(int16, key=lambda p: (-p.perf_per_area, p.point_id))
        return {m: getattr(best, m) for m in METRICS}
    values = {m: min(getattr(p, m) for p in int16) for m in METRICS}
    values["perf_per_area"] = max(p.perf_per_area for p in int16)
    return values


def normalize(
    points: Sequence[DesignPoint],
    rule: ReferenceRule = ReferenceRule.BEST_INT16,
    per_network: bool = True,
) -> List[NormalizedPoint]:
    """
    Divide each metric by the reference's; the reference maps to 1.0.

    Args:
        points: Evaluated design points
        rule: How the reference is chosen among INT16 points
        per_network: One reference per network rather than one overall

    Returns:
        Normalized points in input order
    """
    groups: Dict[str, List[DesignPoint]] = {}
    for p in points:
        groups.setdefault(p.network if per_network else "", []).append(p)
    references = {}
    for key, group in groups.items():
        try:
            references[key] = reference_values(group, rule)
        except NormalizationError:
            raise NormalizationError(
                f"no INT16 design point for network {key!r}" if key else "no INT16 design point"
            ) from None

    normalized = []
    for p in points:
        ref = references[p.network if per_network else ""]
        normalized.append(NormalizedPoint(point=p, **{m: getattr(p, m) / ref[m] for m in METRICS}))
    logger.debug("points_normalized", points=len(points), references=len(references), rule=rule.value)
    return normalized

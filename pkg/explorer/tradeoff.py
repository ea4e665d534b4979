"""Best configuration of each PE type per network, set against accuracy."""
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import pandas as pd
import structlog

from explorer.pareto import Direction, maximize, minimize, pareto_front
from shared.errors import AccuracyLookupError, DatasetError, NormalizationError
from shared.models import DesignPoint, PeType

logger = structlog.get_logger()

ACCURACY_COLUMNS = ("network", "pe_type", "top1_percent")
PERF_ACCURACY_FILE = "tradeoff_perf_accuracy.csv"
ENERGY_ERROR_FILE = "tradeoff_energy_error.csv"

AccuracyTable = Dict[Tuple[str, PeType], float]


def load_accuracy_table(path: Union[str, Path]) -> AccuracyTable:
    """
    Read `network,pe_type,top1_percent` rows.

    Raises:
        DatasetError: wrong columns, unknown PE type or accuracy outside (0, 100)
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"accuracy table not found: {path}")
    df = pd.read_csv(path)
    if list(df.columns) != list(ACCURACY_COLUMNS):
        raise DatasetError(f"{path.name}: expected columns {list(ACCURACY_COLUMNS)}")
    table: AccuracyTable = {}
    for row in df.itertuples(index=False):
        try:
            pe = PeType(row.pe_type)
        except ValueError:
            raise DatasetError(f"{path.name}: unknown pe_type {row.pe_type!r}") from None
        if not 0 < row.top1_percent < 100:
            raise DatasetError(f"{path.name}: top1_percent {row.top1_percent} outside (0, 100)")
        table[(str(row.network), pe)] = float(row.top1_percent)
    logger.info("accuracy_table_loaded", path=str(path), entries=len(table))
    return table


def best_per_pe_type(
    points: Sequence[DesignPoint], metric: str, direction: Direction
) -> Dict[Tuple[str, PeType], DesignPoint]:
    """The best point of each (network, PE type) by one metric; ties go to the smaller config_id."""
    sign = -1.0 if direction is Direction.MAXIMIZE else 1.0
    best: Dict[Tuple[str, PeType], DesignPoint] = {}
    for p in points:
        key = (p.network, p.pe_type)
        held = best.get(key)
        if held is None or (sign * getattr(p, metric), p.config_id) < (sign * getattr(held, metric), held.config_id):
            best[key] = p
    return best


def _tradeoff_rows(
    points: Sequence[DesignPoint],
    accuracy: AccuracyTable,
    metric: str,
    direction: Direction,
) -> List[dict]:
    best = best_per_pe_type(points, metric, direction)
    rows = []
    for network in dict.fromkeys(p.network for p in points):
        reference = best.get((network, PeType.INT16))
        if reference is None:
            raise NormalizationError(f"no INT16 design point for network {network!r}")
        group = []
        for pe in PeType:
            point = best.get((network, pe))
            if point is None:
                continue
            try:
                top1 = accuracy[(network, pe)]
            except KeyError:
                raise AccuracyLookupError(f"no accuracy for {network} on {pe.value}") from None
            group.append({
                "network": network,
                "pe_type": pe.value,
                "config_id": point.config_id,
                metric: getattr(point, metric),
                f"{metric}_norm": getattr(point, metric) / getattr(reference, metric),
                "top1_percent": top1,
                "top1_error": 100.0 - top1,
            })
        if direction is Direction.MAXIMIZE:
            objectives = (maximize(f"{metric}_norm"), maximize("top1_percent"))
        else:
            objectives = (minimize(f"{metric}_norm"), minimize("top1_error"))
        front = pareto_front(group, objectives)
        for position, row in enumerate(group):
            rows.append({**row, "pareto": int(position in front.member_ids)})
    return rows


def accuracy_tradeoff(
    points: Sequence[DesignPoint], accuracy: AccuracyTable
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """
    Per network, the best design of each PE type against its accuracy.

    Returns:
        (highest perf/area vs top-1 accuracy, lowest energy vs top-1 error),
        each normalized to the matching INT16 design of the network
    """
    perf = pd.DataFrame(_tradeoff_rows(points, accuracy, "perf_per_area", Direction.MAXIMIZE))
    energy = pd.DataFrame(_tradeoff_rows(points, accuracy, "energy_mj", Direction.MINIMIZE))
    return perf, energy

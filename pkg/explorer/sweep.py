"""Exhaustive design-space sweeps with per-network Pareto fronts."""
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
import pandas as pd
import structlog

from config.settings import settings
from explorer.normalize import METRICS, ReferenceRule, normalize
from explorer.pareto import ParetoSet, maximize, minimize, pareto_front
from explorer.sources import CostSource
from explorer.space import ConfigSpaceSpec, IndexedConfig, enumerate_space
from shared.config_loader import CONFIG_FIELDS
from shared.errors import NormalizationError
from shared.models import DesignPoint, NetworkConfig, PeType

logger = structlog.get_logger()

SWEEP_OBJECTIVES = (maximize("perf_per_area"), minimize("energy_mj"))
SWEEP_COLUMNS = (
    "config_id", *CONFIG_FIELDS, "net", "power_mw", "latency_s", "area_mm2",
    "energy_mj", "perf_per_area", "source", "pareto",
)
SUMMARY_COLUMNS = ("net", "pe_type", "metric", "count", "min", "median", "max")

RESULTS_FILE = "results.csv"
PARETO_FILE = "pareto.csv"
SUMMARY_FILE = "summary.csv"
NORMALIZED_FILE = "normalized.csv"


class SweepResult:
    """Design points in (config_id, network) order and one front per network."""

    def __init__(self, points: List[DesignPoint], fronts: Dict[str, ParetoSet],
                 networks: Sequence[str], skipped: int = 0):
        self.points = points
        self.fronts = fronts
        self.networks = list(networks)
        self.skipped = skipped

    def is_pareto(self, point: DesignPoint) -> bool:
        return point.point_id in self.fronts[point.network]


def _evaluate_chunk(source: CostSource, chunk: Sequence[IndexedConfig],
                    nets: Sequence[NetworkConfig]) -> List[DesignPoint]:
    return source.evaluate_sweep(chunk, nets)


def evaluate_configs(
    configs: Sequence[IndexedConfig],
    nets: Sequence[NetworkConfig],
    source: CostSource,
    jobs: int = 1,
) -> List[DesignPoint]:
    """
    Evaluate every (config, network) pair, fanning out over processes.

    Results are merged into (config_id, network order) regardless of `jobs`.
    """
    if jobs > 1 and len(configs) > 1:
        size = -(-len(configs) // jobs)
        chunks = [configs[i:i + size] for i in range(0, len(configs), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_evaluate_chunk, [source] * len(chunks), chunks,
                             [nets] * len(chunks))
            points = [p for part in parts for p in part]
    else:
        points = _evaluate_chunk(source, configs, nets)
    net_order = {net.name: i for i, net in enumerate(nets)}
    points.sort(key=lambda p: (p.config_id, net_order[p.network]))
    return points


def sweep(
    spec: ConfigSpaceSpec,
    nets: Sequence[NetworkConfig],
    source: CostSource,
    jobs: int = 1,
) -> SweepResult:
    """
    Evaluate the whole space on every network and extract per-network fronts
    for (performance per area up, energy down).
    """
    enumeration = enumerate_space(spec)
    points = evaluate_configs(enumeration.configs, nets, source, jobs)
    fronts = {
        net.name: pareto_front([p for p in points if p.network == net.name], SWEEP_OBJECTIVES)
        for net in nets
        if any(p.network == net.name for p in points)
    }
    logger.info("sweep_completed", points=len(points), networks=len(nets),
                skipped=enumeration.skipped, source=source.name)
    return SweepResult(points, fronts, [net.name for net in nets], enumeration.skipped)


def _point_row(point: DesignPoint) -> dict:
    cfg = point.config.model_dump(mode="json")
    return {
        "config_id": point.config_id,
        **{name: cfg[name] for name in CONFIG_FIELDS},
        "net": point.network,
        "power_mw": point.power_mw,
        "latency_s": point.latency_s,
        "area_mm2": point.area_mm2,
        "energy_mj": point.energy_mj,
        "perf_per_area": point.perf_per_area,
        "source": point.source,
    }


def results_table(result: SweepResult) -> pd.DataFrame:
    rows = [{**_point_row(p), "pareto": int(result.is_pareto(p))} for p in result.points]
    return pd.DataFrame(rows, columns=list(SWEEP_COLUMNS))


def pareto_table(result: SweepResult) -> pd.DataFrame:
    """Front members, network by network, each front in its sorted order."""
    rows = [
        {**_point_row(p), "pareto": 1}
        for net in result.networks if net in result.fronts
        for p in result.fronts[net].members
    ]
    return pd.DataFrame(rows, columns=list(SWEEP_COLUMNS))


def summary_table(result: SweepResult) -> pd.DataFrame:
    """Min, median and max of every metric per (network, PE type)."""
    rows = []
    for net in result.networks:
        for pe in PeType:
            group = [p for p in result.points if p.network == net and p.pe_type is pe]
            if not group:
                continue
            for metric in METRICS:
                values = np.array([getattr(p, metric) for p in group])
                rows.append({
                    "net": net, "pe_type": pe.value, "metric": metric, "count": len(values),
                    "min": float(values.min()), "median": float(np.median(values)),
                    "max": float(values.max()),
                })
    return pd.DataFrame(rows, columns=list(SUMMARY_COLUMNS))


def normalized_table(result: SweepResult, per_network: bool = True) -> pd.DataFrame:
    """Metrics relative to the best INT16 design (per network unless global)."""
    normalized = normalize(result.points, ReferenceRule.BEST_INT16, per_network=per_network)
    rows = [
        {"config_id": n.point.config_id, "pe_type": n.point.pe_type.value, "net": n.point.network,
         **{m: getattr(n, m) for m in METRICS}}
        for n in normalized
    ]
    return pd.DataFrame(rows, columns=["config_id", "pe_type", "net", *METRICS])


def write_table(df: pd.DataFrame, path: Path) -> Path:
    df.to_csv(path, index=False, float_format=settings.float_format, lineterminator="\n")
    return path


def write_sweep(result: SweepResult, out_dir: Union[str, Path], per_network: bool = True) -> List[Path]:
    """
    Write results, fronts, summary and (when INT16 points exist) normalized tables.

    Returns:
        Paths written
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [
        write_table(results_table(result), out_dir / RESULTS_FILE),
        write_table(pareto_table(result), out_dir / PARETO_FILE),
        write_table(summary_table(result), out_dir / SUMMARY_FILE),
    ]
    try:
        written.append(write_table(normalized_table(result, per_network), out_dir / NORMALIZED_FILE))
    except NormalizationError as e:
        logger.warning("normalization_skipped", reason=str(e))
    logger.info("sweep_written", out_dir=str(out_dir), rows=len(result.points))
    return written

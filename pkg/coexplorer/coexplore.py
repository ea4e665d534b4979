"""Joint exploration of accelerator configurations and network architectures."""
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
import structlog

from coexplorer.accuracy import AccuracyProvider
from coexplorer.arch_space import ArchSpace, IndexedArch, expand, sample_archs
from config.settings import settings
from explorer.normalize import ReferenceRule, reference_values
from explorer.pareto import ParetoSet, minimize, pareto_front
from explorer.sources import CostSource
from explorer.space import ConfigSpaceSpec, sample_space
from explorer.sweep import evaluate_configs, write_table
from shared.errors import ArchSpaceError
from shared.models import DesignPoint

logger = structlog.get_logger()

FRONTS = {
    "energy": (minimize("energy_norm"), minimize("top1_error")),
    "area": (minimize("area_norm"), minimize("top1_error")),
}
RESULTS_FILE = "coexplore.csv"
METRIC_COLUMNS = ("power_mw", "latency_s", "area_mm2", "energy_mj", "perf_per_area")


def _front_file(name: str) -> str:
    return f"pareto_{name}.csv"


class CoexploreResult:
    """Rows ordered by (arch_index, config_id) and one front per objective pair."""

    def __init__(self, rows: List[dict], fronts: Dict[str, ParetoSet], columns: Sequence[str],
                 reference: Dict[str, float]):
        self.rows = rows
        self.fronts = fronts
        self.columns = list(columns)
        self.reference = reference

    def table(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=self.columns)

    def front_table(self, name: str) -> pd.DataFrame:
        return pd.DataFrame(list(self.fronts[name].members), columns=self.columns)


def _row_id(row: dict, position: int):
    return (row["arch_index"], row["config_id"])


def coexplore(
    space: ArchSpace,
    cfg_spec: ConfigSpaceSpec,
    n_archs: int,
    provider: AccuracyProvider,
    source: CostSource,
    seed: int,
    n_cfgs: Optional[int] = None,
    input_a: Optional[int] = None,
    jobs: int = 1,
) -> CoexploreResult:
    """
    Evaluate every (sampled config, sampled architecture) pair.

    Energy and area are normalized to the minimum-energy and minimum-area
    INT16 pairs. Fronts: (energy, top-1 error) and (area, top-1 error).

    Args:
        space: Architecture space
        cfg_spec: Accelerator space to sample configurations from
        n_archs: Architectures to sample
        provider: Accuracy source
        source: Cost source
        seed: Root seed; architectures and configs draw from independent children
        n_cfgs: Configurations to sample
        input_a: Input feature map size of the expanded networks
        jobs: Worker processes

    Raises:
        ArchSpaceError: empty samples
        AccuracyLookupError: provider has no value for a pair
        NormalizationError: no INT16 pair
    """
    n_cfgs = n_cfgs or settings.coexplore_n_cfgs
    input_a = input_a or settings.coexplore_input_a
    arch_seq, cfg_seq = np.random.SeedSequence(seed).spawn(2)
    archs: List[IndexedArch] = sample_archs(space, n_archs, int(arch_seq.generate_state(1)[0]))
    configs = sample_space(cfg_spec, n_cfgs, int(cfg_seq.generate_state(1)[0]))
    if not configs:
        raise ArchSpaceError("no valid accelerator configuration to sample")

    nets = [expand(arch.choice, input_a) for arch in archs]
    points = evaluate_configs(configs, nets, source, jobs)
    by_pair: Dict[tuple, DesignPoint] = {(p.network, p.config_id): p for p in points}
    reference = reference_values(points, ReferenceRule.INT16_PER_METRIC)

    n_blocks = len(space.blocks)
    block_columns = [f"b{b + 1}_{part}" for b in range(n_blocks) for part in ("reps", "ch")]
    columns = [
        "arch_index", *block_columns, "config_id", "pe_type", *METRIC_COLUMNS,
        "energy_norm", "area_norm", "top1_percent", "top1_error",
    ]
    rows = []
    for arch, net in zip(archs, nets):
        blocks = {
            name: value
            for b, (reps, ch) in enumerate(arch.choice.selections)
            for name, value in ((f"b{b + 1}_reps", reps), (f"b{b + 1}_ch", ch))
        }
        for config_id, cfg in configs:
            p = by_pair[(net.name, config_id)]
            top1 = provider.top1(arch.arch_index, arch.choice, cfg.pe_type)
            rows.append({
                "arch_index": arch.arch_index,
                **blocks,
                "config_id": config_id,
                "pe_type": cfg.pe_type.value,
                **{m: getattr(p, m) for m in METRIC_COLUMNS},
                "energy_norm": p.energy_mj / reference["energy_mj"],
                "area_norm": p.area_mm2 / reference["area_mm2"],
                "top1_percent": top1,
                "top1_error": 100.0 - top1,
            })

    fronts = {name: pareto_front(rows, objectives, _row_id) for name, objectives in FRONTS.items()}
    member_ids = {name: set(front.member_ids) for name, front in fronts.items()}
    for row in rows:
        for name, ids in member_ids.items():
            row[f"pareto_{name}"] = int(_row_id(row, 0) in ids)
    columns += [f"pareto_{name}" for name in FRONTS]
    logger.info("coexplore_completed", archs=len(archs), configs=len(configs), pairs=len(rows),
                **{f"front_{name}": len(front) for name, front in fronts.items()})
    return CoexploreResult(rows, fronts, columns, reference)


def write_coexplore(result: CoexploreResult, out_dir: Union[str, Path]) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [write_table(result.table(), out_dir / RESULTS_FILE)]
    for name in result.fronts:
        written.append(write_table(result.front_table(name), out_dir / _front_file(name)))
    logger.info("coexplore_written", out_dir=str(out_dir), rows=len(result.rows))
    return written

"""Characterization datasets generated from the analytical oracle.

One power and one area table per PE type (a row per config) and one
latency table per PE type (a row per config and layer). Power and area
targets are the PE-array terms; the global-buffer term is not a feature.
"""
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import structlog

from config.settings import settings
from explorer.space import ConfigSpaceSpec, IndexedConfig, enumerate_space, sample_space
from oracle.cost_model import array_area, array_power, layer_cycles
from oracle.params import OracleParams, default_oracle_params
from shared.config_loader import dump_document, load_document
from shared.errors import DatasetError
from shared.models import NetworkConfig, PeType, Target

logger = structlog.get_logger()

HW_FEATURES = ("sp_if", "sp_ps", "sp_fw", "n_pe")
LATENCY_FEATURES = (
    "sp_if", "sp_ps", "sp_fw", "pe_rows", "pe_cols", "glb",
    "a", "c", "f", "k", "s", "p", "rs", "ds",
)
TARGET_COLUMN = "target"
LATENCY_TARGET_SCALE = "macs"
DATASET_INDEX = "dataset.json"

TableKey = Tuple[Target, PeType]


def feature_names(target: Target) -> Tuple[str, ...]:
    return LATENCY_FEATURES if target is Target.LATENCY else HW_FEATURES


def dataset_filename(target: Target, pe: PeType) -> str:
    return f"{target.value}_{pe.value}.csv"


def hw_features(cfg) -> Tuple[int, ...]:
    return (cfg.sp_if, cfg.sp_ps, cfg.sp_fw, cfg.n_pe)


def layer_features(layer) -> Tuple[int, ...]:
    return (layer.a, layer.c, layer.f, layer.k, layer.s, layer.p, layer.rs, layer.ds)


def latency_features(cfg, layer) -> Tuple[int, ...]:
    return (cfg.sp_if, cfg.sp_ps, cfg.sp_fw, cfg.pe_rows, cfg.pe_cols, cfg.glb) + layer_features(layer)


def latency_macs(X: np.ndarray) -> np.ndarray:
    """Layer MACs, E^2 * C * F * K^2, of latency feature rows."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(LATENCY_FEATURES):
        raise DatasetError(f"expected {len(LATENCY_FEATURES)} latency features, got shape {X.shape}")
    a, c, f, k, s, p = (X[:, LATENCY_FEATURES.index(name)] for name in ("a", "c", "f", "k", "s", "p"))
    e = np.floor((a + 2 * p - k) / s) + 1
    return e * e * c * f * k * k


def model_target(target: Target, X: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, Optional[str]]:
    """
    Values a surrogate of `target` is fitted on, and the name of their scale.

    Latency is fitted per layer MAC; percentage errors are unchanged by the
    division.
    """
    y = np.asarray(y, dtype=np.float64)
    if target is Target.LATENCY:
        return y / latency_macs(X), LATENCY_TARGET_SCALE
    return y, None


def _rows_for_chunk(
    chunk: Sequence[IndexedConfig],
    nets: Sequence[NetworkConfig],
    params: OracleParams,
) -> Tuple[list, list, list]:
    power_rows, area_rows, latency_rows = [], [], []
    for _, cfg in chunk:
        features = hw_features(cfg)
        power_rows.append(features + (array_power(cfg, params),))
        area_rows.append(features + (array_area(cfg, params),))
        clock = params.clock_hz(cfg.pe_type)
        for net in nets:
            for layer in net.layers:
                seconds = layer_cycles(cfg, layer, params) / clock
                latency_rows.append(latency_features(cfg, layer) + (seconds,))
    return power_rows, area_rows, latency_rows


def _chunks(items: Sequence, n: int) -> List[Sequence]:
    size = max(1, -(-len(items) // n))
    return [items[i:i + size] for i in range(0, len(items), size)]


def _frame(rows: list, features: Sequence[str]) -> pd.DataFrame:
    df = pd.DataFrame(rows, columns=[*features, TARGET_COLUMN])
    return df.astype({name: np.int64 for name in features})


class OracleDataset:
    """Per (target, PE type) tables plus the bandwidths they were generated at."""

    def __init__(self, tables: Dict[TableKey, pd.DataFrame], bw_values: Sequence[int]):
        self.tables = tables
        self.bw_values = tuple(sorted(set(bw_values)))

    def table(self, target: Target, pe: PeType) -> pd.DataFrame:
        try:
            return self.tables[(target, pe)]
        except KeyError:
            raise DatasetError(f"no {target.value} data for {pe.value}") from None

    @property
    def pe_types(self) -> List[PeType]:
        return [pe for pe in PeType if (Target.POWER, pe) in self.tables]


def gen_dataset(
    space: ConfigSpaceSpec,
    nets: Sequence[NetworkConfig],
    params: Optional[OracleParams] = None,
    seed: int = 0,
    max_configs: Optional[int] = None,
    jobs: int = 1,
) -> OracleDataset:
    """
    Characterize a design space with the oracle.

    Args:
        space: Accelerator design space
        nets: Networks whose layers populate the latency tables
        params: Oracle parameters
        seed: Seed for config subsampling
        max_configs: Sample this many configs instead of the full space
        jobs: Worker processes; output is independent of this value

    Returns:
        Tables ordered by (config index, network, layer index)

    Raises:
        DatasetError: empty space or network list
    """
    params = params or default_oracle_params()
    if not nets:
        raise DatasetError("no networks given")
    if max_configs is not None:
        configs = sample_space(space, max_configs, seed)
    else:
        configs = enumerate_space(space).configs
    if not configs:
        raise DatasetError("design space has no valid configuration")

    tables: Dict[TableKey, pd.DataFrame] = {}
    for pe in PeType:
        subset = [ic for ic in configs if ic.config.pe_type is pe]
        if not subset:
            continue
        parts = _chunks(subset, max(1, jobs))
        if jobs > 1 and len(parts) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(
                    _rows_for_chunk, parts, [nets] * len(parts), [params] * len(parts)
                ))
        else:
            results = [_rows_for_chunk(part, nets, params) for part in parts]
        power, area, latency = ([row for res in results for row in res[i]] for i in range(3))
        tables[(Target.POWER, pe)] = _frame(power, HW_FEATURES)
        tables[(Target.AREA, pe)] = _frame(area, HW_FEATURES)
        tables[(Target.LATENCY, pe)] = _frame(latency, LATENCY_FEATURES)
        logger.info("dataset_generated", pe_type=pe.value, configs=len(subset),
                    latency_rows=len(latency))
    return OracleDataset(tables, [ic.config.bw for ic in configs])


def write_dataset(dataset: OracleDataset, out_dir: Union[str, Path]) -> List[Path]:
    """
    Write every table as CSV plus a `dataset.json` index.

    Returns:
        Paths written, in a fixed order
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    index = {"pe_types": [], "bw": list(dataset.bw_values), "files": {}}
    for (target, pe), df in dataset.tables.items():
        path = out_dir / dataset_filename(target, pe)
        df.to_csv(path, index=False, float_format=settings.float_format, lineterminator="\n")
        written.append(path)
        index["files"][path.name] = {"target": target.value, "pe_type": pe.value, "rows": len(df)}
        if pe.value not in index["pe_types"]:
            index["pe_types"].append(pe.value)
    index_path = out_dir / DATASET_INDEX
    index_path.write_text(dump_document(index), encoding="utf-8")
    written.append(index_path)
    logger.info("dataset_written", out_dir=str(out_dir), files=len(written))
    return written


def read_dataset_index(dataset_dir: Union[str, Path]) -> dict:
    """The `dataset.json` index of a dataset directory."""
    path = Path(dataset_dir) / DATASET_INDEX
    if not path.exists():
        raise FileNotFoundError(f"dataset index not found: {path}")
    return load_document(path)


def load_table(
    dataset_dir: Union[str, Path], target: Target, pe: PeType
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Read one dataset table.

    Returns:
        (features, targets) as float arrays

    Raises:
        FileNotFoundError: missing table
        DatasetError: unexpected columns or non-finite values
    """
    path = Path(dataset_dir) / dataset_filename(target, pe)
    if not path.exists():
        raise FileNotFoundError(f"dataset table not found: {path}")
    df = pd.read_csv(path)
    expected = [*feature_names(target), TARGET_COLUMN]
    if list(df.columns) != expected:
        raise DatasetError(f"{path.name}: expected columns {expected}, got {list(df.columns)}")
    values = df.to_numpy(dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise DatasetError(f"{path.name}: non-finite values")
    logger.info("dataset_table_loaded", file=path.name, rows=len(df))
    return values[:, :-1], values[:, -1]

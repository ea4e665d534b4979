"""Cost sources: the analytical oracle and the fitted surrogates."""
from abc import ABC, abstractmethod
from operator import attrgetter
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from explorer.space import IndexedConfig
from oracle.cost_model import evaluate_cost, layer_macs
from oracle.dataset import LATENCY_TARGET_SCALE, layer_features
from oracle.params import OracleParams, default_oracle_params
from shared.errors import MissingModelError, ModelError
from shared.models import AcceleratorConfig, DesignPoint, NetworkConfig, PeType, Target
from surrogate.model import PolySurrogate, load_model, model_filename, predict_grid, predict_many

logger = structlog.get_logger()

ModelKey = Tuple[Target, PeType]

# leading latency features, then bandwidth
_CONFIG_COLUMNS = attrgetter("sp_if", "sp_ps", "sp_fw", "pe_rows", "pe_cols", "glb", "bw")
CONFIG_FEATURES = 6
BW_COLUMN = 6


class CostSource(ABC):
    """Turns (config, network) pairs into design points."""

    name: str = "base"

    def __init__(self, params: Optional[OracleParams] = None):
        self.params = params or default_oracle_params()

    @abstractmethod
    def evaluate(self, cfg: AcceleratorConfig, net: NetworkConfig, config_id: int = 0) -> DesignPoint:
        """Evaluate one pair."""

    def evaluate_batch(self, configs: Sequence[IndexedConfig], net: NetworkConfig) -> List[DesignPoint]:
        """Evaluate many configs against one network, in input order."""
        return [self.evaluate(cfg, net, config_id) for config_id, cfg in configs]

    def evaluate_sweep(self, configs: Sequence[IndexedConfig], nets: Sequence[NetworkConfig]) -> List[DesignPoint]:
        """Every config against every network, network-major."""
        return [point for net in nets for point in self.evaluate_batch(configs, net)]


class OracleSource(CostSource):
    """Ground-truth evaluation with the analytical oracle."""

    name = "oracle"

    def evaluate(self, cfg: AcceleratorConfig, net: NetworkConfig, config_id: int = 0) -> DesignPoint:
        record = evaluate_cost(cfg, net, self.params)
        return DesignPoint.from_metrics(
            cfg, config_id, net.name, record.power, record.latency, record.area, self.name
        )


class SurrogateSource(CostSource):
    """
    Evaluation with polynomial surrogates, one per (target, PE type).

    Power and area models predict the PE-array terms; the global-buffer
    term is added from the oracle parameters. Latency models predict
    per-layer seconds (per MAC when the model says so), floored at one
    clock cycle, summed over layers.
    """

    name = "surrogate"

    def __init__(
        self,
        models: Dict[ModelKey, PolySurrogate],
        params: Optional[OracleParams] = None,
    ):
        super().__init__(params)
        self.models = dict(models)

    @classmethod
    def from_dir(cls, models_dir: Union[str, Path], params: Optional[OracleParams] = None) -> "SurrogateSource":
        """Load every `{target}_{PE}.json` model present in a directory."""
        models_dir = Path(models_dir)
        if not models_dir.is_dir():
            raise FileNotFoundError(f"models directory not found: {models_dir}")
        models: Dict[ModelKey, PolySurrogate] = {}
        for target in Target:
            for pe in PeType:
                path = models_dir / model_filename(target, pe)
                if path.exists():
                    model = load_model(path)
                    if model.target not in (None, target) or model.pe_type not in (None, pe):
                        raise ModelError(f"{path.name} holds a {model.target}/{model.pe_type} model")
                    models[(target, pe)] = model
        logger.info("surrogates_loaded", models_dir=str(models_dir), count=len(models))
        return cls(models, params)

    def model(self, target: Target, pe: PeType) -> PolySurrogate:
        try:
            return self.models[(target, pe)]
        except KeyError:
            raise MissingModelError(f"no {target.value} model loaded for {pe.value}") from None

    def _check_bandwidth(self, model: PolySurrogate, bw_values: np.ndarray) -> None:
        bw = model.context.get("bw")
        if bw is None:
            return
        other = sorted(float(v) for v in set(bw_values.tolist()) if v != bw)
        if other:
            raise ModelError(
                f"{model.pe_type.value if model.pe_type else ''} latency model was characterized "
                f"at bw={bw:g}, cannot evaluate bw={other}"
            )

    @staticmethod
    def _layer_scale(model: PolySurrogate, net: NetworkConfig) -> Union[float, np.ndarray]:
        if model.target_scale is None:
            return 1.0
        if model.target_scale == LATENCY_TARGET_SCALE:
            return np.array([layer_macs(layer) for layer in net.layers], dtype=np.float64)
        raise ModelError(f"unknown latency target scale {model.target_scale!r}")

    def _predict_group(self, pe: PeType, table: np.ndarray, nets: Sequence[NetworkConfig]) -> np.ndarray:
        power_model = self.model(Target.POWER, pe)
        area_model = self.model(Target.AREA, pe)
        latency_model = self.model(Target.LATENCY, pe)
        self._check_bandwidth(latency_model, table[:, BW_COLUMN])

        hw = np.column_stack([table[:, :3], table[:, 3] * table[:, 4]])
        buffers = table[:, 5]
        out = np.empty((len(nets), table.shape[0], 3))
        out[:, :, 0] = predict_many(power_model, hw) + self.params.glb_power_mw_per_byte * buffers
        out[:, :, 2] = predict_many(area_model, hw) + self.params.glb_area_mm2_per_byte * buffers

        cfg_part = table[:, :CONFIG_FEATURES]
        cycle = 1.0 / self.params.clock_hz(pe)
        for j, net in enumerate(nets):
            layer_part = np.array([layer_features(layer) for layer in net.layers], dtype=np.float64)
            per_layer = predict_grid(latency_model, cfg_part, layer_part) * self._layer_scale(latency_model, net)
            out[j, :, 1] = np.maximum(per_layer, cycle).sum(axis=1)
        return out

    def predict_sweep(self, cfgs: Sequence[AcceleratorConfig], nets: Sequence[NetworkConfig]) -> np.ndarray:
        """
        Vectorized (power mW, latency s, area mm^2) of many configs on many networks.

        Config features are extracted once and shared by every network.

        Returns:
            (len(nets), len(cfgs), 3) array, configs in input order
        """
        out = np.empty((len(nets), len(cfgs), 3))
        if not cfgs:
            return out
        table = np.array([_CONFIG_COLUMNS(cfg) for cfg in cfgs], dtype=np.float64)
        by_type: Dict[PeType, List[int]] = {}
        for position, cfg in enumerate(cfgs):
            by_type.setdefault(cfg.pe_type, []).append(position)
        for pe, positions in by_type.items():
            index = np.array(positions, dtype=np.intp)
            out[:, index] = self._predict_group(pe, table[index], nets)
        return out

    def predict_metrics(self, cfgs: Sequence[AcceleratorConfig], net: NetworkConfig) -> np.ndarray:
        """(n, 3) metrics of many configs on one network, in input order."""
        return self.predict_sweep(cfgs, [net])[0]

    def evaluate(self, cfg: AcceleratorConfig, net: NetworkConfig, config_id: int = 0) -> DesignPoint:
        return self.evaluate_batch([IndexedConfig(config_id, cfg)], net)[0]

    def evaluate_batch(self, configs: Sequence[IndexedConfig], net: NetworkConfig) -> List[DesignPoint]:
        return self.evaluate_sweep(configs, [net])

    def evaluate_sweep(self, configs: Sequence[IndexedConfig], nets: Sequence[NetworkConfig]) -> List[DesignPoint]:
        metrics = self.predict_sweep([cfg for _, cfg in configs], nets)
        return [
            DesignPoint.from_metrics(cfg, config_id, net.name, power, latency, area, self.name)
            for net, rows in zip(nets, metrics.tolist())
            for (config_id, cfg), (power, latency, area) in zip(configs, rows)
        ]


def evaluate(cfg: AcceleratorConfig, net: NetworkConfig, source: CostSource, config_id: int = 0) -> DesignPoint:
    """Evaluate one (config, network) pair with a cost source."""
    return source.evaluate(cfg, net, config_id)

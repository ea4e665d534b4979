"""Shared fixtures."""
from pathlib import Path

import pytest

from config.settings import settings
from explorer.space import ConfigSpaceSpec
from oracle.params import default_oracle_params
from shared.config_loader import NetworkLibrary
from shared.models import AcceleratorConfig, LayerShape, NetworkConfig, PeType

PROJECT_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(autouse=True)
def isolated_registry(tmp_path, monkeypatch):
    """Keep run records out of the project data directory."""
    monkeypatch.setattr(settings, "run_registry_path", tmp_path / "registry" / "runs.db")
    yield


@pytest.fixture
def params():
    return default_oracle_params()


@pytest.fixture
def library():
    return NetworkLibrary(PROJECT_ROOT / "data" / "networks")


@pytest.fixture
def vgg16(library):
    return library.get("vgg16")


@pytest.fixture
def resnet20(library):
    return library.get("resnet20")


@pytest.fixture
def int16_config():
    return AcceleratorConfig(
        pe_type=PeType.INT16, pe_rows=12, pe_cols=14, sp_if=24, sp_fw=224,
        sp_ps=24, glb=131072, bw=16,
    )


def make_config(pe_type: PeType = PeType.INT16, **overrides) -> AcceleratorConfig:
    fields = dict(pe_type=pe_type, pe_rows=12, pe_cols=14, sp_if=24, sp_fw=224,
                  sp_ps=24, glb=131072, bw=16)
    fields.update(overrides)
    return AcceleratorConfig(**fields)


@pytest.fixture
def config_factory():
    return make_config


@pytest.fixture
def conv_layer():
    return LayerShape(a=56, c=64, f=64, k=3, s=1, p=1)


@pytest.fixture
def tiny_net():
    return NetworkConfig(name="tiny", layers=(
        LayerShape(a=16, c=3, f=16, k=3, s=1, p=1),
        LayerShape(a=16, c=16, f=32, k=3, s=2, p=1),
        LayerShape(a=8, c=32, f=32, k=3, s=1, p=1, rs=1),
    ))


@pytest.fixture
def small_space():
    """64 combinations, all valid, every PE type."""
    return ConfigSpaceSpec(
        pe_types=tuple(PeType),
        pe_rows=(4, 8),
        pe_cols=(4, 8),
        sp_if=(12, 24),
        sp_fw=(112, 224),
        sp_ps=(16,),
        glb=(65536,),
        bw=(16,),
    )

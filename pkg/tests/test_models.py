"""Config and network documents, geometry and the shipped layer tables."""
import json

import pytest

from shared.config_loader import (
    accelerator_config_to_dict,
    load_document,
    load_network,
    load_networks,
    network_to_dict,
    parse_accelerator_config,
    serialize_accelerator_config,
    serialize_network,
)
from shared.errors import ConfigError, GeometryError, NetworkError
from shared.geometry import conv_output_dim
from shared.models import LayerShape, PeType

CONFIG_DOC = {
    "pe_type": "INT16", "pe_rows": 12, "pe_cols": 14, "sp_if": 24,
    "sp_fw": 224, "sp_ps": 24, "glb": 131072, "bw": 16,
}


@pytest.mark.parametrize("a,k,s,p,expected", [
    (1, 1, 1, 0, 1),
    (8, 3, 1, 0, 6),
    (224, 3, 2, 1, 112),
])
def test_conv_output_dim(a, k, s, p, expected):
    assert conv_output_dim(a, k, s, p) == expected


def test_conv_output_dim_rejects_oversized_kernel():
    with pytest.raises(GeometryError):
        conv_output_dim(2, 5, 1, 1)


def test_output_dim_monotone():
    for a in range(3, 20):
        for k in (1, 3, 5):
            for s in (1, 2):
                for p in (0, 1, 2):
                    e = conv_output_dim(a, k, s, p)
                    assert conv_output_dim(a + 1, k, s, p) >= e
                    assert conv_output_dim(a, k, s, p + 1) >= e
                    assert conv_output_dim(a, k, s + 1, p) <= e
                    if a + 2 * p >= k + 2:
                        assert conv_output_dim(a, k + 2, s, p) <= e


def test_parse_accelerator_config():
    cfg = parse_accelerator_config(json.dumps(CONFIG_DOC))
    assert cfg.pe_type is PeType.INT16
    assert cfg.n_pe == 12 * 14
    assert parse_accelerator_config(serialize_accelerator_config(cfg)) == cfg


def test_serialized_config_has_stable_field_order():
    cfg = parse_accelerator_config(json.dumps(dict(reversed(list(CONFIG_DOC.items())))))
    assert list(accelerator_config_to_dict(cfg)) == list(CONFIG_DOC)
    assert serialize_accelerator_config(cfg).endswith("}\n")


@pytest.mark.parametrize("change,field,fragment", [
    ({"pe_type": "INT4"}, "pe_type", "unknown pe_type"),
    ({"pe_rows": 0}, "pe_rows", "non-positive"),
    ({"glb": 100}, "glb", "exceeds glb"),
])
def test_parse_accelerator_config_errors(change, field, fragment):
    with pytest.raises(ConfigError) as info:
        parse_accelerator_config(json.dumps({**CONFIG_DOC, **change}))
    assert info.value.field == field
    assert fragment in str(info.value)


def test_parse_accelerator_config_missing_field():
    doc = {k: v for k, v in CONFIG_DOC.items() if k != "bw"}
    with pytest.raises(ConfigError) as info:
        parse_accelerator_config(json.dumps(doc))
    assert info.value.field == "bw"
    assert "missing" in str(info.value)


def test_load_network_single_layer_defaults_skip_flags():
    net = load_network(json.dumps({"name": "one", "layers": [{"a": 4, "c": 1, "f": 1, "k": 1, "s": 1, "p": 0}]}))
    assert len(net.layers) == 1
    assert net.layers[0].rs == 0 and net.layers[0].ds == 0
    assert load_network(serialize_network(net)) == net


def test_load_network_rejects_both_skip_flags():
    doc = {"name": "bad", "layers": [{"a": 4, "c": 1, "f": 1, "k": 1, "s": 1, "p": 0, "rs": 1, "ds": 1}]}
    with pytest.raises(NetworkError) as info:
        load_network(json.dumps(doc))
    assert info.value.layer_index == 0


def test_load_network_rejects_empty_layers():
    with pytest.raises(NetworkError):
        load_network(json.dumps({"name": "empty", "layers": []}))


def test_channel_chaining_names_layer():
    doc = {"name": "broken", "layers": [
        {"a": 8, "c": 3, "f": 16, "k": 3, "s": 1, "p": 1},
        {"a": 8, "c": 8, "f": 16, "k": 3, "s": 1, "p": 1},
    ]}
    with pytest.raises(NetworkError) as info:
        load_network(json.dumps(doc))
    assert info.value.layer_index == 1


def test_pool_annotation_exempts_chaining_and_round_trips():
    doc = {"name": "pooled", "layers": [
        {"a": 8, "c": 3, "f": 16, "k": 3, "s": 1, "p": 1},
        {"a": 4, "c": 8, "f": 16, "k": 3, "s": 1, "p": 1, "pool": True},
    ]}
    net = load_network(json.dumps(doc))
    assert net.layers[1].pool
    layers = network_to_dict(net)["layers"]
    assert "pool" not in layers[0] and layers[1]["pool"] is True


def test_yaml_documents(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("\n".join(f"{k}: {v}" for k, v in CONFIG_DOC.items()) + "\n")
    assert load_document(path) == CONFIG_DOC


def test_layer_shape_rejects_negative_padding():
    with pytest.raises(ValueError):
        LayerShape(a=8, c=1, f=1, k=3, s=1, p=-1)


@pytest.mark.parametrize("name,layers", [
    ("vgg16", 13), ("resnet20", 19), ("resnet34", 33), ("resnet50", 49), ("resnet56", 55),
])
def test_shipped_networks(library, name, layers):
    net = library.get(name)
    assert net.name == name
    assert len(net.layers) == layers


def test_resnets_carry_skip_flags(library):
    for name in ("resnet20", "resnet34", "resnet50", "resnet56"):
        net = library.get(name)
        assert any(layer.rs for layer in net.layers)
        assert any(layer.ds for layer in net.layers)
    assert not any(layer.rs or layer.ds for layer in library.get("vgg16").layers)


def test_load_networks_sorted_by_file_name(library):
    names = [net.name for net in load_networks(library.networks_dir)]
    assert names == ["resnet20", "resnet34", "resnet50", "resnet56", "vgg16"]


def test_library_missing_network(library):
    with pytest.raises(FileNotFoundError):
        library.get("alexnet")

"""End-to-end command-line runs."""
import json
from pathlib import Path

import pandas as pd
import pytest

from cli.manifest import MANIFEST_FILE, SCHEMA_VERSION, read_manifest
from explorer.space import ConfigSpaceSpec, serialize_space
from main import main
from shared.config_loader import serialize_network
from shared.models import LayerShape, NetworkConfig

PROJECT_ROOT = Path(__file__).resolve().parent.parent
RESNET20 = PROJECT_ROOT / "data" / "networks" / "resnet20.json"

CLI_SPACE = ConfigSpaceSpec(
    pe_types=("INT16", "LightPE1"),
    pe_rows=(4, 8, 12),
    pe_cols=(4, 8, 14),
    sp_if=(12, 24),
    sp_fw=(112, 224),
    sp_ps=(16, 24),
    glb=(65536,),
    bw=(16,),
)


@pytest.fixture
def inputs(tmp_path):
    """A space file and a networks directory shared by every run."""
    root = tmp_path / "inputs"
    nets = root / "nets"
    nets.mkdir(parents=True)
    (root / "space.json").write_text(serialize_space(CLI_SPACE))
    (nets / "resnet20.json").write_bytes(RESNET20.read_bytes())
    tiny = NetworkConfig(name="tiny", layers=(
        LayerShape(a=16, c=3, f=16, k=3, s=1, p=1),
        LayerShape(a=16, c=16, f=32, k=3, s=2, p=1),
    ))
    (nets / "tiny.json").write_text(serialize_network(tiny))
    return root


def run_pipeline(inputs: Path, root: Path, jobs: int) -> Path:
    space, nets = inputs / "space.json", inputs / "nets"
    common = ["--seed", "7", "--jobs", str(jobs)]
    assert main(["oracle-gen", "--space", str(space), "--nets", str(nets),
                 "--out", str(root / "dataset"), *common]) == 0
    assert main(["fit", "--dataset", str(root / "dataset"), "--degrees", "1", "2",
                 "--out", str(root / "models"), *common]) == 0
    assert main(["sweep", "--space", str(space), "--nets", str(nets), "--models", str(root / "models"),
                 "--out", str(root / "sweep"), *common]) == 0
    assert main(["coexplore", "--space", str(space), "--models", str(root / "models"),
                 "--n-archs", "2", "--n-cfgs", "200", "--input-a", "32",
                 "--out", str(root / "coexplore"), *common]) == 0
    return root


@pytest.fixture
def pipeline(inputs, tmp_path):
    return run_pipeline(inputs, tmp_path / "run", jobs=1)


def tree_bytes(root: Path) -> dict:
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_pipeline_is_byte_identical_across_runs_and_jobs(inputs, pipeline, tmp_path):
    again = run_pipeline(inputs, tmp_path / "again", jobs=2)
    first, second = tree_bytes(pipeline), tree_bytes(again)
    assert sorted(first) == sorted(second)
    for name, data in first.items():
        assert data == second[name], name


def test_oracle_gen_outputs(pipeline):
    dataset = pipeline / "dataset"
    latency = pd.read_csv(dataset / "latency_INT16.csv")
    n_configs = 3 * 3 * 2 * 2 * 2
    assert len(latency) == n_configs * (19 + 2)
    assert len(pd.read_csv(dataset / "power_LightPE1.csv")) == n_configs
    assert not (dataset / "power_FP32.csv").exists()

    manifest = read_manifest(dataset)
    assert manifest.schema_version == SCHEMA_VERSION
    assert manifest.command == "oracle-gen"
    assert manifest.seed == 7
    assert "jobs" not in manifest.params and "out" not in manifest.params
    assert manifest.params["space"] == "space.json"
    assert sorted(manifest.inputs) == [
        "networks/resnet20.json", "networks/tiny.json", "params/oracle_defaults.json", "space/space.json",
    ]
    assert MANIFEST_FILE not in manifest.outputs
    assert "latency_INT16.csv" in manifest.outputs


def test_fit_outputs(pipeline):
    models = pipeline / "models"
    report = json.loads((models / "power_INT16.report.json").read_text())
    assert report["chosen_K"] == 2
    assert report["model_file"] == "power_INT16.json"
    assert set(report["degrees"]["1"]) == {"cv_mape", "cv_rmspe"}
    latency = json.loads((models / "latency_LightPE1.json").read_text())
    assert latency["context"] == {"bw": 16}
    assert not (models / "area_FP32.json").exists()


def test_fit_forced_degree(pipeline, tmp_path):
    out = tmp_path / "forced"
    assert main(["fit", "--dataset", str(pipeline / "dataset"), "--target", "area",
                 "--pe-type", "INT16", "--degree", "3", "--out", str(out)]) == 0
    report = json.loads((out / "area_INT16.report.json").read_text())
    assert report["chosen_K"] == 3 and report["forced"]
    assert sorted(p.name for p in out.iterdir()) == [
        "area_INT16.json", "area_INT16.report.json", MANIFEST_FILE,
    ]


def test_sweep_outputs_consistent(pipeline, inputs, tmp_path):
    sweep_dir = pipeline / "sweep"
    results = pd.read_csv(sweep_dir / "results.csv")
    front = pd.read_csv(sweep_dir / "pareto.csv")
    flagged = results[results["pareto"] == 1]
    assert sorted(zip(front["config_id"], front["net"])) == sorted(zip(flagged["config_id"], flagged["net"]))
    assert set(results["source"]) == {"surrogate"}

    summary = pd.read_csv(sweep_dir / "summary.csv")
    for net in ("resnet20", "tiny"):
        assert set(summary[summary["net"] == net]["pe_type"]) == {"INT16", "LightPE1"}

    oracle_dir = tmp_path / "oracle-sweep"
    assert main(["sweep", "--space", str(inputs / "space.json"), "--nets", str(inputs / "nets"),
                 "--oracle", "--out", str(oracle_dir)]) == 0
    oracle = pd.read_csv(oracle_dir / "results.csv")
    assert list(oracle["config_id"]) == list(results["config_id"])
    assert list(oracle["net"]) == list(results["net"])
    assert set(oracle["source"]) == {"oracle"}


def test_sweep_manifest_pins_models(pipeline):
    manifest = read_manifest(pipeline / "sweep")
    assert manifest.params["models"] == "models"
    assert "models/latency_INT16.json" in manifest.inputs
    assert manifest.outputs == ["normalized.csv", "pareto.csv", "results.csv", "summary.csv"]


def test_sweep_accuracy_tradeoff(inputs, tmp_path):
    table = tmp_path / "accuracy.csv"
    table.write_text(
        "network,pe_type,top1_percent\n"
        "resnet20,INT16,91.6\nresnet20,LightPE1,90.1\ntiny,INT16,80.0\ntiny,LightPE1,79.0\n"
    )
    out = tmp_path / "tradeoff"
    assert main(["sweep", "--space", str(inputs / "space.json"), "--nets", str(inputs / "nets"),
                 "--oracle", "--accuracy-table", str(table), "--out", str(out)]) == 0
    perf = pd.read_csv(out / "tradeoff_perf_accuracy.csv")
    assert len(perf) == 4
    assert "accuracy/accuracy.csv" in read_manifest(out).inputs


def test_coexplore_outputs(pipeline):
    table = pd.read_csv(pipeline / "coexplore" / "coexplore.csv")
    assert len(table) == 2 * 144
    assert set(table["pe_type"]) == {"INT16", "LightPE1"}
    assert table[table["pe_type"] == "INT16"]["energy_norm"].min() == pytest.approx(1.0)
    assert len(pd.read_csv(pipeline / "coexplore" / "pareto_area.csv")) == table["pareto_area"].sum()


def test_coexplore_prints_space_size(inputs, tmp_path, capsys):
    assert main(["coexplore", "--space", str(inputs / "space.json"), "--oracle", "--n-archs", "1",
                 "--n-cfgs", "200", "--out", str(tmp_path / "co")]) == 0
    assert "architecture space size: 110,592" in capsys.readouterr().out


def test_predict(inputs, tmp_path, capsys):
    config = tmp_path / "cfg.yaml"
    config.write_text("pe_type: INT16\npe_rows: 12\npe_cols: 14\nsp_if: 24\nsp_fw: 224\n"
                      "sp_ps: 24\nglb: 131072\nbw: 16\n")
    out = tmp_path / "predict"
    assert main(["predict", "--config", str(config), "--network", "resnet20", "--out", str(out)]) == 0
    printed = json.loads(capsys.readouterr().out)
    document = json.loads((out / "prediction.json").read_text())
    assert document["source"] == "oracle"
    assert printed["energy_mj"] == pytest.approx(document["power_mw"] * document["latency_s"])
    assert sorted(read_manifest(out).inputs) == [
        "config/cfg.yaml", "networks/resnet20.json", "params/oracle_defaults.json",
    ]


def test_report_prints_manifest(pipeline, capsys):
    capsys.readouterr()
    assert main(["report", str(pipeline / "sweep")]) == 0
    out = capsys.readouterr().out
    assert "command:      sweep" in out
    assert "results.csv" in out


def test_report_history(pipeline, capsys):
    capsys.readouterr()
    assert main(["report", "--history"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4
    assert lines[0].split()[1] == "coexplore"
    assert all(" ok " in line for line in lines)

    assert main(["report", "--history", "--command", "fit"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1 and lines[0].split()[1] == "fit"


def test_report_history_empty(capsys):
    assert main(["report", "--history"]) == 0
    assert "no runs recorded" in capsys.readouterr().out


def test_failed_run_is_recorded(tmp_path, capsys):
    assert main(["oracle-gen", "--nets", str(tmp_path / "missing"), "--out", str(tmp_path / "o")]) == 2
    assert main(["report", "--history"]) == 0
    assert " failed " in capsys.readouterr().out


def test_missing_nets_path_names_it(tmp_path, capsys):
    missing = tmp_path / "no-such-nets"
    assert main(["oracle-gen", "--nets", str(missing), "--out", str(tmp_path / "o")]) == 2
    assert str(missing) in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["sweep", "--out", "x"],
    ["sweep", "--oracle", "--models", "m"],
    ["fit"],
    ["fit", "--dataset", "d", "--holdout", "1.5"],
    ["sweep", "--oracle", "--jobs", "0"],
])
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err


def test_invalid_config_exits_2(tmp_path, capsys):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"pe_type": "INT4", "pe_rows": 1, "pe_cols": 1, "sp_if": 1,
                                  "sp_fw": 1, "sp_ps": 1, "glb": 8, "bw": 1}))
    assert main(["predict", "--config", str(config), "--network", "resnet20",
                 "--out", str(tmp_path / "p")]) == 2
    assert "pe_type" in capsys.readouterr().err


def test_surrogate_miss_exits_2(inputs, tmp_path):
    empty_models = tmp_path / "models"
    empty_models.mkdir()
    assert main(["sweep", "--space", str(inputs / "space.json"), "--nets", str(inputs / "nets"),
                 "--models", str(empty_models), "--out", str(tmp_path / "s")]) == 2


def test_internal_error_exits_3(inputs, tmp_path, monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr("cli.commands.sweep", boom)
    assert main(["sweep", "--space", str(inputs / "space.json"), "--nets", str(inputs / "nets"),
                 "--oracle", "--out", str(tmp_path / "s")]) == 3
    assert "boom" in capsys.readouterr().err


def test_fit_rejects_mixed_bandwidths_before_writing(inputs, tmp_path, capsys):
    space = tmp_path / "two_bw.json"
    space.write_text(serialize_space(CLI_SPACE.restrict(pe_types=["INT16"], bw=[16, 32])))
    assert main(["oracle-gen", "--space", str(space), "--nets", str(inputs / "nets"),
                 "--out", str(tmp_path / "dataset")]) == 0
    models = tmp_path / "models"
    assert main(["fit", "--dataset", str(tmp_path / "dataset"), "--target", "all",
                 "--degrees", "1", "2", "--out", str(models)]) == 2
    assert "bandwidths" in capsys.readouterr().err
    assert not models.exists() or not any(p.is_file() for p in models.rglob("*"))

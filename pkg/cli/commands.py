"""Subcommand implementations.

Each command takes the parsed arguments, writes its artifacts under
`args.out` and returns a `CommandOutcome`; `main.py` turns that into the
run manifest.
"""
import argparse
import json
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import structlog

from cli.manifest import read_manifest
from coexplorer.accuracy import AccuracyProvider, SyntheticAccuracyProvider, TableAccuracyProvider
from coexplorer.arch_space import default_arch_space, space_size
from coexplorer.coexplore import coexplore, write_coexplore
from config.settings import settings
from database.sqlite_db import get_registry
from explorer.normalize import METRICS
from explorer.sources import CostSource, OracleSource, SurrogateSource
from explorer.space import load_space
from explorer.sweep import sweep, write_sweep, write_table
from explorer.tradeoff import (
    ENERGY_ERROR_FILE,
    PERF_ACCURACY_FILE,
    accuracy_tradeoff,
    load_accuracy_table,
)
from oracle.dataset import (
    DATASET_INDEX,
    dataset_filename,
    feature_names,
    gen_dataset,
    load_table,
    model_target,
    read_dataset_index,
    write_dataset,
)
from oracle.params import OracleParams, load_oracle_params
from shared.config_loader import (
    NetworkLibrary,
    accelerator_config_from_dict,
    accelerator_config_to_dict,
    dump_document,
    load_document,
    load_network_file,
    load_networks,
)
from shared.errors import DatasetError
from shared.models import NetworkConfig, PeType, Target
from shared.utils import digest_files, format_count, sha256_file
from surrogate.model import model_filename, report_filename, save_model
from surrogate.selection import fit_with_selection

logger = structlog.get_logger()

PREDICTION_FILE = "prediction.json"
NETWORK_SUFFIXES = (".json", ".yaml", ".yml")
UNRECORDED_ARGS = ("command", "handler", "jobs", "out", "log_level", "seed")


class CommandOutcome(NamedTuple):
    """Files a command wrote and the input digests it depends on."""
    outputs: List[Path]
    inputs: Dict[str, str]


def recorded_params(args: argparse.Namespace) -> Dict[str, Any]:
    """
    Resolved parameters as they enter the manifest.

    Paths are recorded by file name so that the manifest does not depend on
    where inputs or outputs live; their content is pinned by digest.
    """
    def plain(value: Any) -> Any:
        if isinstance(value, Path):
            return value.name
        if isinstance(value, (list, tuple)):
            return [plain(v) for v in value]
        return value

    return {
        key: plain(value)
        for key, value in sorted(vars(args).items())
        if key not in UNRECORDED_ARGS
    }


def _prefixed(prefix: str, digests: Dict[str, str]) -> Dict[str, str]:
    return {f"{prefix}/{name}": digest for name, digest in digests.items()}


def _network_files(paths: Sequence[Path]) -> List[Path]:
    """Directories expand to their network documents, sorted by name."""
    files: List[Path] = []
    for path in paths:
        path = Path(path)
        if path.is_dir():
            files.extend(sorted(p for p in path.iterdir() if p.suffix in NETWORK_SUFFIXES))
        elif path.exists():
            files.append(path)
        else:
            raise FileNotFoundError(f"networks path not found: {path}")
    return files


def _load_nets(paths: Sequence[Path]) -> Tuple[List[NetworkConfig], Dict[str, str]]:
    files = _network_files(paths)
    return load_networks(files), _prefixed("networks", digest_files(files))


def _load_params(path: Path) -> Tuple[OracleParams, Dict[str, str]]:
    return load_oracle_params(path), {f"params/{path.name}": sha256_file(path)}


def _cost_source(args: argparse.Namespace, params: OracleParams) -> Tuple[CostSource, Dict[str, str]]:
    if args.models is None:
        return OracleSource(params), {}
    source = SurrogateSource.from_dir(args.models, params)
    files = sorted(
        args.models / model_filename(target, pe) for target, pe in source.models
    )
    return source, _prefixed("models", digest_files(files))


# oracle-gen

def cmd_oracle_gen(args: argparse.Namespace) -> CommandOutcome:
    """Characterize a design space with the oracle and write the dataset tables."""
    space = load_space(args.space)
    nets, inputs = _load_nets(args.nets)
    params, param_inputs = _load_params(args.params)
    dataset = gen_dataset(space, nets, params, seed=args.seed, max_configs=args.max_configs, jobs=args.jobs)
    written = write_dataset(dataset, args.out)

    for (target, pe), df in dataset.tables.items():
        print(f"{dataset_filename(target, pe)}: {format_count(len(df))} rows")
    inputs.update(param_inputs)
    inputs[f"space/{args.space.name}"] = sha256_file(args.space)
    return CommandOutcome(written, inputs)


# fit

def _fit_keys(args: argparse.Namespace) -> List[Tuple[Target, PeType]]:
    targets = list(Target) if args.target == "all" else [Target(args.target)]
    pe_types = list(PeType) if args.pe_type == "all" else [PeType(args.pe_type)]
    keys = [(t, pe) for t in targets for pe in pe_types]
    if args.target == "all" or args.pe_type == "all":
        keys = [(t, pe) for t, pe in keys if (args.dataset / dataset_filename(t, pe)).exists()]
    if not keys:
        raise DatasetError(f"no dataset tables to fit in {args.dataset}")
    return keys


def _degree_range(args: argparse.Namespace, target: Target) -> range:
    if args.degrees:
        lo, hi = args.degrees
    elif target is Target.LATENCY:
        lo, hi = settings.degree_range_latency
    else:
        lo, hi = settings.degree_range_hw
    return range(lo, hi + 1)


def _latency_context(index: dict) -> Dict[str, float]:
    bw_values = index.get("bw", [])
    if len(bw_values) != 1:
        raise DatasetError(
            f"latency tables span bandwidths {bw_values}; fit one dataset per bandwidth"
        )
    return {"bw": bw_values[0]}


def cmd_fit(args: argparse.Namespace) -> CommandOutcome:
    """Fit one surrogate per (target, PE type) table, selecting the degree by CV."""
    index = read_dataset_index(args.dataset)
    keys = _fit_keys(args)
    written: List[Path] = []
    used = [args.dataset / DATASET_INDEX]
    out = Path(args.out)
    latency_context = (
        _latency_context(index) if any(t is Target.LATENCY for t, _ in keys) else None
    )
    for target, pe in keys:
        X, y = load_table(args.dataset, target, pe)
        used.append(args.dataset / dataset_filename(target, pe))
        is_latency = target is Target.LATENCY
        y, target_scale = model_target(target, X, y)
        model, report = fit_with_selection(
            X, y,
            K_range=_degree_range(args, target),
            folds=args.folds,
            seed=args.seed,
            holdout=args.holdout,
            degree=args.degree,
            target=target,
            pe_type=pe,
            feature_names=feature_names(target),
            context=latency_context if is_latency else None,
            target_scale=target_scale,
            max_rows=settings.latency_max_rows if is_latency else None,
        )
        written.append(save_model(model, out / model_filename(target, pe)))
        report_path = out / report_filename(target, pe)
        report_path.write_text(dump_document({
            "target": target.value,
            "pe_type": pe.value,
            "model_file": model_filename(target, pe),
            **report.to_document(),
        }), encoding="utf-8")
        written.append(report_path)
        heldout = "n/a" if report.heldout_mape is None else f"{report.heldout_mape:.4g}%"
        print(f"{target.value:<8} {pe.value:<9} K={report.chosen_K} held-out MAPE={heldout}")
    return CommandOutcome(written, _prefixed("dataset", digest_files(used)))


# predict

def _resolve_network(name_or_path: str) -> Path:
    path = Path(name_or_path)
    if path.suffix in NETWORK_SUFFIXES or path.exists():
        return path
    return NetworkLibrary(settings.networks_dir).networks_dir / f"{name_or_path}.json"


def cmd_predict(args: argparse.Namespace) -> CommandOutcome:
    """Evaluate one accelerator config on one network."""
    cfg = accelerator_config_from_dict(load_document(args.config))
    net_path = _resolve_network(args.network)
    net = load_network_file(net_path)
    params, inputs = _load_params(args.params)
    source, model_inputs = _cost_source(args, params)
    point = source.evaluate(cfg, net)

    document = {
        "config": accelerator_config_to_dict(cfg),
        "network": net.name,
        "source": point.source,
        **{m: getattr(point, m) for m in METRICS},
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / PREDICTION_FILE
    path.write_text(dump_document(document), encoding="utf-8")
    print(json.dumps({m: document[m] for m in METRICS}, indent=2))

    inputs.update(model_inputs)
    inputs[f"config/{args.config.name}"] = sha256_file(args.config)
    inputs[f"networks/{net_path.name}"] = sha256_file(net_path)
    return CommandOutcome([path], inputs)


# sweep

def cmd_sweep(args: argparse.Namespace) -> CommandOutcome:
    """Evaluate a whole space on every network; write results, fronts and summaries."""
    space = load_space(args.space)
    nets, inputs = _load_nets(args.nets)
    params, param_inputs = _load_params(args.params)
    source, model_inputs = _cost_source(args, params)
    result = sweep(space, nets, source, jobs=args.jobs)
    written = write_sweep(result, args.out, per_network=not args.global_reference)

    if args.accuracy_table is not None:
        perf, energy = accuracy_tradeoff(result.points, load_accuracy_table(args.accuracy_table))
        written.append(write_table(perf, Path(args.out) / PERF_ACCURACY_FILE))
        written.append(write_table(energy, Path(args.out) / ENERGY_ERROR_FILE))
        inputs[f"accuracy/{args.accuracy_table.name}"] = sha256_file(args.accuracy_table)

    for net in result.networks:
        front = result.fronts.get(net)
        print(f"{net}: {format_count(sum(p.network == net for p in result.points))} points, "
              f"{len(front) if front else 0} on the front")
    inputs.update(param_inputs)
    inputs.update(model_inputs)
    inputs[f"space/{args.space.name}"] = sha256_file(args.space)
    return CommandOutcome(written, inputs)


# coexplore

def _accuracy_provider(args: argparse.Namespace) -> Tuple[AccuracyProvider, Dict[str, str]]:
    if args.accuracy_table is None:
        return SyntheticAccuracyProvider(), {}
    provider = TableAccuracyProvider.from_csv(args.accuracy_table)
    return provider, {f"accuracy/{args.accuracy_table.name}": sha256_file(args.accuracy_table)}


def cmd_coexplore(args: argparse.Namespace) -> CommandOutcome:
    """Sample architectures and configurations and extract the joint fronts."""
    arch_space = default_arch_space()
    print(f"architecture space size: {format_count(space_size(arch_space))}")
    cfg_spec = load_space(args.space)
    params, inputs = _load_params(args.params)
    source, model_inputs = _cost_source(args, params)
    provider, accuracy_inputs = _accuracy_provider(args)
    result = coexplore(
        arch_space,
        cfg_spec,
        n_archs=args.n_archs,
        provider=provider,
        source=source,
        seed=args.seed,
        n_cfgs=args.n_cfgs,
        input_a=args.input_a,
        jobs=args.jobs,
    )
    written = write_coexplore(result, args.out)
    print(f"pairs evaluated: {format_count(len(result.rows))}")
    for name, front in result.fronts.items():
        print(f"{name} front: {len(front)} pairs")

    inputs.update(model_inputs)
    inputs.update(accuracy_inputs)
    inputs[f"space/{args.space.name}"] = sha256_file(args.space)
    return CommandOutcome(written, inputs)


# report

def cmd_report(args: argparse.Namespace) -> Optional[CommandOutcome]:
    """Print a run's manifest, or the run history from the registry."""
    if args.history:
        runs = get_registry().list_runs(command=args.filter_command, limit=args.limit)
        for run in runs:
            finished = run.finished_at.isoformat(timespec="seconds") if run.finished_at else "-"
            print(f"{run.id}  {run.command:<11} {run.status:<8} {finished}  {run.out_dir}")
        if not runs:
            print("no runs recorded")
        return None

    if args.run_dir is None:
        raise FileNotFoundError("report needs a run directory or --history")
    manifest = read_manifest(args.run_dir)
    print(f"command:      {manifest.command}")
    print(f"tool version: {manifest.tool_version}")
    print(f"seed:         {manifest.seed}")
    print("params:")
    for key, value in manifest.params.items():
        print(f"  {key} = {value}")
    print("inputs:")
    for name, digest in manifest.inputs.items():
        print(f"  {name}  {digest[:12]}")
    print("outputs:")
    for name in manifest.outputs:
        print(f"  {name}")
    return None

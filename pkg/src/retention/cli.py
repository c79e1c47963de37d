"""Command-line front end.

Subcommands: ``train`` (fit and persist the stay/leave model), ``eval``
(score a labeled CSV with a saved model), ``plan`` (learn and print the
cheapest intervention sequence for one employee), ``verify`` (cross-check
the planner against the exhaustive search oracle).

Every run writes its machine-readable artifacts plus rendered figures into
``--out`` and drops a ``run_manifest.json`` describing inputs, resolved
configuration and timing. The manifest is a run log (it contains the
wall-clock duration); all other JSON/CSV artifacts are byte-reproducible
for a fixed seed. Any flag can also be supplied via a ``RETENTION_``
environment variable (e.g. ``RETENTION_SEED=7``).

Exit codes: 0 success, 2 usage, 3 I/O, 4 schema, 5 numeric,
10 plan did not reach the target.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import yaml

from .actions import ActionCatalog, EmployeeAgent, load_catalog, validate_catalog
from .dataset import SchemaConfig, encode, load_csv, split
from .errors import InputError, RetentionError, SchemaError, UsageError
from .mlp import MlpModel, TrainConfig, evaluate, load_model, save_model, train
from .oracle import bfs_shortest_plan
from .planner import (Plan, PlannerConfig, discretize, extract_plan,
                      save_qtable, train_planner)
from . import reports

ENV_PREFIX = "RETENTION_"
EXIT_NOT_REACHED = 10


@dataclass
class RunManifest:
    """Record of one CLI invocation: what ran, on what, producing what."""

    subcommand: str
    config: dict
    inputs: dict
    seed: int
    outputs: list
    duration_seconds: float


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _load_run_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise SchemaError(f"malformed config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"config {path} must be a mapping")
    return doc


def _build_config(cls, section: dict, seed: int | None, context: str):
    if seed is not None:
        section = {**section, "seed": seed}
    try:
        return cls(**section)
    except TypeError as exc:
        raise SchemaError(f"bad {context} config: {exc}") from exc


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish(out: Path, manifest: RunManifest):
    manifest.outputs.append(str(out / "run_manifest.json"))
    reports.write_json(asdict(manifest), out / "run_manifest.json")


def _schema_from_model(model: MlpModel, csv_path) -> SchemaConfig:
    """Reconstruct a file layout for a CSV from the model's codec: the
    model's features and label are required, any other column is dropped."""
    try:
        with open(csv_path, newline="", encoding="utf-8") as fh:
            header_line = fh.readline()
    except OSError as exc:
        raise InputError(f"cannot read {csv_path}: {exc}") from exc
    header = [c.strip() for c in header_line.rstrip("\n").split(",")]
    codec = model.codec
    known = set(codec.feature_names) | {codec.label_column}
    return SchemaConfig(
        feature_columns=codec.feature_names,
        categorical_columns=tuple(codec.categorical_levels),
        dropped_columns=tuple(c for c in header if c not in known),
        label_column=codec.label_column,
        label_positive=codec.label_positive,
        label_negative=codec.label_negative,
    )


def _load_employee(args, model: MlpModel) -> np.ndarray:
    """Employee features from --employee YAML or --data CSV with --row."""
    codec = model.codec
    if getattr(args, "employee", None):
        try:
            with open(args.employee) as fh:
                doc = yaml.safe_load(fh)
        except OSError as exc:
            raise InputError(f"cannot read employee file {args.employee}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise SchemaError(f"malformed employee file {args.employee}: {exc}") from exc
        if not isinstance(doc, dict) or "features" not in doc:
            raise SchemaError(f"employee file {args.employee} must contain a "
                              f"'features' mapping")
        return codec.encode_features(doc["features"])
    if args.data is not None and args.row is not None:
        schema = _schema_from_model(model, args.data)
        records = load_csv(args.data, schema)
        if not 0 <= args.row < len(records):
            raise UsageError(f"--row {args.row} outside 0..{len(records) - 1}")
        named = {c: records[args.row][c] for c in codec.feature_names}
        return codec.encode_features(named)
    raise UsageError("provide --employee FILE, or --data CSV with --row N")


def _catalog_for_model(args, model: MlpModel) -> ActionCatalog:
    catalog = load_catalog(args.catalog, model.codec.feature_names,
                           default_bounds=model.default_bounds())
    violations = validate_catalog(catalog, model.codec.n_features)
    if violations:
        raise SchemaError("catalog invalid: " + "; ".join(violations))
    return catalog


def _check_target(value: float) -> float:
    if not 0.0 < value <= 1.0:
        raise UsageError(f"--target must be in (0, 1], got {value}")
    return value


def _plan_payload(plan: Plan, start: float, target: float, seed: int,
                  meta_cost: float, config: PlannerConfig | None) -> dict:
    return {
        "start_state": start,
        "target_state": target,
        "actions": list(plan.actions),
        "trajectory": [[before, after] for before, after in plan.trajectory],
        "total_cost": plan.total_cost,
        "meta_cost": meta_cost,
        "reached": plan.reached,
        "seed": seed,
        "planner_config": asdict(config) if config else None,
    }


# --- subcommands ---------------------------------------------------------


def cmd_train(args) -> int:
    started = time.monotonic()
    out = _out_dir(args)
    run_cfg = _load_run_config(args.config)
    train_fraction = float(run_cfg.get("train_fraction", 0.8))
    config = _build_config(TrainConfig, run_cfg.get("train", {}), args.seed, "train")

    schema = SchemaConfig.from_file(args.schema)
    records = load_csv(args.data, schema)
    print(f"loaded {len(records)} rows from {args.data}")
    full = encode(records, schema)
    train_set, test_set = split(full, train_fraction, config.seed)

    model = train(train_set, config)
    test_result = evaluate(model, test_set)
    train_accuracy = model.metadata["train_accuracy"]
    majority = float(max(test_set.Y.mean(axis=0)))

    print(f"accuracy on training set : {train_accuracy:7.2%}")
    print(f"accuracy on testing set  : {test_result.accuracy:7.2%}")
    print(f"majority baseline (test) : {majority:7.2%}")

    model_path = out / "model.json"
    save_model(model, model_path)
    metrics = {
        "train_accuracy": train_accuracy,
        "test_accuracy": test_result.accuracy,
        "test_confusion": test_result.confusion.tolist(),
        "majority_baseline_test": majority,
        "n_train": train_set.n,
        "n_test": test_set.n,
        "final_loss": model.metadata["final_loss"],
    }
    reports.write_json(metrics, out / "metrics.json")
    with open(out / "metrics.csv", "w", encoding="utf-8") as fh:
        fh.write("split,accuracy\n")
        fh.write(f"train,{train_accuracy!r}\n")
        fh.write(f"test,{test_result.accuracy!r}\n")
    reports.save_loss_figure(model.metadata["epoch_losses"], out / "training_loss.png")
    reports.save_confusion_figure(test_result.confusion, out / "confusion.png")

    manifest = RunManifest(
        subcommand="train",
        config={"train": asdict(config), "train_fraction": train_fraction},
        inputs={str(args.data): _sha256(args.data), str(args.schema): _sha256(args.schema)},
        seed=config.seed,
        outputs=[str(model_path), str(out / "metrics.json"), str(out / "metrics.csv"),
                 str(out / "training_loss.png"), str(out / "confusion.png")],
        duration_seconds=time.monotonic() - started,
    )
    _finish(out, manifest)
    print(f"model written to {model_path}")
    return 0


def cmd_eval(args) -> int:
    started = time.monotonic()
    out = _out_dir(args)
    model = load_model(args.model)
    schema = _schema_from_model(model, args.data)
    records = load_csv(args.data, schema)
    ds = encode(records, schema, codec=model.codec)
    result = evaluate(model, ds)
    majority = float(max(ds.Y.mean(axis=0)))

    print(f"rows evaluated     : {result.total}")
    print(f"accuracy           : {result.accuracy:7.2%}")
    print(f"majority baseline  : {majority:7.2%}")
    print("confusion (rows=actual leave/stay, cols=predicted):")
    for row in result.confusion:
        print(f"    {row[0]:>6} {row[1]:>6}")

    metrics = {
        "accuracy": result.accuracy,
        "confusion": result.confusion.tolist(),
        "majority_baseline": majority,
        "n": result.total,
    }
    reports.write_json(metrics, out / "metrics.json")
    reports.save_confusion_figure(result.confusion, out / "confusion.png")
    manifest = RunManifest(
        subcommand="eval",
        config={},
        inputs={str(args.data): _sha256(args.data), str(args.model): _sha256(args.model)},
        seed=-1,
        outputs=[str(out / "metrics.json"), str(out / "confusion.png")],
        duration_seconds=time.monotonic() - started,
    )
    _finish(out, manifest)
    return 0


def _plan_for_args(args, model: MlpModel):
    """Shared by plan and verify: build the agent, train, extract."""
    target = _check_target(args.target)
    features = _load_employee(args, model)
    catalog = _catalog_for_model(args, model)
    run_cfg = _load_run_config(args.config)
    config = _build_config(PlannerConfig, run_cfg.get("planner", {}), args.seed, "planner")

    start = model.stay_probability(features)
    agent = EmployeeAgent.from_catalog(features, start, catalog)
    if discretize(start, config.bin_width) >= discretize(target, config.bin_width):
        plan = Plan(actions=(), trajectory=(), total_cost=0.0, reached=True)
        return agent, config, target, start, plan, None, []
    q, log = train_planner(model, agent, target, config)
    plan = extract_plan(model, agent, target, q, config.max_steps_per_episode)
    return agent, config, target, start, plan, q, log


def cmd_plan(args) -> int:
    started = time.monotonic()
    out = _out_dir(args)
    model = load_model(args.model)
    agent, config, target, start, plan, q, log = _plan_for_args(args, model)

    print(reports.format_plan_table(plan, start, target))

    reports.write_json(_plan_payload(plan, start, target, config.seed,
                                     agent.meta_cost, config), out / "plan.json")
    reports.write_plan_csv(plan, out / "plan_steps.csv")
    reports.save_trajectory_figure(plan, start, target, out / "plan_trajectory.png")
    outputs = [str(out / "plan.json"), str(out / "plan_steps.csv"),
               str(out / "plan_trajectory.png")]
    if q is not None:
        save_qtable(q, out / "qtable.json")
        reports.write_episode_log(log, out / "episodes.csv")
        reports.save_episode_figure(log, out / "planner_episodes.png")
        outputs += [str(out / "qtable.json"), str(out / "episodes.csv"),
                    str(out / "planner_episodes.png")]

    inputs = {str(args.model): _sha256(args.model), str(args.catalog): _sha256(args.catalog)}
    if getattr(args, "employee", None):
        inputs[str(args.employee)] = _sha256(args.employee)
    if args.data:
        inputs[str(args.data)] = _sha256(args.data)
    manifest = RunManifest(
        subcommand="plan",
        config={"planner": asdict(config), "target": target},
        inputs=inputs,
        seed=config.seed,
        outputs=outputs,
        duration_seconds=time.monotonic() - started,
    )
    _finish(out, manifest)
    return 0 if plan.reached else EXIT_NOT_REACHED


def cmd_verify(args) -> int:
    started = time.monotonic()
    out = _out_dir(args)
    model = load_model(args.model)
    agent, config, target, start, plan, _, _ = _plan_for_args(args, model)
    optimal = bfs_shortest_plan(model, agent, target, args.max_depth,
                                bin_width=config.bin_width,
                                allow_large=args.allow_large)

    planner_part = str(len(plan)) if plan.reached else "not reached"
    oracle_part = str(len(optimal)) if optimal is not None else "not reached"
    if plan.reached and optimal is not None:
        verdict = "yes" if len(plan) == len(optimal) else "no"
    elif not plan.reached and optimal is None:
        verdict = "yes"  # both agree the target is out of reach
    else:
        verdict = "no"
    print(f"planner {planner_part} / oracle {oracle_part} / optimal: {verdict}")

    reports.write_json({
        "planner_length": len(plan) if plan.reached else None,
        "planner_reached": plan.reached,
        "oracle_length": len(optimal) if optimal is not None else None,
        "oracle_reached": optimal is not None,
        "optimal": verdict == "yes",
        "max_depth": args.max_depth,
        "target": target,
        "start_state": start,
        "seed": config.seed,
    }, out / "verify.json")
    manifest = RunManifest(
        subcommand="verify",
        config={"planner": asdict(config), "target": target, "max_depth": args.max_depth},
        inputs={str(args.model): _sha256(args.model),
                str(args.catalog): _sha256(args.catalog)},
        seed=config.seed,
        outputs=[str(out / "verify.json")],
        duration_seconds=time.monotonic() - started,
    )
    _finish(out, manifest)
    return 0


# --- parser ---------------------------------------------------------------


def _add_flags(sub, names, required=()):
    specs = {
        "data": dict(help="input CSV with header row"),
        "schema": dict(help="schema config YAML"),
        "model": dict(help="saved model file"),
        "catalog": dict(help="action catalog YAML"),
        "target": dict(type=float, help="target stay probability in (0, 1]"),
        "config": dict(help="run config YAML overriding training/planner defaults"),
        "seed": dict(type=int, help="seed for all randomness (default 0)"),
        "out": dict(help="output directory for artifacts and figures"),
        "employee": dict(help="employee feature YAML"),
        "row": dict(type=int, help="0-based data row to plan for"),
    }
    for name in names:
        spec = dict(specs[name])
        env_value = _env(name)
        if name == "seed":
            spec["default"] = int(env_value) if env_value is not None else 0
        elif name == "out":
            spec["default"] = env_value or "runs"
        elif env_value is not None:
            if "type" in spec:
                env_value = spec["type"](env_value)
            spec["default"] = env_value
        elif name in required:
            spec["required"] = True
        sub.add_argument(f"--{name}", **spec)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retention",
        description="Predict employee stay probability and plan the cheapest "
                    "intervention sequence that lifts it to a target.")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    p_train = subs.add_parser("train", help="fit the stay/leave model on a CSV")
    _add_flags(p_train, ["data", "schema", "config", "seed", "out"],
               required={"data", "schema"})
    p_train.set_defaults(func=cmd_train)

    p_eval = subs.add_parser("eval", help="evaluate a saved model on a labeled CSV")
    _add_flags(p_eval, ["model", "data", "out"], required={"model", "data"})
    p_eval.set_defaults(func=cmd_eval)

    plan_flags = ["model", "employee", "data", "row", "catalog", "target",
                  "config", "seed", "out"]
    p_plan = subs.add_parser("plan", help="plan interventions for one employee")
    _add_flags(p_plan, plan_flags, required={"model", "catalog", "target"})
    p_plan.set_defaults(func=cmd_plan)

    p_verify = subs.add_parser("verify", help="cross-check the planner against "
                                              "exhaustive search")
    _add_flags(p_verify, plan_flags, required={"model", "catalog", "target"})
    p_verify.add_argument("--max-depth", type=int, default=6,
                          help="oracle search depth (default 6)")
    p_verify.add_argument("--allow-large", action="store_true",
                          help="override the oracle's search-size guard")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RetentionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())

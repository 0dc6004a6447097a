"""Command line front end: pretrain, train, eval, report.

Typical flow:

    poshs pretrain --config run.yaml --out runs/models
    poshs train    --config run.yaml --models runs/models --out runs/train
    poshs eval     --config run.yaml --models runs/models \\
                   --state runs/train/state --out runs/eval
    poshs report   --config run.yaml --experiment a --out runs/report

Every command works without --config using the built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .agent import AgentState
from .harness import (
    ExperimentConfig,
    build_occupants,
    confusion_from_rows,
    eval_phase,
    load_state,
    make_env,
    run_experiment_a,
    run_experiment_b,
    save_state,
    score,
    train_phase,
    write_episode_logs,
    write_episode_rows,
    write_report,
)
from .occupant import load_model, save_model

MODEL_FILE_VERSION = 1


def _model_path(directory: Path, name: str) -> Path:
    return directory / f"{name}-q-v{MODEL_FILE_VERSION}.npz"


def _config(args) -> ExperimentConfig:
    if args.config:
        return ExperimentConfig.from_file(args.config)
    return ExperimentConfig()


def _models(config: ExperimentConfig, models_dir):
    if models_dir:
        directory = Path(models_dir)
        return [load_model(_model_path(directory, name))
                for name, _ in config.roster]
    return build_occupants(config)


def cmd_pretrain(args) -> int:
    config = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for model in build_occupants(config):
        save_model(model, _model_path(out, model.id))
        print(f"pretrained {model.id} -> {_model_path(out, model.id)}")
    return 0


def cmd_train(args) -> int:
    config = _config(args)
    seed = args.seed if args.seed is not None else config.seeds[0]
    models = _models(config, args.models)
    env = make_env(config)
    state = AgentState.fresh(config.grid, config.variant, config.tau,
                             config.policy, config.n_activities)
    rng = np.random.default_rng(seed)
    mapping: dict = {}
    rows, logs = train_phase(config, env, models, state, rng, mapping, seed)
    out = Path(args.out)
    save_state(state, mapping, out / "state")
    write_episode_rows(rows, out / "train_episodes.csv")
    write_episode_logs(logs, out / "train_logs.jsonl")
    n_correct = sum(r["correct"] for r in rows)
    print(f"trained {len(rows)} episodes, {len(state.pool)} pool entries, "
          f"{n_correct}/{len(rows)} identified correctly")
    return 0


def cmd_eval(args) -> int:
    config = _config(args)
    seed = args.seed if args.seed is not None else config.seeds[0]
    models = _models(config, args.models)
    env = make_env(config)
    if args.state:
        state, mapping = load_state(args.state, config)
    else:
        state = AgentState.fresh(config.grid, config.variant, config.tau,
                                 config.policy, config.n_activities)
        mapping = {}
    rng = np.random.default_rng(seed)
    shs = not args.no_shs
    rows, logs = eval_phase(config, env, models, state, rng, mapping, seed,
                            phase="eval" if shs else "no_shs",
                            shs_enabled=shs, identify=shs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_episode_rows(rows, out / "eval_episodes.csv")
    write_episode_logs(logs, out / "eval_logs.jsonl")
    summary: dict = {
        "episodes": len(rows),
        "reward_mean": float(np.mean([r["reward_mean"] for r in rows])),
    }
    if shs:
        labels = [name for name, _ in config.roster]
        confusion = confusion_from_rows(rows, labels)
        summary["confusion"] = confusion.tolist()
        summary["score"] = score(confusion, labels)
        if args.state:
            save_state(state, mapping, Path(args.state))
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    print(f"evaluated {len(rows)} episodes"
          + (f", accuracy {summary['score']['accuracy']:.3f}" if shs else ""))
    return 0


def cmd_report(args) -> int:
    config = _config(args)
    if args.experiment == "a":
        report, logs = run_experiment_a(config)
        headline = f"accuracy {report['eval_accuracy']:.3f}"
    else:
        report, logs = run_experiment_b(config, baseline_csv=args.baseline_csv)
        poshs = report["conditions"]["poshs"]
        headline = (f"poshs reward {poshs['reward_mean']:.3f}, "
                    f"{poshs['th_changes_per_segment']:.2f} corrections"
                    "/segment")
    out = Path(args.out)
    write_report(report, out)
    write_episode_logs(logs, out / "episode_logs.jsonl")
    print(f"experiment {args.experiment}: {headline} "
          f"({report['runtime_s']:.1f}s) -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poshs",
        description="Occupant identification and comfort control workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pretrain", help="train the occupant roster")
    p.add_argument("--config", help="YAML run configuration")
    p.add_argument("--out", required=True, help="directory for model files")
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("train", help="run the agent training phase")
    p.add_argument("--config")
    p.add_argument("--models", help="directory of pretrained occupants")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="run evaluation episodes")
    p.add_argument("--config")
    p.add_argument("--models")
    p.add_argument("--state", help="agent state directory from train")
    p.add_argument("--seed", type=int)
    p.add_argument("--no-shs", action="store_true",
                   help="control condition without the agent")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="run a full experiment and report")
    p.add_argument("--config")
    p.add_argument("--experiment", choices=("a", "b"), default="a")
    p.add_argument("--baseline-csv",
                   help="imported per-episode CSV for the baseline condition")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

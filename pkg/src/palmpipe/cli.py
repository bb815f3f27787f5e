"""Command-line entry point: dataset generation, training, pipeline runs,
the observer study, latency benchmarking, and the interactive sandbox
server.

Exit codes: 0 success, 2 argument error, 1 runtime error.  Flags beat the
optional ``--config`` key=value file, which beats built-in defaults.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np


def _build_parser(config_defaults: dict[str, str] | None = None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="palmpipe",
        description=(
            "Tactile telemanipulation testbed: synthesize fingertip force grids, "
            "train the tilt/position classifier, and render 3x3 palm stimuli "
            "through five-bar linkages at 60 Hz."
        ),
    )
    parser.add_argument(
        "--config",
        help="key = value text file with default flag values (flags win)",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = []

    gen = sub.add_parser("gen", help="generate a labeled synthetic dataset file")
    subparsers.append(gen)
    gen.add_argument("--out", required=True, help="output dataset path")
    gen.add_argument("--n-reps", type=int, default=36, help="samples per (pattern, grip) pair")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--noise", type=float, default=0.15, help="sensor noise sigma, newtons")

    tr = sub.add_parser("train", help="train the classifier on a dataset file")
    subparsers.append(tr)
    tr.add_argument("--data", required=True, help="dataset file from 'gen'")
    tr.add_argument("--epochs", type=int, default=50)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--out", required=True, help="checkpoint output path")
    tr.add_argument("--history", help="optional CSV path for the per-epoch history")
    tr.add_argument("--batch-size", type=int, default=64)
    tr.add_argument("--lr", type=float, default=0.01)

    run = sub.add_parser("run", help="drive the 60 Hz loop against the synthetic sensor")
    subparsers.append(run)
    run.add_argument("--mode", choices=("direct", "masked"), required=True)
    run.add_argument("--ckpt", help="checkpoint (required for masked mode)")
    run.add_argument("--duration", type=float, default=5.0, help="seconds")
    run.add_argument("--log", help="snapshot log output path")
    run.add_argument("--noise", type=float, default=0.15)
    run.add_argument("--seed", type=int, default=0)

    study = sub.add_parser("study", help="machine-observer study of both rendering modes")
    subparsers.append(study)
    study.add_argument("--ckpt", required=True)
    study.add_argument("--trials", type=int, default=500, help="trials per pattern")
    study.add_argument("--noise", type=float, default=0.3)
    study.add_argument("--out", help="report output path (default: stdout)")
    study.add_argument("--seed", type=int, default=0)

    bench = sub.add_parser("bench", help="per-stage tick latency percentiles, both modes")
    subparsers.append(bench)
    bench.add_argument("--ticks", type=int, default=3000)
    bench.add_argument("--ckpt", help="checkpoint for masked mode (random weights if omitted)")
    bench.add_argument("--seed", type=int, default=0)

    serve = sub.add_parser("serve", help="interactive sandbox server (WebSocket + static UI)")
    subparsers.append(serve)
    serve.add_argument("--port", type=int, default=8765)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--ckpt", required=True)
    serve.add_argument("--noise", type=float, default=0.15)

    if config_defaults:
        for sp in subparsers:
            known = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in config_defaults.items() if k in known})
    return parser


def _load_config_file(path) -> dict[str, str]:
    from .kinematics import _parse_kv_text

    return _parse_kv_text(path)


def _cmd_gen(args) -> int:
    from .sensor_sim import SimConfig, generate_dataset, save_dataset

    config = SimConfig(noise_sigma=args.noise, reps_per_config=args.n_reps)
    dataset = generate_dataset(config, seed=args.seed)
    save_dataset(dataset, args.out)
    print(f"wrote {len(dataset)} samples to {args.out}")
    return 0


def _cmd_train(args) -> int:
    from .cnn import TrainConfig, evaluate, save_checkpoint, train
    from .sensor_sim import load_dataset, split_dataset

    dataset = load_dataset(args.data)
    train_set, val_set, test_set = split_dataset(dataset, (0.5, 0.25, 0.25), seed=args.seed)
    cfg = TrainConfig(
        epochs=args.epochs, batch_size=args.batch_size, base_lr=args.lr, seed=args.seed
    )
    params, history = train(None, train_set, val_set, cfg, log=print)
    save_checkpoint(params, args.out)
    if args.history:
        with open(args.history, "w", encoding="ascii") as fh:
            fh.write(history.to_csv())
    report = evaluate(params, test_set)
    print(
        f"test accuracy: angle {report.angle_accuracy:.4f} "
        f"position {report.pos_accuracy:.4f}"
    )
    print(f"checkpoint written to {args.out}")
    return 0


def _cmd_run(args, parser) -> int:
    from .cnn import load_checkpoint
    from .pipeline import Mode, Pipeline, ScriptedSource, run, snapshot_log_line
    from .sensor_sim import SimConfig

    if args.mode == "masked" and not args.ckpt:
        parser.error("--mode masked requires --ckpt")
    model = load_checkpoint(args.ckpt) if args.ckpt else None
    pipeline = Pipeline(mode=Mode(args.mode), model=model if args.mode == "masked" else None)
    source = ScriptedSource(SimConfig(noise_sigma=args.noise), seed=args.seed)

    log_fh = open(args.log, "w", encoding="ascii") if args.log else None
    try:
        sink = (lambda s: log_fh.write(snapshot_log_line(s) + "\n")) if log_fh else None
        report = run(source, pipeline, args.duration, sink=sink)
    finally:
        if log_fh:
            log_fh.close()
    print(report.format(), end="")
    return 0


def _cmd_study(args) -> int:
    from .cnn import load_checkpoint
    from .eval import format_study_report, machine_observer_study
    from .pipeline import Mode

    model = load_checkpoint(args.ckpt)
    results = [
        machine_observer_study(None, Mode.DIRECT, args.noise, args.trials, seed=args.seed),
        machine_observer_study(model, Mode.MASKED, args.noise, args.trials, seed=args.seed),
    ]
    report = format_study_report(results)
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(report)
        print(f"report written to {args.out}")
    for r in results:
        print(f"{r.mode.value}: overall_rate={r.overall:.4f}")
    return 0


def _cmd_bench(args) -> int:
    from .cnn import ArchConfig, init_model, load_checkpoint
    from .pipeline import Mode, Pipeline, TICK_BUDGET_MS, bench

    model = load_checkpoint(args.ckpt) if args.ckpt else init_model(ArchConfig(), seed=0)
    rows = ("merge", "resize", "cnn", "mask", "ik", "total")
    for mode in (Mode.DIRECT, Mode.MASKED):
        pipeline = Pipeline(mode=mode, model=model if mode == Mode.MASKED else None)
        stages = bench(pipeline, args.ticks, seed=args.seed)
        print(f"mode={mode.value} ticks={args.ticks} budget={TICK_BUDGET_MS:.2f} ms")
        print(f"{'stage':>8} {'p50':>9} {'p99':>9} {'max':>9}")
        for name in rows:
            if name not in stages:
                continue
            vals = stages[name]
            print(
                f"{name:>8} {np.percentile(vals, 50):9.3f} "
                f"{np.percentile(vals, 99):9.3f} {vals.max():9.3f}"
            )
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .cnn import load_checkpoint
    from .sensor_sim import SimConfig
    from .server import create_app

    model = load_checkpoint(args.ckpt)
    app = create_app(model=model, sim_config=SimConfig(noise_sigma=args.noise))
    print(f"sandbox at http://{args.host}:{args.port}/ (WebSocket endpoint /ws)")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)

    config_defaults: dict[str, str] | None = None
    if "--config" in argv:
        try:
            config_path = argv[argv.index("--config") + 1]
            config_defaults = _load_config_file(config_path)
        except (IndexError, OSError, ValueError) as exc:
            print(f"error: cannot read config file: {exc}", file=sys.stderr)
            return 2

    parser = _build_parser(config_defaults)
    args = parser.parse_args(argv)

    if getattr(args, "epochs", 1) < 1:
        parser.error("--epochs must be >= 1")
    if getattr(args, "trials", 1) < 1:
        parser.error("--trials must be >= 1")
    if getattr(args, "n_reps", 1) < 1:
        parser.error("--n-reps must be >= 1")
    if getattr(args, "ticks", 1) < 1:
        parser.error("--ticks must be >= 1")

    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "run":
            return _cmd_run(args, parser)
        if args.command == "study":
            return _cmd_study(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "serve":
            return _cmd_serve(args)
        parser.error(f"unknown command {args.command}")
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

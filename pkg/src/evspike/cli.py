"""Command-line interface.

Verbs: train, eval, hpo, phase-portrait, inspect, convert, defaults.
Exit codes: 0 ok, 1 config error, 2 data error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .classifier import LabelMap
from .datasets import load_dataset
from .events import (
    DataFormatError,
    decode_aedat,
    decode_nmnist,
    encode_nmnist,
    format_text_events,
    parse_text_events,
)
from .experiment import (
    ConfigError,
    ExperimentConfig,
    apply_hpo_values,
    evaluate_checkpoint,
    load_config,
    reference_config_text,
    run_experiment,
    run_hpo_campaign,
    serialize_config,
    write_run_outputs,
)
from .network import SynapticKernel
from .neurons import NeuronModelKind, NeuronParams, phase_curve

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


def _load_cli_config(args) -> ExperimentConfig:
    if args.config is None:
        raise ConfigError("--config PATH is required for this command")
    try:
        cfg = load_config(args.config)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {exc}") from exc
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "repeats", None) is not None:
        overrides["repeats"] = args.repeats
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    if getattr(args, "out", None) is not None:
        overrides["out_dir"] = str(args.out)
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    if getattr(args, "max_train", None) is not None or getattr(args, "max_test", None) is not None:
        from dataclasses import replace

        ds = cfg.dataset
        if args.max_train is not None:
            ds = replace(ds, max_train=args.max_train)
        if args.max_test is not None:
            ds = replace(ds, max_test=args.max_test)
        cfg = replace(cfg, dataset=ds)
    if getattr(args, "model", None) is not None:
        from dataclasses import replace

        cfg = replace(cfg, neuron=replace(cfg.neuron, kind=NeuronModelKind(args.model)))
    return cfg


def cmd_train(args) -> int:
    cfg = _load_cli_config(args)
    report, outcomes = run_experiment(cfg)
    out = write_run_outputs(cfg.out_dir, cfg, report, outcomes)
    print(
        f"{cfg.neuron.kind.value} on {cfg.dataset.classes[0]} vs {cfg.dataset.classes[1]}: "
        f"mean accuracy {report.mean:.4f} +/- {report.std:.4f}, best {report.best:.4f} "
        f"({len(report.accuracies)} repeats) -> {out}"
    )
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _load_cli_config(args)
    kernel = SynapticKernel.load(args.checkpoint)
    assignments = []
    for line in Path(args.labels).read_text().splitlines()[1:]:
        if line.strip():
            _pop, label = line.split(",")
            assignments.append(int(label))
    label_map = LabelMap(labels=cfg.dataset.classes, assignments=tuple(assignments))
    test = load_dataset(
        cfg.dataset.kind, cfg.dataset.path, cfg.dataset.classes, "test",
        cfg.dataset.max_test,
    )
    acc, predictions = evaluate_checkpoint(cfg, kernel, label_map, test)
    print(f"accuracy {acc:.4f} over {len(predictions)} samples")
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        lines = ["sample_id,true,predicted"]
        lines += [f"{s},{t},{p}" for s, t, p in predictions]
        (out / "predictions.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_hpo(args) -> int:
    cfg = _load_cli_config(args)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log_path = out / "campaign.jsonl"
    best, history = run_hpo_campaign(cfg, log_path=log_path, iterations=args.iterations)
    best_cfg = apply_hpo_values(cfg, best.config.values)
    (out / "best_config.toml").write_text(serialize_config(best_cfg))
    summary = {
        "best_objective": best.objective,
        "best_budget": best.budget,
        "best_values": best.config.values,
        "trials": len(history),
        "distinct_configs": len({t.config.trial_id for t in history}),
    }
    (out / "hpo_summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    print(
        f"best validation accuracy {best.objective:.4f} at budget {best.budget} "
        f"({summary['distinct_configs']} configs) -> {out}"
    )
    return EXIT_OK


def _portrait_params(args) -> NeuronParams:
    kwargs = dict(
        tau_m=args.tau_m,
        u_rest=args.u_rest,
        resistance=args.resistance,
        v_thresh=args.v_thresh,
        t_s=args.t_s,
    )
    if args.model == "eif":
        kwargs["delta_t"] = args.delta_t if args.delta_t is not None else 2.0
        kwargs["theta_rh"] = args.theta_rh if args.theta_rh is not None else 10.0
    if args.model == "qif":
        kwargs["a0"] = args.a0 if args.a0 is not None else 0.1
        kwargs["u_c"] = args.u_c if args.u_c is not None else 10.0
    return NeuronParams(**kwargs)


def cmd_phase_portrait(args) -> int:
    params = _portrait_params(args)
    curve = phase_curve(
        NeuronModelKind(args.model), params, args.u_min, args.u_max,
        args.points, args.current,
    )
    lines = ["u,dudt"]
    lines += [f"{float(u)!r},{float(d)!r}" for u, d in curve]
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        Path(args.out).write_text(text)
        print(f"wrote {args.points} points -> {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_inspect(args) -> int:
    cfg = _load_cli_config(args)
    split = args.split
    cap = cfg.dataset.max_train if split == "train" else cfg.dataset.max_test
    samples = load_dataset(
        cfg.dataset.kind, cfg.dataset.path, cfg.dataset.classes, split, cap
    )
    bin_us = int(round(args.bin_ms * 1000))
    per_class: dict[int, np.ndarray] = {}
    for s in samples:
        counts = np.bincount(s.ts // bin_us) if len(s.ts) else np.zeros(1, dtype=np.int64)
        prev = per_class.get(s.label)
        if prev is None:
            per_class[s.label] = counts.astype(np.int64)
        else:
            size = max(len(prev), len(counts))
            merged = np.zeros(size, dtype=np.int64)
            merged[: len(prev)] += prev
            merged[: len(counts)] += counts
            per_class[s.label] = merged
    lines = ["class,bin_index,start_us,count"]
    for label in sorted(per_class):
        for i, count in enumerate(per_class[label]):
            lines.append(f"{label},{i},{i * bin_us},{count}")
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        Path(args.out).write_text(text)
        print(f"wrote event statistics for {len(samples)} samples -> {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_convert(args) -> int:
    data = Path(args.input).read_bytes()
    if args.source == "nmnist":
        events = decode_nmnist(data)
    elif args.source == "aedat":
        events = decode_aedat(data)
    else:
        events = parse_text_events(data.decode())
    if args.target == "text":
        Path(args.output).write_text(format_text_events(events))
    elif args.target == "nmnist":
        Path(args.output).write_bytes(encode_nmnist(events))
    else:
        raise ConfigError(f"unsupported conversion target {args.target!r}")
    print(f"converted {len(events)} events {args.source} -> {args.target}")
    return EXIT_OK


def cmd_defaults(args) -> int:
    text = reference_config_text()
    if args.out is not None:
        Path(args.out).write_text(text)
        print(f"wrote reference config -> {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evspike",
        description="Event-driven spiking network training, evaluation and tooling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_repeats=True):
        p.add_argument("--config", type=Path, help="experiment config file (TOML)")
        p.add_argument("--seed", type=int, help="override run.seed")
        p.add_argument("--workers", type=int, help="override run.workers")
        p.add_argument("--out", type=Path, help="override run.out_dir")
        p.add_argument("--max-train", type=int, dest="max_train")
        p.add_argument("--max-test", type=int, dest="max_test")
        p.add_argument("--model", choices=["lif", "qif", "eif"], help="override neuron.kind")
        if with_repeats:
            p.add_argument("--repeats", type=int, help="override run.repeats")

    p_train = sub.add_parser("train", help="train and evaluate over repeats")
    add_common(p_train)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a saved kernel checkpoint")
    add_common(p_eval, with_repeats=False)
    p_eval.add_argument("--checkpoint", type=Path, required=True, help="kernel .npy")
    p_eval.add_argument("--labels", type=Path, required=True, help="labels CSV")
    p_eval.set_defaults(func=cmd_eval)

    p_hpo = sub.add_parser("hpo", help="run a hyperparameter campaign")
    add_common(p_hpo, with_repeats=False)
    p_hpo.add_argument("--iterations", type=int, help="override hpo.iterations")
    p_hpo.set_defaults(func=cmd_hpo)

    p_pp = sub.add_parser("phase-portrait", help="sample (u, du/dt) to CSV")
    p_pp.add_argument("--model", choices=["lif", "qif", "eif"], required=True)
    p_pp.add_argument("--u-min", type=float, default=-5.0)
    p_pp.add_argument("--u-max", type=float, default=25.0)
    p_pp.add_argument("--points", type=int, default=401)
    p_pp.add_argument("--current", type=float, default=0.0)
    p_pp.add_argument("--tau-m", type=float, default=10.0)
    p_pp.add_argument("--u-rest", type=float, default=0.0)
    p_pp.add_argument("--resistance", type=float, default=1.0)
    p_pp.add_argument("--v-thresh", type=float, default=20.0)
    p_pp.add_argument("--t-s", type=float, default=1.0)
    p_pp.add_argument("--delta-t", type=float)
    p_pp.add_argument("--theta-rh", type=float)
    p_pp.add_argument("--a0", type=float)
    p_pp.add_argument("--u-c", type=float)
    p_pp.add_argument("--out", type=Path)
    p_pp.set_defaults(func=cmd_phase_portrait)

    p_inspect = sub.add_parser("inspect", help="per-class event counts over time bins")
    add_common(p_inspect, with_repeats=False)
    p_inspect.add_argument("--split", choices=["train", "test"], default="train")
    p_inspect.add_argument("--bin-ms", type=float, default=10.0)
    p_inspect.set_defaults(func=cmd_inspect)

    p_convert = sub.add_parser("convert", help="convert between event formats")
    p_convert.add_argument("--from", dest="source", choices=["nmnist", "aedat", "text"], required=True)
    p_convert.add_argument("--to", dest="target", choices=["nmnist", "text"], required=True)
    p_convert.add_argument("input", type=Path)
    p_convert.add_argument("output", type=Path)
    p_convert.set_defaults(func=cmd_convert)

    p_defaults = sub.add_parser("defaults", help="print the reference config")
    p_defaults.add_argument("--out", type=Path)
    p_defaults.set_defaults(func=cmd_defaults)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; that is a config error here
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        return args.func(args)
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

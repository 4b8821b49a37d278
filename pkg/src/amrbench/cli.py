"""Command-line entry point.

Subcommands: generate, summarize, train, evaluate, curriculum, report.
Exit codes: 0 success, 1 runtime/IO failure, 2 usage error. All randomness
derives from the single --seed via the stream-splitting in ``seeding``.
Relative dataset paths resolve against $AMRBENCH_DATA_DIR when set.
"""

import argparse
import os
import sys
from pathlib import Path

from . import dataset as ds
from . import modelzoo, report, runio, trainer
from .errors import AmrBenchError
from .kernels import active_backend
from .sigsynth import CLASS_NAMES, SNR_LEVELS


def _data_path(path: str) -> Path:
    p = Path(path)
    base = os.environ.get("AMRBENCH_DATA_DIR")
    if base and not p.is_absolute() and not p.exists():
        return Path(base) / p
    return p


def _parse_schemes(text: str):
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    return names or CLASS_NAMES


def _parse_snrs(text: str):
    text = text.strip()
    if ":" in text:
        lo, hi = (int(x) for x in text.split(":", 1))
        return tuple(s for s in SNR_LEVELS if lo <= s <= hi)
    return tuple(int(x) for x in text.split(","))


def cmd_generate(args) -> int:
    spec = ds.DatasetSpec(
        frames_per_pair=args.frames_per_pair,
        schemes=_parse_schemes(args.schemes),
        snr_levels=_parse_snrs(args.snr),
        seed=args.seed,
    )
    corpus = ds.generate_dataset(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    ds.write_native(corpus, out)
    stats = ds.summarize(corpus)
    manifest = {
        "frames_per_pair": spec.frames_per_pair,
        "schemes": list(spec.schemes),
        "snr_levels": list(spec.snr_levels),
        "out": str(out),
    }
    runio.write_manifest(out.parent, "generate", manifest, args.seed,
                         ds.corpus_hash(out))
    print(f"wrote {stats['n_frames']} frames to {out}")
    print(f"  classes: {stats['classes_present']}  snr levels: {len(stats['snr_levels'])}"
          f"  uniform: {stats['uniform']}  mean power: {stats['mean_power']:.3f}")
    return 0


def cmd_summarize(args) -> int:
    corpus = ds.read_native(_data_path(args.dataset))
    stats = ds.summarize(corpus)
    print(f"{stats['n_frames']} frames, {stats['classes_present']} classes, "
          f"{len(stats['snr_levels'])} SNR levels, uniform={stats['uniform']}, "
          f"mean power {stats['mean_power']:.4f}")
    header = "class".ljust(8) + "".join(f"{s:>7d}" for s in stats["snr_levels"])
    print(header)
    for i, name in enumerate(stats["class_names"]):
        row = stats["counts"][i]
        if row.sum():
            print(name.ljust(8) + "".join(f"{c:>7d}" for c in row))
    return 0


def _resolve_config(args) -> modelzoo.ModelConfig:
    if args.config:
        config = modelzoo.load_config(Path(args.config).read_text("utf-8"))
    else:
        config = modelzoo.get_config(args.model)
    if getattr(args, "augment", False):
        config = modelzoo.augment(config)
    return config


def _train_config(args, config) -> trainer.TrainConfig:
    overrides = {}
    if args.batch_size is not None:
        overrides["batch_size"] = args.batch_size
    if args.learning_rate is not None:
        overrides["learning_rate"] = args.learning_rate
    return trainer.TrainConfig.for_model(
        config,
        max_epochs=args.max_epochs,
        patience=args.patience,
        seed=args.seed,
        deterministic=not args.nondeterministic,
        **overrides,
    )


def cmd_train(args) -> int:
    config = _resolve_config(args)
    corpus_path = _data_path(args.dataset)
    corpus = ds.read_native(corpus_path)
    cfg = _train_config(args, config)
    indices = ds.split(corpus, seed=args.seed)
    model = modelzoo.build(config, seed=args.seed)
    model, history = trainer.train(
        model, corpus.subset(indices.train), corpus.subset(indices.val), cfg
    )
    eval_report = trainer.evaluate(model, corpus.subset(indices.test))
    eval_report.check_consistency()
    run_dir = Path(args.out)
    run_dir.mkdir(parents=True, exist_ok=True)
    runio.write_config(run_dir, config)
    runio.write_manifest(
        run_dir, "train",
        {
            "model": config.model_id,
            "augmented": config.augmented,
            "dataset": str(corpus_path),
            "batch_size": cfg.batch_size,
            "learning_rate": cfg.learning_rate,
            "max_epochs": cfg.max_epochs,
            "patience": cfg.patience,
            "deterministic": cfg.deterministic,
            "backend": active_backend(),
        },
        args.seed, ds.corpus_hash(corpus_path),
    )
    runio.write_history(run_dir, history)
    runio.write_eval(run_dir, config, eval_report, history["stopped_epoch"])
    runio.write_checkpoint(run_dir, model, config)
    print(f"{config.display_name}: test accuracy "
          f"{eval_report.overall_accuracy:.4f} after {history['stopped_epoch']} epochs"
          f" (best epoch {history['best_epoch']}) -> {run_dir}")
    return 0


def cmd_evaluate(args) -> int:
    run = runio.Run(args.run)
    corpus_path = _data_path(args.dataset)
    corpus = ds.read_native(corpus_path)
    model = run.load_model()
    eval_report = trainer.evaluate(model, corpus)
    eval_report.check_consistency()
    print(f"{run.display_name} on {corpus_path}: overall "
          f"{eval_report.overall_accuracy:.4f} over {eval_report.n_test} frames")
    for snr in sorted(eval_report.per_snr):
        print(f"  {snr:>4d} dB: {eval_report.per_snr[snr]:.4f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        runio.write_eval(out, run.config, eval_report,
                         int(run.summary["stop_epoch"]))
        print(f"wrote evaluation CSVs to {out}")
    return 0


def cmd_curriculum(args) -> int:
    config = _resolve_config(args)
    corpus_path = _data_path(args.dataset)
    corpus = ds.read_native(corpus_path)
    cfg = _train_config(args, config)
    scenarios = trainer.curriculum_scenarios()
    if args.scenarios is not None:
        if args.scenarios < len(scenarios):
            # smoke mode: keep first and last (narrowest and full range)
            keep = scenarios[: args.scenarios - 1] + [scenarios[-1]]
            scenarios = keep if args.scenarios > 1 else [scenarios[0]]
    results = trainer.run_curriculum(config, corpus, cfg, scenarios=scenarios)
    run_dir = Path(args.out)
    run_dir.mkdir(parents=True, exist_ok=True)
    runio.write_config(run_dir, config)
    runio.write_manifest(
        run_dir, "curriculum",
        {
            "model": config.model_id,
            "dataset": str(corpus_path),
            "scenarios": [r.scenario.label for r in results],
            "batch_size": cfg.batch_size,
            "learning_rate": cfg.learning_rate,
            "max_epochs": cfg.max_epochs,
            "patience": cfg.patience,
            "backend": active_backend(),
        },
        args.seed, ds.corpus_hash(corpus_path),
    )
    runio.write_curriculum(run_dir, results)
    for r in results:
        print(f"{r.scenario.label:>10s}  low {r.acc_low:.4f}  high {r.acc_high:.4f}"
              f"  overall {r.acc_overall:.4f}")
    print(f"-> {run_dir}")
    return 0


def cmd_report(args) -> int:
    runs = [runio.Run(p) for p in args.runs]
    eval_runs = [r for r in runs if r.curriculum is None]
    curriculum_runs = [r for r in runs if r.curriculum is not None]
    out = Path(args.out)
    written = {}
    if eval_runs:
        written.update(report.emit_tables(eval_runs, out))
        written.update(report.emit_figures(
            eval_runs, out,
            curriculum_run=curriculum_runs[0] if curriculum_runs else None,
        ))
    elif curriculum_runs:
        report_run = curriculum_runs[0]
        written.update(report.emit_figures(
            curriculum_runs, out, curriculum_run=report_run))
    for name, path in sorted(written.items()):
        print(f"{name}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amrbench",
        description="Benchmark workbench for modulation-recognition models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize a labeled frame corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--frames-per-pair", type=int, default=1000)
    p.add_argument("--schemes", default="", help="comma list; default all 11")
    p.add_argument("--snr", default="-20:18", help="lo:hi range or comma list (dB)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("summarize", help="print corpus statistics")
    p.add_argument("--dataset", required=True)
    p.set_defaults(fn=cmd_summarize)

    def train_like(p, needs_out=True):
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--model", choices=modelzoo.MODEL_IDS)
        group.add_argument("--config", help="path to a model config JSON")
        p.add_argument("--dataset", required=True)
        if needs_out:
            p.add_argument("--out", required=True, help="run directory")
        p.add_argument("--batch-size", type=int, default=None)
        p.add_argument("--learning-rate", type=float, default=None)
        p.add_argument("--max-epochs", type=int, default=100)
        p.add_argument("--patience", type=int, default=5)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--nondeterministic", action="store_true")

    p = sub.add_parser("train", help="train one model under the benchmark protocol")
    train_like(p)
    p.add_argument("--augment", action="store_true",
                   help="train the BiLSTM+GRU augmented variant")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a trained run on a corpus")
    p.add_argument("--run", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("curriculum", help="run the SNR-curriculum experiment")
    train_like(p)
    p.add_argument("--scenarios", type=int, default=None,
                   help="smoke mode: run only the first N-1 plus the full range")
    p.set_defaults(fn=cmd_curriculum)

    p = sub.add_parser("report", help="aggregate runs into tables and figures")
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (AmrBenchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

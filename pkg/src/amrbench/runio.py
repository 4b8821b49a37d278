"""Run directory layout: one directory per training run.

    manifest.json         command, resolved values, seeds, corpus hash, version
    config.json           model config snapshot
    history.csv           epoch, train_loss, val_loss, val_accuracy
    eval_overall.csv      one row: identifiers, stop epoch, overall accuracy
    eval_per_snr.csv      snr_db, accuracy, n
    eval_per_modulation.csv
    confusion.csv         11x11 counts, row = true class
    checkpoint.amrc       trained parameters bound to the config hash
    curriculum.csv        (curriculum runs) scenario, acc_low, acc_high, acc_overall
"""

import csv
import io
import json
import time
from pathlib import Path

from . import modelzoo
from .errors import FormatError
from .nn.checkpoint import load_params, save_params
from .sigsynth import CLASS_NAMES

TOOL_VERSION = "0.1.0"


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def write_manifest(run_dir, command, values, seed, corpus_hash):
    manifest = {
        "command": command,
        "values": values,
        "seed": seed,
        "corpus_hash": corpus_hash,
        "tool_version": TOOL_VERSION,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    path = Path(run_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", "utf-8")
    return manifest


def write_history(run_dir, history):
    _write_csv(
        Path(run_dir) / "history.csv",
        ["epoch", "train_loss", "val_loss", "val_accuracy"],
        [
            [row["epoch"], f"{row['train_loss']:.8f}", f"{row['val_loss']:.8f}",
             f"{row['val_accuracy']:.8f}"]
            for row in history["epochs"]
        ],
    )


def write_eval(run_dir, config, report, stop_epoch):
    run_dir = Path(run_dir)
    _write_csv(
        run_dir / "eval_overall.csv",
        ["model", "display_name", "param_count", "batch_size", "learning_rate",
         "stop_epoch", "overall_accuracy", "n_test"],
        [[config.model_id, config.display_name, modelzoo.param_count(config),
          config.batch_size, config.learning_rate, stop_epoch,
          f"{report.overall_accuracy:.8f}", report.n_test]],
    )
    _write_csv(
        run_dir / "eval_per_snr.csv",
        ["snr_db", "accuracy", "n"],
        [[snr, f"{report.per_snr[snr]:.8f}", report.per_snr_counts[snr]]
         for snr in sorted(report.per_snr)],
    )
    _write_csv(
        run_dir / "eval_per_modulation.csv",
        ["modulation", "accuracy", "n"],
        [[name, f"{report.per_modulation[name]:.8f}",
          report.per_modulation_counts[name]]
         for name in CLASS_NAMES if name in report.per_modulation],
    )
    _write_csv(
        run_dir / "confusion.csv",
        ["true\\pred", *CLASS_NAMES],
        [[CLASS_NAMES[i], *report.confusion[i].tolist()]
         for i in range(len(CLASS_NAMES))],
    )


def write_checkpoint(run_dir, model, config):
    save_params(Path(run_dir) / "checkpoint.amrc", model.params,
                modelzoo.config_hash(config))


def write_config(run_dir, config):
    (Path(run_dir) / "config.json").write_text(modelzoo.save_config(config), "utf-8")


def write_curriculum(run_dir, results):
    _write_csv(
        Path(run_dir) / "curriculum.csv",
        ["scenario", "train_lo_db", "train_hi_db", "acc_low", "acc_high",
         "acc_overall", "stop_epoch"],
        [[r.scenario.label, r.scenario.lo, r.scenario.hi, f"{r.acc_low:.8f}",
          f"{r.acc_high:.8f}", f"{r.acc_overall:.8f}", r.stop_epoch]
         for r in results],
    )


class Run:
    """A completed run directory, loaded for reporting."""

    def __init__(self, path):
        self.path = Path(path)
        self.manifest = json.loads((self.path / "manifest.json").read_text("utf-8"))
        self.config = modelzoo.load_config((self.path / "config.json").read_text("utf-8"))
        overall = _read_csv(self.path / "eval_overall.csv")
        if len(overall) != 1:
            raise FormatError(f"{self.path}: eval_overall.csv must have one row")
        self.summary = overall[0]
        self.per_snr = {
            int(r["snr_db"]): float(r["accuracy"])
            for r in _read_csv(self.path / "eval_per_snr.csv")
        }
        self.per_modulation = {
            r["modulation"]: float(r["accuracy"])
            for r in _read_csv(self.path / "eval_per_modulation.csv")
        }
        curriculum = self.path / "curriculum.csv"
        self.curriculum = _read_csv(curriculum) if curriculum.exists() else None

    @property
    def corpus_hash(self):
        return self.manifest["corpus_hash"]

    @property
    def model_id(self):
        return self.config.model_id

    @property
    def is_augmented(self):
        return self.config.augmented is not None

    @property
    def display_name(self):
        return self.config.display_name

    @property
    def overall_accuracy(self):
        return float(self.summary["overall_accuracy"])

    def load_model(self):
        model = modelzoo.build(self.config)
        params, _ = load_params(self.path / "checkpoint.amrc",
                                expect_hash=modelzoo.config_hash(self.config))
        model.set_params(params)
        return model


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))

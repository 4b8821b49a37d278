"""Training protocol: mini-batch Adam with early stopping on validation loss,
one-pass evaluation with per-SNR / per-modulation breakdowns, and the
SNR-curriculum experiment."""

import numpy as np

from . import modelzoo
from .dataset import Dataset, filter_by_snr, split
from .errors import DivergenceError, InvalidInputError, InvalidLabelError, ScenarioError
from .nn.network import cross_entropy, one_hot_encode
from .nn.optim import Adam
from .seeding import derive_rng
from .sigsynth import CLASS_NAMES, SNR_LEVELS


class TrainConfig:
    """Knobs of one training run.

    ``accuracy_goal`` optionally stops training once validation accuracy
    reaches the goal (used by overfit sanity checks); early stopping on
    validation loss applies regardless.
    """

    def __init__(self, batch_size=400, learning_rate=1e-3, max_epochs=100,
                 patience=5, seed=0, deterministic=True, accuracy_goal=None):
        if max_epochs < 1 or patience < 1:
            raise InvalidInputError("max_epochs and patience must be >= 1")
        if batch_size < 1:
            raise InvalidInputError("batch_size must be >= 1")
        self.batch_size = int(batch_size)
        self.learning_rate = float(learning_rate)
        self.max_epochs = int(max_epochs)
        self.patience = int(patience)
        self.seed = int(seed)
        self.deterministic = bool(deterministic)
        self.accuracy_goal = accuracy_goal

    @classmethod
    def for_model(cls, config: modelzoo.ModelConfig, **overrides):
        base = dict(batch_size=config.batch_size, learning_rate=config.learning_rate)
        base.update(overrides)
        return cls(**base)


class EvalReport:
    """Accuracy breakdowns of one trained model on one test set."""

    def __init__(self, confusion, per_snr, per_snr_counts, per_modulation,
                 per_modulation_counts):
        self.confusion = confusion
        self.per_snr = per_snr
        self.per_snr_counts = per_snr_counts
        self.per_modulation = per_modulation
        self.per_modulation_counts = per_modulation_counts
        self.n_test = int(confusion.sum())
        self.overall_accuracy = float(np.trace(confusion) / self.n_test)

    def check_consistency(self, tol=1e-9):
        """The identities every report must satisfy."""
        snr_mean = sum(
            self.per_snr[s] * self.per_snr_counts[s] for s in self.per_snr
        ) / self.n_test
        mod_mean = sum(
            self.per_modulation[m] * self.per_modulation_counts[m]
            for m in self.per_modulation
        ) / self.n_test
        if abs(snr_mean - self.overall_accuracy) > tol:
            raise AssertionError(
                f"per-SNR weighted mean {snr_mean} != overall {self.overall_accuracy}"
            )
        if abs(mod_mean - self.overall_accuracy) > tol:
            raise AssertionError(
                f"per-modulation weighted mean {mod_mean} != overall {self.overall_accuracy}"
            )

    def accuracy_over_snr(self, lo=None, hi=None) -> float:
        """Sample-weighted accuracy over SNR levels in [lo, hi]."""
        keys = [s for s in self.per_snr
                if (lo is None or s >= lo) and (hi is None or s <= hi)]
        total = sum(self.per_snr_counts[s] for s in keys)
        if total == 0:
            return float("nan")
        return sum(self.per_snr[s] * self.per_snr_counts[s] for s in keys) / total


def accuracy(predictions, labels) -> float:
    """Fraction of argmax predictions matching labels (indices or one-hot)."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if labels.ndim == 2:
        labels = labels.argmax(axis=1)
    if predictions.ndim == 2:
        predictions = predictions.argmax(axis=1)
    if len(predictions) != len(labels):
        raise InvalidInputError(
            f"length mismatch: {len(predictions)} predictions vs {len(labels)} labels"
        )
    return float(np.mean(predictions == labels))


def _epoch_seed(cfg: TrainConfig):
    if cfg.deterministic:
        return cfg.seed
    return int(np.random.SeedSequence().generate_state(1)[0])


def train(model, train_set: Dataset, val_set: Dataset, cfg: TrainConfig):
    """Fit the model; returns (model, history).

    History rows: epoch, train_loss, val_loss, val_accuracy. The parameters
    of the best-validation-loss epoch are restored before returning; training
    stops after ``patience`` epochs without improvement.
    """
    if len(train_set) == 0 or len(val_set) == 0:
        raise InvalidInputError("train and validation sets must be nonempty")
    n_classes = model.output_shape[0]
    y_train = one_hot_encode(train_set.labels, n_classes, dtype=model.dtype)
    y_val = one_hot_encode(val_set.labels, n_classes, dtype=model.dtype)
    seed = _epoch_seed(cfg)
    shuffle_rng = derive_rng(seed, "train", "shuffle")
    dropout_rng = derive_rng(seed, "train", "dropout")
    optimizer = Adam(cfg.learning_rate)
    history = []
    best_loss = np.inf
    best_params = model.copy_params()
    best_epoch = 0
    bad_epochs = 0
    for epoch in range(1, cfg.max_epochs + 1):
        order = shuffle_rng.permutation(len(train_set))
        losses = []
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            loss, _, grads = model.loss_and_grads(
                train_set.iq[batch], y_train[batch], rng=dropout_rng
            )
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite training loss at epoch {epoch}")
            optimizer.step(model.params, grads)
            losses.append(loss)
        val_loss, val_acc = _eval_loss(model, val_set.iq, y_val, cfg.batch_size)
        if not np.isfinite(val_loss):
            raise DivergenceError(f"non-finite validation loss at epoch {epoch}")
        history.append({
            "epoch": epoch,
            "train_loss": float(np.mean(losses)),
            "val_loss": val_loss,
            "val_accuracy": val_acc,
        })
        if val_loss < best_loss:
            best_loss = val_loss
            best_params = model.copy_params()
            best_epoch = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
        if cfg.accuracy_goal is not None and val_acc >= cfg.accuracy_goal:
            break
        if bad_epochs >= cfg.patience:
            break
    model.set_params(best_params)
    return model, {"epochs": history, "best_epoch": best_epoch,
                   "best_val_loss": float(best_loss),
                   "stopped_epoch": history[-1]["epoch"] if history else 0}


def _eval_loss(model, x, y_onehot, batch_size):
    total_loss = 0.0
    correct = 0
    for start in range(0, len(x), batch_size):
        xb = x[start : start + batch_size]
        yb = y_onehot[start : start + batch_size]
        logits = model.forward(xb)
        loss, _ = cross_entropy(logits, yb)
        total_loss += loss * len(xb)
        correct += int((logits.argmax(axis=1) == yb.argmax(axis=1)).sum())
    return total_loss / len(x), correct / len(x)


def evaluate(model, test_set: Dataset, batch_size: int = 512) -> EvalReport:
    """One eval-mode pass computing confusion and both breakdowns."""
    if len(test_set) == 0:
        raise InvalidInputError("test set is empty")
    n_classes = model.output_shape[0]
    if int(test_set.labels.max()) >= n_classes:
        raise InvalidLabelError(
            f"label {int(test_set.labels.max())} out of range for {n_classes} classes"
        )
    preds = model.predict(test_set.iq, batch_size=batch_size)
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (test_set.labels.astype(int), preds), 1)
    hits = preds == test_set.labels
    per_snr, per_snr_counts = {}, {}
    for snr in sorted(set(int(s) for s in test_set.snrs)):
        mask = test_set.snrs == snr
        per_snr[snr] = float(hits[mask].mean())
        per_snr_counts[snr] = int(mask.sum())
    per_mod, per_mod_counts = {}, {}
    for cls in sorted(set(int(c) for c in test_set.labels)):
        mask = test_set.labels == cls
        per_mod[CLASS_NAMES[cls]] = float(hits[mask].mean())
        per_mod_counts[CLASS_NAMES[cls]] = int(mask.sum())
    return EvalReport(confusion, per_snr, per_snr_counts, per_mod, per_mod_counts)


# ---------------------------------------------------------------------------
# SNR curriculum


class CurriculumScenario:
    def __init__(self, lo: int, hi: int = 18):
        self.lo = int(lo)
        self.hi = int(hi)

    @property
    def label(self) -> str:
        return f"[{self.lo},{self.hi}]"

    def __repr__(self):
        return f"CurriculumScenario({self.label})"


class CurriculumResult:
    def __init__(self, scenario, acc_low, acc_high, acc_overall, stop_epoch):
        self.scenario = scenario
        self.acc_low = acc_low      # test frames with snr < 0
        self.acc_high = acc_high    # test frames with snr >= 0 (0 dB counts high)
        self.acc_overall = acc_overall
        self.stop_epoch = stop_epoch


def curriculum_scenarios() -> list:
    """The 11 training ranges: high-SNR start [0,18], widened in 2 dB steps
    down to the full [-20,18]."""
    return [CurriculumScenario(lo) for lo in range(0, -22, -2)]


def run_curriculum(config: modelzoo.ModelConfig, dataset: Dataset,
                   cfg: TrainConfig, scenarios=None):
    """Train one fresh model per scenario on range-filtered train/val splits,
    evaluate each on the full-range test split."""
    if scenarios is None:
        scenarios = curriculum_scenarios()
    required = set(SNR_LEVELS)
    present = set(int(s) for s in dataset.snrs)
    if not required <= present:
        raise ScenarioError(
            f"corpus covers {sorted(present)}; curriculum needs all of {sorted(required)}"
        )
    indices = split(dataset, seed=cfg.seed)
    train_all = dataset.subset(indices.train)
    val_all = dataset.subset(indices.val)
    test_set = dataset.subset(indices.test)
    results = []
    for i, scenario in enumerate(scenarios):
        train_sub = filter_by_snr(train_all, scenario.lo, scenario.hi)
        val_sub = filter_by_snr(val_all, scenario.lo, scenario.hi)
        if len(train_sub) == 0 or len(val_sub) == 0:
            raise ScenarioError(f"scenario {scenario.label} selects no frames")
        model = modelzoo.build(config, seed=cfg.seed + i)
        run_cfg = TrainConfig(
            batch_size=cfg.batch_size, learning_rate=cfg.learning_rate,
            max_epochs=cfg.max_epochs, patience=cfg.patience,
            seed=cfg.seed + i, deterministic=cfg.deterministic,
            accuracy_goal=cfg.accuracy_goal,
        )
        model, history = train(model, train_sub, val_sub, run_cfg)
        report = evaluate(model, test_set)
        results.append(CurriculumResult(
            scenario,
            acc_low=report.accuracy_over_snr(hi=-1),
            acc_high=report.accuracy_over_snr(lo=0),
            acc_overall=report.overall_accuracy,
            stop_epoch=history["stopped_epoch"],
        ))
    return results

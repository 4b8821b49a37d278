import numpy as np
import pytest

from amrbench import dataset as ds
from amrbench import modelzoo as mz
from amrbench import trainer as tr
from amrbench.errors import InvalidInputError, ScenarioError
from amrbench.nn.layers import LayerSpec
from amrbench.nn.network import Model


class TestAccuracy:
    def test_all_correct(self):
        assert tr.accuracy([0, 1, 2], [0, 1, 2]) == 1.0

    def test_half(self):
        assert tr.accuracy([2, 1], [2, 0]) == 0.5

    def test_one_hot_labels(self):
        one_hot = np.eye(3)[[2, 0]]
        assert tr.accuracy([2, 1], one_hot) == 0.5

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            tr.accuracy([1, 2], [1])


def _tiny_model(num_classes=11):
    specs = [
        LayerSpec("flat", "flatten", ("input",), {}),
        LayerSpec("fc", "dense", ("flat",), {"units": num_classes}),
    ]
    return Model(specs, (2, 128), seed=0)


class TestTrain:
    def test_history_and_early_stopping_restores_best(self, small_corpus):
        idx = ds.split(small_corpus, seed=0)
        model = _tiny_model()
        cfg = tr.TrainConfig(batch_size=128, learning_rate=1e-3, max_epochs=10,
                             patience=2, seed=0)
        model, history = tr.train(model, small_corpus.subset(idx.train),
                                  small_corpus.subset(idx.val), cfg)
        rows = history["epochs"]
        assert rows[0]["epoch"] == 1
        best = min(r["val_loss"] for r in rows)
        assert history["best_val_loss"] == pytest.approx(best)

    def test_patience_one_stops_at_epoch_two(self, small_corpus):
        # an LR large enough that validation loss worsens monotonically
        # after epoch 1: must stop at epoch 2 and return epoch-1 weights
        idx = ds.split(small_corpus, seed=0)
        train_set = small_corpus.subset(idx.train[:64])
        val_set = small_corpus.subset(idx.val[:32])
        cfg = tr.TrainConfig(batch_size=32, learning_rate=50.0, max_epochs=10,
                             patience=1, seed=0)
        model, history = tr.train(_tiny_model(), train_set, val_set, cfg)
        rows = history["epochs"]
        assert rows[0]["val_loss"] < rows[1]["val_loss"]
        assert len(rows) == 2
        assert history["best_epoch"] == 1
        # same seed, one-epoch run reproduces the restored weights
        ref_cfg = tr.TrainConfig(batch_size=32, learning_rate=50.0, max_epochs=1,
                                 patience=1, seed=0)
        ref, _ = tr.train(_tiny_model(), train_set, val_set, ref_cfg)
        for lname in ref.params:
            for pname in ref.params[lname]:
                assert np.array_equal(model.params[lname][pname],
                                      ref.params[lname][pname])

    def test_deterministic_same_seed_same_weights(self, high_snr_toy):
        cfg = tr.TrainConfig(batch_size=64, learning_rate=1e-3, max_epochs=2,
                             patience=5, seed=3)
        finals = []
        for _ in range(2):
            model = _tiny_model()
            model, _ = tr.train(model, high_snr_toy, high_snr_toy, cfg)
            finals.append(model.copy_params())
        for lname in finals[0]:
            for pname in finals[0][lname]:
                assert np.array_equal(finals[0][lname][pname], finals[1][lname][pname])

    def test_empty_sets_rejected(self, high_snr_toy):
        empty = high_snr_toy.subset(np.array([], dtype=int))
        with pytest.raises(InvalidInputError):
            tr.train(_tiny_model(), empty, high_snr_toy, tr.TrainConfig())


class _StubModel:
    """Predicts the true class for high-SNR frames, a wrong class otherwise."""

    def __init__(self, corpus, boundary=0):
        self.corpus = corpus
        self.boundary = boundary
        self.output_shape = (11,)

    def predict(self, x, batch_size=None):
        n = len(x)
        # frames arrive in corpus order in evaluate()
        labels = self.corpus.labels[:n].astype(int)
        snrs = self.corpus.snrs[:n]
        preds = labels.copy()
        low = snrs < self.boundary
        preds[low] = (labels[low] + 1) % 11
        return preds


class TestEvaluate:
    def test_perfect_stub(self, small_corpus):
        stub = _StubModel(small_corpus, boundary=-100)
        report = tr.evaluate(stub, small_corpus)
        assert report.overall_accuracy == 1.0
        assert np.trace(report.confusion) == len(small_corpus)

    def test_constant_classifier_uniform_corpus(self, small_corpus):
        class Constant:
            output_shape = (11,)

            def predict(self, x, batch_size=None):
                return np.zeros(len(x), dtype=int)

        report = tr.evaluate(Constant(), small_corpus)
        assert report.overall_accuracy == pytest.approx(1 / 11)

    def test_consistency_identities(self, small_corpus):
        stub = _StubModel(small_corpus, boundary=0)
        report = tr.evaluate(stub, small_corpus)
        report.check_consistency(tol=1e-9)
        assert report.overall_accuracy == pytest.approx(
            np.trace(report.confusion) / report.n_test
        )

    def test_per_breakdown_ranges(self, small_corpus):
        report = tr.evaluate(_StubModel(small_corpus), small_corpus)
        assert all(0 <= a <= 1 for a in report.per_snr.values())
        assert all(0 <= a <= 1 for a in report.per_modulation.values())

    def test_empty_test_set(self, small_corpus):
        empty = small_corpus.subset(np.array([], dtype=int))
        with pytest.raises(InvalidInputError):
            tr.evaluate(_StubModel(small_corpus), empty)

    def test_label_out_of_range(self, small_corpus):
        from amrbench.errors import InvalidLabelError
        broken = small_corpus.subset(np.arange(10))
        broken.labels = broken.labels.copy()
        broken.labels[0] = 42
        with pytest.raises(InvalidLabelError):
            tr.evaluate(_StubModel(broken), broken)


class TestCurriculum:
    def test_scenarios_enumeration(self):
        scenarios = tr.curriculum_scenarios()
        assert len(scenarios) == 11
        assert (scenarios[0].lo, scenarios[0].hi) == (0, 18)
        assert (scenarios[-1].lo, scenarios[-1].hi) == (-20, 18)
        assert [s.lo for s in scenarios] == list(range(0, -22, -2))
        assert scenarios[9].label == "[-18,18]"

    def test_stub_triplet_counting(self, small_corpus):
        # boundary rule: 0 dB belongs to the high stratum -> 10 of 20 levels
        # are "high"; a stub correct exactly on snr >= 0 gives (0, 1, 0.5)
        stub = _StubModel(small_corpus, boundary=0)
        report = tr.evaluate(stub, small_corpus)
        acc_low = report.accuracy_over_snr(hi=-1)
        acc_high = report.accuracy_over_snr(lo=0)
        assert acc_low == 0.0
        assert acc_high == 1.0
        assert report.overall_accuracy == pytest.approx(0.5)

    def test_run_curriculum_filters_and_reports(self, small_corpus):
        config = mz.ModelConfig(
            model_id="LSTM",
            layers=[
                LayerSpec("flat", "flatten", ("input",), {}),
                LayerSpec("fc", "dense", ("flat",), {"units": 11}),
            ],
            batch_size=128, learning_rate=1e-3,
        )
        cfg = tr.TrainConfig(batch_size=128, learning_rate=1e-3, max_epochs=1,
                             patience=1, seed=0)
        scenarios = [tr.CurriculumScenario(0), tr.CurriculumScenario(-20)]
        results = tr.run_curriculum(config, small_corpus, cfg, scenarios=scenarios)
        assert len(results) == 2
        for r in results:
            assert 0.0 <= r.acc_low <= 1.0
            assert 0.0 <= r.acc_high <= 1.0
            assert min(r.acc_low, r.acc_high) - 1e-9 <= r.acc_overall \
                <= max(r.acc_low, r.acc_high) + 1e-9

    def test_partial_corpus_rejected(self, small_corpus):
        high_only = ds.filter_by_snr(small_corpus, 0, 18)
        config = mz.get_config("GRU")
        with pytest.raises(ScenarioError):
            tr.run_curriculum(config, high_only, tr.TrainConfig())

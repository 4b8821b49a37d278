import json

import numpy as np
import pytest

from amrbench import modelzoo as mz
from amrbench.errors import ConfigParseError, InvalidConfigError

TABLE1_COUNTS = {
    "CNN1": 1_592_383,
    "CNN2": 858_123,
    "CLDNN": 632_531,
    "IC-AMCNet": 1_264_011,
    "MCNet": 121_611,
    "LSTM": 200_075,
    "GRU": 151_179,
    "MCLDNN": 405_887,
    "CGDNet": 1_808_811,
}

TABLE1_DEFAULTS = {
    "CNN1": (1024, 1e-4),
    "CNN2": (1024, 1e-4),
    "CLDNN": (400, 1e-3),
    "IC-AMCNet": (400, 1e-3),
    "MCNet": (128, 1e-4),
    "LSTM": (400, 1e-3),
    "GRU": (400, 1e-3),
    "MCLDNN": (400, 1e-3),
    "CGDNet": (1024, 1e-2),
}


class TestParamCount:
    @pytest.mark.parametrize("model_id", mz.MODEL_IDS)
    def test_shipped_config_counts(self, model_id):
        config = mz.get_config(model_id)
        assert mz.param_count(config) == TABLE1_COUNTS[model_id]

    def test_lstm_decomposition(self):
        # 4*(h*(d+h)+h) per layer plus the classifier dense
        assert 4 * (128 * (2 + 128) + 128) == 67_072
        assert 4 * (128 * (128 + 128) + 128) == 131_584
        assert 128 * 11 + 11 == 1_419
        assert 67_072 + 131_584 + 1_419 == TABLE1_COUNTS["LSTM"]

    def test_gru_decomposition(self):
        # reset-after: 3*(h*(d+h)+2h) per layer
        assert 3 * (128 * (2 + 128) + 256) == 50_688
        assert 3 * (128 * (128 + 128) + 256) == 99_072
        assert 50_688 + 99_072 + 1_419 == TABLE1_COUNTS["GRU"]

    def test_single_dense_trivial(self):
        config = mz.ModelConfig(
            model_id="LSTM", input_shape=(2,), num_classes=3,
            layers=[mz.LayerSpec("fc", "dense", ("input",), {"units": 3})],
        )
        assert mz.param_count(config) == 9


class TestBuild:
    @pytest.mark.parametrize("model_id", mz.MODEL_IDS)
    def test_instance_total_matches_static_count(self, model_id):
        config = mz.get_config(model_id)
        assert mz.build(config, seed=0).total_params == TABLE1_COUNTS[model_id]

    def test_deterministic_build(self):
        config = mz.get_config("GRU")
        m1, m2 = mz.build(config, seed=9), mz.build(config, seed=9)
        for lname in m1.params:
            for pname in m1.params[lname]:
                assert np.array_equal(m1.params[lname][pname], m2.params[lname][pname])

    def test_augmented_mcldnn_grows(self):
        config = mz.get_config("MCLDNN")
        aug = mz.augment(config)
        assert mz.build(aug, seed=0).total_params > 405_887

    @pytest.mark.parametrize("model_id", mz.MODEL_IDS)
    def test_forward_shape(self, model_id):
        model = mz.build(mz.get_config(model_id), seed=1)
        x = np.random.default_rng(0).standard_normal((2, 2, 128)).astype(np.float32)
        assert model.forward(x).shape == (2, 11)


class TestAugment:
    @pytest.mark.parametrize("model_id", mz.MODEL_IDS)
    def test_count_strictly_increases(self, model_id):
        config = mz.get_config(model_id)
        assert mz.param_count(mz.augment(config)) > mz.param_count(config)

    def test_double_augment_rejected(self):
        aug = mz.augment(mz.get_config("CLDNN"))
        with pytest.raises(InvalidConfigError):
            mz.augment(aug)

    def test_inherits_training_defaults(self):
        config = mz.get_config("CGDNet")
        aug = mz.augment(config)
        assert (aug.batch_size, aug.learning_rate) == (config.batch_size,
                                                       config.learning_rate)

    def test_augmented_cldnn_trains_end_to_end(self, high_snr_toy):
        from amrbench import trainer as tr
        config = mz.augment(mz.get_config("CLDNN"))
        model = mz.build(config, seed=0)
        toy = high_snr_toy.subset(np.arange(64))
        cfg = tr.TrainConfig(batch_size=32, learning_rate=1e-3, max_epochs=1,
                             patience=1, seed=0)
        model, history = tr.train(model, toy, toy, cfg)
        assert len(history["epochs"]) == 1

    def test_missing_classifier_rejected(self):
        config = mz.ModelConfig(
            model_id="LSTM", input_shape=(4,), num_classes=4,
            layers=[mz.LayerSpec("f", "flatten", ("input",), {})],
        )
        with pytest.raises(InvalidConfigError):
            mz.augment(config)


class TestSerialization:
    @pytest.mark.parametrize("model_id", mz.MODEL_IDS)
    def test_round_trip(self, model_id):
        config = mz.get_config(model_id)
        text = mz.save_config(config)
        loaded = mz.load_config(text)
        assert mz.save_config(loaded) == text
        assert mz.config_hash(loaded) == mz.config_hash(config)

    def test_code_builders_match_shipped_files(self):
        for model_id in mz.MODEL_IDS:
            assert mz.save_config(mz.make_config(model_id)) == mz.save_config(
                mz.get_config(model_id)
            )

    def test_negative_units_parse_error(self):
        raw = json.loads(mz.save_config(mz.get_config("LSTM")))
        raw["layers"][1]["units"] = -4
        with pytest.raises(ConfigParseError, match="units"):
            mz.load_config(json.dumps(raw))

    def test_unknown_kind_parse_error(self):
        raw = json.loads(mz.save_config(mz.get_config("LSTM")))
        raw["layers"][0]["kind"] = "transformer"
        with pytest.raises(ConfigParseError, match=r"layers\[0\]"):
            mz.load_config(json.dumps(raw))

    def test_malformed_json_location(self):
        with pytest.raises(ConfigParseError, match="line"):
            mz.load_config("{not json")

    def test_unknown_model_id(self):
        with pytest.raises(InvalidConfigError, match="CNN1"):
            mz.get_config("ResNet99")

    def test_hash_changes_with_structure(self):
        base = mz.get_config("GRU")
        assert mz.config_hash(base) != mz.config_hash(mz.augment(base))

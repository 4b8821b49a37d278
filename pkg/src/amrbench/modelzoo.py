"""The nine benchmark architectures: declarative configs, exact parameter
counting, instantiation, and the BiLSTM+GRU augmentation transform.

Each config is shipped as a JSON file under ``amrbench/configs`` and can be
rebuilt programmatically via :func:`make_config`. Training defaults
(batch size, learning rate) ride along in the config.
"""

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import ConfigParseError, InvalidConfigError
from .nn import layers
from .nn.layers import LayerSpec
from .nn.network import Model

MODEL_IDS = (
    "CNN1",
    "CNN2",
    "CLDNN",
    "IC-AMCNet",
    "MCNet",
    "LSTM",
    "GRU",
    "MCLDNN",
    "CGDNet",
)

# batch size / learning rate per model; 100-epoch budget is the trainer default
TRAIN_DEFAULTS = {
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

SCHEMA_VERSION = 1


@dataclass
class ModelConfig:
    model_id: str
    layers: list
    input_shape: tuple = (2, 128)
    num_classes: int = 11
    batch_size: int = 400
    learning_rate: float = 1e-3
    augmented: dict | None = None

    @property
    def display_name(self) -> str:
        return f"{self.model_id}+BiLSTM-GRU" if self.augmented else self.model_id

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "model_id": self.model_id,
            "input_shape": list(self.input_shape),
            "num_classes": self.num_classes,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "augmented": self.augmented,
            "layers": [
                {"name": s.name, "kind": s.kind, "inputs": list(s.inputs), **s.hp}
                for s in self.layers
            ],
        }


def infer_layer_shapes(config: ModelConfig) -> dict:
    """Shapes of every layer output, keyed by name ('input' included)."""
    shapes = {"input": tuple(config.input_shape)}
    for spec in config.layers:
        shapes[spec.name] = layers.infer_shape(spec, [shapes[i] for i in spec.inputs])
    return shapes


def param_count(config: ModelConfig) -> int:
    """Exact trainable-parameter total, no instantiation."""
    shapes = {"input": tuple(config.input_shape)}
    total = 0
    for spec in config.layers:
        in_shapes = [shapes[i] for i in spec.inputs]
        shapes[spec.name] = layers.infer_shape(spec, in_shapes)
        total += layers.param_count(spec, in_shapes)
    return total


def validate(config: ModelConfig):
    shapes = infer_layer_shapes(config)
    out = shapes[config.layers[-1].name]
    if out != (config.num_classes,):
        raise InvalidConfigError(
            f"{config.display_name}: output shape {out}, expected ({config.num_classes},)"
        )


def build(config: ModelConfig, seed: int = 0, dtype=np.float32) -> Model:
    """Instantiate with deterministic initialization; total equals param_count."""
    validate(config)
    model = Model(config.layers, config.input_shape, seed=seed, dtype=dtype)
    assert model.total_params == param_count(config)
    return model


# ---------------------------------------------------------------------------
# serialization


def save_config(config: ModelConfig) -> str:
    """Canonical JSON text; stable bytes for hashing and checkpoint binding."""
    return json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n"


def config_hash(config: ModelConfig) -> str:
    blob = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def load_config(text: str) -> ModelConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigParseError("top level must be an object")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigParseError(f"schema_version {version!r}, expected {SCHEMA_VERSION}")
    try:
        specs = []
        for i, entry in enumerate(raw["layers"]):
            entry = dict(entry)
            try:
                name = entry.pop("name")
                kind = entry.pop("kind")
                inputs = entry.pop("inputs")
                specs.append(LayerSpec(name, kind, tuple(inputs), entry))
                _validate_hp(specs[-1])
            except (KeyError, InvalidConfigError, TypeError, ValueError) as exc:
                raise ConfigParseError(f"layers[{i}]: {exc}") from exc
        config = ModelConfig(
            model_id=raw["model_id"],
            layers=specs,
            input_shape=tuple(raw["input_shape"]),
            num_classes=int(raw["num_classes"]),
            batch_size=int(raw["batch_size"]),
            learning_rate=float(raw["learning_rate"]),
            augmented=raw.get("augmented"),
        )
    except KeyError as exc:
        raise ConfigParseError(f"missing field {exc}") from exc
    validate(config)
    return config


_POSITIVE_HP = {
    "dense": ("units",),
    "conv2d": ("filters",),
    "conv1d": ("filters", "kernel"),
    "lstm": ("units",),
    "gru": ("units",),
    "bilstm": ("units",),
}


def _validate_hp(spec: LayerSpec):
    for key in _POSITIVE_HP.get(spec.kind, ()):
        value = spec.hp.get(key)
        if not isinstance(value, int) or value <= 0:
            raise InvalidConfigError(f"{spec.name}: {key} must be a positive int, got {value!r}")
    if spec.kind == "dropout" and not 0 <= float(spec.hp.get("rate", -1)) < 1:
        raise InvalidConfigError(f"{spec.name}: rate must be in [0, 1)")


def get_config(model_id: str, augment_model: bool = False) -> ModelConfig:
    """Load a shipped config by model id."""
    if model_id not in MODEL_IDS:
        raise InvalidConfigError(
            f"unknown model id {model_id!r}; known: {', '.join(MODEL_IDS)}"
        )
    fname = model_id.lower().replace("-", "_") + ".json"
    text = resources.files("amrbench").joinpath("configs", fname).read_text("utf-8")
    config = load_config(text)
    return augment(config) if augment_model else config


# ---------------------------------------------------------------------------
# augmentation (sequence-memory layers grafted before the classifier)


def augment(config: ModelConfig, bilstm_units: int = 64, gru_units: int = 64) -> ModelConfig:
    """Insert a BiLSTM then a GRU between the feature stack and the final
    classifier dense layer. Training defaults are inherited from the base.

    The classifier input vector of width v is folded into an (8, v/8)
    sequence (or (v, 1) when v is not divisible by 8) so the recurrent
    layers see multiple timesteps.
    """
    if config.augmented is not None:
        raise InvalidConfigError(f"{config.display_name} is already augmented")
    final = config.layers[-1]
    if final.kind != "dense" or int(final.hp["units"]) != config.num_classes:
        raise InvalidConfigError("no final classifier dense layer to augment at")
    shapes = infer_layer_shapes(config)
    feed = final.inputs[0]
    v_shape = shapes[feed]
    if len(v_shape) != 1:
        raise InvalidConfigError(f"classifier input must be a vector, got {v_shape}")
    v = v_shape[0]
    steps = 8 if v % 8 == 0 else v
    inserted = [
        LayerSpec("aug_fold", "reshape", (feed,), {"target": [steps, v // steps]}),
        LayerSpec("aug_bilstm", "bilstm", ("aug_fold",),
                  {"units": int(bilstm_units), "return_sequences": True}),
        LayerSpec("aug_gru", "gru", ("aug_bilstm",), {"units": int(gru_units)}),
    ]
    new_final = LayerSpec(final.name, final.kind, ("aug_gru",), dict(final.hp))
    return ModelConfig(
        model_id=config.model_id,
        layers=config.layers[:-1] + inserted + [new_final],
        input_shape=config.input_shape,
        num_classes=config.num_classes,
        batch_size=config.batch_size,
        learning_rate=config.learning_rate,
        augmented={
            "base": config.model_id,
            "bilstm_units": int(bilstm_units),
            "gru_units": int(gru_units),
        },
    )


# ---------------------------------------------------------------------------
# the nine architectures


def _seq(defs):
    """Chain layer dicts into LayerSpecs, auto-wiring inputs to the previous."""
    specs = []
    prev = "input"
    for d in defs:
        d = dict(d)
        name = d.pop("name")
        kind = d.pop("kind")
        inputs = d.pop("inputs", [prev])
        specs.append(LayerSpec(name, kind, tuple(inputs), d))
        prev = name
    return specs


def _relu(name, of):
    return {"name": name, "kind": "activation", "fn": "relu", "inputs": [of]}


def make_config(model_id: str) -> ModelConfig:
    builder = _BUILDERS.get(model_id)
    if builder is None:
        raise InvalidConfigError(
            f"unknown model id {model_id!r}; known: {', '.join(MODEL_IDS)}"
        )
    batch, lr = TRAIN_DEFAULTS[model_id]
    config = ModelConfig(model_id=model_id, layers=builder(),
                         batch_size=batch, learning_rate=lr)
    validate(config)
    return config


def _cnn1():
    return _seq([
        {"name": "stack", "kind": "reshape", "target": [1, 2, 128]},
        {"name": "pad1", "kind": "zero-pad", "pad": [[0, 0], [2, 2]]},
        {"name": "conv1", "kind": "conv2d", "filters": 64, "kernel": [1, 3]},
        _relu("act1", "conv1"),
        {"name": "drop1", "kind": "dropout", "rate": 0.5},
        {"name": "pad2", "kind": "zero-pad", "pad": [[0, 0], [2, 2]]},
        {"name": "conv2", "kind": "conv2d", "filters": 128, "kernel": [2, 5]},
        _relu("act2", "conv2"),
        {"name": "drop2", "kind": "dropout", "rate": 0.5},
        {"name": "pool", "kind": "max-pool", "pool": [1, 2]},
        {"name": "flat", "kind": "flatten"},
        {"name": "fc1", "kind": "dense", "units": 180},
        _relu("act3", "fc1"),
        {"name": "drop3", "kind": "dropout", "rate": 0.5},
        {"name": "fc2", "kind": "dense", "units": 64},
        _relu("act4", "fc2"),
        {"name": "head", "kind": "dense", "units": 11},
    ])


def _cnn2():
    return _seq([
        {"name": "stack", "kind": "reshape", "target": [1, 2, 128]},
        {"name": "conv1", "kind": "conv2d", "filters": 256, "kernel": [2, 8],
         "padding": "same"},
        _relu("act1", "conv1"),
        {"name": "drop1", "kind": "dropout", "rate": 0.5},
        {"name": "pool1", "kind": "max-pool", "pool": [1, 2]},
        {"name": "conv2", "kind": "conv2d", "filters": 64, "kernel": [2, 8],
         "padding": "same"},
        _relu("act2", "conv2"),
        {"name": "drop2", "kind": "dropout", "rate": 0.5},
        {"name": "pool2", "kind": "max-pool", "pool": [1, 2]},
        {"name": "flat", "kind": "flatten"},
        {"name": "fc1", "kind": "dense", "units": 144},
        _relu("act3", "fc1"),
        {"name": "drop3", "kind": "dropout", "rate": 0.5},
        {"name": "head", "kind": "dense", "units": 11},
    ])


def _cldnn():
    return _seq([
        {"name": "stack", "kind": "reshape", "target": [1, 2, 128]},
        {"name": "pad1", "kind": "zero-pad", "pad": [[0, 0], [2, 2]]},
        {"name": "conv1", "kind": "conv2d", "filters": 256, "kernel": [1, 3]},
        _relu("act1", "conv1"),
        {"name": "drop1", "kind": "dropout", "rate": 0.5},
        {"name": "pad2", "kind": "zero-pad", "pad": [[0, 0], [2, 2]]},
        {"name": "conv2", "kind": "conv2d", "filters": 256, "kernel": [2, 3]},
        _relu("act2", "conv2"),
        {"name": "drop2", "kind": "dropout", "rate": 0.5},
        {"name": "pad3", "kind": "zero-pad", "pad": [[0, 0], [2, 2]]},
        {"name": "conv3", "kind": "conv2d", "filters": 80, "kernel": [1, 3]},
        _relu("act3", "conv3"),
        {"name": "drop3", "kind": "dropout", "rate": 0.5},
        {"name": "seq", "kind": "reshape", "perm": [2, 0, 1], "target": [134, 80]},
        {"name": "lstm", "kind": "lstm", "units": 157},
        {"name": "fc1", "kind": "dense", "units": 160},
        _relu("act4", "fc1"),
        {"name": "drop4", "kind": "dropout", "rate": 0.5},
        {"name": "head", "kind": "dense", "units": 11},
    ])


def _ic_amcnet():
    return _seq([
        {"name": "stack", "kind": "reshape", "target": [1, 2, 128]},
        {"name": "conv1", "kind": "conv2d", "filters": 32, "kernel": [1, 8],
         "padding": "same"},
        _relu("act1", "conv1"),
        {"name": "conv2", "kind": "conv2d", "filters": 32, "kernel": [1, 8],
         "padding": "same"},
        _relu("act2", "conv2"),
        {"name": "pool", "kind": "max-pool", "pool": [2, 2]},
        {"name": "drop1", "kind": "dropout", "rate": 0.4},
        {"name": "flat", "kind": "flatten"},
        {"name": "fc1", "kind": "dense", "units": 576},
        _relu("act3", "fc1"),
        {"name": "fc2", "kind": "dense", "units": 128},
        _relu("act4", "fc2"),
        {"name": "drop2", "kind": "dropout", "rate": 0.4},
        {"name": "head", "kind": "dense", "units": 11},
    ])


def _mcnet_block(i, inp, branch_filters, merge_filters):
    a, b = f"b{i}a", f"b{i}b"
    return [
        {"name": a, "kind": "conv2d", "filters": branch_filters, "kernel": [1, 3],
         "padding": "same", "inputs": [inp]},
        _relu(f"{a}_act", a),
        {"name": b, "kind": "conv2d", "filters": branch_filters, "kernel": [3, 1],
         "padding": "same", "inputs": [inp]},
        _relu(f"{b}_act", b),
        {"name": f"b{i}cat", "kind": "concat", "axis": 0,
         "inputs": [f"{a}_act", f"{b}_act"]},
        {"name": f"b{i}merge", "kind": "conv2d", "filters": merge_filters,
         "kernel": [1, 1], "inputs": [f"b{i}cat"]},
        _relu(f"b{i}out", f"b{i}merge"),
    ]


def _mcnet():
    head = _seq([
        {"name": "stack", "kind": "reshape", "target": [1, 2, 128]},
        {"name": "pre", "kind": "conv2d", "filters": 64, "kernel": [3, 7],
         "stride": [1, 2], "padding": "same"},
        _relu("pre_act", "pre"),
        {"name": "pre_pool", "kind": "max-pool", "pool": [1, 2]},
    ])
    blocks = []
    for i, (fa, g) in enumerate(((24, 16), (24, 32), (24, 64)), start=1):
        inp = "pre_pool" if i == 1 else f"b{i-1}out"
        blocks += _seq(_mcnet_block(i, inp, fa, g))[:]
    tail = [
        LayerSpec("skip", "add", ("b3out", "pre_pool"), {}),
        LayerSpec("expand", "conv2d", ("skip",), {"filters": 128, "kernel": [1, 1]}),
        LayerSpec("expand_act", "activation", ("expand",), {"fn": "relu"}),
        LayerSpec("drop", "dropout", ("expand_act",), {"rate": 0.3}),
        LayerSpec("flat", "flatten", ("drop",), {}),
        LayerSpec("head", "dense", ("flat",), {"units": 11}),
    ]
    return head + blocks + tail


def _lstm2():
    return _seq([
        {"name": "seq", "kind": "reshape", "perm": [1, 0], "target": [128, 2]},
        {"name": "lstm1", "kind": "lstm", "units": 128, "return_sequences": True},
        {"name": "drop1", "kind": "dropout", "rate": 0.2},
        {"name": "lstm2", "kind": "lstm", "units": 128},
        {"name": "drop2", "kind": "dropout", "rate": 0.2},
        {"name": "head", "kind": "dense", "units": 11},
    ])


def _gru2():
    return _seq([
        {"name": "seq", "kind": "reshape", "perm": [1, 0], "target": [128, 2]},
        {"name": "gru1", "kind": "gru", "units": 128, "return_sequences": True},
        {"name": "drop1", "kind": "dropout", "rate": 0.2},
        {"name": "gru2", "kind": "gru", "units": 128},
        {"name": "drop2", "kind": "dropout", "rate": 0.2},
        {"name": "head", "kind": "dense", "units": 11},
    ])


def _mcldnn():
    specs = _seq([
        {"name": "iq_plane", "kind": "reshape", "target": [1, 2, 128]},
        {"name": "conv_iq", "kind": "conv2d", "filters": 50, "kernel": [2, 8],
         "padding": "same"},
        _relu("iq_act", "conv_iq"),
    ])
    specs += _seq([
        {"name": "row_i", "kind": "zero-pad", "pad": [[0, -1], [0, 0]],
         "inputs": ["input"]},
        {"name": "conv_i", "kind": "conv1d", "filters": 50, "kernel": 8,
         "padding": "same"},
        _relu("i_act", "conv_i"),
        {"name": "i_map", "kind": "reshape", "target": [50, 1, 128]},
    ])
    specs += _seq([
        {"name": "row_q", "kind": "zero-pad", "pad": [[-1, 0], [0, 0]],
         "inputs": ["input"]},
        {"name": "conv_q", "kind": "conv1d", "filters": 50, "kernel": 8,
         "padding": "same"},
        _relu("q_act", "conv_q"),
        {"name": "q_map", "kind": "reshape", "target": [50, 1, 128]},
    ])
    specs += _seq([
        {"name": "iq_rows", "kind": "concat", "axis": 1, "inputs": ["i_map", "q_map"]},
        {"name": "conv_rows", "kind": "conv2d", "filters": 50, "kernel": [1, 8],
         "padding": "same"},
        _relu("rows_act", "conv_rows"),
        {"name": "merge", "kind": "concat", "axis": 0,
         "inputs": ["iq_act", "rows_act"]},
        {"name": "conv_merge", "kind": "conv2d", "filters": 100, "kernel": [2, 5]},
        _relu("merge_act", "conv_merge"),
        {"name": "seq", "kind": "reshape", "perm": [2, 0, 1], "target": [124, 100]},
        {"name": "lstm1", "kind": "lstm", "units": 122, "return_sequences": True},
        {"name": "lstm2", "kind": "lstm", "units": 116},
        {"name": "fc1", "kind": "dense", "units": 256},
        {"name": "fc1_act", "kind": "activation", "fn": "selu"},
        {"name": "drop1", "kind": "dropout", "rate": 0.5},
        {"name": "fc2", "kind": "dense", "units": 128},
        {"name": "fc2_act", "kind": "activation", "fn": "selu"},
        {"name": "drop2", "kind": "dropout", "rate": 0.5},
        {"name": "head", "kind": "dense", "units": 11},
    ])
    return specs


def _cgdnet():
    return _seq([
        {"name": "stack", "kind": "reshape", "target": [1, 2, 128]},
        {"name": "conv1", "kind": "conv2d", "filters": 64, "kernel": [1, 5]},
        _relu("act1", "conv1"),
        {"name": "pool", "kind": "max-pool", "pool": [2, 2]},
        {"name": "drop1", "kind": "dropout", "rate": 0.2},
        {"name": "conv2", "kind": "conv2d", "filters": 64, "kernel": [1, 5]},
        _relu("act2", "conv2"),
        {"name": "drop2", "kind": "dropout", "rate": 0.2},
        {"name": "seq", "kind": "reshape", "perm": [2, 0, 1], "target": [58, 64]},
        {"name": "gru", "kind": "gru", "units": 50, "return_sequences": True},
        {"name": "flat", "kind": "flatten"},
        {"name": "fc1", "kind": "dense", "units": 584},
        _relu("act3", "fc1"),
        {"name": "drop3", "kind": "dropout", "rate": 0.2},
        {"name": "fc2", "kind": "dense", "units": 128},
        _relu("act4", "fc2"),
        {"name": "head", "kind": "dense", "units": 11},
    ])


_BUILDERS = {
    "CNN1": _cnn1,
    "CNN2": _cnn2,
    "CLDNN": _cldnn,
    "IC-AMCNet": _ic_amcnet,
    "MCNet": _mcnet,
    "LSTM": _lstm2,
    "GRU": _gru2,
    "MCLDNN": _mcldnn,
    "CGDNet": _cgdnet,
}

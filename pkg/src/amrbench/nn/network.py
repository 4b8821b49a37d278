"""DAG model execution: forward, reverse-mode backward, cross-entropy loss."""

import numpy as np

from ..errors import InvalidConfigError, InvalidLabelError, ShapeError
from . import layers
from .layers import LayerSpec


class Model:
    """A network instantiated from an ordered list of layer specs.

    The spec list must be topologically ordered, reference the pseudo-node
    ``input`` for the network input, and end at the single output layer.
    Parameters live in ``params[layer_name][param_name]``.
    """

    def __init__(self, specs, input_shape, seed=0, dtype=np.float32):
        self.specs = list(specs)
        self.input_shape = tuple(input_shape)
        self.dtype = np.dtype(dtype)
        self.shapes = self._infer_all()
        from ..seeding import derive_rng

        rng = derive_rng(seed, "init")
        self.params = {}
        for spec in self.specs:
            in_shapes = [self.shapes[i] for i in spec.inputs]
            p = layers.init_params(spec, in_shapes, rng, self.dtype)
            if p:
                self.params[spec.name] = p

    def _infer_all(self):
        shapes = {"input": self.input_shape}
        seen = {"input"}
        for spec in self.specs:
            if spec.name in seen:
                raise InvalidConfigError(f"duplicate layer name {spec.name!r}")
            for ref in spec.inputs:
                if ref not in seen:
                    raise InvalidConfigError(
                        f"layer {spec.name!r} references {ref!r} before definition"
                    )
            shapes[spec.name] = layers.infer_shape(
                spec, [shapes[i] for i in spec.inputs]
            )
            seen.add(spec.name)
        return shapes

    @property
    def output_shape(self):
        return self.shapes[self.specs[-1].name]

    @property
    def total_params(self) -> int:
        return sum(
            int(np.prod(a.shape)) for p in self.params.values() for a in p.values()
        )

    def forward(self, x, mode="eval", rng=None, want_caches=False):
        if x.shape[1:] != self.input_shape:
            raise ShapeError(
                f"input shape {x.shape[1:]} does not match model input {self.input_shape}"
            )
        x = np.ascontiguousarray(x, dtype=self.dtype)
        values = {"input": x}
        caches = {} if want_caches else None
        for spec in self.specs:
            xs = [values[name] for name in spec.inputs]
            y, cache = layers.forward(spec, self.params.get(spec.name, {}), xs, mode, rng)
            values[spec.name] = y
            if want_caches:
                caches[spec.name] = cache
        out = values[self.specs[-1].name]
        return (out, values, caches) if want_caches else out

    def backward(self, values, caches, dout):
        """Propagate dout back through the DAG; returns (param_grads, dinput)."""
        dvalues = {self.specs[-1].name: dout}
        param_grads = {}
        for spec in reversed(self.specs):
            dy = dvalues.pop(spec.name, None)
            if dy is None:
                raise InvalidConfigError(f"layer {spec.name!r} is not reachable from the output")
            dxs, dparams = layers.backward(
                spec, self.params.get(spec.name, {}), caches[spec.name], dy
            )
            if dparams:
                param_grads[spec.name] = dparams
            for ref, dx in zip(spec.inputs, dxs):
                if ref in dvalues:
                    dvalues[ref] = dvalues[ref] + dx
                else:
                    dvalues[ref] = dx
        return param_grads, dvalues["input"]

    def loss_and_grads(self, x, one_hot, rng=None):
        """Mean cross-entropy on a batch plus parameter gradients."""
        logits, values, caches = self.forward(x, mode="train", rng=rng, want_caches=True)
        loss, dlogits = cross_entropy(logits, one_hot)
        param_grads, _ = self.backward(values, caches, dlogits.astype(self.dtype))
        return loss, logits, param_grads

    def predict(self, x, batch_size=None):
        """Class indices (argmax over logits) in eval mode."""
        if batch_size is None or len(x) <= batch_size:
            return np.argmax(self.forward(x), axis=-1)
        parts = [
            np.argmax(self.forward(x[i : i + batch_size]), axis=-1)
            for i in range(0, len(x), batch_size)
        ]
        return np.concatenate(parts)

    def set_params(self, params):
        for lname, group in params.items():
            for pname, arr in group.items():
                target = self.params[lname][pname]
                if target.shape != arr.shape:
                    raise ShapeError(
                        f"{lname}/{pname}: checkpoint shape {arr.shape} vs model {target.shape}"
                    )
                target[...] = arr

    def copy_params(self):
        return {
            lname: {p: a.copy() for p, a in group.items()}
            for lname, group in self.params.items()
        }


def cross_entropy(logits, one_hot):
    """Softmax cross-entropy, mean over the batch.

    Returns (loss, dlogits). Stabilized by max-shift; rejects rows that are
    not exactly one-hot.
    """
    logits = np.asarray(logits)
    one_hot = np.asarray(one_hot)
    if logits.shape != one_hot.shape:
        raise ShapeError(f"logits {logits.shape} vs labels {one_hot.shape}")
    if one_hot.ndim != 2:
        raise ShapeError(f"expected (batch, classes), got {one_hot.shape}")
    is_binary = np.all((one_hot == 0) | (one_hot == 1))
    if not is_binary or not np.all(one_hot.sum(axis=1) == 1):
        raise InvalidLabelError("labels must be exactly one-hot per row")
    n = logits.shape[0]
    z = logits.astype(np.float64) - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1, keepdims=True))
    log_probs = z - log_norm
    loss = float(-(one_hot * log_probs).sum() / n)
    dlogits = (np.exp(log_probs) - one_hot) / n
    return loss, dlogits


def one_hot_encode(indices, num_classes, dtype=np.float32):
    indices = np.asarray(indices)
    if indices.min() < 0 or indices.max() >= num_classes:
        raise InvalidLabelError(
            f"class index outside [0, {num_classes}): {int(indices.min())}..{int(indices.max())}"
        )
    out = np.zeros((len(indices), num_classes), dtype=dtype)
    out[np.arange(len(indices)), indices] = 1
    return out

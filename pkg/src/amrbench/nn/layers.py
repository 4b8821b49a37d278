"""Layer catalogue: shape inference, parameter shapes/init, forward, backward.

Conventions
-----------
* Shapes in specs exclude the batch axis; runtime arrays carry batch first.
* conv2d/max-pool/zero-pad operate channels-first on (C, H, W).
* conv1d operates on (C, L) and is lowered onto the 2-D kernels.
* Recurrent layers consume (T, features) sequences.
* ``zero-pad`` pads the last two axes; negative widths crop, which is how
  DAG configs slice the I and Q rows out of a raw (2, 128) frame.
* ``reshape`` may carry a ``perm`` axis permutation applied before reshaping
  (frames are stored feature-major, recurrent layers want time-major).
"""

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import InvalidConfigError, ShapeError

KINDS = (
    "dense",
    "conv2d",
    "conv1d",
    "dropout",
    "activation",
    "flatten",
    "zero-pad",
    "max-pool",
    "lstm",
    "gru",
    "bilstm",
    "reshape",
    "concat",
    "add",
)

ACTIVATIONS = ("relu", "tanh", "sigmoid", "selu", "softmax", "linear")

_SELU_ALPHA = 1.6732632423543772
_SELU_SCALE = 1.0507009873554805


@dataclass
class LayerSpec:
    name: str
    kind: str
    inputs: tuple[str, ...]
    hp: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidConfigError(f"unknown layer kind {self.kind!r} in {self.name!r}")
        self.inputs = tuple(self.inputs)


def _single(spec: LayerSpec, in_shapes):
    if len(in_shapes) != 1:
        raise ShapeError(f"{spec.name}: expected one input, got {len(in_shapes)}")
    return in_shapes[0]


def _pair(v, what):
    v = tuple(int(x) for x in v)
    if len(v) != 2:
        raise InvalidConfigError(f"{what} must have two entries, got {v}")
    return v


def _conv_geometry(size, k, stride, padding):
    """(out_size, pad_before, pad_after) for one spatial axis."""
    if padding == "valid":
        if size < k:
            raise ShapeError(f"kernel {k} larger than input extent {size}")
        return (size - k) // stride + 1, 0, 0
    if padding == "same":
        out = -(-size // stride)
        total = max((out - 1) * stride + k - size, 0)
        return out, total // 2, total - total // 2
    raise InvalidConfigError(f"padding must be valid/same, got {padding!r}")


# ---------------------------------------------------------------------------
# shape inference


def infer_shape(spec: LayerSpec, in_shapes) -> tuple:
    """Output shape (batchless) of a layer given its input shapes."""
    kind, hp = spec.kind, spec.hp

    if kind == "dense":
        s = _single(spec, in_shapes)
        if not s:
            raise ShapeError(f"{spec.name}: dense needs a trailing feature axis")
        return s[:-1] + (int(hp["units"]),)

    if kind == "conv2d":
        c, h, w = _require_rank(spec, _single(spec, in_shapes), 3)
        kh, kw = _pair(hp["kernel"], "kernel")
        sh, sw = _pair(hp.get("stride", (1, 1)), "stride")
        padding = hp.get("padding", "valid")
        oh, _, _ = _conv_geometry(h, kh, sh, padding)
        ow, _, _ = _conv_geometry(w, kw, sw, padding)
        return (int(hp["filters"]), oh, ow)

    if kind == "conv1d":
        c, length = _require_rank(spec, _single(spec, in_shapes), 2)
        k = int(hp["kernel"])
        stride = int(hp.get("stride", 1))
        padding = hp.get("padding", "valid")
        out, _, _ = _conv_geometry(length, k, stride, padding)
        return (int(hp["filters"]), out)

    if kind in ("dropout", "activation", "add"):
        s = in_shapes[0]
        if kind == "add":
            for other in in_shapes[1:]:
                if tuple(other) != tuple(s):
                    raise ShapeError(f"{spec.name}: add inputs differ: {s} vs {other}")
        return tuple(s)

    if kind == "flatten":
        s = _single(spec, in_shapes)
        return (int(np.prod(s)),)

    if kind == "zero-pad":
        s = _single(spec, in_shapes)
        if len(s) < 2:
            raise ShapeError(f"{spec.name}: zero-pad needs rank >= 2, got {s}")
        (a, b), (c, d) = [_pair(p, "pad") for p in hp["pad"]]
        out = list(s)
        out[-2] += a + b
        out[-1] += c + d
        if out[-2] <= 0 or out[-1] <= 0:
            raise ShapeError(f"{spec.name}: padding {hp['pad']} empties shape {s}")
        return tuple(out)

    if kind == "max-pool":
        c, h, w = _require_rank(spec, _single(spec, in_shapes), 3)
        ph, pw = _pair(hp["pool"], "pool")
        sh, sw = _pair(hp.get("stride", (ph, pw)), "stride")
        if h < ph or w < pw:
            raise ShapeError(f"{spec.name}: pool {ph}x{pw} larger than input {h}x{w}")
        return (c, (h - ph) // sh + 1, (w - pw) // sw + 1)

    if kind in ("lstm", "gru", "bilstm"):
        t, d = _require_rank(spec, _single(spec, in_shapes), 2)
        units = int(hp["units"])
        width = 2 * units if kind == "bilstm" else units
        return (t, width) if hp.get("return_sequences", False) else (width,)

    if kind == "reshape":
        s = _single(spec, in_shapes)
        if "perm" in hp:
            perm = tuple(int(p) for p in hp["perm"])
            if sorted(perm) != list(range(len(s))):
                raise InvalidConfigError(f"{spec.name}: bad perm {perm} for rank {len(s)}")
            s = tuple(s[p] for p in perm)
        target = [int(x) for x in hp["target"]]
        total = int(np.prod(s))
        if target.count(-1) > 1:
            raise InvalidConfigError(f"{spec.name}: more than one -1 in target")
        if -1 in target:
            rest = int(np.prod([x for x in target if x != -1]))
            if rest == 0 or total % rest:
                raise ShapeError(f"{spec.name}: cannot reshape {s} to {target}")
            target[target.index(-1)] = total // rest
        if int(np.prod(target)) != total:
            raise ShapeError(f"{spec.name}: cannot reshape {s} to {target}")
        return tuple(target)

    if kind == "concat":
        axis = int(spec.hp.get("axis", -1))
        base = list(in_shapes[0])
        rank = len(base)
        ax = axis if axis >= 0 else rank + axis
        if not 0 <= ax < rank:
            raise ShapeError(f"{spec.name}: concat axis {axis} out of range for rank {rank}")
        for other in in_shapes[1:]:
            if len(other) != rank:
                raise ShapeError(f"{spec.name}: concat rank mismatch {base} vs {other}")
            for i in range(rank):
                if i != ax and other[i] != base[i]:
                    raise ShapeError(f"{spec.name}: concat shape mismatch {base} vs {other}")
            base[ax] += other[ax]
        return tuple(base)

    raise InvalidConfigError(f"unhandled kind {kind!r}")


def _require_rank(spec, shape, rank):
    if len(shape) != rank:
        raise ShapeError(f"{spec.name}: expected rank {rank}, got shape {tuple(shape)}")
    return shape


# ---------------------------------------------------------------------------
# parameters


def param_shapes(spec: LayerSpec, in_shapes) -> dict:
    """Trainable parameter shapes, keyed by parameter name."""
    kind, hp = spec.kind, spec.hp
    if kind == "dense":
        d = _single(spec, in_shapes)[-1]
        u = int(hp["units"])
        return {"w": (d, u), "b": (u,)}
    if kind == "conv2d":
        c = _single(spec, in_shapes)[0]
        kh, kw = _pair(hp["kernel"], "kernel")
        f = int(hp["filters"])
        return {"w": (f, c, kh, kw), "b": (f,)}
    if kind == "conv1d":
        c = _single(spec, in_shapes)[0]
        f = int(hp["filters"])
        return {"w": (f, c, int(hp["kernel"])), "b": (f,)}
    if kind == "lstm":
        d = _single(spec, in_shapes)[-1]
        h = int(hp["units"])
        return {"wx": (d, 4 * h), "wh": (h, 4 * h), "b": (4 * h,)}
    if kind == "gru":
        # reset-after formulation: separate input and recurrent biases
        d = _single(spec, in_shapes)[-1]
        h = int(hp["units"])
        return {"wx": (d, 3 * h), "wh": (h, 3 * h), "bx": (3 * h,), "bh": (3 * h,)}
    if kind == "bilstm":
        d = _single(spec, in_shapes)[-1]
        h = int(hp["units"])
        one = {"wx": (d, 4 * h), "wh": (h, 4 * h), "b": (4 * h,)}
        return {f"{k}_{tag}": v for tag in ("fw", "bw") for k, v in one.items()}
    return {}


def init_params(spec: LayerSpec, in_shapes, rng: np.random.Generator, dtype) -> dict:
    """Glorot-uniform for dense/conv kernels, scaled-uniform recurrent kernels,
    zero biases (LSTM forget gate bias starts at 1)."""
    shapes = param_shapes(spec, in_shapes)
    params = {}
    for name, shape in shapes.items():
        if name.startswith("b"):
            params[name] = np.zeros(shape, dtype=dtype)
        elif name.startswith("wh"):
            h = shape[0]
            limit = 1.0 / np.sqrt(h)
            params[name] = rng.uniform(-limit, limit, size=shape).astype(dtype)
        else:
            fan_in, fan_out = _fans(spec, shape)
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            params[name] = rng.uniform(-limit, limit, size=shape).astype(dtype)
    if spec.kind == "lstm":
        h = int(spec.hp["units"])
        params["b"][h : 2 * h] = 1.0
    if spec.kind == "bilstm":
        h = int(spec.hp["units"])
        params["b_fw"][h : 2 * h] = 1.0
        params["b_bw"][h : 2 * h] = 1.0
    return params


def _fans(spec, shape):
    if spec.kind == "conv2d":
        f, c, kh, kw = shape
        return c * kh * kw, f * kh * kw
    if spec.kind == "conv1d":
        f, c, k = shape
        return c * k, f * k
    return shape[0], shape[-1]


def param_count(spec: LayerSpec, in_shapes) -> int:
    return sum(int(np.prod(s)) for s in param_shapes(spec, in_shapes).values())


# ---------------------------------------------------------------------------
# forward / backward


def forward(spec: LayerSpec, params, xs, mode="eval", rng=None):
    """Run one layer. Returns (output, cache) where cache feeds backward()."""
    fn = _FORWARD[spec.kind]
    return fn(spec, params, xs, mode, rng)


def backward(spec: LayerSpec, params, cache, dy):
    """Gradients of the loss w.r.t. each input and each parameter."""
    fn = _BACKWARD[spec.kind]
    return fn(spec, params, cache, dy)


def _dense_fwd(spec, params, xs, mode, rng):
    x = xs[0]
    y = x @ params["w"] + params["b"]
    return y, (x,)


def _dense_bwd(spec, params, cache, dy):
    (x,) = cache
    w = params["w"]
    dx = dy @ w.T
    x2 = x.reshape(-1, x.shape[-1])
    dy2 = dy.reshape(-1, dy.shape[-1])
    return [dx], {"w": x2.T @ dy2, "b": dy2.sum(axis=0)}


def _conv2d_args(spec):
    kh, kw = _pair(spec.hp["kernel"], "kernel")
    sh, sw = _pair(spec.hp.get("stride", (1, 1)), "stride")
    return kh, kw, sh, sw, spec.hp.get("padding", "valid")


def _conv2d_fwd(spec, params, xs, mode, rng):
    x = xs[0]
    kh, kw, sh, sw, padding = _conv2d_args(spec)
    _, ph0, ph1 = _conv_geometry(x.shape[2], kh, sh, padding)
    _, pw0, pw1 = _conv_geometry(x.shape[3], kw, sw, padding)
    xp = x
    if ph0 or ph1 or pw0 or pw1:
        xp = np.pad(x, ((0, 0), (0, 0), (ph0, ph1), (pw0, pw1)))
    xp = np.ascontiguousarray(xp)
    y = kernels.conv2d_forward(xp, params["w"], params["b"], sh, sw)
    return y, (xp, (ph0, ph1, pw0, pw1), x.shape)


def _conv2d_bwd(spec, params, cache, dy):
    xp, (ph0, ph1, pw0, pw1), x_shape = cache
    kh, kw, sh, sw, _ = _conv2d_args(spec)
    dy = np.ascontiguousarray(dy)
    dw, db = kernels.conv2d_backward_params(dy, xp, kh, kw, sh, sw)
    dxp = kernels.conv2d_backward_input(dy, params["w"], xp.shape[2], xp.shape[3], sh, sw)
    if ph0 or ph1 or pw0 or pw1:
        dxp = dxp[:, :, ph0 : dxp.shape[2] - ph1, pw0 : dxp.shape[3] - pw1]
    assert dxp.shape == x_shape
    return [dxp], {"w": dw, "b": db}


def _conv1d_fwd(spec, params, xs, mode, rng):
    x = xs[0][:, :, None, :]  # (N, C, 1, L)
    w = params["w"][:, :, None, :]
    sub = LayerSpec(spec.name, "conv2d", spec.inputs, {
        "filters": spec.hp["filters"],
        "kernel": (1, int(spec.hp["kernel"])),
        "stride": (1, int(spec.hp.get("stride", 1))),
        "padding": spec.hp.get("padding", "valid"),
    })
    y, cache = _conv2d_fwd(sub, {"w": w, "b": params["b"]}, [x], mode, rng)
    return y[:, :, 0, :], (sub, w, cache)


def _conv1d_bwd(spec, params, cache, dy):
    sub, w, sub_cache = cache
    [dx4], grads = _conv2d_bwd(sub, {"w": w, "b": params["b"]}, sub_cache, dy[:, :, None, :])
    grads["w"] = grads["w"][:, :, 0, :]
    return [dx4[:, :, 0, :]], grads


def _dropout_fwd(spec, params, xs, mode, rng):
    x = xs[0]
    rate = float(spec.hp["rate"])
    if mode != "train" or rate == 0.0:
        return x, (None,)
    if rng is None:
        raise InvalidConfigError(f"{spec.name}: dropout in train mode needs an RNG")
    keep = (rng.random(x.shape) >= rate).astype(x.dtype) / (1.0 - rate)
    return x * keep, (keep,)


def _dropout_bwd(spec, params, cache, dy):
    (keep,) = cache
    return [dy if keep is None else dy * keep], {}


def _activation_fwd(spec, params, xs, mode, rng):
    x = xs[0]
    fn = spec.hp["fn"]
    if fn == "relu":
        y = np.maximum(x, 0)
    elif fn == "tanh":
        y = np.tanh(x)
    elif fn == "sigmoid":
        y = _sigmoid(x)
    elif fn == "selu":
        y = _SELU_SCALE * np.where(x > 0, x, _SELU_ALPHA * np.expm1(x))
    elif fn == "softmax":
        y = _softmax(x)
    elif fn == "linear":
        y = x
    else:
        raise InvalidConfigError(f"{spec.name}: unknown activation {fn!r}")
    return y, (x, y)


def _activation_bwd(spec, params, cache, dy):
    x, y = cache
    fn = spec.hp["fn"]
    if fn == "relu":
        dx = dy * (x > 0)
    elif fn == "tanh":
        dx = dy * (1.0 - y * y)
    elif fn == "sigmoid":
        dx = dy * y * (1.0 - y)
    elif fn == "selu":
        dx = dy * _SELU_SCALE * np.where(x > 0, 1.0, _SELU_ALPHA * np.exp(x))
    elif fn == "softmax":
        dx = y * (dy - (dy * y).sum(axis=-1, keepdims=True))
    else:  # linear
        dx = dy
    return [dx.astype(x.dtype, copy=False)], {}


def _flatten_fwd(spec, params, xs, mode, rng):
    x = xs[0]
    return x.reshape(x.shape[0], -1), (x.shape,)


def _flatten_bwd(spec, params, cache, dy):
    (shape,) = cache
    return [dy.reshape(shape)], {}


def _zero_pad_fwd(spec, params, xs, mode, rng):
    x = xs[0]
    (a, b), (c, d) = [_pair(p, "pad") for p in spec.hp["pad"]]
    before = [slice(None)] * x.ndim
    if a < 0 or b < 0:
        before[-2] = slice(max(-a, 0), x.shape[-2] - max(-b, 0))
    if c < 0 or d < 0:
        before[-1] = slice(max(-c, 0), x.shape[-1] - max(-d, 0))
    y = x[tuple(before)]
    widths = [(0, 0)] * (x.ndim - 2) + [(max(a, 0), max(b, 0)), (max(c, 0), max(d, 0))]
    if any(w != (0, 0) for w in widths):
        y = np.pad(y, widths)
    return y, (x.shape, (a, b, c, d))


def _zero_pad_bwd(spec, params, cache, dy):
    x_shape, (a, b, c, d) = cache
    sl = [slice(None)] * dy.ndim
    sl[-2] = slice(max(a, 0), dy.shape[-2] - max(b, 0))
    sl[-1] = slice(max(c, 0), dy.shape[-1] - max(d, 0))
    core = dy[tuple(sl)]
    widths = [(0, 0)] * (dy.ndim - 2) + [(max(-a, 0), max(-b, 0)), (max(-c, 0), max(-d, 0))]
    if any(w != (0, 0) for w in widths):
        core = np.pad(core, widths)
    assert core.shape == x_shape
    return [core], {}


def _max_pool_fwd(spec, params, xs, mode, rng):
    x = np.ascontiguousarray(xs[0])
    ph, pw = _pair(spec.hp["pool"], "pool")
    sh, sw = _pair(spec.hp.get("stride", (ph, pw)), "stride")
    y, idx = kernels.maxpool2d_forward(x, ph, pw, sh, sw)
    return y, (idx, x.shape)


def _max_pool_bwd(spec, params, cache, dy):
    idx, x_shape = cache
    dx = kernels.maxpool2d_backward(np.ascontiguousarray(dy), idx, x_shape[2], x_shape[3])
    return [dx], {}


def _reshape_fwd(spec, params, xs, mode, rng):
    x = xs[0]
    perm = spec.hp.get("perm")
    xp = x
    if perm is not None:
        xp = np.transpose(x, (0, *[p + 1 for p in perm]))
    target = infer_shape(spec, [x.shape[1:]])
    y = np.ascontiguousarray(xp).reshape(x.shape[0], *target)
    return y, (x.shape, xp.shape)


def _reshape_bwd(spec, params, cache, dy):
    x_shape, perm_shape = cache
    dx = dy.reshape(perm_shape)
    perm = spec.hp.get("perm")
    if perm is not None:
        inverse = np.argsort(perm)
        dx = np.transpose(dx, (0, *[p + 1 for p in inverse]))
    return [np.ascontiguousarray(dx)], {}


def _concat_fwd(spec, params, xs, mode, rng):
    axis = int(spec.hp.get("axis", -1))
    ax = axis + 1 if axis >= 0 else axis
    sizes = [x.shape[ax] for x in xs]
    return np.concatenate(xs, axis=ax), (ax, sizes)


def _concat_bwd(spec, params, cache, dy):
    ax, sizes = cache
    offsets = np.cumsum(sizes)[:-1]
    return list(np.split(dy, offsets, axis=ax)), {}


def _add_fwd(spec, params, xs, mode, rng):
    y = xs[0].copy()
    for x in xs[1:]:
        y += x
    return y, (len(xs),)


def _add_bwd(spec, params, cache, dy):
    (n,) = cache
    return [dy] * n, {}


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softmax(x):
    z = x - x.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# recurrent layers


def _lstm_cell_run(x, wx, wh, b):
    """Shared LSTM scan. Returns hidden states and the per-step cache."""
    n, t, d = x.shape
    h = wh.shape[0]
    xz = x.reshape(n * t, d) @ wx
    xz = xz.reshape(n, t, 4 * h)
    hs = np.zeros((n, t, h), dtype=x.dtype)
    cs = np.zeros((n, t, h), dtype=x.dtype)
    gates = np.zeros((n, t, 4 * h), dtype=x.dtype)
    h_prev = np.zeros((n, h), dtype=x.dtype)
    c_prev = np.zeros((n, h), dtype=x.dtype)
    for step in range(t):
        z = xz[:, step] + h_prev @ wh + b
        i = _sigmoid(z[:, :h])
        f = _sigmoid(z[:, h : 2 * h])
        g = np.tanh(z[:, 2 * h : 3 * h])
        o = _sigmoid(z[:, 3 * h :])
        c = f * c_prev + i * g
        h_cur = o * np.tanh(c)
        gates[:, step, :h] = i
        gates[:, step, h : 2 * h] = f
        gates[:, step, 2 * h : 3 * h] = g
        gates[:, step, 3 * h :] = o
        cs[:, step] = c
        hs[:, step] = h_cur
        h_prev, c_prev = h_cur, c
    return hs, (x, gates, cs, hs)


def _lstm_cell_back(cache, wx, wh, d_hs, d_last):
    """BPTT for one LSTM direction.

    d_hs: (N,T,H) upstream on every step (or None); d_last: (N,H) upstream on
    the final step only (or None).
    """
    x, gates, cs, hs = cache
    n, t, d = x.shape
    h = cs.shape[-1]
    dz_all = np.zeros((n, t, 4 * h), dtype=x.dtype)
    dh_next = np.zeros((n, h), dtype=x.dtype)
    dc_next = np.zeros((n, h), dtype=x.dtype)
    for step in range(t - 1, -1, -1):
        dh = dh_next.copy()
        if d_hs is not None:
            dh += d_hs[:, step]
        if d_last is not None and step == t - 1:
            dh += d_last
        i = gates[:, step, :h]
        f = gates[:, step, h : 2 * h]
        g = gates[:, step, 2 * h : 3 * h]
        o = gates[:, step, 3 * h :]
        c = cs[:, step]
        c_prev = cs[:, step - 1] if step > 0 else np.zeros_like(c)
        tc = np.tanh(c)
        dc = dc_next + dh * o * (1.0 - tc * tc)
        dz = dz_all[:, step]
        dz[:, :h] = dc * g * i * (1.0 - i)
        dz[:, h : 2 * h] = dc * c_prev * f * (1.0 - f)
        dz[:, 2 * h : 3 * h] = dc * i * (1.0 - g * g)
        dz[:, 3 * h :] = dh * tc * o * (1.0 - o)
        dh_next = dz @ wh.T
        dc_next = dc * f
    h_prev = np.concatenate([np.zeros((n, 1, h), dtype=x.dtype), hs[:, :-1]], axis=1)
    dz2 = dz_all.reshape(n * t, 4 * h)
    grads = {
        "wx": x.reshape(n * t, d).T @ dz2,
        "wh": h_prev.reshape(n * t, h).T @ dz2,
        "b": dz2.sum(axis=0),
    }
    dx = (dz2 @ wx.T).reshape(n, t, d)
    return dx, grads


def _lstm_fwd(spec, params, xs, mode, rng):
    hs, cache = _lstm_cell_run(xs[0], params["wx"], params["wh"], params["b"])
    if spec.hp.get("return_sequences", False):
        return hs, (cache, True)
    return hs[:, -1].copy(), (cache, False)


def _lstm_bwd(spec, params, cache, dy):
    inner, seq = cache
    d_hs, d_last = (dy, None) if seq else (None, dy)
    dx, grads = _lstm_cell_back(inner, params["wx"], params["wh"], d_hs, d_last)
    return [dx], grads


def _bilstm_fwd(spec, params, xs, mode, rng):
    x = xs[0]
    hs_f, cache_f = _lstm_cell_run(x, params["wx_fw"], params["wh_fw"], params["b_fw"])
    hs_b, cache_b = _lstm_cell_run(
        x[:, ::-1], params["wx_bw"], params["wh_bw"], params["b_bw"]
    )
    if spec.hp.get("return_sequences", False):
        y = np.concatenate([hs_f, hs_b[:, ::-1]], axis=-1)
        return y, (cache_f, cache_b, True)
    y = np.concatenate([hs_f[:, -1], hs_b[:, -1]], axis=-1)
    return y, (cache_f, cache_b, False)


def _bilstm_bwd(spec, params, cache, dy):
    cache_f, cache_b, seq = cache
    h = int(spec.hp["units"])
    if seq:
        df, db_up = dy[..., :h], dy[..., h:]
        dx_f, g_f = _lstm_cell_back(cache_f, params["wx_fw"], params["wh_fw"], df, None)
        dx_b, g_b = _lstm_cell_back(
            cache_b, params["wx_bw"], params["wh_bw"], np.ascontiguousarray(db_up[:, ::-1]), None
        )
    else:
        dx_f, g_f = _lstm_cell_back(cache_f, params["wx_fw"], params["wh_fw"], None, dy[:, :h])
        dx_b, g_b = _lstm_cell_back(cache_b, params["wx_bw"], params["wh_bw"], None, dy[:, h:])
    dx = dx_f + dx_b[:, ::-1]
    grads = {f"{k}_fw": v for k, v in g_f.items()}
    grads.update({f"{k}_bw": v for k, v in g_b.items()})
    return [np.ascontiguousarray(dx)], grads


def _gru_fwd(spec, params, xs, mode, rng):
    x = xs[0]
    wx, wh, bx, bh = params["wx"], params["wh"], params["bx"], params["bh"]
    n, t, d = x.shape
    h = wh.shape[0]
    xz = (x.reshape(n * t, d) @ wx + bx).reshape(n, t, 3 * h)
    hs = np.zeros((n, t, h), dtype=x.dtype)
    zs = np.zeros((n, t, h), dtype=x.dtype)
    rs = np.zeros((n, t, h), dtype=x.dtype)
    hhs = np.zeros((n, t, h), dtype=x.dtype)
    ss = np.zeros((n, t, h), dtype=x.dtype)  # recurrent candidate pre-gate
    h_prev = np.zeros((n, h), dtype=x.dtype)
    for step in range(t):
        hz = h_prev @ wh + bh
        z = _sigmoid(xz[:, step, :h] + hz[:, :h])
        r = _sigmoid(xz[:, step, h : 2 * h] + hz[:, h : 2 * h])
        s = hz[:, 2 * h :]
        hh = np.tanh(xz[:, step, 2 * h :] + r * s)
        h_cur = z * h_prev + (1.0 - z) * hh
        zs[:, step], rs[:, step], ss[:, step], hhs[:, step] = z, r, s, hh
        hs[:, step] = h_cur
        h_prev = h_cur
    seq = spec.hp.get("return_sequences", False)
    out = hs if seq else hs[:, -1].copy()
    return out, ((x, zs, rs, ss, hhs, hs), seq)


def _gru_bwd(spec, params, cache, dy):
    (x, zs, rs, ss, hhs, hs), seq = cache
    wx, wh = params["wx"], params["wh"]
    n, t, d = x.shape
    h = zs.shape[-1]
    dxz = np.zeros((n, t, 3 * h), dtype=x.dtype)
    dhz = np.zeros((n, t, 3 * h), dtype=x.dtype)
    dh_next = np.zeros((n, h), dtype=x.dtype)
    for step in range(t - 1, -1, -1):
        dh = dh_next.copy()
        if seq:
            dh += dy[:, step]
        elif step == t - 1:
            dh += dy
        z, r, s, hh = zs[:, step], rs[:, step], ss[:, step], hhs[:, step]
        h_prev = hs[:, step - 1] if step > 0 else np.zeros_like(z)
        dz_gate = dh * (h_prev - hh) * z * (1.0 - z)
        dah = dh * (1.0 - z) * (1.0 - hh * hh)
        dr_gate = dah * s * r * (1.0 - r)
        dxz[:, step, :h] = dz_gate
        dxz[:, step, h : 2 * h] = dr_gate
        dxz[:, step, 2 * h :] = dah
        dhz[:, step, :h] = dz_gate
        dhz[:, step, h : 2 * h] = dr_gate
        dhz[:, step, 2 * h :] = dah * r
        dh_next = dhz[:, step] @ wh.T + dh * z
    h_prev_all = np.concatenate([np.zeros((n, 1, h), dtype=x.dtype), hs[:, :-1]], axis=1)
    dxz2 = dxz.reshape(n * t, 3 * h)
    dhz2 = dhz.reshape(n * t, 3 * h)
    grads = {
        "wx": x.reshape(n * t, d).T @ dxz2,
        "wh": h_prev_all.reshape(n * t, h).T @ dhz2,
        "bx": dxz2.sum(axis=0),
        "bh": dhz2.sum(axis=0),
    }
    dx = (dxz2 @ wx.T).reshape(n, t, d)
    return [dx], grads


_FORWARD = {
    "dense": _dense_fwd,
    "conv2d": _conv2d_fwd,
    "conv1d": _conv1d_fwd,
    "dropout": _dropout_fwd,
    "activation": _activation_fwd,
    "flatten": _flatten_fwd,
    "zero-pad": _zero_pad_fwd,
    "max-pool": _max_pool_fwd,
    "lstm": _lstm_fwd,
    "gru": _gru_fwd,
    "bilstm": _bilstm_fwd,
    "reshape": _reshape_fwd,
    "concat": _concat_fwd,
    "add": _add_fwd,
}

_BACKWARD = {
    "dense": _dense_bwd,
    "conv2d": _conv2d_bwd,
    "conv1d": _conv1d_bwd,
    "dropout": _dropout_bwd,
    "activation": _activation_bwd,
    "flatten": _flatten_bwd,
    "zero-pad": _zero_pad_bwd,
    "max-pool": _max_pool_bwd,
    "lstm": _lstm_bwd,
    "gru": _gru_bwd,
    "bilstm": _bilstm_bwd,
    "reshape": _reshape_bwd,
    "concat": _concat_bwd,
    "add": _add_bwd,
}

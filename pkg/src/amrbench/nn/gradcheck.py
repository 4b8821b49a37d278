"""Analytic-vs-numeric gradient verification for single layers.

The check runs in float64. For a layer with inputs x and parameters p we take
the scalar probe L = sum(forward(x, p) * R) with a fixed random projection R,
compare analytic gradients against central finite differences, and report the
worst elementwise relative error |a - n| / max(1, |a| + |n|).
"""

import numpy as np

from ..seeding import derive_rng
from . import layers


def grad_check(spec, input_shapes, seed=0, eps=1e-5, mode="eval"):
    """Max relative error for one random instance of ``spec``.

    ``input_shapes``: list of batchless input shapes (one per DAG input).
    """
    rng = derive_rng(seed, "gradcheck", spec.kind, spec.name)
    batch = 3
    xs = [rng.standard_normal((batch, *s)) for s in input_shapes]
    params = layers.init_params(spec, input_shapes, rng, np.float64)
    for name in params:
        params[name] = params[name] + 0.05 * rng.standard_normal(params[name].shape)

    fwd_seed = int(rng.integers(2**31))

    def run(xs_, params_):
        fwd_rng = derive_rng(fwd_seed, "dropout-mask")
        out, cache = layers.forward(spec, params_, xs_, mode, fwd_rng)
        return out, cache

    out, cache = run(xs, params)
    probe = derive_rng(seed, "probe").standard_normal(out.shape)
    dxs, dparams = layers.backward(spec, params, cache, probe)

    worst = 0.0

    def compare(analytic, read, write):
        nonlocal worst
        flat = analytic.reshape(-1)
        for i in range(flat.size):
            orig = read(i)
            write(i, orig + eps)
            hi = float((run(xs, params)[0] * probe).sum())
            write(i, orig - eps)
            lo = float((run(xs, params)[0] * probe).sum())
            write(i, orig)
            numeric = (hi - lo) / (2 * eps)
            err = abs(flat[i] - numeric) / max(1.0, abs(flat[i]) + abs(numeric))
            worst = max(worst, err)

    for xi, dx in enumerate(dxs):
        view = xs[xi].reshape(-1)
        compare(dx, lambda i: view[i], lambda i, v: view.__setitem__(i, v))
    for pname, dp in dparams.items():
        view = params[pname].reshape(-1)
        compare(dp, lambda i: view[i], lambda i, v: view.__setitem__(i, v))
    return worst

"""Times the numba and numpy kernel backends against each other on the conv
and pooling shapes that dominate training, plus one full train step.

    python3 benchmarks/bench_kernels.py [--repeats N]

The active backend for normal runs follows AMRBENCH_BACKEND (auto/numba/
numpy); this script always measures both.
"""

import argparse
import time

import numpy as np

from amrbench.kernels import active_backend, get_backend

# (label, N, C, H, W, F, KH, KW, stride)
CONV_CASES = [
    ("CNN1 conv2 128@(2,5)", 64, 64, 2, 134, 128, 2, 5, (1, 1)),
    ("CNN2 conv2 64@(2,8)", 64, 256, 3, 71, 64, 2, 8, (1, 1)),
    ("CLDNN conv2 256@(2,3)", 64, 256, 2, 134, 256, 2, 3, (1, 1)),
    ("MCLDNN merge 100@(2,5)", 64, 100, 2, 128, 100, 2, 5, (1, 1)),
    ("MCNet branch 24@(1,3)", 64, 64, 2, 32, 24, 1, 3, (1, 1)),
]

POOL_CASES = [
    ("CNN2 pool (1,2)", 64, 256, 2, 128),
    ("CGDNet pool (2,2)", 64, 64, 2, 124),
]


def timeit(fn, repeats):
    fn()  # warmup / jit compile
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_conv(backend, case, repeats, rng):
    _, n, c, h, w, f, kh, kw, (sh, sw) = case
    x = rng.standard_normal((n, c, h, w)).astype(np.float32)
    weight = rng.standard_normal((f, c, kh, kw)).astype(np.float32)
    bias = np.zeros(f, dtype=np.float32)
    y = backend.conv2d_forward(x, weight, bias, sh, sw)
    dy = rng.standard_normal(y.shape).astype(np.float32)
    fwd = timeit(lambda: backend.conv2d_forward(x, weight, bias, sh, sw), repeats)
    bwd_in = timeit(
        lambda: backend.conv2d_backward_input(dy, weight, h, w, sh, sw), repeats
    )
    bwd_par = timeit(
        lambda: backend.conv2d_backward_params(dy, x, kh, kw, sh, sw), repeats
    )
    return fwd, bwd_in, bwd_par


def bench_pool(backend, case, repeats, rng):
    _, n, c, h, w = case
    x = rng.standard_normal((n, c, h, w)).astype(np.float32)
    y, idx = backend.maxpool2d_forward(x, 1, 2, 1, 2)
    dy = rng.standard_normal(y.shape).astype(np.float32)
    fwd = timeit(lambda: backend.maxpool2d_forward(x, 1, 2, 1, 2), repeats)
    bwd = timeit(lambda: backend.maxpool2d_backward(dy, idx, h, w), repeats)
    return fwd, bwd


_KERNEL_FNS = ("conv2d_forward", "conv2d_backward_input",
               "conv2d_backward_params", "maxpool2d_forward",
               "maxpool2d_backward")


def bench_train_step(repeats):
    """One optimizer step of a convolutional model under each backend.
    Layers resolve kernels through the dispatch module at call time, so
    swapping its attributes redirects the whole model."""
    import amrbench.kernels as dispatch
    from amrbench import modelzoo
    from amrbench.nn.network import one_hot_encode
    from amrbench.nn.optim import Adam

    rng = np.random.default_rng(0)
    x = rng.standard_normal((64, 2, 128)).astype(np.float32)
    y = one_hot_encode(rng.integers(0, 11, 64), 11)
    saved = {fn: getattr(dispatch, fn) for fn in _KERNEL_FNS}
    results = {}
    try:
        for name in ("numba", "numpy"):
            backend = get_backend(name)
            for fn in _KERNEL_FNS:
                setattr(dispatch, fn, getattr(backend, fn))
            model = modelzoo.build(modelzoo.get_config("CNN2"), seed=0)
            optimizer = Adam(1e-4)

            def step():
                _, _, grads = model.loss_and_grads(x, y, rng=np.random.default_rng(1))
                optimizer.step(model.params, grads)

            results[name] = timeit(step, repeats)
    finally:
        for fn, impl in saved.items():
            setattr(dispatch, fn, impl)
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    rng = np.random.default_rng(7)
    backends = {name: get_backend(name) for name in ("numba", "numpy")}
    print(f"active backend for normal runs: {active_backend()}\n")
    header = f"{'case':28s} {'op':8s} {'numba':>9s} {'numpy':>9s} {'numba/numpy':>12s}"
    print(header)
    print("-" * len(header))
    for case in CONV_CASES:
        rows = {n: bench_conv(b, case, args.repeats, rng) for n, b in backends.items()}
        for i, op in enumerate(("fwd", "bwd_in", "bwd_par")):
            a, b = rows["numba"][i], rows["numpy"][i]
            print(f"{case[0]:28s} {op:8s} {a*1e3:8.1f}ms {b*1e3:8.1f}ms {a/b:11.2f}x")
    for case in POOL_CASES:
        rows = {n: bench_pool(b, case, args.repeats, rng) for n, b in backends.items()}
        for i, op in enumerate(("fwd", "bwd")):
            a, b = rows["numba"][i], rows["numpy"][i]
            print(f"{case[0]:28s} {op:8s} {a*1e3:8.1f}ms {b*1e3:8.1f}ms {a/b:11.2f}x")
    print()
    step = bench_train_step(args.repeats)
    print(f"{'CNN2 full train step':28s} {'step':8s} "
          f"{step['numba']*1e3:8.1f}ms {step['numpy']*1e3:8.1f}ms "
          f"{step['numba']/step['numpy']:11.2f}x")


if __name__ == "__main__":
    main()

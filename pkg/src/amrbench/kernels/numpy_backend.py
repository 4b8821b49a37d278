"""Vectorized numpy fallback kernels (im2col convolutions, strided pooling).

Layout is channels-first: activations are (N, C, H, W). Convolutions are
"valid"; padding is applied by the calling layer.
"""

import numpy as np


def _im2col(x, kh, kw, sh, sw):
    n, c, h, w = x.shape
    oh = (h - kh) // sh + 1
    ow = (w - kw) // sw + 1
    windows = np.lib.stride_tricks.sliding_window_view(x, (kh, kw), axis=(2, 3))
    windows = windows[:, :, ::sh, ::sw]  # (N, C, OH, OW, KH, KW)
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(n, oh, ow, c * kh * kw)
    return cols, oh, ow


def conv2d_forward(x, w, b, sh, sw):
    f, c, kh, kw = w.shape
    cols, oh, ow = _im2col(x, kh, kw, sh, sw)
    y = cols @ w.reshape(f, c * kh * kw).T + b
    return np.ascontiguousarray(y.transpose(0, 3, 1, 2))


def conv2d_backward_input(dy, w, h, w_in, sh, sw):
    n, f, oh, ow = dy.shape
    _, c, kh, kw = w.shape
    # (N, OH, OW, C, KH, KW) gradient of every im2col column
    dcols = dy.transpose(0, 2, 3, 1) @ w.reshape(f, c * kh * kw)
    dcols = dcols.reshape(n, oh, ow, c, kh, kw)
    dx = np.zeros((n, c, h, w_in), dtype=dy.dtype)
    for i in range(kh):
        for j in range(kw):
            dx[:, :, i : i + sh * oh : sh, j : j + sw * ow : sw] += dcols[
                :, :, :, :, i, j
            ].transpose(0, 3, 1, 2)
    return dx


def conv2d_backward_params(dy, x, kh, kw, sh, sw):
    n, f, oh, ow = dy.shape
    c = x.shape[1]
    cols, _, _ = _im2col(x, kh, kw, sh, sw)
    dy_mat = dy.transpose(0, 2, 3, 1).reshape(n * oh * ow, f)
    dw = dy_mat.T @ cols.reshape(n * oh * ow, c * kh * kw)
    db = dy_mat.sum(axis=0)
    return dw.reshape(f, c, kh, kw), db


def maxpool2d_forward(x, ph, pw, sh, sw):
    n, c, h, w = x.shape
    oh = (h - ph) // sh + 1
    ow = (w - pw) // sw + 1
    windows = np.lib.stride_tricks.sliding_window_view(x, (ph, pw), axis=(2, 3))
    windows = windows[:, :, ::sh, ::sw].reshape(n, c, oh, ow, ph * pw)
    local = windows.argmax(axis=4)
    y = np.take_along_axis(windows, local[..., None], axis=4)[..., 0]
    # flat index into the (H, W) plane, for the backward scatter
    ohh, oww = np.meshgrid(np.arange(oh), np.arange(ow), indexing="ij")
    rows = ohh * sh + local // pw
    cols = oww * sw + local % pw
    idx = (rows * w + cols).astype(np.int64)
    return np.ascontiguousarray(y), idx


def maxpool2d_backward(dy, idx, h, w):
    n, c = dy.shape[:2]
    dx = np.zeros((n, c, h * w), dtype=dy.dtype)
    flat_idx = idx.reshape(n, c, -1)
    np.add.at(dx, (np.arange(n)[:, None, None], np.arange(c)[None, :, None], flat_idx),
              dy.reshape(n, c, -1))
    return dx.reshape(n, c, h, w)

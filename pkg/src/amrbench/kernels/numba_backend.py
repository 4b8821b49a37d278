"""Numba-compiled kernels.

Convolutions gather im2col panels with compiled loops and hand the heavy
contraction to BLAS (``np.dot`` inside nopython code); pooling and the
col2im scatter are direct loops. Same contracts as ``numpy_backend``.

Loops are single-threaded on purpose: the GEMM already uses the BLAS thread
pool, and measured on small hosts an extra numba thread pool per call costs
far more than it buys. Serial accumulation also makes every result
bit-reproducible.
"""

import numpy as np
from numba import njit

_JIT = dict(cache=True, fastmath=False)


@njit(**_JIT)
def _im2col(x, kh, kw, sh, sw):
    n, c, h, w = x.shape
    oh = (h - kh) // sh + 1
    ow = (w - kw) // sw + 1
    cols = np.empty((n * oh * ow, c * kh * kw), dtype=x.dtype)
    for ni in range(n):
        for oi in range(oh):
            for oj in range(ow):
                row = (ni * oh + oi) * ow + oj
                col = 0
                for ci in range(c):
                    for ki in range(kh):
                        ih = oi * sh + ki
                        iw = oj * sw
                        for kj in range(kw):
                            cols[row, col] = x[ni, ci, ih, iw + kj]
                            col += 1
    return cols, oh, ow


@njit(**_JIT)
def _flatten_filters(w):
    f = w.shape[0]
    vol = w.shape[1] * w.shape[2] * w.shape[3]
    out = np.empty((f, vol), dtype=w.dtype)
    for fi in range(f):
        col = 0
        for ci in range(w.shape[1]):
            for ki in range(w.shape[2]):
                for kj in range(w.shape[3]):
                    out[fi, col] = w[fi, ci, ki, kj]
                    col += 1
    return out


@njit(**_JIT)
def conv2d_forward(x, w, b, sh, sw):
    n = x.shape[0]
    f = w.shape[0]
    kh, kw = w.shape[2], w.shape[3]
    cols, oh, ow = _im2col(x, kh, kw, sh, sw)
    wt = _flatten_filters(w).T.copy()
    y2 = np.dot(cols, wt)  # (N*OH*OW, F)
    y = np.empty((n, f, oh, ow), dtype=x.dtype)
    for ni in range(n):
        for oi in range(oh):
            for oj in range(ow):
                row = (ni * oh + oi) * ow + oj
                for fi in range(f):
                    y[ni, fi, oi, oj] = y2[row, fi] + b[fi]
    return y


@njit(**_JIT)
def conv2d_backward_input(dy, w, h, w_in, sh, sw):
    n, f, oh, ow = dy.shape
    c, kh, kw = w.shape[1], w.shape[2], w.shape[3]
    w2 = _flatten_filters(w)
    dy2 = np.empty((n * oh * ow, f), dtype=dy.dtype)
    for ni in range(n):
        for oi in range(oh):
            for oj in range(ow):
                row = (ni * oh + oi) * ow + oj
                for fi in range(f):
                    dy2[row, fi] = dy[ni, fi, oi, oj]
    dcols = np.dot(dy2, w2)  # (N*OH*OW, C*KH*KW)
    dx = np.zeros((n, c, h, w_in), dtype=dy.dtype)
    for ni in range(n):
        for oi in range(oh):
            for oj in range(ow):
                row = (ni * oh + oi) * ow + oj
                col = 0
                for ci in range(c):
                    for ki in range(kh):
                        ih = oi * sh + ki
                        iw = oj * sw
                        for kj in range(kw):
                            dx[ni, ci, ih, iw + kj] += dcols[row, col]
                            col += 1
    return dx


@njit(**_JIT)
def conv2d_backward_params(dy, x, kh, kw, sh, sw):
    n, f, oh, ow = dy.shape
    c = x.shape[1]
    cols, _, _ = _im2col(x, kh, kw, sh, sw)
    dyt = np.empty((f, n * oh * ow), dtype=dy.dtype)
    db = np.zeros(f, dtype=dy.dtype)
    for ni in range(n):
        for oi in range(oh):
            for oj in range(ow):
                row = (ni * oh + oi) * ow + oj
                for fi in range(f):
                    g = dy[ni, fi, oi, oj]
                    dyt[fi, row] = g
                    db[fi] += g
    dw2 = np.dot(dyt, cols)  # (F, C*KH*KW)
    return dw2.reshape(f, c, kh, kw).copy(), db


@njit(**_JIT)
def maxpool2d_forward(x, ph, pw, sh, sw):
    n, c, h, w = x.shape
    oh = (h - ph) // sh + 1
    ow = (w - pw) // sw + 1
    y = np.empty((n, c, oh, ow), dtype=x.dtype)
    idx = np.empty((n, c, oh, ow), dtype=np.int64)
    for ni in range(n):
        for ci in range(c):
            for oi in range(oh):
                for oj in range(ow):
                    best = x[ni, ci, oi * sh, oj * sw]
                    best_at = (oi * sh) * w + oj * sw
                    for ki in range(ph):
                        for kj in range(pw):
                            v = x[ni, ci, oi * sh + ki, oj * sw + kj]
                            if v > best:
                                best = v
                                best_at = (oi * sh + ki) * w + oj * sw + kj
                    y[ni, ci, oi, oj] = best
                    idx[ni, ci, oi, oj] = best_at
    return y, idx


@njit(**_JIT)
def maxpool2d_backward(dy, idx, h, w):
    n, c, oh, ow = dy.shape
    dx = np.zeros((n, c, h * w), dtype=dy.dtype)
    for ni in range(n):
        for ci in range(c):
            for oi in range(oh):
                for oj in range(ow):
                    dx[ni, ci, idx[ni, ci, oi, oj]] += dy[ni, ci, oi, oj]
    return dx.reshape(n, c, h, w)

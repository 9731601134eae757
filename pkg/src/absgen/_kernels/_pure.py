"""Pure NumPy kernels for convolution and pooling.

Fallback backend used when the compiled extension is unavailable (or when
ABSGEN_BACKEND=pure). Convolution goes through im2col so the inner loop is
a BLAS matmul; pooling uses stride tricks.

All arrays are float64, shapes are NCHW, and the convolution is the
cross-correlation convention (no kernel flip).
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

BACKEND = "pure"


def _im2col(x, kh, kw, stride, padding):
    # returns (N, Ho, Wo, Cin*kh*kw) plus the padded input for reuse
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    windows = sliding_window_view(x, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    # windows: (N, Cin, Ho, Wo, kh, kw) -> (N, Ho, Wo, Cin, kh, kw)
    cols = np.ascontiguousarray(windows.transpose(0, 2, 3, 1, 4, 5))
    n, ho, wo = cols.shape[:3]
    return cols.reshape(n, ho, wo, -1), x


def conv2d_forward(x, k, stride, padding):
    cout, cin, kh, kw = k.shape
    cols, _ = _im2col(x, kh, kw, stride, padding)
    y = cols @ k.reshape(cout, -1).T  # (N, Ho, Wo, Cout)
    return np.ascontiguousarray(y.transpose(0, 3, 1, 2))


def conv2d_backward(x, k, gy, stride, padding):
    n, cin, h, w = x.shape
    cout, _, kh, kw = k.shape
    cols, _ = _im2col(x, kh, kw, stride, padding)
    g = gy.transpose(0, 2, 3, 1)  # (N, Ho, Wo, Cout)
    gk = np.tensordot(g, cols, axes=([0, 1, 2], [0, 1, 2])).reshape(k.shape)

    # input gradient: scatter each window's contribution back (col2im)
    gcols = g @ k.reshape(cout, -1)  # (N, Ho, Wo, Cin*kh*kw)
    ho, wo = gy.shape[2], gy.shape[3]
    hp, wp = h + 2 * padding, w + 2 * padding
    gx_pad = np.zeros((n, cin, hp, wp))
    gcols = gcols.reshape(n, ho, wo, cin, kh, kw)
    for i in range(kh):
        for j in range(kw):
            gx_pad[:, :, i : i + ho * stride : stride, j : j + wo * stride : stride] += (
                gcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
            )
    if padding:
        gx_pad = gx_pad[:, :, padding : padding + h, padding : padding + w]
    return np.ascontiguousarray(gx_pad), gk


def maxpool_forward(x, window, stride):
    n, c, h, w = x.shape
    views = sliding_window_view(x, (window, window), axis=(2, 3))[:, :, ::stride, ::stride]
    ho, wo = views.shape[2], views.shape[3]
    flat = views.reshape(n, c, ho, wo, -1)
    local = flat.argmax(axis=-1)  # first occurrence wins on ties
    y = np.take_along_axis(flat, local[..., None], axis=-1)[..., 0]
    # convert window-local argmax to a flat index into the H*W plane
    r0 = np.arange(ho)[:, None] * stride
    c0 = np.arange(wo)[None, :] * stride
    rows = r0[None, None] + local // window
    cols = c0[None, None] + local % window
    arg = (rows * w + cols).astype(np.int64)
    return np.ascontiguousarray(y), arg


def maxpool_backward(gy, arg, h, w):
    n, c = gy.shape[:2]
    gx = np.zeros((n, c, h * w))
    np.add.at(gx, (np.arange(n)[:, None, None, None], np.arange(c)[None, :, None, None], arg), gy)
    return gx.reshape(n, c, h, w)

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Typed loop kernels for convolution and pooling (NCHW, float64).

Same contracts as _pure; selected at import when compiled.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "native"


def conv2d_forward(cnp.float64_t[:, :, :, ::1] x, cnp.float64_t[:, :, :, ::1] k,
                   int stride, int padding):
    cdef Py_ssize_t n = x.shape[0], cin = x.shape[1], h = x.shape[2], w = x.shape[3]
    cdef Py_ssize_t cout = k.shape[0], kh = k.shape[2], kw = k.shape[3]
    cdef Py_ssize_t ho = (h + 2 * padding - kh) // stride + 1
    cdef Py_ssize_t wo = (w + 2 * padding - kw) // stride + 1
    out = np.zeros((n, cout, ho, wo))
    cdef cnp.float64_t[:, :, :, ::1] y = out
    cdef Py_ssize_t b, co, ci, i, j, p, q, r
    cdef Py_ssize_t i_lo, i_hi, j_lo, j_hi, coff
    cdef double kv
    # per-tap accumulation: the weight scalar is hoisted and the inner j
    # loop walks x and y rows contiguously (unit stride when stride == 1)
    for b in range(n):
        for ci in range(cin):
            for co in range(cout):
                for p in range(kh):
                    i_lo = 0
                    while i_lo < ho and i_lo * stride + p - padding < 0:
                        i_lo += 1
                    i_hi = ho - 1
                    while i_hi >= 0 and i_hi * stride + p - padding >= h:
                        i_hi -= 1
                    for q in range(kw):
                        kv = k[co, ci, p, q]
                        if kv == 0.0:
                            continue
                        j_lo = 0
                        while j_lo < wo and j_lo * stride + q - padding < 0:
                            j_lo += 1
                        j_hi = wo - 1
                        while j_hi >= 0 and j_hi * stride + q - padding >= w:
                            j_hi -= 1
                        coff = q - padding
                        for i in range(i_lo, i_hi + 1):
                            r = i * stride + p - padding
                            for j in range(j_lo, j_hi + 1):
                                y[b, co, i, j] += kv * x[b, ci, r, j * stride + coff]
    return out


def conv2d_backward(cnp.float64_t[:, :, :, ::1] x, cnp.float64_t[:, :, :, ::1] k,
                    cnp.float64_t[:, :, :, ::1] gy, int stride, int padding):
    cdef Py_ssize_t n = x.shape[0], cin = x.shape[1], h = x.shape[2], w = x.shape[3]
    cdef Py_ssize_t cout = k.shape[0], kh = k.shape[2], kw = k.shape[3]
    cdef Py_ssize_t ho = gy.shape[2], wo = gy.shape[3]
    gx_arr = np.zeros((n, cin, h, w))
    gk_arr = np.zeros((cout, cin, kh, kw))
    cdef cnp.float64_t[:, :, :, ::1] gx = gx_arr
    cdef cnp.float64_t[:, :, :, ::1] gk = gk_arr
    cdef Py_ssize_t b, co, ci, i, j, p, q, r, c
    cdef Py_ssize_t i_lo, i_hi, j_lo, j_hi, coff
    cdef double kv, g, acc
    # same tap-major order as the forward pass: gy rows are walked
    # contiguously, the weight is a hoisted scalar, and each tap's
    # kernel gradient accumulates in a register before one write
    for b in range(n):
        for ci in range(cin):
            for co in range(cout):
                for p in range(kh):
                    i_lo = 0
                    while i_lo < ho and i_lo * stride + p - padding < 0:
                        i_lo += 1
                    i_hi = ho - 1
                    while i_hi >= 0 and i_hi * stride + p - padding >= h:
                        i_hi -= 1
                    for q in range(kw):
                        kv = k[co, ci, p, q]
                        j_lo = 0
                        while j_lo < wo and j_lo * stride + q - padding < 0:
                            j_lo += 1
                        j_hi = wo - 1
                        while j_hi >= 0 and j_hi * stride + q - padding >= w:
                            j_hi -= 1
                        coff = q - padding
                        acc = 0.0
                        for i in range(i_lo, i_hi + 1):
                            r = i * stride + p - padding
                            for j in range(j_lo, j_hi + 1):
                                c = j * stride + coff
                                g = gy[b, co, i, j]
                                gx[b, ci, r, c] += g * kv
                                acc += g * x[b, ci, r, c]
                        gk[co, ci, p, q] += acc
    return gx_arr, gk_arr


def maxpool_forward(cnp.float64_t[:, :, :, ::1] x, int window, int stride):
    cdef Py_ssize_t n = x.shape[0], ch = x.shape[1], h = x.shape[2], w = x.shape[3]
    cdef Py_ssize_t ho = (h - window) // stride + 1
    cdef Py_ssize_t wo = (w - window) // stride + 1
    out = np.empty((n, ch, ho, wo))
    idx = np.empty((n, ch, ho, wo), dtype=np.int64)
    cdef cnp.float64_t[:, :, :, ::1] y = out
    cdef cnp.int64_t[:, :, :, ::1] arg = idx
    cdef Py_ssize_t b, c, i, j, p, q, r0, c0, best_r, best_c
    cdef double best, v
    for b in range(n):
        for c in range(ch):
            for i in range(ho):
                for j in range(wo):
                    r0 = i * stride
                    c0 = j * stride
                    best = x[b, c, r0, c0]
                    best_r = r0
                    best_c = c0
                    for p in range(window):
                        for q in range(window):
                            v = x[b, c, r0 + p, c0 + q]
                            if v > best:  # strict: first index wins ties
                                best = v
                                best_r = r0 + p
                                best_c = c0 + q
                    y[b, c, i, j] = best
                    arg[b, c, i, j] = best_r * w + best_c
    return out, idx


def maxpool_backward(cnp.float64_t[:, :, :, ::1] gy, cnp.int64_t[:, :, :, ::1] arg,
                     Py_ssize_t h, Py_ssize_t w):
    cdef Py_ssize_t n = gy.shape[0], ch = gy.shape[1], ho = gy.shape[2], wo = gy.shape[3]
    gx_arr = np.zeros((n, ch, h, w))
    cdef cnp.float64_t[:, :, :, ::1] gx = gx_arr
    cdef Py_ssize_t b, c, i, j, f
    for b in range(n):
        for c in range(ch):
            for i in range(ho):
                for j in range(wo):
                    f = arg[b, c, i, j]
                    gx[b, c, f // w, f % w] += gy[b, c, i, j]
    return gx_arr

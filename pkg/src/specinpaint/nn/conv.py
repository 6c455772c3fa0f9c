"""Strided 2-D convolution and its adjoint, via im2col + matmul.

``conv_transpose2d`` is defined as the exact adjoint of ``conv2d`` with
the same weight tensor: <conv(x), y> == <x, conv_transpose(y)>.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidShapeError
from .autodiff import Tensor, _make, as_tensor


def _pair(v) -> tuple[int, int]:
    return (v, v) if isinstance(v, int) else (int(v[0]), int(v[1]))


def _im2col(x: np.ndarray, kh: int, kw: int, stride, padding) -> np.ndarray:
    """(N, C, H, W) -> (N, C*kh*kw, out_h*out_w) patch matrix."""
    sh, sw = _pair(stride)
    ph, pw = _pair(padding)
    n, c, h, w = x.shape
    out_h = (h + 2 * ph - kh) // sh + 1
    out_w = (w + 2 * pw - kw) // sw + 1
    xp = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    s0, s1, s2, s3 = xp.strides
    view = np.lib.stride_tricks.as_strided(
        xp,
        shape=(n, c, kh, kw, out_h, out_w),
        strides=(s0, s1, s2, s3, s2 * sh, s3 * sw),
        writeable=False,
    )
    return np.ascontiguousarray(view).reshape(n, c * kh * kw, out_h * out_w)


def _col2im(cols: np.ndarray, x_shape, kh: int, kw: int, stride, padding) -> np.ndarray:
    """Adjoint of _im2col: scatter-add patches back onto the image."""
    sh, sw = _pair(stride)
    ph, pw = _pair(padding)
    n, c, h, w = x_shape
    out_h = (h + 2 * ph - kh) // sh + 1
    out_w = (w + 2 * pw - kw) // sw + 1
    cols6 = cols.reshape(n, c, kh, kw, out_h, out_w)
    xp = np.zeros((n, c, h + 2 * ph, w + 2 * pw), dtype=cols.dtype)
    for i in range(kh):
        for j in range(kw):
            xp[:, :, i : i + sh * out_h : sh, j : j + sw * out_w : sw] += cols6[:, :, i, j]
    return xp[:, :, ph : ph + h, pw : pw + w]


def conv_out_shape(in_hw, kernel_hw, stride, padding) -> tuple[int, int]:
    sh, sw = _pair(stride)
    ph, pw = _pair(padding)
    kh, kw = _pair(kernel_hw)
    return ((in_hw[0] + 2 * ph - kh) // sh + 1, (in_hw[1] + 2 * pw - kw) // sw + 1)


def conv2d(x, weight, stride=1, padding=0) -> Tensor:
    """x: (N, C, H, W), weight: (O, C, kh, kw) -> (N, O, H', W')."""
    x, weight = as_tensor(x), as_tensor(weight)
    if x.ndim != 4 or weight.ndim != 4:
        raise InvalidShapeError("conv2d expects 4-D input and weight")
    n, c, h, w = x.shape
    o, cw, kh, kw = weight.shape
    if cw != c:
        raise InvalidShapeError(f"weight expects {cw} input channels, input has {c}")
    out_h, out_w = conv_out_shape((h, w), (kh, kw), stride, padding)
    if out_h <= 0 or out_w <= 0:
        raise InvalidShapeError("convolution output would be empty")

    cols = _im2col(x.data, kh, kw, stride, padding)  # (N, CKK, L)
    w2 = weight.data.reshape(o, c * kh * kw)
    out = (w2 @ cols).reshape(n, o, out_h, out_w)

    def backward(g):
        g2 = g.reshape(n, o, out_h * out_w)
        gx = _col2im(w2.T @ g2, x.shape, kh, kw, stride, padding)
        gw = (g2 @ cols.transpose(0, 2, 1)).sum(axis=0).reshape(weight.shape)
        return gx, gw

    return _make(out, (x, weight), backward)


def conv_transpose2d(x, weight, stride=1, padding=0) -> Tensor:
    """x: (N, O, H', W'), weight: (O, C, kh, kw) -> (N, C, H, W).

    Upsamples by the stride factor; H = (H'-1)*stride + kh - 2*padding.
    """
    x, weight = as_tensor(x), as_tensor(weight)
    if x.ndim != 4 or weight.ndim != 4:
        raise InvalidShapeError("conv_transpose2d expects 4-D input and weight")
    n, o, in_h, in_w = x.shape
    ow, c, kh, kw = weight.shape
    if ow != o:
        raise InvalidShapeError(f"weight expects {ow} input channels, input has {o}")
    sh, sw = _pair(stride)
    ph, pw = _pair(padding)
    out_h = (in_h - 1) * sh + kh - 2 * ph
    out_w = (in_w - 1) * sw + kw - 2 * pw
    if out_h <= 0 or out_w <= 0:
        raise InvalidShapeError("transposed convolution output would be empty")

    w2 = weight.data.reshape(o, c * kh * kw)
    x2 = x.data.reshape(n, o, in_h * in_w)
    out = _col2im(w2.T @ x2, (n, c, out_h, out_w), kh, kw, stride, padding)

    def backward(g):
        gcols = _im2col(g, kh, kw, stride, padding)  # (N, CKK, L)
        gx = (w2 @ gcols).reshape(x.shape)
        gw = (x2 @ gcols.transpose(0, 2, 1)).sum(axis=0).reshape(weight.shape)
        return gx, gw

    return _make(out, (x, weight), backward)

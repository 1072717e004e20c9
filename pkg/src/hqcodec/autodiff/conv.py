"""2-D convolution and nearest-neighbor upsampling with reverse-mode gradients.

The convolution is evaluated as one GEMM per kernel tap over strided views of
the padded input, which keeps the arithmetic inside BLAS without materializing
an im2col buffer. Backward reuses the same decomposition: weight gradients are
per-tap GEMMs and input gradients are per-tap scatter-adds into strided slices
of the padded gradient buffer.
"""
from __future__ import annotations

import numpy as np

from .tensor import Tensor, _make


def conv_output_size(size: int, k: int, stride: int, padding: int, dilation: int) -> int:
    return (size + 2 * padding - dilation * (k - 1) - 1) // stride + 1


def _tap_view(xp: np.ndarray, i: int, j: int, stride: int, dilation: int,
              out_h: int, out_w: int) -> np.ndarray:
    r0 = i * dilation
    c0 = j * dilation
    return xp[:, :, r0:r0 + stride * (out_h - 1) + 1:stride,
              c0:c0 + stride * (out_w - 1) + 1:stride]


def conv2d(x: Tensor, weight: Tensor, bias: Tensor | None = None,
           stride: int = 1, padding: int = 0, dilation: int = 1) -> Tensor:
    """Cross-correlate ``x[B,C,H,W]`` with ``weight[O,C,k,k]`` (+ optional ``bias[O]``)."""
    if x.data.ndim != 4:
        raise ValueError(f"conv2d input must be [B,C,H,W], got shape {x.shape}")
    if weight.data.ndim != 4 or weight.data.shape[2] != weight.data.shape[3]:
        raise ValueError(f"conv2d weight must be [O,C,k,k], got shape {weight.shape}")
    b_, c, h, w = x.data.shape
    o, cw, k, _ = weight.data.shape
    if c != cw:
        raise ValueError(
            f"conv2d channel mismatch: input axis 1 has {c}, weight axis 1 has {cw}"
        )
    if bias is not None and bias.data.shape != (o,):
        raise ValueError(f"conv2d bias must be [{o}], got shape {bias.shape}")
    out_h = conv_output_size(h, k, stride, padding, dilation)
    out_w = conv_output_size(w, k, stride, padding, dilation)
    if out_h < 1 or out_w < 1:
        raise ValueError(
            f"conv2d output collapses to {out_h}x{out_w} for input {h}x{w} "
            f"(k={k}, stride={stride}, padding={padding}, dilation={dilation})"
        )

    if padding:
        xp = np.zeros((b_, c, h + 2 * padding, w + 2 * padding), dtype=x.data.dtype)
        xp[:, :, padding:padding + h, padding:padding + w] = x.data
    else:
        xp = x.data

    wd = weight.data
    acc = np.zeros((o, b_, out_h, out_w), dtype=x.data.dtype)
    for i in range(k):
        for j in range(k):
            xv = _tap_view(xp, i, j, stride, dilation, out_h, out_w)
            # [O,C] x [B,C,oh,ow] -> [O,B,oh,ow]
            acc += np.tensordot(wd[:, :, i, j], xv, axes=([1], [1]))
    y = np.ascontiguousarray(acc.transpose(1, 0, 2, 3))
    if bias is not None:
        y += bias.data.reshape(1, o, 1, 1)

    parents = (x, weight) if bias is None else (x, weight, bias)
    out = _make(y, parents)
    if out._parents:
        def bw(g):
            go = g  # [B,O,oh,ow]
            if bias is not None and bias.requires_grad:
                bias.accumulate_grad(go.sum(axis=(0, 2, 3)))
            need_x = x.requires_grad
            need_w = weight.requires_grad
            gxp = np.zeros_like(xp) if need_x else None
            gw = np.zeros_like(wd) if need_w else None
            for i in range(k):
                for j in range(k):
                    if need_w:
                        xv = _tap_view(xp, i, j, stride, dilation, out_h, out_w)
                        # [B,O,oh,ow] x [B,C,oh,ow] -> [O,C]
                        gw[:, :, i, j] = np.tensordot(go, xv, axes=([0, 2, 3], [0, 2, 3]))
                    if need_x:
                        # [O,C] x [B,O,oh,ow] -> [C,B,oh,ow]
                        t = np.tensordot(wd[:, :, i, j], go, axes=([0], [1]))
                        _tap_view(gxp, i, j, stride, dilation, out_h, out_w)[...] += \
                            t.transpose(1, 0, 2, 3)
            if need_w:
                weight.accumulate_grad(gw)
            if need_x:
                if padding:
                    x.accumulate_grad(gxp[:, :, padding:padding + h, padding:padding + w])
                else:
                    x.accumulate_grad(gxp)
        out._backward = bw
    return out


def nearest_upsample(x: Tensor, factor: int) -> Tensor:
    """Repeat every pixel of ``x[B,C,H,W]`` into a ``factor x factor`` block."""
    if factor < 1:
        raise ValueError(f"upsample factor must be >= 1, got {factor}")
    if x.data.ndim != 4:
        raise ValueError(f"nearest_upsample input must be [B,C,H,W], got shape {x.shape}")
    if factor == 1:
        y = x.data
    else:
        b_, c, h, w = x.data.shape
        y = np.broadcast_to(
            x.data[:, :, :, None, :, None], (b_, c, h, factor, w, factor)
        ).reshape(b_, c, h * factor, w * factor)
        y = np.ascontiguousarray(y)
    out = _make(y, (x,))
    if out._parents:
        def bw(g):
            if factor == 1:
                x.accumulate_grad(g)
            else:
                b_, c, h, w = x.data.shape
                x.accumulate_grad(
                    g.reshape(b_, c, h, factor, w, factor).sum(axis=(3, 5))
                )
        out._backward = bw
    return out

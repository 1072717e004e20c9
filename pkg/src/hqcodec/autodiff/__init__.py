"""Minimal reverse-mode differentiation engine for the codec's networks."""

from .tensor import (
    Parameter,
    Tensor,
    default_dtype,
    elementwise,
    grad_enabled,
    log_softmax,
    mse,
    no_grad,
    parameters_of,
    plogp,
    set_default_dtype,
    softmax,
    softmax_cross_entropy,
)
from .conv import conv2d, conv_output_size, nearest_upsample
from .norm import RunningNorm
from .optim import LRSchedule, RAdam, lr_at
from .sampling import gumbel_noise, gumbel_softmax_sample

__all__ = [
    "Parameter",
    "Tensor",
    "RunningNorm",
    "LRSchedule",
    "RAdam",
    "conv2d",
    "conv_output_size",
    "default_dtype",
    "elementwise",
    "grad_enabled",
    "gumbel_noise",
    "gumbel_softmax_sample",
    "log_softmax",
    "lr_at",
    "mse",
    "nearest_upsample",
    "no_grad",
    "parameters_of",
    "plogp",
    "set_default_dtype",
    "softmax",
    "softmax_cross_entropy",
]

"""Relaxed categorical (Gumbel-softmax) sampling."""
from __future__ import annotations

import numpy as np

from .tensor import Tensor, softmax

# uniform draws are clamped away from {0, 1} so the double log stays finite
_GUMBEL_EPS = 1e-10


def gumbel_noise(shape, rng: np.random.Generator, dtype=np.float64) -> np.ndarray:
    u = rng.random(shape)
    np.clip(u, _GUMBEL_EPS, 1.0 - _GUMBEL_EPS, out=u)
    return (-np.log(-np.log(u))).astype(dtype)


def gumbel_softmax_sample(logits: Tensor, tau: float, rng: np.random.Generator) -> Tensor:
    """Differentiable sample from the categorical defined by ``logits``.

    Rows of the output sum to 1 and are strictly positive; as ``tau``
    approaches 0 they concentrate on the perturbed argmax. The sample is
    deterministic for a fixed generator state.
    """
    if tau <= 0:
        raise ValueError(f"temperature must be positive, got {tau}")
    g = gumbel_noise(logits.shape, rng, dtype=logits.data.dtype)
    return softmax((logits + Tensor(g, dtype=logits.data.dtype)) * (1.0 / tau), axis=-1)

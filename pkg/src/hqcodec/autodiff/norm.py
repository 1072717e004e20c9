"""Channel-wise standardization with running statistics.

Applied to the (constant) inputs of upper codec layers, so it operates on
plain arrays at the graph leaves: no gradient flows upstream of it. Training
mode standardizes with batch statistics and folds them into the running
state; evaluation mode uses the stored state only.
"""
from __future__ import annotations

import numpy as np


class RunningNorm:
    """Per-channel running mean/variance over ``[B,C,H,W]`` or ``[B,C]`` arrays."""

    def __init__(self, channels: int, momentum: float = 0.1, eps: float = 1e-5):
        self.channels = channels
        self.momentum = float(momentum)
        self.eps = float(eps)
        self.mean = np.zeros(channels, dtype=np.float64)
        self.var = np.ones(channels, dtype=np.float64)

    def _axes_shape(self, x: np.ndarray):
        if x.ndim == 4:
            return (0, 2, 3), (1, self.channels, 1, 1)
        if x.ndim == 2:
            return (0,), (1, self.channels)
        raise ValueError(f"expected [B,C,H,W] or [B,C] input, got shape {x.shape}")

    def __call__(self, x: np.ndarray, training: bool) -> np.ndarray:
        axes, bshape = self._axes_shape(x)
        if x.shape[1] != self.channels:
            raise ValueError(f"expected {self.channels} channels, got {x.shape[1]}")
        if training:
            m = x.mean(axis=axes, dtype=np.float64)
            v = x.var(axis=axes, dtype=np.float64)
            self.mean = (1.0 - self.momentum) * self.mean + self.momentum * m
            self.var = (1.0 - self.momentum) * self.var + self.momentum * v
        else:
            m, v = self.mean, self.var
        scale = 1.0 / np.sqrt(v + self.eps)
        return ((x - m.reshape(bshape)) * scale.reshape(bshape)).astype(x.dtype)

    def denormalize(self, x: np.ndarray) -> np.ndarray:
        """Invert the standardization using the stored running statistics."""
        _, bshape = self._axes_shape(x)
        scale = np.sqrt(self.var + self.eps)
        return (x * scale.reshape(bshape) + self.mean.reshape(bshape)).astype(x.dtype)

    def state(self) -> dict:
        return {"mean": self.mean.copy(), "var": self.var.copy()}

    def load_state(self, state: dict) -> None:
        self.mean = np.asarray(state["mean"], dtype=np.float64).copy()
        self.var = np.asarray(state["var"], dtype=np.float64).copy()

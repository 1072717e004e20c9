"""Rectified Adam and the cosine-tail learning-rate schedule."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensor import Parameter


@dataclass
class LRSchedule:
    """Constant learning rate with a cosine decay over the final stretch."""

    base_lr: float
    total_steps: int
    anneal_start_fraction: float = 2.0 / 3.0
    floor: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.anneal_start_fraction <= 1.0:
            raise ValueError(f"anneal_start_fraction must be in [0,1], got {self.anneal_start_fraction}")


def lr_at(schedule: LRSchedule, step: int) -> float:
    if not 0 <= step <= schedule.total_steps:
        raise ValueError(f"step {step} outside [0, {schedule.total_steps}]")
    start = schedule.anneal_start_fraction * schedule.total_steps
    if step <= start:
        return schedule.base_lr
    span = schedule.total_steps - start
    frac = (step - start) / span
    return schedule.floor + 0.5 * (schedule.base_lr - schedule.floor) * (1.0 + math.cos(math.pi * frac))


class RAdam:
    """Rectified Adam.

    Follows the published recurrence: moment estimates as in Adam, with the
    variance-adaptive term applied only once its rectification factor is
    tractable (rho_t > 4); before that the update is bias-corrected momentum
    alone. ``eps`` guards the zero-variance corner so zero gradients are an
    exact no-op on the parameters.
    """

    def __init__(self, params: Sequence[Parameter], lr: float = 4e-4,
                 betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]
        self.rho_inf = 2.0 / (1.0 - self.beta2) - 1.0

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self, lr: float | None = None) -> None:
        if lr is None:
            lr = self.lr
        self.step_count += 1
        t = self.step_count
        b1, b2 = self.beta1, self.beta2
        bias1 = 1.0 - b1 ** t
        bias2 = 1.0 - b2 ** t
        rho = self.rho_inf - 2.0 * t * b2 ** t / bias2
        if rho > 4.0:
            rect = math.sqrt(
                ((rho - 4.0) * (rho - 2.0) * self.rho_inf)
                / ((self.rho_inf - 4.0) * (self.rho_inf - 2.0) * rho)
            )
        else:
            rect = None
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            m_hat = m / bias1
            if rect is None:
                p.data -= lr * m_hat
            else:
                denom = np.sqrt(v / bias2) + self.eps
                p.data -= lr * rect * m_hat / denom

    def state(self) -> dict:
        return {
            "step_count": self.step_count,
            "m": [a.copy() for a in self.m],
            "v": [a.copy() for a in self.v],
        }

    def load_state(self, state: dict) -> None:
        self.step_count = int(state["step_count"])
        self.m = [np.asarray(a).copy() for a in state["m"]]
        self.v = [np.asarray(a).copy() for a in state["v"]]

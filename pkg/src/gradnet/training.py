"""Adam optimizer with step-decayed learning rate, and the full-batch training loop."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import Dataset
from .losses import ParamGradient, _param_gradient_with_risks
from .network import TwoLayerNet


class TrainingDivergedError(RuntimeError):
    """Raised when a loss or gradient turns non-finite during training."""


@dataclass
class AdamState:
    m_a: np.ndarray
    v_a: np.ndarray
    m_W: np.ndarray
    v_W: np.ndarray
    m_b: Optional[np.ndarray] = None
    v_b: Optional[np.ndarray] = None
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def zeros_like(cls, net: TwoLayerNet, **kwargs) -> "AdamState":
        has_b = net.b is not None
        return cls(
            m_a=np.zeros_like(net.a),
            v_a=np.zeros_like(net.a),
            m_W=np.zeros_like(net.W),
            v_W=np.zeros_like(net.W),
            m_b=np.zeros_like(net.b) if has_b else None,
            v_b=np.zeros_like(net.b) if has_b else None,
            **kwargs,
        )


@dataclass
class TrainConfig:
    epochs: int = 5000
    lr0: float = 0.01
    decay_factor: float = 0.8
    decay_every: int = 500
    beta: float = 10.0
    seed: int = 0
    width: int = 1000
    truncate: bool = False

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.lr0 <= 0:
            raise ValueError("lr0 must be positive")
        if not 0.0 < self.decay_factor <= 1.0:
            raise ValueError("decay_factor must lie in (0, 1]")
        if self.decay_every < 1:
            raise ValueError("decay_every must be >= 1")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.width < 1:
            raise ValueError("width must be >= 1")


def lr_at(config: TrainConfig, step: int) -> float:
    """lr0 * decay_factor^floor(step / decay_every)."""
    if step < 0:
        raise ValueError("step must be >= 0")
    return config.lr0 * config.decay_factor ** (step // config.decay_every)


def adam_step(
    net: TwoLayerNet, state: AdamState, grad: ParamGradient, lr: float
) -> tuple[TwoLayerNet, AdamState]:
    """One bias-corrected Adam update; returns fresh net and state."""
    if not grad.is_finite():
        raise TrainingDivergedError("non-finite gradient")
    t = state.step_count + 1
    b1, b2 = state.beta1, state.beta2
    c1, c2 = 1 - b1**t, 1 - b2**t

    def moments(m, v, g):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g**2
        return m, v, lr * (m / c1) / (np.sqrt(v / c2) + state.epsilon)

    m_a, v_a, step_a = moments(state.m_a, state.v_a, grad.grad_a)
    m_W, v_W, step_W = moments(state.m_W, state.v_W, grad.grad_W)
    b = net.b
    m_b = v_b = None
    if net.b is not None:
        if grad.grad_b is None:
            raise ValueError("net has biases but the gradient does not")
        m_b, v_b, step_b = moments(state.m_b, state.v_b, grad.grad_b)
        b = net.b - step_b
    new_state = AdamState(m_a, v_a, m_W, v_W, m_b, v_b, t, b1, b2, state.epsilon)
    return TwoLayerNet(net.a - step_a, net.W - step_W, b), new_state


@dataclass
class TrainResult:
    net: TwoLayerNet
    history: list[dict] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.history[-1]["J"]

    def history_csv(self) -> str:
        lines = ["epoch,J,L_n,L_grad_n,lr"]
        for row in self.history:
            lines.append(
                f"{row['epoch']},{row['J']!r},{row['L_n']!r},{row['L_grad_n']!r},{row['lr']!r}"
            )
        return "\n".join(lines) + "\n"


def train(net0: TwoLayerNet, data: Dataset, config: TrainConfig) -> TrainResult:
    """Full-batch Adam on the combined risk; one epoch = one step.

    History row t holds the risks at the parameters after t steps (so row 0 is
    the initial point and the last row is the returned net). A non-finite loss
    aborts with a diagnostic rather than silently continuing.
    """
    net = net0.copy()
    state = AdamState.zeros_like(net)
    history = []
    for epoch in range(config.epochs):
        grad, (j, l_n, l_g) = _param_gradient_with_risks(
            net, data, config.beta, config.truncate
        )
        lr = lr_at(config, state.step_count)
        if not np.isfinite(j):
            raise TrainingDivergedError(f"non-finite loss {j} at epoch {epoch}")
        history.append({"epoch": epoch, "J": j, "L_n": l_n, "L_grad_n": l_g, "lr": lr})
        net, state = adam_step(net, state, grad, lr)
    _, (j, l_n, l_g) = _param_gradient_with_risks(net, data, config.beta, config.truncate)
    if not np.isfinite(j):
        raise TrainingDivergedError(f"non-finite loss {j} after final step")
    history.append(
        {
            "epoch": config.epochs,
            "J": j,
            "L_n": l_n,
            "L_grad_n": l_g,
            "lr": lr_at(config, state.step_count),
        }
    )
    net.validate_finite()
    return TrainResult(net=net, history=history)

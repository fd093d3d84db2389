"""Empirical risks and exact parameter gradients for gradient-enhanced training.

The combined risk is J = L_n + beta * L'_n where L_n is mean squared-error on
values and L'_n is the mean squared l2 gradient mismatch over the gradient-
bearing samples only (their count n' is the divisor, keeping the two terms on
comparable scales at any enhancement level). The unsquared variant of L'_n is
what the generalization-bound machinery consumes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import Dataset
from .network import TwoLayerNet


@dataclass
class ParamGradient:
    grad_a: np.ndarray
    grad_W: np.ndarray
    grad_b: Optional[np.ndarray] = None

    def __post_init__(self):
        self.grad_a = np.asarray(self.grad_a, dtype=float)
        self.grad_W = np.asarray(self.grad_W, dtype=float)
        if self.grad_a.shape[0] != self.grad_W.shape[0] or self.grad_W.ndim != 2:
            raise ValueError("gradient shapes do not match a network")
        if self.grad_b is not None:
            self.grad_b = np.asarray(self.grad_b, dtype=float)
            if self.grad_b.shape != self.grad_a.shape:
                raise ValueError("bias gradient shape mismatch")

    def is_finite(self) -> bool:
        ok = np.all(np.isfinite(self.grad_a)) and np.all(np.isfinite(self.grad_W))
        if self.grad_b is not None:
            ok = ok and np.all(np.isfinite(self.grad_b))
        return bool(ok)


def _check_dims(net: TwoLayerNet, data: Dataset):
    if data.dim != net.dim:
        raise ValueError(f"dataset dimension {data.dim} != network dimension {net.dim}")


def value_risk(net: TwoLayerNet, data: Dataset, truncate: bool = False) -> float:
    """(1/n) sum_i 0.5 * (f(x_i) - y_i)^2."""
    _check_dims(net, data)
    vals = np.maximum(net.preactivations(data.x), 0.0) @ net.a
    if truncate:
        vals = np.clip(vals, 0.0, 1.0)
    r = vals - data.y
    return float(0.5 * np.mean(r**2))


def _grad_residuals(net: TwoLayerNet, data: Dataset) -> np.ndarray:
    xg, g = data.grad_rows()
    if xg.shape[0] == 0:
        raise ValueError("no gradient-bearing samples in dataset")
    active = (net.preactivations(xg) > 0).astype(float)
    return (active * net.a) @ net.W - g


def grad_risk(net: TwoLayerNet, data: Dataset) -> float:
    """Mean over gradient-bearing samples of ||grad f(x_i) - y'_i||_2^2."""
    _check_dims(net, data)
    rho = _grad_residuals(net, data)
    return float(np.mean(np.sum(rho**2, axis=1)))


def grad_risk_unsquared(net: TwoLayerNet, data: Dataset) -> float:
    """Mean over gradient-bearing samples of ||grad f(x_i) - y'_i||_2 (first power)."""
    _check_dims(net, data)
    rho = _grad_residuals(net, data)
    return float(np.mean(np.linalg.norm(rho, axis=1)))


def combined_risk(net: TwoLayerNet, data: Dataset, beta: float, truncate: bool = False) -> float:
    """value_risk + beta * grad_risk; the gradient term is skipped when beta == 0."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    total = value_risk(net, data, truncate)
    if beta > 0:
        total += beta * grad_risk(net, data)
    return total


def param_gradient(
    net: TwoLayerNet, data: Dataset, beta: float, truncate: bool = False
) -> ParamGradient:
    """Exact gradient of combined_risk w.r.t. (a, W) and, if present, b.

    Conventions: relu'(0) = 0 and relu'' = 0 a.e., so the dependence of the
    activation pattern on (W, b) contributes nothing; in particular the
    gradient-mismatch term never moves the biases. With truncation on, clamped
    samples contribute zero to the value-term gradient.
    """
    grad, _ = _param_gradient_with_risks(net, data, beta, truncate)
    return grad


def _param_gradient_with_risks(
    net: TwoLayerNet, data: Dataset, beta: float, truncate: bool
) -> tuple[ParamGradient, tuple[float, float, float]]:
    """Gradient plus (J, L_n, L'_n) at the same parameters, sharing one forward pass."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    _check_dims(net, data)
    n = data.n

    z = net.preactivations(data.x)  # (n, m)
    s = np.maximum(z, 0.0)
    active = (z > 0).astype(float)
    raw = s @ net.a
    if truncate:
        r = np.clip(raw, 0.0, 1.0) - data.y
        pass_through = ((raw > 0.0) & (raw < 1.0)).astype(float)
        r_eff = r * pass_through
    else:
        r = raw - data.y
        r_eff = r
    l_value = float(0.5 * np.mean(r**2))

    grad_a = (s.T @ r_eff) / n
    grad_W = (net.a[:, None] / n) * ((active * r_eff[:, None]).T @ data.x)
    grad_b = None if net.b is None else (net.a / n) * (active.T @ r_eff)

    l_grad = 0.0
    if beta > 0:
        xg, g = data.grad_rows()
        n_prime = xg.shape[0]
        if n_prime == 0:
            raise ValueError("beta > 0 requires gradient-bearing samples")
        active_g = (net.preactivations(xg) > 0).astype(float)
        rho = (active_g * net.a) @ net.W - g  # (n', d)
        l_grad = float(np.mean(np.sum(rho**2, axis=1)))
        scale = 2.0 * beta / n_prime
        grad_a += scale * np.sum(active_g * (rho @ net.W.T), axis=0)
        grad_W += scale * net.a[:, None] * (active_g.T @ rho)

    risks = (l_value + beta * l_grad, l_value, l_grad)
    return ParamGradient(grad_a, grad_W, grad_b), risks

"""Analytic target functions with exact gradients for experiments and theory checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class TargetFunction:
    """Named scalar target on [-1,1]^d with an exact gradient.

    ``gradient_bound`` is the sup over the cube of the euclidean gradient norm
    (the constant the generalization bounds call D).
    """

    name: str
    dim: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    gradient_bound: float


def _batch(x: np.ndarray, d: int) -> tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    if pts.shape[1] != d:
        raise ValueError(f"expected dimension {d}, got {pts.shape[1]}")
    return pts, single


def gaussian_target(d: int) -> TargetFunction:
    """f(x) = exp(-sum x_i^2); gradient -2x f(x); D = sqrt(2/e) for every d."""
    if d < 1:
        raise ValueError("d must be >= 1")

    def evaluate(x):
        pts, single = _batch(x, d)
        vals = np.exp(-np.sum(pts**2, axis=1))
        return float(vals[0]) if single else vals

    def gradient(x):
        pts, single = _batch(x, d)
        g = -2.0 * pts * np.exp(-np.sum(pts**2, axis=1))[:, None]
        return g[0] if single else g

    return TargetFunction("gaussian", d, evaluate, gradient, float(np.sqrt(2.0 / np.e)))


def polynomial_target(d: int) -> TargetFunction:
    """f(x) = sum_{i=1..d/2} x_i x_{i+1} (indices do not wrap); requires even d."""
    if d < 2 or d % 2 != 0:
        raise ValueError("polynomial target requires even d >= 2")
    half = d // 2

    def evaluate(x):
        pts, single = _batch(x, d)
        vals = np.sum(pts[:, :half] * pts[:, 1 : half + 1], axis=1)
        return float(vals[0]) if single else vals

    def gradient(x):
        pts, single = _batch(x, d)
        g = np.zeros_like(pts)
        g[:, :half] += pts[:, 1 : half + 1]  # d/dx_j of x_j x_{j+1}, j <= d/2
        g[:, 1 : half + 1] += pts[:, :half]  # d/dx_j of x_{j-1} x_j, 2 <= j <= d/2+1
        return g[0] if single else g

    # all-ones maximizes every |component| simultaneously: ||grad||^2 = 2d - 2
    return TargetFunction("polynomial", d, evaluate, gradient, float(np.sqrt(2 * d - 2)))


_REGISTRY = {"gaussian": gaussian_target, "polynomial": polynomial_target}


def get_target(name: str, d: int) -> TargetFunction:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown target {name!r}; available: {sorted(_REGISTRY)}") from None
    return factory(d)

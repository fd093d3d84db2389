"""Two-layer ReLU network: evaluation, input gradients, path norm, init."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class Activation:
    """Scalar activation. Only ReLU ships; the derivative at 0 is taken as 0."""

    kind: str = "relu"

    def __post_init__(self):
        if self.kind != "relu":
            raise ValueError(f"unsupported activation: {self.kind!r}")

    def __call__(self, z):
        return np.maximum(z, 0.0)

    def derivative(self, z):
        return (np.asarray(z) > 0).astype(float)


RELU = Activation()


@dataclass
class TwoLayerNet:
    """Width-m network x -> sum_k a_k * relu(<w_k, x> + b_k).

    ``a`` has shape (m,), ``W`` has shape (m, d) with row k holding w_k. The
    bias vector is optional: ``b is None`` is the homogeneous form all the
    capacity/approximation analysis assumes, and the default everywhere. The
    experiment runners train with biases, which the non-homogeneous targets
    need; see init_glorot.
    """

    a: np.ndarray
    W: np.ndarray
    b: Optional[np.ndarray] = None

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.W = np.asarray(self.W, dtype=float)
        if self.a.ndim != 1 or self.W.ndim != 2:
            raise ValueError("a must be a vector and W a matrix")
        if self.a.shape[0] != self.W.shape[0]:
            raise ValueError(
                f"width mismatch: len(a)={self.a.shape[0]} vs W rows={self.W.shape[0]}"
            )
        if self.a.shape[0] < 1 or self.W.shape[1] < 1:
            raise ValueError("width and input dimension must be positive")
        if self.b is not None:
            self.b = np.asarray(self.b, dtype=float)
            if self.b.shape != self.a.shape:
                raise ValueError("bias must have one entry per neuron")

    @property
    def width(self) -> int:
        return self.a.shape[0]

    @property
    def dim(self) -> int:
        return self.W.shape[1]

    def preactivations(self, points: np.ndarray) -> np.ndarray:
        z = points @ self.W.T
        return z if self.b is None else z + self.b

    def validate_finite(self):
        ok = np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.W))
        if self.b is not None:
            ok = ok and np.all(np.isfinite(self.b))
        if not ok:
            raise ValueError("network parameters contain NaN/Inf")

    def copy(self) -> "TwoLayerNet":
        return TwoLayerNet(self.a.copy(), self.W.copy(), None if self.b is None else self.b.copy())

    def to_json(self) -> str:
        doc = {"m": self.width, "d": self.dim, "a": self.a.tolist(), "W": self.W.tolist()}
        if self.b is not None:
            doc["b"] = self.b.tolist()
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "TwoLayerNet":
        doc = json.loads(text)
        b = doc.get("b")
        net = cls(
            np.array(doc["a"], dtype=float),
            np.array(doc["W"], dtype=float),
            None if b is None else np.array(b, dtype=float),
        )
        if net.width != doc["m"] or net.dim != doc["d"]:
            raise ValueError("declared m/d inconsistent with parameter shapes")
        return net


def _as_points(net: TwoLayerNet, x) -> tuple[np.ndarray, bool]:
    """Promote x to (n, d), checking the dimension. Returns (points, was_single)."""
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != net.dim:
        raise ValueError(f"input dimension {pts.shape[-1]} != network dimension {net.dim}")
    return pts, single


def forward(net: TwoLayerNet, x) -> float | np.ndarray:
    """Evaluate the network at one point (d,) or a batch (n, d)."""
    pts, single = _as_points(net, x)
    vals = RELU(net.preactivations(pts)) @ net.a
    return float(vals[0]) if single else vals


def truncated_forward(net: TwoLayerNet, x) -> float | np.ndarray:
    """Forward clamped to [0, 1]."""
    out = forward(net, x)
    return np.clip(out, 0.0, 1.0) if isinstance(out, np.ndarray) else min(max(out, 0.0), 1.0)


def input_gradient(net: TwoLayerNet, x) -> np.ndarray:
    """Gradient of the (untruncated) forward w.r.t. x: sum_k a_k 1{z_k > 0} w_k.

    For a batch (n, d) returns an (n, d) array of per-point gradients.
    """
    pts, single = _as_points(net, x)
    active = (net.preactivations(pts) > 0).astype(float)  # (n, m)
    grads = (active * net.a) @ net.W
    return grads[0] if single else grads


def path_norm(net: TwoLayerNet) -> float:
    """sum_k |a_k| * ||w_k||_1, plus |b_k| inside the parenthesis when biases exist."""
    per_neuron = np.abs(net.W).sum(axis=1)
    if net.b is not None:
        per_neuron = per_neuron + np.abs(net.b)
    return float(np.abs(net.a) @ per_neuron)


def init_glorot(width: int, dim: int, seed, bias: bool = False) -> TwoLayerNet:
    """Glorot-normal init: std sqrt(2/(d+1)) for W entries, sqrt(2/(m+1)) for a.

    With ``bias`` a zero-initialized trainable bias is attached to every neuron.
    """
    if width < 1 or dim < 1:
        raise ValueError("width and dim must be >= 1")
    rng = np.random.default_rng(seed)
    W = rng.normal(0.0, np.sqrt(2.0 / (dim + 1)), size=(width, dim))
    a = rng.normal(0.0, np.sqrt(2.0 / (width + 1)), size=width)
    b = np.zeros(width) if bias else None
    return TwoLayerNet(a, W, b)

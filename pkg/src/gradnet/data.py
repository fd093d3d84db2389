"""Labeled samples, gradient-enhanced dataset assembly, and CSV/JSON serialization.

A dataset stores n inputs in [-1,1]^d with function values, where any subset of
the samples may additionally carry a full gradient vector ("X% gradient-enhanced"
when X% of them do).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np


@dataclass
class LabeledSample:
    x: np.ndarray
    y: float
    y_grad: Optional[np.ndarray] = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.y_grad is not None:
            self.y_grad = np.asarray(self.y_grad, dtype=float)
            if self.y_grad.shape != self.x.shape:
                raise ValueError("gradient length must equal input length")


@dataclass
class Dataset:
    """Columnar store: x (n, d), y (n,), grad (n, d) valid where has_grad is True."""

    x: np.ndarray
    y: np.ndarray
    grad: np.ndarray
    has_grad: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.grad = np.asarray(self.grad, dtype=float)
        self.has_grad = np.asarray(self.has_grad, dtype=bool)
        if self.x.ndim != 2 or self.x.shape[0] == 0:
            raise ValueError("dataset must be a nonempty (n, d) array")
        n, d = self.x.shape
        if self.y.shape != (n,) or self.grad.shape != (n, d) or self.has_grad.shape != (n,):
            raise ValueError("inconsistent dataset column shapes")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def n_grad(self) -> int:
        return int(self.has_grad.sum())

    def grad_rows(self) -> tuple[np.ndarray, np.ndarray]:
        """Inputs and gradient labels of the gradient-bearing samples."""
        return self.x[self.has_grad], self.grad[self.has_grad]

    def samples(self) -> Iterator[LabeledSample]:
        for i in range(self.n):
            g = self.grad[i] if self.has_grad[i] else None
            yield LabeledSample(self.x[i], float(self.y[i]), g)

    @classmethod
    def from_samples(cls, samples) -> "Dataset":
        samples = list(samples)
        if not samples:
            raise ValueError("dataset must be nonempty")
        d = samples[0].x.shape[0]
        if any(s.x.shape[0] != d for s in samples):
            raise ValueError("samples must share one input dimension")
        x = np.stack([s.x for s in samples])
        y = np.array([s.y for s in samples], dtype=float)
        grad = np.zeros((len(samples), d))
        has = np.zeros(len(samples), dtype=bool)
        for i, s in enumerate(samples):
            if s.y_grad is not None:
                grad[i] = s.y_grad
                has[i] = True
        return cls(x, y, grad, has)

    # -- serialization -------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        d = self.dim
        w.writerow([f"x_{j+1}" for j in range(d)] + ["y"] + [f"g_{j+1}" for j in range(d)])
        for i in range(self.n):
            row = [repr(float(v)) for v in self.x[i]] + [repr(float(self.y[i]))]
            if self.has_grad[i]:
                row += [repr(float(v)) for v in self.grad[i]]
            else:
                row += [""] * d
            w.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Dataset":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        d = sum(1 for c in header if c.startswith("x_"))
        if header[:d] != [f"x_{j+1}" for j in range(d)] or header[d] != "y":
            raise ValueError("unrecognized dataset CSV header")
        samples = []
        for row in body:
            x = np.array([float(v) for v in row[:d]])
            y = float(row[d])
            gcells = row[d + 1 : 2 * d + 1]
            g = None if all(c == "" for c in gcells) else np.array([float(v) for v in gcells])
            samples.append(LabeledSample(x, y, g))
        return cls.from_samples(samples)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_dict(self) -> dict:
        return {
            "d": self.dim,
            "samples": [
                {
                    "x": self.x[i].tolist(),
                    "y": float(self.y[i]),
                    "y_grad": self.grad[i].tolist() if self.has_grad[i] else None,
                }
                for i in range(self.n)
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Dataset":
        samples = [
            LabeledSample(np.array(s["x"], dtype=float), float(s["y"]), s.get("y_grad"))
            for s in doc["samples"]
        ]
        ds = cls.from_samples(samples)
        if ds.dim != doc["d"]:
            raise ValueError("declared dimension inconsistent with samples")
        return ds

    @classmethod
    def from_json(cls, text: str) -> "Dataset":
        return cls.from_dict(json.loads(text))


def sample_uniform_cube(n: int, d: int, seed) -> np.ndarray:
    """n i.i.d. uniform points in [-1,1]^d, deterministic per seed."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, size=(n, d))


@dataclass(frozen=True)
class EnhancementSpec:
    """X% gradient enhancement of an n-point dataset.

    round(percent*n/100) samples, chosen uniformly without replacement, carry
    gradients; Python's banker's rounding settles exact-.5 boundaries.
    """

    percent: float
    n: int
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.percent <= 100.0:
            raise ValueError("percent must lie in [0, 100]")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def n_enhanced(self) -> int:
        return round(self.percent * self.n / 100.0)


def apply_enhancement(data: Dataset, spec: EnhancementSpec) -> Dataset:
    """Mask a fully gradient-labeled dataset down to X% gradient-bearing samples."""
    if data.n != spec.n:
        raise ValueError(f"spec.n={spec.n} does not match dataset size {data.n}")
    if data.n_grad != data.n:
        raise ValueError("enhancement masking requires gradients on every sample")
    has = np.zeros(data.n, dtype=bool)
    k = spec.n_enhanced
    if k > 0:
        rng = np.random.default_rng(spec.seed)
        has[rng.choice(data.n, size=k, replace=False)] = True
    grad = np.where(has[:, None], data.grad, 0.0)
    return Dataset(data.x.copy(), data.y.copy(), grad, has)


def assemble_enhanced(
    points: np.ndarray,
    value_fn: Callable[[np.ndarray], np.ndarray],
    grad_fn: Callable[[np.ndarray], np.ndarray],
    spec: EnhancementSpec,
) -> Dataset:
    """Label all points with values; attach gradients to a random subset per spec.

    The gradient-bearing points are a subset of the existing points (no fresh
    gradient-only locations).
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("points must be a nonempty (n, d) array")
    if points.shape[0] != spec.n:
        raise ValueError(f"spec.n={spec.n} does not match {points.shape[0]} points")
    n, d = points.shape
    y = np.asarray(value_fn(points), dtype=float).reshape(n)
    grad = np.zeros((n, d))
    has = np.zeros(n, dtype=bool)
    k = spec.n_enhanced
    if k > 0:
        rng = np.random.default_rng(spec.seed)
        chosen = rng.choice(n, size=k, replace=False)
        grad[chosen] = np.asarray(grad_fn(points[chosen]), dtype=float).reshape(k, d)
        has[chosen] = True
    return Dataset(points, y, grad, has)

"""Pydantic request/response models for the HTTP surface."""

from __future__ import annotations

from typing import Optional

import numpy as np
from pydantic import BaseModel, Field

from ..data import Dataset
from ..network import TwoLayerNet
from ..theory import BarronMixture
from ..training import TrainConfig


class NetModel(BaseModel):
    m: int
    d: int
    a: list[float]
    W: list[list[float]]
    b: Optional[list[float]] = None

    @classmethod
    def from_core(cls, net: TwoLayerNet) -> "NetModel":
        return cls(
            m=net.width, d=net.dim, a=net.a.tolist(), W=net.W.tolist(),
            b=None if net.b is None else net.b.tolist(),
        )

    def to_core(self) -> TwoLayerNet:
        net = TwoLayerNet(
            np.array(self.a), np.array(self.W),
            None if self.b is None else np.array(self.b),
        )
        if net.width != self.m or net.dim != self.d:
            raise ValueError("declared m/d inconsistent with parameter shapes")
        return net


class SampleModel(BaseModel):
    x: list[float]
    y: float
    y_grad: Optional[list[float]] = None


class DatasetModel(BaseModel):
    d: int
    samples: list[SampleModel]

    @classmethod
    def from_core(cls, data: Dataset) -> "DatasetModel":
        return cls(**data.to_dict())

    def to_core(self) -> Dataset:
        return Dataset.from_dict(self.model_dump())


class TrainConfigModel(BaseModel):
    epochs: int = 5000
    lr0: float = 0.01
    decay_factor: float = 0.8
    decay_every: int = 500
    beta: float = 10.0
    seed: int = 0
    width: int = 1000
    truncate: bool = False

    def to_core(self) -> TrainConfig:
        return TrainConfig(**self.model_dump())


class MixtureModel(BaseModel):
    p: list[float]
    a: list[float]
    W: list[list[float]]

    def to_core(self) -> BarronMixture:
        return BarronMixture(np.array(self.p), np.array(self.a), np.array(self.W))

    @classmethod
    def from_core(cls, mix: BarronMixture) -> "MixtureModel":
        return cls(**mix.to_dict())


class InitRequest(BaseModel):
    width: int = Field(ge=1)
    dim: int = Field(ge=1)
    seed: int = 0
    bias: bool = False


class EvaluateRequest(BaseModel):
    net: NetModel
    points: list[list[float]]
    truncate: bool = False
    with_gradient: bool = False


class EvaluateResponse(BaseModel):
    values: list[float]
    gradients: Optional[list[list[float]]] = None
    path_norm: float


class RiskRequest(BaseModel):
    net: NetModel
    dataset: DatasetModel
    beta: float = 10.0
    truncate: bool = False


class RiskResponse(BaseModel):
    value_risk: float
    grad_risk: Optional[float] = None
    grad_risk_unsquared: Optional[float] = None
    combined_risk: float


class TrainRequest(BaseModel):
    dataset: DatasetModel
    config: TrainConfigModel = TrainConfigModel()
    net: Optional[NetModel] = None  # defaults to a fresh Glorot init


class HistoryRow(BaseModel):
    epoch: int
    J: float
    L_n: float
    L_grad_n: float
    lr: float


class TrainResponse(BaseModel):
    net: NetModel
    history: list[HistoryRow]
    final_loss: float


class FunctionDatasetRequest(BaseModel):
    target: str = "gaussian"
    dim: int = 2
    n: int = Field(ge=1)
    percent: float = Field(default=100.0, ge=0.0, le=100.0)
    seed: int = 0


class UqDatasetRequest(BaseModel):
    dim: int = Field(ge=1)
    n: int = Field(ge=1)
    grid_n: int = 63
    percent: float = Field(default=100.0, ge=0.0, le=100.0)
    seed: int = 0
    tol: float = 1e-10


class UqDatasetResponse(BaseModel):
    dataset: DatasetModel
    meta: dict


class PdeSolveRequest(BaseModel):
    y: list[float]
    grid_n: int = 63
    tol: float = 1e-10
    with_gradient: bool = True


class PdeSolveResponse(BaseModel):
    q: float
    q_grad: Optional[list[float]] = None
    meta: dict


class ApproximationEventsRequest(BaseModel):
    mixture: MixtureModel
    m: int = Field(ge=1)
    n_trials: int = Field(default=1000, ge=100)
    n_mc: int = 4096
    seed: int = 0


class RademacherRequest(BaseModel):
    points: list[list[float]]
    q: float = Field(ge=0.0)
    grad_labels: Optional[list[list[float]]] = None  # required for the gradient family
    n_theta: int = 256
    n_xi: int = 1000
    seed: int = 0


class RademacherResponse(BaseModel):
    estimate: float
    bound: float
    holds: bool


class PosteriorBoundRequest(BaseModel):
    q: float = Field(ge=0.0)
    n: int = Field(ge=1)
    d: int = Field(ge=2)
    beta: float = Field(ge=0.0)
    big_d: float = Field(ge=0.0)
    delta: float = Field(gt=0.0, lt=1.0)


class GapCheckRequest(BaseModel):
    net: NetModel
    dataset: DatasetModel
    target: str = "gaussian"
    beta: float = 10.0
    big_d: Optional[float] = None  # defaults to the target's analytic bound
    delta: float = 0.05
    n_test: int = 10_000
    seed: int = 0
    truncate: bool = True


class RiskBoundRequest(BaseModel):
    mixture: MixtureModel
    m: int = Field(ge=1)
    n: int = Field(default=500, ge=1)
    beta: float = 10.0
    delta: float = 0.05
    n_mc: int = 4096
    seed: int = 0


class ExperimentRequest(BaseModel):
    config: dict


class RecordModel(BaseModel):
    kind: str
    target: str
    d: int
    n: int
    percent: float
    seed: int
    width: int
    epochs: int
    beta: float
    status: str
    rel_l2: Optional[float] = None
    final_loss: Optional[float] = None
    loss_history: str
    config_hash: str


class ExperimentResponse(BaseModel):
    records: list[RecordModel]
    histories: dict[str, list[HistoryRow]]
    report: Optional[dict] = None

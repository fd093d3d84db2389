"""Gradient-enhanced two-layer network regression with bound checks and a PDE UQ pipeline."""

__version__ = "0.1.0"

from .data import Dataset, EnhancementSpec, LabeledSample, assemble_enhanced, sample_uniform_cube
from .losses import ParamGradient, combined_risk, grad_risk, grad_risk_unsquared, param_gradient, value_risk
from .network import TwoLayerNet, forward, init_glorot, input_gradient, path_norm, truncated_forward
from .targets import TargetFunction, gaussian_target, get_target, polynomial_target
from .theory import BarronMixture, posterior_bound
from .training import AdamState, TrainConfig, TrainResult, adam_step, lr_at, train

__all__ = [
    "AdamState",
    "BarronMixture",
    "Dataset",
    "EnhancementSpec",
    "LabeledSample",
    "ParamGradient",
    "TargetFunction",
    "TrainConfig",
    "TrainResult",
    "TwoLayerNet",
    "adam_step",
    "assemble_enhanced",
    "combined_risk",
    "forward",
    "gaussian_target",
    "get_target",
    "grad_risk",
    "grad_risk_unsquared",
    "init_glorot",
    "input_gradient",
    "lr_at",
    "param_gradient",
    "path_norm",
    "polynomial_target",
    "posterior_bound",
    "sample_uniform_cube",
    "train",
    "truncated_forward",
    "value_risk",
]

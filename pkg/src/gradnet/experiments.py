"""Experiment sweeps: function approximation, PDE-based UQ, and the theory battery.

Every sweep cell is keyed by (n, enhancement percent, seed) and derives its
own random streams from those integers, so a config file fully determines the
output records byte for byte. Cells with zero gradient-bearing samples train
with an effective beta of 0 (the plain-DNN baseline).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .data import (
    Dataset,
    EnhancementSpec,
    apply_enhancement,
    assemble_enhanced,
    sample_uniform_cube,
)
from .network import forward, init_glorot
from .pde import Grid2D, generate_uq_dataset
from .targets import get_target
from .theory import (
    check_generalization_gap,
    empirical_rademacher_gradient_family,
    empirical_rademacher_value_family,
    mixture_eval,
    mixture_gradient,
    rademacher_gradient_bound,
    rademacher_value_bound,
    random_mixture,
    risk_upper_bound_check,
    verify_approximation_theorem,
)
from .training import TrainConfig, TrainingDivergedError, train

RECORD_COLUMNS = [
    "kind",
    "target",
    "d",
    "n",
    "percent",
    "seed",
    "width",
    "epochs",
    "beta",
    "status",
    "rel_l2",
    "final_loss",
    "loss_history",
    "config_hash",
]

_DATA_STREAM, _PICK_STREAM, _INIT_STREAM, _SHARED_STREAM = 0, 1, 2, 3


def relative_l2(pred: np.ndarray, truth: np.ndarray) -> float:
    """||pred - truth||_2 / ||truth||_2 over a test sample."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    denom = float(np.linalg.norm(truth))
    if denom == 0.0:
        raise ValueError("truth values have zero norm")
    return float(np.linalg.norm(pred - truth) / denom)


@dataclass
class ExperimentConfig:
    kind: str  # "function-approx" | "pde-uq" | "theory-check"
    target: str = "gaussian"
    dim: int = 2
    sample_counts: list[int] = field(default_factory=lambda: [400])
    enhancements: list[float] = field(default_factory=lambda: [0.0, 20.0, 100.0])
    seeds: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    train: TrainConfig = field(default_factory=TrainConfig)
    n_test: int = 10_000
    test_seed: int = 123456789
    grid_n: int = 63
    pde_tol: float = 1e-10
    bias: bool = True  # homogeneous nets cannot carry the targets' constant component
    theory_checks: Optional[list[dict]] = None

    def __post_init__(self):
        if self.kind not in ("function-approx", "pde-uq", "theory-check"):
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.kind != "theory-check":
            if not self.sample_counts or not self.enhancements or not self.seeds:
                raise ValueError("sweeps must be nonempty")
            if len(set(self.seeds)) != len(self.seeds):
                raise ValueError("replication seeds must be distinct")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        train_doc = dict(doc.pop("train", {}))
        if doc.get("kind") == "pde-uq":
            doc.setdefault("n_test", 2000)
            # paper UQ schedule: slower start, half decay each 1000 steps
            train_doc = {"lr0": 0.001, "decay_factor": 0.5, "decay_every": 1000, **train_doc}
        return cls(train=TrainConfig(**train_doc), **doc)

    def hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]


@dataclass
class ErrorRecord:
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
    rel_l2: Optional[float]
    final_loss: Optional[float]
    loss_history: str
    config_hash: str

    def to_row(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, float):
                return repr(v)
            return str(v)

        return [fmt(getattr(self, c)) for c in RECORD_COLUMNS]


@dataclass
class ExperimentResult:
    records: list[ErrorRecord] = field(default_factory=list)
    histories: dict[str, list[dict]] = field(default_factory=dict)
    report: Optional[dict] = None

    def records_csv(self) -> str:
        lines = [",".join(RECORD_COLUMNS)]
        for rec in self.records:
            lines.append(",".join(rec.to_row()))
        return "\n".join(lines) + "\n"


def _stream(seed: int, n: int, percent: float, tag: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed % 2**63, n, int(round(percent * 1000)), tag])


def _cell_key(target: str, d: int, n: int, percent: float, seed: int) -> str:
    return f"{target}_d{d}_n{n}_x{percent:g}_s{seed}"


def _run_cell(config, dataset, net0, x_test, y_test):
    """Train one cell; returns (status, eff_beta, rel_l2, final_loss, history)."""
    eff_beta = config.train.beta if dataset.n_grad > 0 else 0.0
    try:
        outcome = train(net0, dataset, replace(config.train, beta=eff_beta))
    except TrainingDivergedError:
        return "diverged", eff_beta, None, None, None
    err = relative_l2(forward(outcome.net, x_test), y_test)
    return "ok", eff_beta, err, outcome.final_loss, outcome.history


def _record(config, chash, target_name, n, percent, seed, key, status, eff_beta, err, loss):
    return ErrorRecord(
        kind=config.kind,
        target=target_name,
        d=config.dim,
        n=n,
        percent=float(percent),
        seed=seed,
        width=config.train.width,
        epochs=config.train.epochs,
        beta=eff_beta,
        status=status,
        rel_l2=err,
        final_loss=loss,
        loss_history=f"loss_{key}.csv",
        config_hash=chash,
    )


def run_function_approx(config: ExperimentConfig) -> ExperimentResult:
    """Sample/assemble/train/evaluate over the (n, percent, seed) sweep."""
    tgt = get_target(config.target, config.dim)
    chash = config.hash()
    x_test = sample_uniform_cube(config.n_test, config.dim, config.test_seed)
    y_test = tgt.evaluate(x_test)
    result = ExperimentResult()
    for n in config.sample_counts:
        for percent in config.enhancements:
            for seed in config.seeds:
                points = sample_uniform_cube(
                    n, config.dim, _stream(seed, n, percent, _DATA_STREAM)
                )
                dataset = assemble_enhanced(
                    points,
                    tgt.evaluate,
                    tgt.gradient,
                    EnhancementSpec(percent=percent, n=n,
                                    seed=_stream(seed, n, percent, _PICK_STREAM)),
                )
                net0 = init_glorot(
                    config.train.width, config.dim,
                    _stream(seed, n, percent, _INIT_STREAM), bias=config.bias,
                )
                key = _cell_key(tgt.name, config.dim, n, percent, seed)
                status, eff_beta, err, loss, history = _run_cell(
                    config, dataset, net0, x_test, y_test
                )
                if history is not None:
                    result.histories[key] = history
                result.records.append(
                    _record(config, chash, tgt.name, n, percent, seed,
                            key, status, eff_beta, err, loss)
                )
    return result


def run_pde_uq(config: ExperimentConfig) -> ExperimentResult:
    """UQ sweep: surrogate the PDE QoI over Y-space from adjoint-labeled solves.

    The held-out truth set (fresh solves, values only) is generated once and
    reused across every cell for paired comparisons; per (seed, n) the labeled
    solves happen once and are re-masked for each enhancement level.
    """
    chash = config.hash()
    grid = Grid2D(config.grid_n)
    test_data, _ = generate_uq_dataset(
        config.dim, config.n_test, grid, config.test_seed, tol=config.pde_tol,
        with_gradient=False,
    )
    result = ExperimentResult()
    for n in config.sample_counts:
        for seed in config.seeds:
            full, _ = generate_uq_dataset(
                config.dim, n, grid, _stream(seed, n, 0.0, _SHARED_STREAM),
                tol=config.pde_tol, with_gradient=True,
            )
            for percent in config.enhancements:
                dataset = apply_enhancement(
                    full, EnhancementSpec(percent=percent, n=n,
                                          seed=_stream(seed, n, percent, _PICK_STREAM))
                )
                net0 = init_glorot(
                    config.train.width, config.dim,
                    _stream(seed, n, percent, _INIT_STREAM), bias=config.bias,
                )
                key = _cell_key("qoi", config.dim, n, percent, seed)
                status, eff_beta, err, loss, history = _run_cell(
                    config, dataset, net0, test_data.x, test_data.y
                )
                if history is not None:
                    result.histories[key] = history
                result.records.append(
                    _record(config, chash, "qoi", n, percent, seed,
                            key, status, eff_beta, err, loss)
                )
    result.records.sort(key=lambda r: (r.n, r.percent, r.seed))
    return result


# -- theory battery ----------------------------------------------------------


def default_theory_battery() -> list[dict]:
    """CI-scale battery: one representative cell per bound family."""
    return [
        {
            "check": "approximation-events",
            "atoms": 5, "d": 4, "m": 32, "n_trials": 300, "n_mc": 2048,
            "mixture_seed": 7, "seed": 11,
            "min_freqs": [0.617, 0.807, 0.45],
        },
        {"check": "rademacher-value", "d": 4, "n": 100, "q": 3.0,
         "n_theta": 256, "n_xi": 1000, "seed": 21},
        {"check": "rademacher-gradient", "d": 4, "n": 100, "q": 3.0,
         "n_theta": 256, "n_xi": 1000, "seed": 22},
        {"check": "generalization-gap", "target": "gaussian", "d": 2, "n": 100,
         "width": 64, "epochs": 500, "beta": 10.0, "delta": 0.05,
         "n_test": 4000, "seed": 31},
        {"check": "risk-bound", "atoms": 5, "d": 4, "m": 32, "n": 200,
         "beta": 10.0, "delta": 0.05, "mixture_seed": 8, "seed": 41},
    ]


def _run_theory_check(spec: dict) -> dict:
    spec = dict(spec)
    kind = spec.pop("check")
    if kind == "approximation-events":
        mix = random_mixture(spec["atoms"], spec["d"], spec["mixture_seed"])
        rep = verify_approximation_theorem(
            mix, spec["m"], spec["n_trials"], spec["n_mc"], spec["seed"]
        )
        lo = spec["min_freqs"]
        passed = rep.freq_e1 >= lo[0] and rep.freq_e2 >= lo[1] and rep.freq_e3 >= lo[2]
        return {"check": kind, "params": spec, "observed": rep.to_dict(), "passed": passed}
    if kind == "rademacher-value":
        pts = sample_uniform_cube(spec["n"], spec["d"], spec["seed"])
        est = empirical_rademacher_value_family(
            pts, spec["q"], spec["n_theta"], spec["n_xi"], spec["seed"] + 1
        )
        bound = rademacher_value_bound(spec["q"], spec["n"], spec["d"])
        return {"check": kind, "params": spec,
                "observed": {"estimate": est, "bound": bound}, "passed": est <= bound}
    if kind == "rademacher-gradient":
        rng = np.random.default_rng(spec["seed"])
        pts = sample_uniform_cube(spec["n"], spec["d"], spec["seed"])
        labels = rng.uniform(-1.0, 1.0, size=pts.shape)
        est = empirical_rademacher_gradient_family(
            pts, labels, spec["q"], spec["n_theta"], spec["n_xi"], spec["seed"] + 1
        )
        bound = rademacher_gradient_bound(spec["q"], spec["n"], spec["d"])
        return {"check": kind, "params": spec,
                "observed": {"estimate": est, "bound": bound}, "passed": est <= bound}
    if kind == "generalization-gap":
        tgt = get_target(spec["target"], spec["d"])
        seeds = np.random.SeedSequence(spec["seed"]).spawn(3)
        points = sample_uniform_cube(spec["n"], spec["d"], seeds[0])
        dataset = assemble_enhanced(
            points, tgt.evaluate, tgt.gradient,
            EnhancementSpec(percent=100.0, n=spec["n"], seed=seeds[1]),
        )
        cfg = TrainConfig(epochs=spec["epochs"], beta=spec["beta"],
                          width=spec["width"], truncate=True)
        outcome = train(init_glorot(spec["width"], spec["d"], seeds[2]), dataset, cfg)
        rep = check_generalization_gap(
            outcome.net, dataset, spec["beta"], tgt.gradient_bound, spec["delta"],
            tgt, spec["n_test"], seed=spec["seed"] + 1, truncate=True,
        )
        return {"check": kind, "params": spec, "observed": rep.to_dict(), "passed": rep.holds}
    if kind == "risk-bound":
        mix = random_mixture(spec["atoms"], spec["d"], spec["mixture_seed"], unit_range=True)
        seeds = np.random.SeedSequence(spec["seed"]).spawn(2)
        xs = sample_uniform_cube(spec["n"], spec["d"], seeds[0])
        data = Dataset(xs, mixture_eval(mix, xs), mixture_gradient(mix, xs),
                       np.ones(spec["n"], dtype=bool))
        rep = risk_upper_bound_check(
            mix, spec["m"], data, spec["beta"], spec["delta"], seed=seeds[1]
        )
        return {"check": kind, "params": spec, "observed": rep.to_dict(), "passed": rep.holds}
    raise ValueError(f"unknown theory check {kind!r}")


def run_theory_checks(config: ExperimentConfig) -> dict:
    """Run the configured battery; the report aggregates per-check pass/fail."""
    checks = config.theory_checks
    if checks is None:
        checks = default_theory_battery()
    results = [_run_theory_check(c) for c in checks]
    return {
        "kind": "theory-check",
        "config_hash": config.hash(),
        "checks": results,
        "all_passed": all(c["passed"] for c in results),
    }


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Dispatch on config.kind."""
    if config.kind == "function-approx":
        return run_function_approx(config)
    if config.kind == "pde-uq":
        return run_pde_uq(config)
    report = run_theory_checks(config)
    return ExperimentResult(report=report)

"""FastAPI application exposing the library over HTTP."""

from __future__ import annotations

import dataclasses

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..data import Dataset, EnhancementSpec, apply_enhancement, assemble_enhanced, sample_uniform_cube
from ..experiments import ExperimentConfig, run_experiment
from ..losses import combined_risk, grad_risk, grad_risk_unsquared, value_risk
from ..network import forward, init_glorot, input_gradient, path_norm, truncated_forward
from ..pde import Grid2D, generate_uq_dataset, solve_realization
from ..targets import get_target
from ..theory import (
    check_generalization_gap,
    empirical_rademacher_gradient_family,
    empirical_rademacher_value_family,
    posterior_bound,
    rademacher_gradient_bound,
    rademacher_value_bound,
    risk_upper_bound_check,
    verify_approximation_theorem,
)
from ..training import train
from . import schemas as s


def create_app() -> FastAPI:
    app = FastAPI(title="gradnet", version=__version__)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(RuntimeError)
    async def _runtime_error(request: Request, exc: RuntimeError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/net/init", response_model=s.NetModel)
    def net_init(req: s.InitRequest):
        return s.NetModel.from_core(init_glorot(req.width, req.dim, req.seed, bias=req.bias))

    @app.post("/net/evaluate", response_model=s.EvaluateResponse)
    def net_evaluate(req: s.EvaluateRequest):
        net = req.net.to_core()
        pts = np.array(req.points, dtype=float)
        vals = truncated_forward(net, pts) if req.truncate else forward(net, pts)
        grads = input_gradient(net, pts).tolist() if req.with_gradient else None
        return s.EvaluateResponse(
            values=np.atleast_1d(vals).tolist(), gradients=grads, path_norm=path_norm(net)
        )

    @app.post("/losses/evaluate", response_model=s.RiskResponse)
    def losses_evaluate(req: s.RiskRequest):
        net = req.net.to_core()
        data = req.dataset.to_core()
        has_grads = data.n_grad > 0
        return s.RiskResponse(
            value_risk=value_risk(net, data, req.truncate),
            grad_risk=grad_risk(net, data) if has_grads else None,
            grad_risk_unsquared=grad_risk_unsquared(net, data) if has_grads else None,
            combined_risk=combined_risk(net, data, req.beta, req.truncate),
        )

    @app.post("/train", response_model=s.TrainResponse)
    def train_endpoint(req: s.TrainRequest):
        data = req.dataset.to_core()
        config = req.config.to_core()
        net0 = req.net.to_core() if req.net else init_glorot(config.width, data.dim, config.seed)
        outcome = train(net0, data, config)
        return s.TrainResponse(
            net=s.NetModel.from_core(outcome.net),
            history=[s.HistoryRow(**row) for row in outcome.history],
            final_loss=outcome.final_loss,
        )

    @app.post("/datasets/function", response_model=s.DatasetModel)
    def datasets_function(req: s.FunctionDatasetRequest):
        tgt = get_target(req.target, req.dim)
        ss = np.random.SeedSequence(req.seed).spawn(2)
        points = sample_uniform_cube(req.n, req.dim, ss[0])
        data = assemble_enhanced(
            points, tgt.evaluate, tgt.gradient,
            EnhancementSpec(percent=req.percent, n=req.n, seed=ss[1]),
        )
        return s.DatasetModel.from_core(data)

    @app.post("/datasets/uq", response_model=s.UqDatasetResponse)
    def datasets_uq(req: s.UqDatasetRequest):
        grid = Grid2D(req.grid_n)
        data, meta = generate_uq_dataset(req.dim, req.n, grid, req.seed, tol=req.tol)
        if req.percent < 100.0:
            pick = np.random.SeedSequence([req.seed % 2**63, 1]).spawn(1)[0]
            data = apply_enhancement(
                data, EnhancementSpec(percent=req.percent, n=req.n, seed=pick)
            )
        meta = dict(meta, percent=req.percent)
        return s.UqDatasetResponse(dataset=s.DatasetModel.from_core(data), meta=meta)

    @app.post("/pde/solve", response_model=s.PdeSolveResponse)
    def pde_solve(req: s.PdeSolveRequest):
        grid = Grid2D(req.grid_n)
        real = solve_realization(req.y, grid, tol=req.tol, with_gradient=req.with_gradient)
        meta = {"grid_n": grid.n_interior, "h": grid.h, "solver": "cg+ilu", "tol": req.tol}
        return s.PdeSolveResponse(
            q=real.q,
            q_grad=None if real.q_grad is None else real.q_grad.tolist(),
            meta=meta,
        )

    @app.post("/theory/approximation-events")
    def theory_approximation(req: s.ApproximationEventsRequest):
        rep = verify_approximation_theorem(
            req.mixture.to_core(), req.m, req.n_trials, req.n_mc, req.seed
        )
        return rep.to_dict()

    @app.post("/theory/rademacher-value", response_model=s.RademacherResponse)
    def theory_rademacher_value(req: s.RademacherRequest):
        pts = np.array(req.points, dtype=float)
        est = empirical_rademacher_value_family(pts, req.q, req.n_theta, req.n_xi, req.seed)
        bound = rademacher_value_bound(req.q, pts.shape[0], pts.shape[1])
        return s.RademacherResponse(estimate=est, bound=bound, holds=est <= bound)

    @app.post("/theory/rademacher-gradient", response_model=s.RademacherResponse)
    def theory_rademacher_gradient(req: s.RademacherRequest):
        if req.grad_labels is None:
            raise ValueError("grad_labels required for the gradient family")
        pts = np.array(req.points, dtype=float)
        labels = np.array(req.grad_labels, dtype=float)
        est = empirical_rademacher_gradient_family(
            pts, labels, req.q, req.n_theta, req.n_xi, req.seed
        )
        bound = rademacher_gradient_bound(req.q, pts.shape[0], pts.shape[1])
        return s.RademacherResponse(estimate=est, bound=bound, holds=est <= bound)

    @app.post("/theory/posterior-bound")
    def theory_posterior_bound(req: s.PosteriorBoundRequest):
        return {"bound": posterior_bound(req.q, req.n, req.d, req.beta, req.big_d, req.delta)}

    @app.post("/theory/generalization-gap")
    def theory_gap(req: s.GapCheckRequest):
        net = req.net.to_core()
        tgt = get_target(req.target, net.dim)
        big_d = tgt.gradient_bound if req.big_d is None else req.big_d
        rep = check_generalization_gap(
            net, req.dataset.to_core(), req.beta, big_d, req.delta,
            tgt, req.n_test, seed=req.seed, truncate=req.truncate,
        )
        return rep.to_dict()

    @app.post("/theory/risk-bound")
    def theory_risk_bound(req: s.RiskBoundRequest):
        mix = req.mixture.to_core()
        from ..theory import mixture_eval, mixture_gradient

        ss = np.random.SeedSequence(req.seed).spawn(2)
        xs = sample_uniform_cube(req.n, mix.dim, ss[0])
        data = Dataset(
            xs, mixture_eval(mix, xs), mixture_gradient(mix, xs),
            np.ones(req.n, dtype=bool),
        )
        rep = risk_upper_bound_check(
            mix, req.m, data, req.beta, req.delta, n_mc=req.n_mc, seed=ss[1]
        )
        return rep.to_dict()

    @app.post("/experiments/run", response_model=s.ExperimentResponse)
    def experiments_run(req: s.ExperimentRequest):
        config = ExperimentConfig.from_dict(req.config)
        result = run_experiment(config)
        return s.ExperimentResponse(
            records=[s.RecordModel(**dataclasses.asdict(r)) for r in result.records],
            histories={
                k: [s.HistoryRow(**row) for row in rows]
                for k, rows in result.histories.items()
            },
            report=result.report,
        )

    return app


app = create_app()

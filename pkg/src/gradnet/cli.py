"""Command line interface: experiment runner subcommands plus `serve`.

All subcommands except `serve` are clients of the HTTP service; with no
--server they run against an in-process app. Result files (records.csv,
loss_<cell>.csv, report.json) are written locally by the client, so identical
configs reproduce them byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .client import ServiceClient
from .experiments import RECORD_COLUMNS


def _load_config(args, kind: str) -> dict:
    config = {}
    if args.config:
        config = json.loads(Path(args.config).read_text())
    config["kind"] = kind
    if getattr(args, "seed", None) is not None:
        config["seeds"] = [args.seed]
    for name in ("target", "dim", "n_test", "grid_n"):
        val = getattr(args, name, None)
        if val is not None:
            config[name] = val
    if getattr(args, "samples", None):
        config["sample_counts"] = [int(v) for v in args.samples.split(",")]
    if getattr(args, "enhancements", None):
        config["enhancements"] = [float(v) for v in args.enhancements.split(",")]
    train = config.setdefault("train", {})
    for name in ("width", "epochs", "beta", "lr0"):
        val = getattr(args, name, None)
        if val is not None:
            train[name] = val
    return config


def _write_experiment_outputs(out_dir: Path, config: dict, response: dict):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")
    records = response.get("records") or []
    if records:
        lines = [",".join(RECORD_COLUMNS)]
        for rec in records:
            row = []
            for col in RECORD_COLUMNS:
                v = rec.get(col)
                row.append("" if v is None else (repr(v) if isinstance(v, float) else str(v)))
            lines.append(",".join(row))
        (out_dir / "records.csv").write_text("\n".join(lines) + "\n")
    for key, history in (response.get("histories") or {}).items():
        lines = ["epoch,J,L_n,L_grad_n,lr"]
        for row in history:
            lines.append(
                f"{row['epoch']},{row['J']!r},{row['L_n']!r},{row['L_grad_n']!r},{row['lr']!r}"
            )
        (out_dir / f"loss_{key}.csv").write_text("\n".join(lines) + "\n")
    if response.get("report") is not None:
        (out_dir / "report.json").write_text(
            json.dumps(response["report"], indent=2, sort_keys=True) + "\n"
        )


def _cmd_experiment(args, kind: str) -> int:
    config = _load_config(args, kind)
    with ServiceClient(args.server) as client:
        response = client.run_experiment(config)
    out_dir = Path(args.out)
    _write_experiment_outputs(out_dir, config, response)
    n_rec = len(response.get("records") or [])
    print(f"wrote {n_rec} records to {out_dir}")
    report = response.get("report")
    if report is not None:
        for check in report.get("checks", []):
            print(f"[{'PASS' if check['passed'] else 'FAIL'}] {check['check']}")
        if not report.get("all_passed", True):
            return 1
    return 0


def _cmd_solve_pde(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with ServiceClient(args.server) as client:
        if args.y:
            y = [float(v) for v in args.y.split(",")]
            result = client.solve_pde(y, args.grid_n, args.tol, not args.no_gradient)
            (out_dir / "realization.json").write_text(
                json.dumps({"y": y, **result}, indent=2, sort_keys=True) + "\n"
            )
            print(f"q = {result['q']!r}")
        else:
            result = client.uq_dataset(
                args.dim, args.count, args.grid_n, 100.0, args.seed, args.tol
            )
            samples = result["dataset"]["samples"]
            d = result["dataset"]["d"]
            header = (
                [f"x_{j+1}" for j in range(d)] + ["y"] + [f"g_{j+1}" for j in range(d)]
            )
            lines = [",".join(header)]
            for srow in samples:
                cells = [repr(float(v)) for v in srow["x"]] + [repr(float(srow["y"]))]
                g = srow.get("y_grad")
                cells += [repr(float(v)) for v in g] if g else [""] * d
                lines.append(",".join(cells))
            (out_dir / "realizations.csv").write_text("\n".join(lines) + "\n")
            (out_dir / "pde_meta.json").write_text(
                json.dumps(result["meta"], indent=2, sort_keys=True) + "\n"
            )
            print(f"wrote {len(samples)} realizations to {out_dir}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("gradnet.service.app:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradnet")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON experiment config file")
        p.add_argument("--seed", type=int, help="replace the replication seeds with one seed")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--server", help="service URL (default: run in-process)")
        p.add_argument("--target")
        p.add_argument("--dim", type=int)
        p.add_argument("--samples", help="comma-separated sample counts")
        p.add_argument("--enhancements", help="comma-separated enhancement percents")
        p.add_argument("--n-test", dest="n_test", type=int)
        p.add_argument("--width", type=int)
        p.add_argument("--epochs", type=int)
        p.add_argument("--beta", type=float)
        p.add_argument("--lr0", type=float)

    p_approx = sub.add_parser("approx", help="function approximation sweep")
    common(p_approx)

    p_uq = sub.add_parser("uq", help="PDE uncertainty quantification sweep")
    common(p_uq)
    p_uq.add_argument("--grid-n", dest="grid_n", type=int)

    p_theory = sub.add_parser("theory", help="bound-check battery")
    p_theory.add_argument("--config", help="JSON config with a theory_checks list")
    p_theory.add_argument("--out", default="out", help="output directory")
    p_theory.add_argument("--server", help="service URL (default: run in-process)")

    p_pde = sub.add_parser("solve-pde", help="single realizations of the elliptic problem")
    p_pde.add_argument("--y", help="comma-separated random vector in [-1,1]^d")
    p_pde.add_argument("--dim", type=int, default=5)
    p_pde.add_argument("--count", type=int, default=1, help="number of sampled realizations")
    p_pde.add_argument("--seed", type=int, default=0)
    p_pde.add_argument("--grid-n", dest="grid_n", type=int, default=63)
    p_pde.add_argument("--tol", type=float, default=1e-10)
    p_pde.add_argument("--no-gradient", action="store_true")
    p_pde.add_argument("--out", default="out")
    p_pde.add_argument("--server")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "approx":
        return _cmd_experiment(args, "function-approx")
    if args.command == "uq":
        return _cmd_experiment(args, "pde-uq")
    if args.command == "theory":
        return _cmd_experiment(args, "theory-check")
    if args.command == "solve-pde":
        return _cmd_solve_pde(args)
    if args.command == "serve":
        return _cmd_serve(args)
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())

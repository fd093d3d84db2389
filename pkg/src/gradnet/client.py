"""Thin HTTP client for the service.

Given a base URL it talks to a running server; without one it mounts the
FastAPI app in-process, so CLI runs need no server while still exercising the
full request/response path (validation included).
"""

from __future__ import annotations

from typing import Optional

import httpx


class ServiceError(RuntimeError):
    def __init__(self, status_code: int, detail):
        super().__init__(f"service returned {status_code}: {detail}")
        self.status_code = status_code
        self.detail = detail


class ServiceClient:
    def __init__(self, base_url: Optional[str] = None, timeout: Optional[float] = None):
        if base_url is None:
            from fastapi.testclient import TestClient

            from .service.app import app

            self._client = TestClient(app)
        else:
            self._client = httpx.Client(base_url=base_url, timeout=timeout)

    def close(self):
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _request(self, method: str, path: str, payload: Optional[dict] = None) -> dict:
        resp = self._client.request(method, path, json=payload)
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            raise ServiceError(resp.status_code, detail)
        return resp.json()

    def get(self, path: str) -> dict:
        return self._request("GET", path)

    def post(self, path: str, payload: dict) -> dict:
        return self._request("POST", path, payload)

    # -- convenience wrappers over the endpoints the CLI uses ----------------

    def health(self) -> dict:
        return self.get("/health")

    def run_experiment(self, config: dict) -> dict:
        return self.post("/experiments/run", {"config": config})

    def solve_pde(self, y, grid_n: int = 63, tol: float = 1e-10,
                  with_gradient: bool = True) -> dict:
        return self.post(
            "/pde/solve",
            {"y": list(y), "grid_n": grid_n, "tol": tol, "with_gradient": with_gradient},
        )

    def uq_dataset(self, dim: int, n: int, grid_n: int = 63, percent: float = 100.0,
                   seed: int = 0, tol: float = 1e-10) -> dict:
        return self.post(
            "/datasets/uq",
            {"dim": dim, "n": n, "grid_n": grid_n, "percent": percent,
             "seed": seed, "tol": tol},
        )

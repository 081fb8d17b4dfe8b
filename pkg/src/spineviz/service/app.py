"""HTTP service: datasets, scenes, meshes, kinematics, and simulator runs.

Every response for identical inputs is byte-identical: scenes are serialized
once through the canonical scene codec and returned verbatim, and the dataset
cache holds immutable objects. Dataset loads are single-flight per id so a
burst of first requests parses a dataset directory exactly once.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from ..dataset.manifest import (
    MANIFEST_NAME,
    SimulationDataset,
    load_dataset,
    write_dataset,
)
from ..dataset.matrices import Attribute
from ..dataset.structures import StructureKind
from ..errors import (
    DivergenceError,
    FormatError,
    ParameterError,
    QueryError,
    SpinevizError,
)
from ..layout.charts import ViewConfig
from ..exporter.scene import scene_json
from ..simkernel.model import (
    load_model,
    load_scenario,
    model_from_json,
    scenario_from_json,
)
from ..simkernel.run import run as run_simulation

DEFAULT_DATA_DIR_ENV = "SPINEVIZ_DATA_DIR"


def default_data_dir() -> Path:
    return Path(os.environ.get(DEFAULT_DATA_DIR_ENV, "datasets"))


class ServerState:
    """Immutable dataset cache plus the directory it mirrors."""

    def __init__(self, data_dir: str | Path | None = None):
        self.data_dir = Path(data_dir) if data_dir is not None else default_data_dir()
        self._cache: dict[str, SimulationDataset] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def dataset_ids(self) -> list[str]:
        if not self.data_dir.is_dir():
            return []
        return sorted(
            p.name for p in self.data_dir.iterdir() if (p / MANIFEST_NAME).is_file()
        )

    def _lock_for(self, dataset_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(dataset_id, threading.Lock())

    def load(self, dataset_id: str) -> SimulationDataset:
        cached = self._cache.get(dataset_id)
        if cached is not None:
            return cached
        with self._lock_for(dataset_id):
            cached = self._cache.get(dataset_id)
            if cached is not None:
                return cached
            directory = self.data_dir / dataset_id
            if not (directory / MANIFEST_NAME).is_file():
                raise QueryError(f"unknown dataset {dataset_id!r}")
            dataset = load_dataset(directory)
            self._cache[dataset_id] = dataset
            return dataset

    def store(self, dataset: SimulationDataset) -> str:
        dataset_id = dataset.manifest.id
        with self._lock_for(dataset_id):
            write_dataset(dataset, self.data_dir / dataset_id)
            self._cache[dataset_id] = dataset
        return dataset_id


def _parse_kinds(raw: str) -> tuple[StructureKind, ...]:
    kinds = []
    for token in raw.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            kinds.append(StructureKind(token))
        except ValueError:
            raise ParameterError(f"unknown structure kind {token!r}") from None
    if not kinds:
        raise ParameterError("kinds must name at least one structure kind")
    return tuple(kinds)


def _parse_attribute(raw: str) -> Attribute:
    try:
        return Attribute(raw)
    except ValueError:
        raise ParameterError(f"unknown attribute {raw!r}") from None


def create_app(state: ServerState | None = None) -> FastAPI:
    state = state if state is not None else ServerState()
    app = FastAPI(title="spineviz", docs_url=None, redoc_url=None)
    app.state.server = state

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc.errors())})

    @app.exception_handler(QueryError)
    async def not_found(request: Request, exc: QueryError):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(DivergenceError)
    async def diverged(request: Request, exc: DivergenceError):
        return JSONResponse(
            status_code=422,
            content={
                "detail": str(exc),
                "body": exc.body_id,
                "time": exc.time_s,
            },
        )

    @app.exception_handler(ParameterError)
    @app.exception_handler(FormatError)
    async def bad_request(request: Request, exc: SpinevizError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/datasets")
    def list_datasets():
        return JSONResponse(content=state.dataset_ids())

    @app.get("/datasets/{dataset_id}/manifest")
    def get_manifest(dataset_id: str):
        dataset = state.load(dataset_id)
        return Response(
            content=dataset.manifest.to_json(), media_type="application/json"
        )

    @app.get("/datasets/{dataset_id}/scene")
    def get_scene(
        dataset_id: str,
        mode: str = "charts2d",
        t: float = 0.0,
        spacing: float = 0.0,
        bins: int = 0,
        attr: str = "force_magnitude",
        compare: str | None = None,
        kinds: str = "disc",
    ):
        dataset = state.load(dataset_id)
        config = ViewConfig(
            mode=mode,
            spacing=spacing,
            t=t,
            attribute=_parse_attribute(attr),
            bins=bins,
            compare=compare,
            kinds=_parse_kinds(kinds),
        )
        compare_ids = [c for c in (compare.split(",") if compare else []) if c]
        compare_ds = state.load(compare_ids[0]) if compare_ids else None
        ensemble = [state.load(c) for c in compare_ids] if mode == "simplified" else None
        body = scene_json(dataset, config, compare=compare_ds, ensemble=ensemble)
        return Response(content=body, media_type="application/json")

    @app.get("/datasets/{dataset_id}/mesh/{structure}")
    def get_mesh(dataset_id: str, structure: str):
        dataset = state.load(dataset_id)
        mesh = dataset.meshes.get(structure)
        if mesh is None:
            raise QueryError(f"dataset has no mesh for structure {structure!r}")
        body = json.dumps(
            {
                "structure": structure,
                "vertices": np.asarray(mesh.vertices, dtype=float).tolist(),
                "triangles": np.asarray(mesh.triangles, dtype=int).tolist(),
            },
            separators=(",", ":"),
        )
        return Response(content=body, media_type="application/json")

    @app.get("/datasets/{dataset_id}/kinematics")
    def get_kinematics(dataset_id: str):
        dataset = state.load(dataset_id)
        kin = dataset.kinematics
        body = json.dumps(
            {
                "times": kin.times.tolist(),
                "bodies": list(kin.bodies),
                "quaternions": kin.quaternions.tolist(),
                "translations": kin.translations.tolist(),
            },
            separators=(",", ":"),
        )
        return Response(content=body, media_type="application/json")

    @app.post("/simulate")
    def simulate(body: dict):
        if not isinstance(body, dict):
            raise ParameterError("request body must be an object")
        model_spec = body.get("model", "cervical_default")
        scenario_spec = body.get("scenario", "static_hold")
        model = (
            load_model(model_spec)
            if isinstance(model_spec, str)
            else model_from_json(json.dumps(model_spec))
        )
        scenario = (
            load_scenario(scenario_spec)
            if isinstance(scenario_spec, str)
            else scenario_from_json(json.dumps(scenario_spec))
        )
        dataset = run_simulation(model, scenario)
        dataset_id = state.store(dataset)
        return JSONResponse(content={"id": dataset_id})

    return app

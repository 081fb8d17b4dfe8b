"""Drive a scenario and package the result as a loadable dataset."""

from __future__ import annotations

import hashlib
from typing import Iterator

import numpy as np

from ..dataset.kinematics import KinematicsTrack
from ..dataset.manifest import DatasetManifest, SimulationDataset
from ..dataset.matrices import Attribute, ValueMatrix
from ..dataset.structures import build_registry
from ..errors import ParameterError
from .integrate import CompiledModel, ForceSnapshot, SimState, _advance, evaluate_forces, rest_state
from .meshgen import disc_mesh, vertebra_mesh
from .model import Scenario, SpineModel, apply_degeneration, model_to_json, scenario_to_json


def _steps_per_tick(scenario: Scenario) -> int:
    ratio = scenario.tick / scenario.internal_dt
    steps = round(ratio)
    if steps < 1 or abs(ratio - steps) > 1e-6 * max(1.0, ratio):
        raise ParameterError("tick must be a whole multiple of internal_dt")
    return steps


def iterate_ticks(
    model: SpineModel, scenario: Scenario
) -> Iterator[tuple[float, SimState, ForceSnapshot]]:
    """Yield (time, state, force snapshot) at every output tick, t=0 first."""
    if scenario.degeneration:
        model = apply_degeneration(model, scenario.degeneration)
    compiled = CompiledModel(model)
    steps = _steps_per_tick(scenario)
    n_ticks = round(scenario.duration / scenario.tick)
    dt = scenario.internal_dt
    state = rest_state(model)
    gravity = scenario.gravity

    for tick in range(n_ticks + 1):
        t = tick * scenario.tick
        yield t, state, evaluate_forces(compiled, state, gravity, scenario.force_at(t))
        if tick == n_ticks:
            break
        for sub in range(steps):
            t_sub = t + sub * dt
            state = _advance(compiled, state, dt, gravity, scenario.force_at(t_sub), t_sub)


def dataset_id(model: SpineModel, scenario: Scenario) -> str:
    digest = hashlib.sha256(
        (model_to_json(model) + scenario_to_json(scenario)).encode()
    ).hexdigest()
    return f"sim-{digest[:12]}"


def run(model: SpineModel, scenario: Scenario) -> SimulationDataset:
    """Simulate and assemble the in-memory dataset (matrices, kinematics, meshes)."""
    disc_joints = [j for j in model.joints if j.disc]
    disc_ids = [j.id for j in disc_joints]
    disc_mask = np.array([j.disc for j in model.joints], dtype=bool)
    facet_ids = [f.id for f in model.facets]
    body_ids = [b.id for b in model.bodies]

    times = []
    magnitude_rows = []
    vector_rows = []
    deformation_rows = []
    quat_rows = []
    trans_rows = []
    for t, state, snap in iterate_ticks(model, scenario):
        times.append(t)
        disc_vec = snap.joint_forces[disc_mask]
        disc_mag = np.linalg.norm(disc_vec, axis=1)
        magnitude_rows.append(np.concatenate([disc_mag, snap.facet_forces]))
        vector_rows.append(disc_vec)
        deformation_rows.append(snap.joint_deformations[disc_mask])
        quat_rows.append(state.orientations.copy())
        trans_rows.append(state.positions.copy())

    times = np.array(times)
    matrices = {
        Attribute.FORCE_MAGNITUDE: ValueMatrix(
            Attribute.FORCE_MAGNITUDE,
            times,
            tuple(disc_ids + facet_ids),
            np.array(magnitude_rows),
        ),
        Attribute.FORCE_VECTOR: ValueMatrix(
            Attribute.FORCE_VECTOR, times, tuple(disc_ids), np.array(vector_rows)
        ),
        Attribute.DEFORMATION: ValueMatrix(
            Attribute.DEFORMATION, times, tuple(disc_ids), np.array(deformation_rows)
        ),
    }
    kinematics = KinematicsTrack(
        times, tuple(body_ids), np.array(quat_rows), np.array(trans_rows)
    )

    meshes = {b.id: vertebra_mesh(b.position, b.id) for b in model.bodies}
    for joint in disc_joints:
        meshes[joint.id] = disc_mesh(model.joint_midpoint(joint), joint.id)

    manifest = DatasetManifest(
        id=dataset_id(model, scenario),
        span=model.span,
        dt=scenario.tick,
        matrices={a.value: f"{a.value}.csv" for a in matrices},
        kinematics="kinematics.csv",
        meshes={sid: f"meshes/{sid}.obj" for sid in meshes},
        compare=None,
    )
    registry = build_registry(model.span, set(meshes))
    return SimulationDataset(manifest, registry, matrices, kinematics, meshes)

"""Shared fixtures. Simulation runs are session-scoped: they are deterministic
and reasonably slow, so every module reuses the same handful of datasets."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from spineviz.dataset.manifest import SimulationDataset, load_dataset, write_dataset
from spineviz.dataset.matrices import Attribute, ValueMatrix
from spineviz.simkernel.model import load_model, load_scenario
from spineviz.simkernel.run import run as run_simulation


@pytest.fixture(scope="session")
def model():
    return load_model("cervical_default")


@pytest.fixture(scope="session")
def static_scenario():
    return load_scenario("static_hold")


@pytest.fixture(scope="session")
def bend_scenario():
    return load_scenario("lateral_bend")


@pytest.fixture(scope="session")
def static_dataset(model, static_scenario) -> SimulationDataset:
    return run_simulation(model, static_scenario)


@pytest.fixture(scope="session")
def bend_dataset(model, bend_scenario) -> SimulationDataset:
    return run_simulation(model, bend_scenario)


@pytest.fixture(scope="session")
def short_dataset(model, static_scenario) -> SimulationDataset:
    return run_simulation(model, dataclasses.replace(static_scenario, duration=0.4))


def drop_column(matrix: ValueMatrix, column: str) -> ValueMatrix:
    keep = [i for i, c in enumerate(matrix.columns) if c != column]
    return ValueMatrix(
        matrix.attribute,
        matrix.times,
        tuple(matrix.columns[i] for i in keep),
        matrix.values[:, keep],
    )


REMOVED_FACET = "C3C4_facetL"


@pytest.fixture(scope="session")
def missing_facet_dir(tmp_path_factory, short_dataset):
    """The one-facet-removed fixture: force magnitudes for C3C4's left facet
    are stripped from an otherwise complete dataset."""
    matrices = dict(short_dataset.matrices)
    matrices[Attribute.FORCE_MAGNITUDE] = drop_column(
        matrices[Attribute.FORCE_MAGNITUDE], REMOVED_FACET
    )
    manifest = dataclasses.replace(short_dataset.manifest, id="missing-facet")
    broken = SimulationDataset(
        manifest=manifest,
        registry=short_dataset.registry,
        matrices=matrices,
        kinematics=short_dataset.kinematics,
        meshes=short_dataset.meshes,
    )
    root = tmp_path_factory.mktemp("fixture") / "missing-facet"
    write_dataset(broken, root)
    return root


@pytest.fixture(scope="session")
def missing_facet_dataset(missing_facet_dir) -> SimulationDataset:
    return load_dataset(missing_facet_dir)


@pytest.fixture(scope="session")
def degeneration_datasets(model, bend_scenario):
    """Degree 1..5 sweep under the lateral-bend scenario."""
    disc_ids = [j.id for j in model.joints if j.disc]
    out = []
    for degree in range(1, 6):
        scenario = dataclasses.replace(
            bend_scenario, degeneration={d: degree for d in disc_ids}
        )
        out.append(run_simulation(model, scenario))
    return out

"""HTTP service and CLI behaviour.

The wire contract matters more than the internals here: responses for
identical requests must be byte-identical, parameter problems must map to
400, unknown names to 404, diverging scenarios to 422, and the CLI must
exit 0/1/2/3 for success / runtime failure / usage error / missing dataset.
"""

from __future__ import annotations

import dataclasses
import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from spineviz.dataset.manifest import MANIFEST_NAME, load_dataset, write_dataset
from spineviz.errors import QueryError
from spineviz.exporter.scene import scene_json
from spineviz.layout.charts import ViewConfig
from spineviz.layout.colormap import bin_color
from spineviz.service import cli
from spineviz.service.app import (
    DEFAULT_DATA_DIR_ENV,
    ServerState,
    create_app,
    default_data_dir,
)
from spineviz.simkernel.run import dataset_id

TWIN_ID = "short-twin"

# Fast inline scenarios for the simulate endpoint / CLI: a fraction of a
# second of simulated time keeps the round trip well under a second.
QUICK_SCENARIO = {
    "duration": 0.2,
    "tick": 0.05,
    "internal_dt": 0.001,
    "gravity": [0.0, -9810.0, 0.0],
}
# internal_dt far above the stable step: the state grows past the sanity
# bound a bit over a second in.
DIVERGING_SCENARIO = {
    "duration": 1.5,
    "tick": 0.1,
    "internal_dt": 0.1,
    "gravity": [0.0, -9810.0, 0.0],
}


@pytest.fixture(scope="session")
def service_dir(tmp_path_factory, short_dataset):
    root = tmp_path_factory.mktemp("service")
    write_dataset(short_dataset, root / short_dataset.manifest.id)
    twin = dataclasses.replace(
        short_dataset,
        manifest=dataclasses.replace(short_dataset.manifest, id=TWIN_ID),
    )
    write_dataset(twin, root / TWIN_ID)
    (root / "not-a-dataset").mkdir()  # no manifest: must never be listed
    return root


@pytest.fixture(scope="session")
def short_id(short_dataset):
    return short_dataset.manifest.id


@pytest.fixture(scope="session")
def server_state(service_dir):
    return ServerState(service_dir)


@pytest.fixture(scope="session")
def client(server_state):
    return TestClient(create_app(server_state))


class TestServerState:
    def test_ids_are_sorted_and_skip_non_datasets(self, server_state, short_id):
        ids = server_state.dataset_ids()
        assert short_id in ids and TWIN_ID in ids
        assert "not-a-dataset" not in ids
        assert ids == sorted(ids)

    def test_empty_dir_and_missing_dir(self, tmp_path):
        assert ServerState(tmp_path).dataset_ids() == []
        assert ServerState(tmp_path / "nowhere").dataset_ids() == []

    def test_load_caches_and_rejects_unknown(self, service_dir, short_id):
        state = ServerState(service_dir)
        first = state.load(short_id)
        assert state.load(short_id) is first
        with pytest.raises(QueryError):
            state.load("no-such-id")

    def test_store_writes_and_primes_cache(self, tmp_path, short_dataset):
        state = ServerState(tmp_path)
        returned = state.store(short_dataset)
        assert returned == short_dataset.manifest.id
        assert (tmp_path / returned / MANIFEST_NAME).is_file()
        assert state.load(returned) is short_dataset

    def test_data_dir_env_default(self, monkeypatch, service_dir):
        monkeypatch.setenv(DEFAULT_DATA_DIR_ENV, str(service_dir))
        assert default_data_dir() == service_dir
        assert TWIN_ID in ServerState().dataset_ids()
        monkeypatch.delenv(DEFAULT_DATA_DIR_ENV)
        assert str(default_data_dir()) == "datasets"


class TestDatasetEndpoints:
    def test_list_datasets(self, client, short_id):
        r = client.get("/datasets")
        assert r.status_code == 200
        assert r.json() == sorted([short_id, TWIN_ID])

    def test_manifest_roundtrip(self, client, short_dataset, short_id):
        r = client.get(f"/datasets/{short_id}/manifest")
        assert r.status_code == 200
        assert r.content == short_dataset.manifest.to_json().encode("utf-8")
        assert r.json()["id"] == short_id

    def test_mesh_payload(self, client, short_dataset, short_id):
        for structure in ("C4", "C2C3"):
            r = client.get(f"/datasets/{short_id}/mesh/{structure}")
            assert r.status_code == 200
            body = r.json()
            mesh = short_dataset.meshes[structure]
            assert body["structure"] == structure
            assert np.array_equal(body["vertices"], mesh.vertices)
            assert np.array_equal(body["triangles"], mesh.triangles)

    def test_kinematics_is_the_full_track(self, client, short_dataset, short_id):
        r = client.get(f"/datasets/{short_id}/kinematics")
        assert r.status_code == 200
        body = r.json()
        kin = short_dataset.kinematics
        assert body["bodies"] == list(kin.bodies)
        assert np.array_equal(body["times"], kin.times)
        assert np.array_equal(body["quaternions"], kin.quaternions)
        assert np.array_equal(body["translations"], kin.translations)


class TestSceneEndpoint:
    def test_defaults_match_direct_serialization(self, client, short_dataset, short_id):
        r = client.get(f"/datasets/{short_id}/scene")
        assert r.status_code == 200
        assert r.content == scene_json(short_dataset, ViewConfig()).encode("utf-8")

    def test_repeat_requests_are_byte_identical(self, client, short_id):
        url = f"/datasets/{short_id}/scene"
        params = {"t": 0.2, "spacing": 0.3, "kinds": "disc,facet_left,facet_right"}
        first = client.get(url, params=params)
        second = client.get(url, params=params)
        assert first.status_code == second.status_code == 200
        assert first.content == second.content

    def test_parameters_reach_the_layout(self, client, short_dataset, short_id):
        r = client.get(
            f"/datasets/{short_id}/scene",
            params={
                "mode": "simplified",
                "bins": 4,
                "attr": "deformation",
                "spacing": 0.5,
                "t": 0.1,
            },
        )
        assert r.status_code == 200
        config = ViewConfig(
            mode="simplified",
            bins=4,
            attribute="deformation",
            spacing=0.5,
            t=0.1,
            kinds=("disc",),
        )
        assert r.content == scene_json(short_dataset, config).encode("utf-8")

    def test_simplified_bins_show_up_in_strips(self, client, short_id):
        def cell_fills(bins):
            r = client.get(
                f"/datasets/{short_id}/scene",
                params={"mode": "simplified", "bins": bins},
            )
            assert r.status_code == 200
            doc = json.loads(r.content)
            return {
                tuple(p["fill"])
                for p in doc["primitives"]
                if p["layer"] == "strip-cell"
            }

        for bins in (2, 4):
            palette = {bin_color(i, bins) for i in range(bins)}
            fills = cell_fills(bins)
            assert fills  # strips must exist at all
            assert fills <= palette

    def test_compare_becomes_overlay(self, client, server_state, short_dataset, short_id):
        r = client.get(f"/datasets/{short_id}/scene", params={"compare": TWIN_ID})
        assert r.status_code == 200
        config = ViewConfig(compare=TWIN_ID)
        twin = server_state.load(TWIN_ID)
        assert r.content == scene_json(short_dataset, config, compare=twin).encode("utf-8")
        doc = json.loads(r.content)
        assert any(p["layer"] == "overlay-area" for p in doc["primitives"])

    def test_compare_list_feeds_simplified_ensemble(
        self, client, server_state, short_dataset, short_id
    ):
        compare = f"{TWIN_ID},{short_id}"
        r = client.get(
            f"/datasets/{short_id}/scene",
            params={"mode": "simplified", "compare": compare},
        )
        assert r.status_code == 200
        twin = server_state.load(TWIN_ID)
        config = ViewConfig(mode="simplified", compare=compare)
        expected = scene_json(
            short_dataset, config, compare=twin, ensemble=[twin, short_dataset]
        )
        assert r.content == expected.encode("utf-8")


class TestErrorMapping:
    def test_unknown_dataset_is_404(self, client):
        for url in (
            "/datasets/ghost/manifest",
            "/datasets/ghost/scene",
            "/datasets/ghost/kinematics",
            "/datasets/ghost/mesh/C4",
        ):
            r = client.get(url)
            assert r.status_code == 404, url
            assert "ghost" in r.json()["detail"]

    def test_unknown_structure_is_404(self, client, short_id):
        r = client.get(f"/datasets/{short_id}/mesh/C99")
        assert r.status_code == 404
        assert "C99" in r.json()["detail"]

    def test_unknown_compare_is_404(self, client, short_id):
        r = client.get(f"/datasets/{short_id}/scene", params={"compare": "ghost"})
        assert r.status_code == 404

    @pytest.mark.parametrize(
        "params",
        [
            {"t": "not-a-number"},
            {"bins": "many"},
            {"bins": 1},
            {"bins": 99},
            {"attr": "wavelength"},
            {"kinds": "tendon"},
            {"kinds": ""},
            {"kinds": "vertebra"},
            {"mode": "hologram"},
        ],
        ids=lambda p: "=".join(map(str, next(iter(p.items())))),
    )
    def test_bad_query_parameters_are_400(self, client, short_id, params):
        r = client.get(f"/datasets/{short_id}/scene", params=params)
        assert r.status_code == 400
        assert r.json()["detail"]


class TestSimulateEndpoint:
    def test_inline_scenario_runs_and_persists(self, client, service_dir):
        body = {"model": "cervical_default", "scenario": QUICK_SCENARIO}
        r = client.post("/simulate", json=body)
        assert r.status_code == 200
        new_id = r.json()["id"]
        assert new_id.startswith("sim-")
        assert (service_dir / new_id / MANIFEST_NAME).is_file()
        assert new_id in client.get("/datasets").json()
        scene = client.get(f"/datasets/{new_id}/scene")
        assert scene.status_code == 200
        # Same inputs, same id: the run is deterministic end to end.
        again = client.post("/simulate", json=body)
        assert again.status_code == 200 and again.json()["id"] == new_id

    def test_bundled_static_run_has_expected_census(
        self, client, server_state, model, static_scenario
    ):
        r = client.post(
            "/simulate", json={"model": "cervical_default", "scenario": "static_hold"}
        )
        assert r.status_code == 200
        new_id = r.json()["id"]
        assert new_id == dataset_id(model, static_scenario)
        counts: dict = {}
        for ref in server_state.load(new_id).registry.structures.values():
            counts[ref.kind.value] = counts.get(ref.kind.value, 0) + 1
        assert counts["vertebra"] == 10
        assert counts["disc"] == 8
        assert counts["facet_left"] == 9
        assert counts["facet_right"] == 9

    def test_diverging_scenario_is_422_with_detail(self, client):
        r = client.post(
            "/simulate",
            json={"model": "cervical_default", "scenario": DIVERGING_SCENARIO},
        )
        assert r.status_code == 422
        body = r.json()
        assert body["body"] == "C1"
        assert 0.0 < body["time"] <= DIVERGING_SCENARIO["duration"]
        assert body["detail"]

    def test_unknown_bundled_names_are_400(self, client):
        r = client.post("/simulate", json={"model": "lumbar_supreme"})
        assert r.status_code == 400
        r = client.post("/simulate", json={"scenario": "moon_gravity"})
        assert r.status_code == 400

    def test_non_object_body_is_400(self, client):
        r = client.post("/simulate", json=["not", "an", "object"])
        assert r.status_code == 400


def run_cli(argv):
    return cli.main([str(a) for a in argv])


class TestCliExport:
    @pytest.mark.parametrize("view", ["charts", "facets", "simplified", "glyphs"])
    def test_each_view_writes_svg(self, view, tmp_path, service_dir, short_id):
        out = tmp_path / f"{view}.svg"
        code = run_cli(
            ["export", "--dataset", short_id, "--data-dir", service_dir,
             "--view", view, "--t", 0.2, "--out", out]
        )
        assert code == 0
        data = out.read_bytes()
        assert data.startswith(b"<?xml") and data.endswith(b"</svg>\n")

    def test_dataset_accepts_a_direct_path(self, tmp_path, service_dir, short_id):
        out = tmp_path / "direct.svg"
        code = run_cli(
            ["export", "--dataset", service_dir / short_id, "--out", out]
        )
        assert code == 0 and out.is_file()

    def test_out_of_range_cursor_is_clamped(self, tmp_path, service_dir, short_id):
        out = tmp_path / "late.svg"
        code = run_cli(
            ["export", "--dataset", short_id, "--data-dir", service_dir,
             "--t", 999, "--out", out]
        )
        assert code == 0 and out.is_file()

    def test_compare_flag(self, tmp_path, service_dir, short_id):
        out = tmp_path / "compare.svg"
        code = run_cli(
            ["export", "--dataset", short_id, "--data-dir", service_dir,
             "--compare", TWIN_ID, "--out", out]
        )
        assert code == 0
        assert b"overlay" not in out.read_bytes()  # layer names stay internal
        assert out.stat().st_size > 0

    def test_missing_dataset_exits_3(self, tmp_path, service_dir, capsys):
        code = run_cli(
            ["export", "--dataset", "ghost", "--data-dir", service_dir,
             "--out", tmp_path / "ghost.svg"]
        )
        assert code == 3
        assert "ghost" in capsys.readouterr().err

    def test_missing_compare_exits_3(self, tmp_path, service_dir, short_id):
        code = run_cli(
            ["export", "--dataset", short_id, "--data-dir", service_dir,
             "--compare", "ghost", "--out", tmp_path / "x.svg"]
        )
        assert code == 3


class TestCliUsage:
    def test_unknown_flag_exits_2(self, service_dir):
        with pytest.raises(SystemExit) as exc:
            run_cli(["export", "--dataset", "x", "--out", "y", "--frobnicate"])
        assert exc.value.code == 2

    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            run_cli(["explode"])
        assert exc.value.code == 2

    def test_no_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            run_cli([])
        assert exc.value.code == 2

    def test_bad_view_choice_exits_2(self, service_dir, short_id):
        with pytest.raises(SystemExit) as exc:
            run_cli(["export", "--dataset", short_id, "--data-dir", service_dir,
                     "--view", "mosaic", "--out", "x.svg"])
        assert exc.value.code == 2


class TestCliValidate:
    def test_clean_dataset_exits_0(self, service_dir, short_id, capsys):
        code = run_cli(["validate", "--dataset", short_id, "--data-dir", service_dir])
        assert code == 0
        assert "no issues" in capsys.readouterr().out

    def test_missing_facet_exits_1_and_names_it(self, missing_facet_dir, capsys):
        code = run_cli(["validate", "--dataset", missing_facet_dir])
        assert code == 1
        out = capsys.readouterr().out
        assert "C3C4_facetL" in out
        assert "MISSING_COLUMN" in out

    def test_missing_dataset_exits_3(self, service_dir, capsys):
        code = run_cli(["validate", "--dataset", "ghost", "--data-dir", service_dir])
        assert code == 3
        assert "ghost" in capsys.readouterr().err


class TestCliSimulate:
    def test_scenario_file_runs_and_prints_id(self, tmp_path, capsys):
        scenario_path = tmp_path / "quick.json"
        scenario_path.write_text(json.dumps(QUICK_SCENARIO))
        out = tmp_path / "run"
        code = run_cli(["simulate", "--scenario", scenario_path, "--out", out])
        assert code == 0
        printed = capsys.readouterr().out.strip()
        assert (out / MANIFEST_NAME).is_file()
        assert load_dataset(out).manifest.id == printed

    def test_default_out_lands_in_data_dir(self, tmp_path, capsys):
        scenario_path = tmp_path / "quick.json"
        scenario_path.write_text(json.dumps(QUICK_SCENARIO))
        code = run_cli(
            ["simulate", "--scenario", scenario_path, "--data-dir", tmp_path / "store"]
        )
        assert code == 0
        printed = capsys.readouterr().out.strip()
        assert (tmp_path / "store" / printed / MANIFEST_NAME).is_file()

    def test_divergence_exits_1(self, tmp_path, capsys):
        scenario_path = tmp_path / "explode.json"
        scenario_path.write_text(json.dumps(DIVERGING_SCENARIO))
        code = run_cli(["simulate", "--scenario", scenario_path, "--out", tmp_path / "x"])
        assert code == 1
        assert "diverged" in capsys.readouterr().err

    def test_unknown_model_name_exits_1(self, tmp_path, capsys):
        code = run_cli(["simulate", "--model", "lumbar_supreme", "--out", tmp_path / "x"])
        assert code == 1
        assert "lumbar_supreme" in capsys.readouterr().err

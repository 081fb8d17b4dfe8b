"""Command line entry points: serve, export, simulate, validate.

Exit codes: 0 success, 1 runtime failure (validation issues, divergence),
2 usage errors (argparse), 3 dataset not found.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..dataset.manifest import MANIFEST_NAME, load_dataset, write_dataset
from ..dataset.matrices import Attribute
from ..dataset.structures import StructureKind
from ..dataset.validation import validate_dataset
from ..errors import DivergenceError, SpinevizError
from ..exporter.scene import build_scene, glyph_still_scene
from ..exporter.svg import export_svg
from ..layout.charts import ViewConfig, ViewMode
from ..simkernel.model import load_model, load_scenario
from ..simkernel.run import run as run_simulation
from .app import ServerState, create_app, default_data_dir

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_NOT_FOUND = 3

VIEWS = ("charts", "facets", "simplified", "glyphs")


def _add_data_dir(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--data-dir",
        default=None,
        help="dataset directory root (default: $SPINEVIZ_DATA_DIR or ./datasets)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spineviz",
        description="Spine-simulation exploration workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    _add_data_dir(serve)

    export = sub.add_parser("export", help="write an SVG still of a view")
    export.add_argument("--dataset", required=True, help="dataset id or directory")
    export.add_argument("--view", choices=VIEWS, default="charts")
    export.add_argument("--t", type=float, default=0.0)
    export.add_argument("--out", required=True)
    export.add_argument("--compare", default=None, help="reference dataset id(s), comma separated")
    export.add_argument("--bins", type=int, default=0)
    export.add_argument("--spacing", type=float, default=0.0)
    export.add_argument("--attr", default="force_magnitude")
    _add_data_dir(export)

    simulate = sub.add_parser("simulate", help="run the bundled simulator")
    simulate.add_argument("--model", default="cervical_default",
                          help="model file or bundled name")
    simulate.add_argument("--scenario", default="static_hold",
                          help="scenario file or bundled name")
    simulate.add_argument("--out", default=None,
                          help="output dataset directory (default: <data-dir>/<id>)")
    _add_data_dir(simulate)

    validate = sub.add_parser("validate", help="check a dataset for consistency")
    validate.add_argument("--dataset", required=True, help="dataset id or directory")
    _add_data_dir(validate)

    return parser


def _resolve_dataset_dir(spec: str, data_dir: Path) -> Path:
    direct = Path(spec)
    if (direct / MANIFEST_NAME).is_file():
        return direct
    candidate = data_dir / spec
    if (candidate / MANIFEST_NAME).is_file():
        return candidate
    raise FileNotFoundError(spec)


def _view_config(args: argparse.Namespace) -> ViewConfig:
    mode = ViewMode.SIMPLIFIED if args.view == "simplified" else ViewMode.CHARTS2D
    if args.view == "facets":
        kinds: tuple[StructureKind, ...] = (
            StructureKind.FACET_LEFT,
            StructureKind.FACET_RIGHT,
        )
    else:
        kinds = (StructureKind.DISC,)
    return ViewConfig(
        mode=mode,
        spacing=args.spacing,
        t=args.t,
        attribute=Attribute(args.attr),
        bins=args.bins,
        compare=args.compare,
        kinds=kinds,
    )


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    state = ServerState(args.data_dir)
    uvicorn.run(create_app(state), host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def _cmd_export(args: argparse.Namespace) -> int:
    data_dir = Path(args.data_dir) if args.data_dir else default_data_dir()
    try:
        dataset = load_dataset(_resolve_dataset_dir(args.dataset, data_dir))
    except FileNotFoundError:
        print(f"dataset not found: {args.dataset}", file=sys.stderr)
        return EXIT_NOT_FOUND
    config = _view_config(args)

    compare_ids = [c for c in (args.compare.split(",") if args.compare else []) if c]
    compare_sets = []
    for cid in compare_ids:
        try:
            compare_sets.append(load_dataset(_resolve_dataset_dir(cid, data_dir)))
        except FileNotFoundError:
            print(f"dataset not found: {cid}", file=sys.stderr)
            return EXIT_NOT_FOUND

    if args.view == "glyphs":
        scene = glyph_still_scene(dataset, config)
    else:
        scene = build_scene(
            dataset,
            config,
            compare=compare_sets[0] if compare_sets else None,
            ensemble=compare_sets if config.mode is ViewMode.SIMPLIFIED else None,
        )
    Path(args.out).write_bytes(export_svg(scene))
    print(args.out)
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    scenario = load_scenario(args.scenario)
    try:
        dataset = run_simulation(model, scenario)
    except DivergenceError as exc:
        print(f"simulation diverged: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    data_dir = Path(args.data_dir) if args.data_dir else default_data_dir()
    out = Path(args.out) if args.out else data_dir / dataset.manifest.id
    write_dataset(dataset, out)
    print(dataset.manifest.id)
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    data_dir = Path(args.data_dir) if args.data_dir else default_data_dir()
    try:
        dataset = load_dataset(_resolve_dataset_dir(args.dataset, data_dir))
    except FileNotFoundError:
        print(f"dataset not found: {args.dataset}", file=sys.stderr)
        return EXIT_NOT_FOUND
    report = validate_dataset(dataset)
    print(report.format())
    return EXIT_OK if report.clean else EXIT_FAILURE


_COMMANDS = {
    "serve": _cmd_serve,
    "export": _cmd_export,
    "simulate": _cmd_simulate,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SpinevizError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

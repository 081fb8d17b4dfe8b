"""Scene assembly: one serializable description per (dataset, view config).

A scene bundles everything a renderer needs — 2D draw primitives in a fixed
z-order, the time cursor, rigid transforms for the animation window, and the
force glyphs at the selected tick — so SVG export and the browser UI share a
single source of geometric truth. The schema is versioned and documented in
docs/scene_schema.md.

Primitive z-order (background to foreground):
  background, gridline, spine-outline, chart-frame, chart-area,
  overlay-area, chart-line, overlay-line, strip-cell, cursor-line,
  cursor-label
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ..dataset.manifest import SimulationDataset
from ..dataset.matrices import Attribute
from ..dataset.structures import StructureKind
from ..errors import FormatError
from ..geometry import as_rotation_matrix, barycenter, mean_radius, to_local_force
from ..glyphs import GlyphConfig, build_glyph, disc_axis, shear_angle, trajectory_surface
from ..layout.charts import (
    Chart,
    ChartLayout,
    Cursor,
    SIDE_LEFT,
    ViewConfig,
    ViewMode,
    _world_anchor,
    layout_charts,
    simplified_strips,
    time_cursor,
)

SCHEMA_VERSION = 1

GRAY = [0.62, 0.62, 0.62]
BLACK = [0.0, 0.0, 0.0]
WHITE = [1.0, 1.0, 1.0]
BONE = [0.93, 0.91, 0.86]
OUTLINE = [0.35, 0.35, 0.35]

Z_ORDER = (
    "background",
    "gridline",
    "spine-outline",
    "chart-frame",
    "chart-area",
    "overlay-area",
    "chart-line",
    "overlay-line",
    "strip-cell",
    "glyph-trajectory",
    "glyph-plane",
    "glyph-isoline",
    "glyph-arrow",
    "cursor-line",
    "cursor-label",
)


def _plain(value):
    """Normalize to JSON-native types so scene equality and round-trips hold."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    return value


@dataclass(frozen=True)
class SceneDescription:
    dataset: str
    mode: str
    canvas: list
    config: dict
    attributes: list
    time_range: list
    times: list
    value_range: list
    cursor: dict
    primitives: list
    payload3d: dict
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        body = {
            "schema_version": self.schema_version,
            "dataset": self.dataset,
            "mode": self.mode,
            "canvas": self.canvas,
            "config": self.config,
            "attributes": self.attributes,
            "time_range": self.time_range,
            "times": self.times,
            "value_range": self.value_range,
            "cursor": self.cursor,
            "primitives": self.primitives,
            "payload3d": self.payload3d,
        }
        return json.dumps(body, separators=(",", ":"))

    @staticmethod
    def from_json(text: str) -> "SceneDescription":
        body = json.loads(text)
        try:
            return SceneDescription(
                dataset=body["dataset"],
                mode=body["mode"],
                canvas=body["canvas"],
                config=body["config"],
                attributes=body["attributes"],
                time_range=body["time_range"],
                times=body["times"],
                value_range=body["value_range"],
                cursor=body["cursor"],
                primitives=body["primitives"],
                payload3d=body["payload3d"],
                schema_version=body["schema_version"],
            )
        except KeyError as missing:
            raise FormatError(f"scene document lacks key {missing}") from None


def _polygon(layer, points, fill, stroke="none", stroke_width=0.0, opacity=1.0):
    return {
        "kind": "polygon",
        "layer": layer,
        "points": _plain(points),
        "fill": _plain(fill),
        "stroke": _plain(stroke),
        "stroke_width": float(stroke_width),
        "opacity": float(opacity),
    }


def _polyline(layer, points, stroke, stroke_width=1.0, opacity=1.0):
    return {
        "kind": "polyline",
        "layer": layer,
        "points": _plain(points),
        "stroke": _plain(stroke),
        "stroke_width": float(stroke_width),
        "opacity": float(opacity),
    }


def _label(layer, text, pos, anchor="start", size=10.0):
    return {
        "kind": "label",
        "layer": layer,
        "text": str(text),
        "pos": _plain(pos),
        "anchor": anchor,
        "size": float(size),
    }


def _rect_points(x0, y0, x1, y1):
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]


def _cell_edges_for(chart: Chart) -> list[float]:
    xs = chart.xs
    if len(xs) == 1:
        return [xs[0], xs[0] + 1.0]
    mids = [(a + b) / 2.0 for a, b in zip(xs, xs[1:])]
    return [xs[0], *mids, xs[-1]]


def _sample_runs(heights) -> list[tuple[int, int]]:
    """Contiguous index runs of present samples, inclusive bounds."""
    runs = []
    start = None
    for i, h in enumerate(heights):
        if math.isnan(h):
            if start is not None:
                runs.append((start, i - 1))
                start = None
        elif start is None:
            start = i
    if start is not None:
        runs.append((start, len(heights) - 1))
    return runs


def _slice_polygons(chart: Chart) -> list[dict]:
    """Per-sample colored slices under the chart polyline.

    Each present sample gets the vertical band between its neighboring cell
    midpoints, clipped to its run, with the band's top edge following the
    interpolated polyline. Keeping slices per-sample lets every tick carry its
    own colormap value inside one area chart.
    """
    edges = _cell_edges_for(chart)
    xs, hs = chart.xs, chart.heights
    base = chart.baseline_y
    out = []
    mirrored = len(xs) > 1 and xs[1] < xs[0]
    for start, end in _sample_runs(hs):
        for k in range(start, end + 1):
            left_x = xs[k] if k == start else edges[k]
            right_x = xs[k] if k == end else edges[k + 1]
            if k == start:
                left_h = hs[k]
            else:
                left_h = (hs[k - 1] + hs[k]) / 2.0
            if k == end:
                right_h = hs[k]
            else:
                right_h = (hs[k] + hs[k + 1]) / 2.0
            if mirrored:
                left_x, right_x = right_x, left_x
                left_h, right_h = right_h, left_h
            points = [
                [left_x, base],
                [left_x, base - left_h],
                [xs[k], base - hs[k]],
                [right_x, base - right_h],
                [right_x, base],
            ]
            deduped = [p for i, p in enumerate(points) if i == 0 or p != points[i - 1]]
            if len(deduped) < 3:
                continue
            color = chart.colors[k] if chart.colors[k] is not None else GRAY
            out.append(_polygon("chart-area", deduped, color))
    return out


def _overlay_primitives(chart: Chart) -> list[dict]:
    """Gray reference area over the primary, then the primary re-drawn as a
    line inside the spans the gray fully covers."""
    overlay = chart.overlay
    if overlay is None:
        return []
    base = chart.baseline_y
    prims = []
    pts = [
        (x, base - h)
        for x, h in zip(chart.xs, overlay.ref_heights)
        if not math.isnan(h)
    ]
    if pts:
        area = [[pts[0][0], base], *[[p[0], p[1]] for p in pts], [pts[-1][0], base]]
        prims.append(_polygon("overlay-area", area, GRAY, opacity=0.9))
    for start, end, mode in overlay.spans:
        if mode != "LINE" or end <= start:
            continue
        seg = [
            [chart.xs[k], base - chart.heights[k]]
            for k in range(start, end + 1)
            if not math.isnan(chart.heights[k])
        ]
        if len(seg) >= 2:
            prims.append(_polyline("overlay-line", seg, BLACK, 1.0))
    return prims


def _hatch_frame(chart: Chart) -> dict:
    x0, y0, x1, y1 = chart.frame
    return _polygon(
        "chart-frame", _rect_points(x0, y0, x1, y1), "hatch", stroke=OUTLINE, stroke_width=1.0
    )


def _chart_primitives(layout: ChartLayout) -> list[dict]:
    prims = []
    for chart in layout.charts:
        x0, y0, x1, y1 = chart.frame
        if chart.missing:
            prims.append(_hatch_frame(chart))
            continue
        prims.append(
            _polygon(
                "chart-frame",
                _rect_points(x0, y0, x1, y1),
                "none",
                stroke=OUTLINE,
                stroke_width=0.5,
            )
        )
    if layout.config.gridlines:
        lo, hi = layout.value_range
        for chart in layout.charts:
            if chart.missing:
                continue
            for frac in (0.25, 0.5, 0.75):
                y = chart.baseline_y - frac * (chart.frame[3] - chart.frame[1])
                prims.append(
                    _polyline(
                        "gridline",
                        [[chart.frame[0], y], [chart.frame[2], y]],
                        [0.85, 0.85, 0.85],
                        0.5,
                    )
                )
    for chart in layout.charts:
        if chart.missing:
            continue
        prims.extend(_slice_polygons(chart))
    for chart in layout.charts:
        prims.extend(_overlay_primitives(chart))
    for chart in layout.charts:
        if chart.missing:
            continue
        line = [[p[0], p[1]] for p in chart.sample_polyline()]
        if len(line) >= 2:
            prims.append(_polyline("chart-line", line, BLACK, 0.8))
    return prims


def _strip_primitives(layout: ChartLayout) -> list[dict]:
    prims = []
    for strip in layout.strips:
        y0, y1 = strip.frame[1], strip.frame[3]
        edges = strip.xs
        for k, color in enumerate(strip.colors):
            if color is None:
                continue
            a, b = edges[k], edges[k + 1]
            prims.append(
                _polygon("strip-cell", _rect_points(min(a, b), y0, max(a, b), y1), color)
            )
        prims.append(
            _polygon(
                "chart-frame",
                _rect_points(min(edges), y0, max(edges), y1),
                "none",
                stroke=OUTLINE,
                stroke_width=0.4,
            )
        )
    return prims


def _spine_primitives(layout: ChartLayout) -> list[dict]:
    prims = []
    for placement in layout.vertebrae:
        cx, cy = placement.center
        hx, hy = placement.half_size
        prims.append(
            _polygon(
                "spine-outline",
                _rect_points(cx - hx, cy - hy, cx + hx, cy + hy),
                BONE,
                stroke=OUTLINE,
                stroke_width=1.0,
            )
        )
    return prims


def _cursor_primitives(layout: ChartLayout, cursor: Cursor) -> list[dict]:
    prims = []
    has_left = any(c.side == SIDE_LEFT for c in layout.charts)
    prims.append(
        _polyline(
            "cursor-line",
            [[cursor.x_right, cursor.y_top], [cursor.x_right, cursor.y_bottom]],
            BLACK,
            1.0,
        )
    )
    if has_left:
        prims.append(
            _polyline(
                "cursor-line",
                [[cursor.x_left, cursor.y_top], [cursor.x_left, cursor.y_bottom]],
                BLACK,
                1.0,
            )
        )
    for structure, text, pos in cursor.labels:
        prims.append(_label("cursor-label", text, [pos[0], pos[1]], size=9.0))
    return prims


def _background(layout: ChartLayout) -> dict:
    w, h = layout.canvas
    return _polygon("background", _rect_points(0.0, 0.0, w, h), WHITE)


def _sorted_primitives(prims: list[dict]) -> list[dict]:
    order = {layer: i for i, layer in enumerate(Z_ORDER)}
    return sorted(prims, key=lambda p: order[p["layer"]])


def _isoline_payload(iso) -> list[dict]:
    out = []
    for level, chains in zip(iso.levels, iso.polylines):
        out.append(
            {
                "level": float(level),
                "chains": [
                    {"closed": bool(chain.closed), "points": _plain(chain.points)}
                    for chain in chains
                ],
            }
        )
    return out


def _glyph_payload(dataset: SimulationDataset, config: ViewConfig, tick: int) -> list[dict]:
    """Glyphs for every disc carrying a force vector at the snapped tick.

    Geometry is in each disc's rest-mesh frame; the caudal vertebra's pose
    supplies the frame correction. Ticks whose force has no direction emit
    nothing.
    """
    vectors = dataset.matrix(Attribute.FORCE_VECTOR)
    if vectors is None:
        return []
    kin = dataset.kinematics
    discs = dataset.registry.of_kind(StructureKind.DISC)
    radii = [
        mean_radius(dataset.meshes[d.id]) for d in discs if d.id in dataset.meshes
    ]
    if not radii:
        return []
    arrow_length = 1.5 * float(np.mean(radii))
    gcfg = GlyphConfig(spacing=config.spacing, arrow_length=arrow_length)

    out = []
    for disc in discs:
        mesh = dataset.meshes.get(disc.id)
        if mesh is None or not vectors.has_column(disc.id):
            continue
        series = vectors.column_values(disc.id)
        f_global = np.asarray(series[tick], dtype=float)
        if np.isnan(f_global).any():
            continue
        q_caudal = kin.pose(tick, disc.caudal)[0] if kin.has_body(disc.caudal) else None
        rotation = q_caudal if q_caudal is not None else np.eye(3)
        glyph = build_glyph(
            mesh, f_global, rotation, float(vectors.times[tick]), gcfg, disc=disc.id
        )
        if not glyph.has_geometry():
            continue

        # trailing window for the trajectory strip, in the same local frame
        t_now = float(vectors.times[tick])
        lo = max(0, tick - int(round(0.5 / max(dataset.manifest.dt, 1e-9))))
        window_rows = range(lo, tick + 1)
        dirs, tips, times = [], [], []
        center = barycenter(mesh)
        for row in window_rows:
            f_row = np.asarray(series[row], dtype=float)
            if np.isnan(f_row).any():
                continue
            q_row = kin.pose(row, disc.caudal)[0] if kin.has_body(disc.caudal) else np.eye(3)
            local = to_local_force(f_row, q_row)
            mag = float(np.linalg.norm(local))
            if mag < gcfg.epsilon:
                continue
            d = local / mag
            dirs.append(d)
            tips.append(center - d * 0.25 * arrow_length)
            times.append(float(vectors.times[row]))
        strip = trajectory_surface(
            np.array(dirs) if dirs else np.zeros((0, 3)),
            np.array(tips) if tips else np.zeros((0, 3)),
            np.array(times),
            t=t_now,
            window=0.5,
            arrow_length=arrow_length,
        )

        # disc axis from rest endplate normals, corrected into the disc frame
        if kin.has_body(disc.cranial) and kin.has_body(disc.caudal):
            axis_world = disc_axis(kin.pose(0, disc.cranial)[0], kin.pose(0, disc.caudal)[0])
            axis_local = as_rotation_matrix(kin.pose(0, disc.caudal)[0]).T @ axis_world
        else:
            axis_local = np.array([0.0, 1.0, 0.0])
        f_local = to_local_force(f_global, rotation)
        angle = shear_angle(f_local, axis_local)

        out.append(
            {
                "disc": disc.id,
                "t": glyph.t,
                "visible": bool(glyph.visible),
                "tail": _plain(glyph.tail),
                "tip": _plain(glyph.tip),
                "length": float(glyph.length),
                "plane_center": _plain(glyph.plane_center),
                "plane_normal": _plain(glyph.plane_normal),
                "plane_u": _plain(glyph.plane_u),
                "plane_v": _plain(glyph.plane_v),
                "plane_radius": float(glyph.plane_radius),
                "isolines": _isoline_payload(glyph.isoline_set),
                "trajectory": {
                    "quads": _plain(strip.quads),
                    "opacities": _plain(strip.opacities),
                    "swept_angle_deg": float(strip.swept_angle_deg),
                },
                "shear_angle_deg": None if angle is None else float(angle),
            }
        )
    return out


def _transforms_payload(dataset: SimulationDataset, tick: int) -> list[dict]:
    kin = dataset.kinematics
    out = []
    for body in kin.bodies:
        q, p = kin.pose(tick, body)
        q0, p0 = kin.pose(0, body)
        out.append(
            {
                "id": body,
                "quaternion": _plain(q),
                "translation": _plain(p),
                "rest_origin": _plain(p0),
            }
        )
    return out


def _charts3d_payload(dataset: SimulationDataset, layout: ChartLayout) -> list[dict]:
    """World-space chart planes for the stacked view: one quad per structure at
    its anatomical anchor, carrying normalized heights for the UI to extrude."""
    out = []
    ys = {v.id: v.world[1] for v in layout.vertebrae}
    lo, hi = layout.value_range
    for chart in layout.charts:
        ref = dataset.registry[chart.structure]
        anchor_y = (ys[ref.cranial] + ys[ref.caudal]) / 2.0
        heights = [
            None if math.isnan(h) else h / max(layout.chart_height, 1e-9)
            for h in chart.heights
        ]
        out.append(
            {
                "structure": chart.structure,
                "side": chart.side,
                "anchor_world": [0.0, anchor_y, 0.0],
                "width_mm": 60.0,
                "height_mm": 14.0,
                "heights_norm": _plain(heights),
                "colors": _plain([list(c) if c else None for c in chart.colors]),
            }
        )
    return out


def build_scene(
    dataset: SimulationDataset,
    config: ViewConfig,
    compare: SimulationDataset | None = None,
    ensemble: list[SimulationDataset] | None = None,
) -> SceneDescription:
    """Assemble the full scene for one view of one dataset.

    `ensemble` feeds the simplified mode with extra members; the primary
    dataset is always member zero.
    """
    layout = layout_charts(dataset, config, compare=compare)
    if config.mode is ViewMode.SIMPLIFIED:
        members = [dataset] + list(ensemble or [])
        strips = simplified_strips(members, config)
        layout = ChartLayout(
            config=layout.config,
            canvas=layout.canvas,
            axis_x=layout.axis_x,
            times=layout.times,
            value_range=layout.value_range,
            px_per_unit=layout.px_per_unit,
            chart_height=layout.chart_height,
            charts=layout.charts,
            strips=strips,
            vertebrae=layout.vertebrae,
        )
    cursor = time_cursor(layout, dataset, config.t)

    prims = [_background(layout)]
    prims.extend(_spine_primitives(layout))
    if config.mode is ViewMode.SIMPLIFIED:
        prims.extend(_strip_primitives(layout))
    else:
        prims.extend(_chart_primitives(layout))
    prims.extend(_cursor_primitives(layout, cursor))
    prims = _sorted_primitives(prims)

    payload3d = {
        "meshes": sorted(dataset.meshes.keys()),
        "transforms": _transforms_payload(dataset, cursor.tick),
        "glyphs": _glyph_payload(dataset, config, cursor.tick),
        "charts3d": _charts3d_payload(dataset, layout),
    }

    attributes = sorted(a.value for a in dataset.matrices)
    return SceneDescription(
        dataset=dataset.manifest.id,
        mode=config.mode.value,
        canvas=_plain(list(layout.canvas)),
        config={
            "mode": config.mode.value,
            "spacing": float(config.spacing),
            "t": float(config.t),
            "attribute": config.attribute.value,
            "value_range": _plain(config.value_range) if config.value_range else None,
            "bins": int(config.bins),
            "gridlines": bool(config.gridlines),
            "compare": config.compare,
            "kinds": [k.value for k in config.kinds],
        },
        attributes=attributes,
        time_range=_plain([layout.times[0], layout.times[-1]]),
        times=_plain(list(layout.times)),
        value_range=_plain(list(layout.value_range)),
        cursor={
            "tick": int(cursor.tick),
            "time": float(cursor.time),
            "x_right": float(cursor.x_right),
            "x_left": float(cursor.x_left),
            "y_top": float(cursor.y_top),
            "y_bottom": float(cursor.y_bottom),
            "labels": _plain([[s, t, list(p)] for s, t, p in cursor.labels]),
        },
        primitives=prims,
        payload3d=payload3d,
    )


def scene_json(
    dataset: SimulationDataset,
    config: ViewConfig,
    compare: SimulationDataset | None = None,
    ensemble: list[SimulationDataset] | None = None,
) -> str:
    return build_scene(dataset, config, compare=compare, ensemble=ensemble).to_json()


def _projection_from_layout(layout: ChartLayout):
    """Frontal orthographic world→canvas map matching the layout's vertical
    fit, recovered from two vertebra placements."""
    placements = layout.vertebrae
    if len(placements) >= 2:
        (wy0, cy0) = placements[0].world[1], placements[0].center[1]
        (wy1, cy1) = placements[-1].world[1], placements[-1].center[1]
        scale = (cy1 - cy0) / (wy0 - wy1)
        offset = cy0 + wy0 * scale
    else:
        scale, offset = 1.0, layout.canvas[1] / 2.0

    def project(point) -> list[float]:
        x, y = float(point[0]), float(point[1])
        return [layout.axis_x + x * scale, offset - y * scale]

    return project, scale


def glyph_still_scene(dataset: SimulationDataset, config: ViewConfig) -> SceneDescription:
    """A 2D frontal still of the glyph view: expanded spine outline, arrows,
    force planes, isolines, and trajectory strips projected orthographically."""
    scene = build_scene(dataset, config)
    layout = layout_charts(dataset, config)
    project, scale = _projection_from_layout(layout)

    # expansion shifts, per vertebra then averaged per disc
    rest = {v: float(_world_anchor(dataset, v)[1]) for v in dataset.registry.vertebrae}
    shift = {p.id: p.world[1] - rest[p.id] for p in layout.vertebrae}

    prims = [p for p in scene.primitives if p["layer"] in ("background", "spine-outline")]
    for glyph in scene.payload3d["glyphs"]:
        ref = dataset.registry[glyph["disc"]]
        dy = (shift[ref.cranial] + shift[ref.caudal]) / 2.0

        def lift(point):
            return project([point[0], point[1] + dy])

        for quad, opacity in zip(
            glyph["trajectory"]["quads"], glyph["trajectory"]["opacities"]
        ):
            prims.append(
                _polygon(
                    "glyph-trajectory",
                    [lift(p) for p in quad],
                    [0.35, 0.55, 0.8],
                    opacity=0.6 * sum(opacity) / 4.0,
                )
            )
        for level in glyph["isolines"]:
            for chain in level["chains"]:
                points = [lift(p) for p in chain["points"]]
                if chain["closed"] and points:
                    points.append(points[0])
                if len(points) >= 2:
                    prims.append(_polyline("glyph-isoline", points, [0.2, 0.2, 0.2], 0.6))
        if not glyph["visible"]:
            continue
        center = np.asarray(glyph["plane_center"])
        u = np.asarray(glyph["plane_u"])
        v = np.asarray(glyph["plane_v"])
        r = glyph["plane_radius"]
        theta = np.linspace(0.0, 2.0 * math.pi, 25)[:-1]
        ring = [
            lift(center + r * (math.cos(a) * u + math.sin(a) * v)) for a in theta
        ]
        prims.append(
            _polygon("glyph-plane", ring, [0.75, 0.75, 0.78], stroke=OUTLINE,
                     stroke_width=0.6, opacity=0.55)
        )
        tail2d = np.asarray(lift(glyph["tail"]))
        tip2d = np.asarray(lift(glyph["tip"]))
        prims.append(_polyline("glyph-arrow", [tail2d.tolist(), tip2d.tolist()],
                               [0.1, 0.1, 0.1], 2.0))
        direction = tip2d - tail2d
        norm = float(np.linalg.norm(direction))
        if norm > 1e-9:
            d2 = direction / norm
            perp = np.array([-d2[1], d2[0]])
            head = 0.18 * glyph["length"] * scale
            base2d = tip2d - d2 * head
            prims.append(
                _polygon(
                    "glyph-arrow",
                    [
                        tip2d.tolist(),
                        (base2d + perp * 0.45 * head).tolist(),
                        (base2d - perp * 0.45 * head).tolist(),
                    ],
                    [0.1, 0.1, 0.1],
                )
            )

    prims = _sorted_primitives(prims)
    return SceneDescription(
        dataset=scene.dataset,
        mode="glyphs",
        canvas=scene.canvas,
        config=scene.config,
        attributes=scene.attributes,
        time_range=scene.time_range,
        times=scene.times,
        value_range=scene.value_range,
        cursor=scene.cursor,
        primitives=prims,
        payload3d=scene.payload3d,
    )

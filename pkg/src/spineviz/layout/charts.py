"""Anatomically aligned chart layout.

The spine is drawn as a vertical column of vertebra outlines; every disc and
facet gets a small time/value area chart anchored at its own level. Right-hand
structures chart to the right of the column, left facets to the left with the
time axis mirrored, so the whole arrangement stays readable as a frontal view
of the spine. One shared value scale keeps all charts comparable.

Canvas coordinates are pixels, y growing downward. World coordinates are mm,
y growing upward (cranial).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from ..dataset.manifest import SimulationDataset
from ..dataset.matrices import Attribute, ValueMatrix
from ..dataset.structures import StructureKind, StructureRef
from ..errors import ParameterError, QueryError
from ..geometry import barycenter
from .colormap import sample_color

SIDE_LEFT = "left"
SIDE_RIGHT = "right"

MODE_AREA = "AREA"
MODE_LINE = "LINE"

MARGIN = 40.0
CHART_GAP_FRACTION = 0.06  # horizontal room reserved for the spine column
CHART_FILL_FRACTION = 0.85  # chart height as share of the level gap
DEFAULT_CANVAS = (1000.0, 800.0)
DEFAULT_SIMPLIFIED_BINS = 4

# default value window for deformation views: 4 uniform bins put the clinically
# interesting 2 mm boundary exactly on a bin edge
DEFORMATION_RANGE = (0.0, 4.0)

CHART_KINDS = (StructureKind.DISC, StructureKind.FACET_LEFT, StructureKind.FACET_RIGHT)


class ViewMode(str, Enum):
    CHARTS2D = "charts2d"
    STACKED3D = "stacked3d"
    SIMPLIFIED = "simplified"


@dataclass(frozen=True)
class ViewConfig:
    mode: ViewMode = ViewMode.CHARTS2D
    spacing: float = 0.0  # 0 = anatomical, 1 = fully pulled apart
    t: float = 0.0
    attribute: Attribute = Attribute.FORCE_MAGNITUDE
    value_range: tuple[float, float] | None = None  # None = auto [0, global max]
    bins: int = 0  # 0 = continuous colormap
    gridlines: bool = False
    compare: str | None = None
    kinds: tuple[StructureKind, ...] = (StructureKind.DISC,)
    canvas: tuple[float, float] = DEFAULT_CANVAS

    def __post_init__(self):
        # Enum coercion failures surface as ParameterError so callers (HTTP
        # query parsing in particular) can map them to a client error.
        try:
            mode = ViewMode(self.mode)
            attribute = Attribute(self.attribute)
            kinds = tuple(StructureKind(k) for k in self.kinds)
        except ValueError as exc:
            raise ParameterError(str(exc)) from None
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "attribute", attribute)
        object.__setattr__(self, "spacing", min(max(float(self.spacing), 0.0), 1.0))
        if self.bins != 0 and not 2 <= self.bins <= 16:
            raise ParameterError(f"bins must be 0 or 2..16, got {self.bins}")
        bad = [k for k in kinds if k not in CHART_KINDS]
        if bad:
            raise ParameterError(f"kinds must be disc/facet kinds, got {bad}")
        object.__setattr__(self, "kinds", kinds)
        if self.value_range is not None:
            lo, hi = self.value_range
            if not hi > lo:
                raise ParameterError("value range must be non-empty")
            object.__setattr__(self, "value_range", (float(lo), float(hi)))

    def effective_bins(self) -> int:
        if self.mode is ViewMode.SIMPLIFIED and self.bins == 0:
            return DEFAULT_SIMPLIFIED_BINS
        return self.bins


def mirror_x(x: float, axis_x: float) -> float:
    return 2.0 * axis_x - x


def expand_spine(placements: np.ndarray, s: float, gap: float) -> np.ndarray:
    """Pull vertebrae apart: index i (0 = topmost) moves down by i*s*gap along
    the vertical world axis. s = 0 leaves anatomical positions untouched."""
    placements = np.asarray(placements, dtype=float)
    s = min(max(float(s), 0.0), 1.0)
    out = placements.copy()
    out[:, 1] -= np.arange(len(placements)) * s * gap
    return out


@dataclass(frozen=True)
class Overlay:
    """Gray reference series drawn behind/over a primary chart."""

    ref_heights: tuple[float, ...]  # px, NaN for missing reference cells
    modes: tuple[str, ...]  # MODE_LINE where reference > primary, else MODE_AREA
    spans: tuple[tuple[int, int, str], ...]  # contiguous [start, end] index runs


def overlay_comparison(primary, reference, px_per_unit: float) -> Overlay:
    """Pointwise occlusion resolution: where the gray reference rises above the
    primary, the primary is drawn as a line inside the gray area (LINE);
    everywhere else the primary area stays on top (AREA). Ties draw AREA."""
    primary = np.asarray(primary, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if primary.shape != reference.shape:
        raise QueryError(
            f"comparison series length {reference.shape} != primary {primary.shape}"
        )
    with np.errstate(invalid="ignore"):
        line = reference > primary
    modes = tuple(MODE_LINE if flag else MODE_AREA for flag in line)
    spans = []
    start = 0
    for i in range(1, len(modes) + 1):
        if i == len(modes) or modes[i] != modes[start]:
            spans.append((start, i - 1, modes[start]))
            start = i
    return Overlay(tuple(np.abs(reference) * px_per_unit), modes, tuple(spans))


@dataclass(frozen=True)
class VertebraPlacement:
    id: str
    world: tuple[float, float, float]  # expanded position, mm
    center: tuple[float, float]  # canvas px
    half_size: tuple[float, float]  # canvas px


@dataclass(frozen=True)
class Chart:
    structure: str
    kind: StructureKind
    side: str
    anchor: tuple[float, float]  # canvas anchor (axis_x, level y)
    frame: tuple[float, float, float, float]  # x0, y0, x1, y1
    baseline_y: float
    xs: tuple[float, ...]  # per-tick x, mirrored already for left side
    heights: tuple[float, ...]  # px above the baseline, NaN = missing sample
    colors: tuple[tuple[float, float, float] | None, ...]
    missing: bool = False  # no column / all cells missing
    overlay: Overlay | None = None

    def sample_polyline(self) -> tuple[tuple[float, float], ...]:
        return tuple(
            (x, self.baseline_y - h)
            for x, h in zip(self.xs, self.heights)
            if not math.isnan(h)
        )

    def area_polygon(self) -> tuple[tuple[float, float], ...]:
        pts = self.sample_polyline()
        if not pts:
            return ()
        return ((pts[0][0], self.baseline_y),) + pts + ((pts[-1][0], self.baseline_y),)


@dataclass(frozen=True)
class Strip:
    """One color-only row: a structure's series for one ensemble member."""

    structure: str
    kind: StructureKind
    side: str
    dataset_index: int
    frame: tuple[float, float, float, float]
    xs: tuple[float, ...]  # cell edges, len(times) + 1, mirrored for left
    colors: tuple[tuple[float, float, float] | None, ...]  # len(times)


@dataclass(frozen=True)
class Cursor:
    tick: int
    time: float
    x_right: float
    x_left: float
    y_top: float
    y_bottom: float
    labels: tuple[tuple[str, str, tuple[float, float]], ...]  # structure, text, pos


@dataclass(frozen=True)
class ChartLayout:
    config: ViewConfig
    canvas: tuple[float, float]
    axis_x: float
    times: tuple[float, ...]
    value_range: tuple[float, float]
    px_per_unit: float
    chart_height: float
    charts: tuple[Chart, ...]
    strips: tuple[Strip, ...]
    vertebrae: tuple[VertebraPlacement, ...]

    def chart_for(self, structure_id: str) -> Chart:
        for chart in self.charts:
            if chart.structure == structure_id:
                return chart
        raise QueryError(f"no chart for structure {structure_id!r}")

    def x_of_tick(self, k: int, side: str = SIDE_RIGHT) -> float:
        x = self._xs_right[k]
        return mirror_x(x, self.axis_x) if side == SIDE_LEFT else x

    @property
    def _xs_right(self) -> tuple[float, ...]:
        w = self.canvas[0]
        x0 = self.axis_x + CHART_GAP_FRACTION * w
        x1 = w - MARGIN
        times = np.asarray(self.times)
        if len(times) < 2:
            return tuple(np.full(len(times), x0))
        rel = (times - times[0]) / (times[-1] - times[0])
        return tuple(x0 + rel * (x1 - x0))


def _world_anchor(dataset: SimulationDataset, vertebra_id: str) -> np.ndarray:
    mesh = dataset.meshes.get(vertebra_id)
    if mesh is not None:
        return barycenter(mesh)
    if dataset.kinematics.has_body(vertebra_id):
        _, translation = dataset.kinematics.pose(0, vertebra_id)
        return np.asarray(translation, dtype=float)
    raise QueryError(f"no placement source for vertebra {vertebra_id!r}")


def _vertebra_half_extent(dataset: SimulationDataset, vertebra_id: str) -> tuple[float, float]:
    mesh = dataset.meshes.get(vertebra_id)
    if mesh is None:
        return (15.0, 6.0)
    spans = (mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0)) / 2.0
    return (float(spans[0]), float(spans[1]))


def _displayed(registry_structures, kinds) -> list[StructureRef]:
    return [ref for ref in registry_structures.values() if ref.kind in kinds]


def _series(matrix: ValueMatrix | None, structure_id: str) -> np.ndarray | None:
    """Charted magnitude per tick; vector columns reduce to row norms."""
    if matrix is None or not matrix.has_column(structure_id):
        return None
    values = np.asarray(matrix.column_values(structure_id), dtype=float)
    if values.ndim == 1:
        return np.abs(values)
    mags = np.linalg.norm(np.nan_to_num(values), axis=1)
    mags[np.isnan(values).any(axis=1)] = np.nan
    return mags


def _auto_range(
    config: ViewConfig,
    matrix: ValueMatrix,
    refs: list[StructureRef],
    compare_matrix: ValueMatrix | None,
) -> tuple[float, float]:
    if config.value_range is not None:
        return config.value_range
    if config.mode is ViewMode.SIMPLIFIED and config.attribute is Attribute.DEFORMATION:
        return DEFORMATION_RANGE
    peak = 0.0
    for ref in refs:
        for m in (matrix, compare_matrix):
            series = _series(m, ref.id)
            if series is not None and not np.all(np.isnan(series)):
                peak = max(peak, float(np.nanmax(series)))
    return (0.0, peak if peak > 0 else 1.0)


def layout_charts(
    dataset: SimulationDataset,
    config: ViewConfig,
    compare: SimulationDataset | None = None,
) -> ChartLayout:
    """Pure layout pass: identical inputs produce identical geometry."""
    matrix = dataset.matrix(config.attribute)
    if matrix is None:
        raise QueryError(f"dataset has no {config.attribute.value!r} matrix")
    compare_matrix = compare.matrix(config.attribute) if compare is not None else None
    if compare_matrix is not None and not np.array_equal(
        compare_matrix.times, matrix.times
    ):
        raise QueryError("comparison dataset time base differs from primary")

    registry = dataset.registry
    refs = _displayed(registry.structures, config.kinds)
    w, h = config.canvas
    axis_x = w / 2.0

    # vertical placement: expanded vertebra anchors fit the canvas
    vert_ids = list(registry.vertebrae)
    world = np.array([_world_anchor(dataset, v) for v in vert_ids])
    gaps = np.abs(np.diff(world[:, 1])) if len(world) > 1 else np.array([20.0])
    mean_gap = float(gaps.mean())
    expanded = expand_spine(world, config.spacing, mean_gap)

    half_extents = [_vertebra_half_extent(dataset, v) for v in vert_ids]
    pad = max((he[1] for he in half_extents), default=10.0)
    y_top = float(expanded[:, 1].max()) + pad
    y_bottom = float(expanded[:, 1].min()) - pad
    span = max(y_top - y_bottom, 1e-9)
    vscale = (h - 2.0 * MARGIN) / span

    def canvas_y(world_y: float) -> float:
        return MARGIN + (y_top - world_y) * vscale

    vert_y = {v: float(expanded[i, 1]) for i, v in enumerate(vert_ids)}
    placements = tuple(
        VertebraPlacement(
            id=v,
            world=tuple(float(c) for c in expanded[i]),
            center=(axis_x, canvas_y(expanded[i, 1])),
            half_size=(half_extents[i][0] * vscale, half_extents[i][1] * vscale),
        )
        for i, v in enumerate(vert_ids)
    )

    # one anchor per adjacent-pair level, shared by its disc and facets
    def level_anchor_y(ref: StructureRef) -> float:
        return canvas_y((vert_y[ref.cranial] + vert_y[ref.caudal]) / 2.0)

    anchor_ys = sorted({level_anchor_y(ref) for ref in refs})
    if len(anchor_ys) > 1:
        min_gap = min(b - a for a, b in zip(anchor_ys, anchor_ys[1:]))
    else:
        min_gap = (h - 2.0 * MARGIN) / 4.0
    chart_h = CHART_FILL_FRACTION * min_gap

    lo, hi = _auto_range(config, matrix, refs, compare_matrix)
    px_per_unit = chart_h / (hi - lo)
    bins = config.effective_bins()

    layout = ChartLayout(
        config=config,
        canvas=(w, h),
        axis_x=axis_x,
        times=tuple(float(t) for t in matrix.times),
        value_range=(lo, hi),
        px_per_unit=px_per_unit,
        chart_height=chart_h,
        charts=(),
        strips=(),
        vertebrae=placements,
    )
    xs_right = layout._xs_right
    xs_left = tuple(mirror_x(x, axis_x) for x in xs_right)

    split_rows = StructureKind.DISC in config.kinds and (
        StructureKind.FACET_LEFT in config.kinds
        or StructureKind.FACET_RIGHT in config.kinds
    )

    def chart_band(ref: StructureRef) -> tuple[float, float]:
        """(baseline_y, height) for this structure's row within its level."""
        y = level_anchor_y(ref)
        if not split_rows:
            return (y + chart_h / 2.0, chart_h)
        if ref.kind is StructureKind.DISC:
            return (y, chart_h / 2.0)
        return (y + chart_h / 2.0, chart_h / 2.0)

    charts = []
    for ref in refs:
        side = SIDE_LEFT if ref.kind is StructureKind.FACET_LEFT else SIDE_RIGHT
        xs = xs_left if side == SIDE_LEFT else xs_right
        baseline, height = chart_band(ref)
        row_px_per_unit = height / (hi - lo)
        series = _series(matrix, ref.id)
        missing = series is None or bool(np.all(np.isnan(series)))
        if missing:
            heights = (math.nan,) * len(matrix.times)
            colors: tuple = (None,) * len(matrix.times)
        else:
            mags = series
            heights = tuple(
                float((v - lo) * row_px_per_unit) if not np.isnan(v) else math.nan
                for v in mags
            )
            colors = tuple(
                None if np.isnan(v) else sample_color(float(v), (lo, hi), bins)
                for v in mags
            )
        overlay = None
        ref_series = _series(compare_matrix, ref.id)
        if ref_series is not None and series is not None:
            overlay = overlay_comparison(series, ref_series, row_px_per_unit)
        frame = (min(xs), baseline - height, max(xs), baseline)
        charts.append(
            Chart(
                structure=ref.id,
                kind=ref.kind,
                side=side,
                anchor=(axis_x, level_anchor_y(ref)),
                frame=frame,
                baseline_y=baseline,
                xs=xs,
                heights=heights,
                colors=colors,
                missing=missing,
                overlay=overlay,
            )
        )

    return replace(layout, charts=tuple(charts))


def simplified_strips(
    datasets: list[SimulationDataset], config: ViewConfig
) -> tuple[Strip, ...]:
    """Color-only ensemble rows: per structure, one strip per dataset, stacked
    within the structure's level band and sharing the discretized colormap."""
    if not datasets:
        raise ParameterError("simplified view needs at least one dataset")
    config = replace(config, mode=ViewMode.SIMPLIFIED)
    bins = config.effective_bins()
    base = layout_charts(datasets[0], config)
    lo, hi = base.value_range
    # re-derive the shared range across every member unless pinned
    if config.value_range is None and not (
        config.attribute is Attribute.DEFORMATION
    ):
        peak = 0.0
        for ds in datasets:
            matrix = ds.matrix(config.attribute)
            if matrix is not None:
                peak = max(peak, matrix.present_max())
        lo, hi = 0.0, peak if peak > 0 else 1.0

    t_edges_right = _cell_edges(base)
    t_edges_left = tuple(mirror_x(x, base.axis_x) for x in t_edges_right)
    n = len(datasets)
    strips = []
    for chart in base.charts:
        row_h = (chart.frame[3] - chart.frame[1]) / n
        for d_index, ds in enumerate(datasets):
            matrix = ds.matrix(config.attribute)
            series = _series(matrix, chart.structure)
            if series is None:
                colors: tuple = (None,) * (len(base.times))
            else:
                colors = tuple(
                    None if np.isnan(v) else sample_color(float(v), (lo, hi), bins)
                    for v in series
                )
            y0 = chart.frame[1] + d_index * row_h
            strips.append(
                Strip(
                    structure=chart.structure,
                    kind=chart.kind,
                    side=chart.side,
                    dataset_index=d_index,
                    frame=(chart.frame[0], y0, chart.frame[2], y0 + row_h),
                    xs=t_edges_left if chart.side == SIDE_LEFT else t_edges_right,
                    colors=colors,
                )
            )
    return tuple(strips)


def _cell_edges(layout: ChartLayout) -> tuple[float, ...]:
    xs = layout._xs_right
    if len(xs) == 1:
        return (xs[0], xs[0] + 1.0)
    mids = [(a + b) / 2.0 for a, b in zip(xs, xs[1:])]
    return (xs[0],) + tuple(mids) + (xs[-1],)


def time_cursor(layout: ChartLayout, dataset: SimulationDataset, t: float) -> Cursor:
    """Snap t to the nearest tick and build the selection rule plus one value
    label per chart; missing cells label as an en dash."""
    matrix = dataset.matrix(layout.config.attribute)
    if matrix is None:
        raise QueryError(f"dataset has no {layout.config.attribute.value!r} matrix")
    t_clamped = min(max(float(t), layout.times[0]), layout.times[-1])
    tick = matrix.snap_index(t_clamped)

    x_right = layout.x_of_tick(tick, SIDE_RIGHT)
    x_left = layout.x_of_tick(tick, SIDE_LEFT)
    frames = [c.frame for c in layout.charts]
    y_top = min((f[1] for f in frames), default=MARGIN)
    y_bottom = max((f[3] for f in frames), default=layout.canvas[1] - MARGIN)

    labels = []
    if layout.config.mode is not ViewMode.SIMPLIFIED:
        for chart in layout.charts:
            x = x_left if chart.side == SIDE_LEFT else x_right
            if chart.missing or not matrix.has_column(chart.structure):
                text = "–"
            else:
                value = matrix.value_at(tick, chart.structure)
                value = np.linalg.norm(value) if np.ndim(value) else value
                text = "–" if np.isnan(value) else f"{float(value):.2f}"
            offset = -30.0 if chart.side == SIDE_LEFT else 4.0
            labels.append((chart.structure, text, (x + offset, chart.frame[1] - 2.0)))

    return Cursor(
        tick=tick,
        time=float(layout.times[tick]),
        x_right=x_right,
        x_left=x_left,
        y_top=y_top,
        y_bottom=y_bottom,
        labels=tuple(labels),
    )

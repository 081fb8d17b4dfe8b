"""Chart layout: colormap fixtures against the reference implementation,
mirror/expansion/scale invariants, comparison overlays, ensemble strips and
the time cursor."""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from matplotlib import colormaps

from spineviz.dataset.matrices import Attribute, ValueMatrix
from spineviz.dataset.structures import StructureKind
from spineviz.errors import ParameterError, QueryError
from spineviz.layout.charts import (
    CHART_GAP_FRACTION,
    DEFAULT_SIMPLIFIED_BINS,
    MARGIN,
    MODE_AREA,
    MODE_LINE,
    SIDE_LEFT,
    SIDE_RIGHT,
    ChartLayout,
    ViewConfig,
    ViewMode,
    expand_spine,
    layout_charts,
    mirror_x,
    overlay_comparison,
    simplified_strips,
    time_cursor,
)
from spineviz.layout.colormap import bin_color, discretize, sample_color, viridis

DISC = StructureKind.DISC
FACETS = (StructureKind.FACET_LEFT, StructureKind.FACET_RIGHT)


def with_magnitudes(dataset, per_column: dict[str, float]):
    """Clone a dataset, overwriting force magnitudes with per-column constants."""
    fm = dataset.matrices[Attribute.FORCE_MAGNITUDE]
    values = fm.values.copy()
    for col, v in per_column.items():
        values[:, fm.columns.index(col)] = v
    matrices = dict(dataset.matrices)
    matrices[Attribute.FORCE_MAGNITUDE] = ValueMatrix(
        fm.attribute, fm.times, fm.columns, values
    )
    return dataclasses.replace(dataset, matrices=matrices)


class TestColormap:
    def test_endpoints_match_reference_table(self):
        # canonical dark-purple / yellow endpoints
        assert viridis(0.0) == pytest.approx((0.267004, 0.004874, 0.329415), abs=1 / 255)
        assert viridis(1.0) == pytest.approx((0.993248, 0.906157, 0.143936), abs=1 / 255)

    @pytest.mark.parametrize("row", [25, 50, 80, 110, 140, 170, 200, 230])
    def test_interior_anchors_match_reference_implementation(self, row):
        # at anchor positions interpolation is exact, so the published
        # reference anchors are a direct oracle
        expected = colormaps["viridis"].colors[row][:3]
        got = viridis(row / 255)
        assert max(abs(g - e) for g, e in zip(got, expected)) < 1 / 255

    @pytest.mark.parametrize("u", [0.111, 0.318, 0.5, 0.77, 0.912])
    def test_off_anchor_samples_stay_between_neighbors(self, u):
        anchors = np.asarray(colormaps["viridis"].colors)[:, :3]
        pos = u * 255
        lo, hi = anchors[int(pos)], anchors[min(int(pos) + 1, 255)]
        got = np.array(viridis(u))
        assert np.all(got >= np.minimum(lo, hi) - 1e-12)
        assert np.all(got <= np.maximum(lo, hi) + 1e-12)

    def test_out_of_range_clamps(self):
        assert viridis(-3.0) == viridis(0.0)
        assert viridis(42.0) == viridis(1.0)

    def test_discretize_floor_with_clamp(self):
        rng = (0.0, 4.0)
        assert discretize(1.9, rng, 4) == 1
        assert discretize(2.0, rng, 4) == 2  # bin edges belong to the upper bin
        assert discretize(0.0, rng, 4) == 0
        assert discretize(4.0, rng, 4) == 3  # top of range folds into the last bin
        assert discretize(-10.0, rng, 4) == 0
        assert discretize(99.0, rng, 4) == 3

    def test_discretize_guards(self):
        with pytest.raises(ValueError):
            discretize(1.0, (0.0, 4.0), 1)
        with pytest.raises(ValueError):
            discretize(1.0, (4.0, 4.0), 4)

    def test_bin_color_samples_bin_centers(self):
        for bins in (2, 4, 8):
            for idx in range(bins):
                assert bin_color(idx, bins) == viridis((idx + 0.5) / bins)

    def test_sample_color_modes(self):
        assert sample_color(1.0, (0.0, 4.0), 0) == viridis(0.25)
        assert sample_color(0.9, (0.0, 4.0), 4) == bin_color(0, 4)
        assert sample_color(1.0, (0.0, 4.0), 4) == bin_color(1, 4)  # edge -> upper
        assert sample_color(5.0, (2.0, 2.0), 0) == viridis(0.0)

    @given(
        v=st.floats(min_value=-100, max_value=100, allow_nan=False),
        bins=st.integers(min_value=2, max_value=16),
    )
    @settings(max_examples=100, deadline=None)
    def test_discretize_always_lands_in_range(self, v, bins):
        idx = discretize(v, (-50.0, 50.0), bins)
        assert 0 <= idx < bins


class TestViewConfig:
    @given(s=st.floats(allow_nan=False, allow_infinity=False))
    @settings(max_examples=100, deadline=None)
    def test_spacing_clamps_to_unit_interval(self, s):
        assert 0.0 <= ViewConfig(spacing=s).spacing <= 1.0

    @pytest.mark.parametrize("bad", [1, 17, -2])
    def test_bins_outside_contract_rejected(self, bad):
        with pytest.raises(ParameterError):
            ViewConfig(bins=bad)

    def test_value_range_must_be_nonempty(self):
        with pytest.raises(ParameterError):
            ViewConfig(value_range=(4.0, 4.0))
        with pytest.raises(ParameterError):
            ViewConfig(value_range=(5.0, 1.0))

    def test_kinds_must_be_chartable(self):
        with pytest.raises(ParameterError):
            ViewConfig(kinds=(StructureKind.VERTEBRA,))

    def test_simplified_promotes_default_bins(self):
        assert ViewConfig(mode=ViewMode.SIMPLIFIED).effective_bins() == DEFAULT_SIMPLIFIED_BINS
        assert ViewConfig(mode=ViewMode.SIMPLIFIED, bins=8).effective_bins() == 8
        assert ViewConfig().effective_bins() == 0

    def test_string_coercion(self):
        cfg = ViewConfig(mode="simplified", attribute="deformation", kinds=("disc",))
        assert cfg.mode is ViewMode.SIMPLIFIED
        assert cfg.attribute is Attribute.DEFORMATION
        assert cfg.kinds == (DISC,)


class TestExpansion:
    def test_each_vertebra_drops_by_index_times_share(self):
        placements = np.array([[0.0, 100.0, 0.0], [0.0, 80.0, 0.0], [0.0, 60.0, 0.0]])
        out = expand_spine(placements, 0.5, 20.0)
        assert out[0, 1] == 100.0
        assert out[1, 1] == 80.0 - 1 * 0.5 * 20.0
        assert out[2, 1] == 60.0 - 2 * 0.5 * 20.0
        # untouched axes
        assert np.array_equal(out[:, 0], placements[:, 0])

    def test_zero_share_is_identity(self):
        placements = np.random.default_rng(0).normal(size=(5, 3))
        assert np.array_equal(expand_spine(placements, 0.0, 17.0), placements)

    def test_layout_gap_grows_linearly_with_spacing(self, short_dataset):
        at = lambda s: layout_charts(short_dataset, ViewConfig(spacing=s))
        rest = {p.id: p.world[1] for p in at(0.0).vertebrae}
        pulled = {p.id: p.world[1] for p in at(1.0).vertebrae}
        ids = [p.id for p in at(0.0).vertebrae]
        gaps = [abs(rest[a] - rest[b]) for a, b in zip(ids, ids[1:])]
        mean_gap = sum(gaps) / len(gaps)
        for i, v in enumerate(ids):
            assert pulled[v] == pytest.approx(rest[v] - i * mean_gap, abs=1e-9)


class TestMirror:
    def test_mirror_is_reflection_about_axis(self):
        assert mirror_x(3.0, 10.0) == 17.0
        assert mirror_x(10.0, 10.0) == 10.0

    def test_facet_charts_mirror_bitwise(self, bend_dataset):
        layout = layout_charts(bend_dataset, ViewConfig(kinds=FACETS))
        lefts = {c.structure: c for c in layout.charts if c.side == SIDE_LEFT}
        rights = {c.structure: c for c in layout.charts if c.side == SIDE_RIGHT}
        assert lefts and rights
        for lid, left in lefts.items():
            right = rights[lid.replace("facetL", "facetR")]
            mirrored = tuple(mirror_x(x, layout.axis_x) for x in right.xs)
            assert left.xs == mirrored  # bitwise, not approximate
            assert left.baseline_y == right.baseline_y
            assert left.anchor[1] == right.anchor[1]

    def test_asymmetric_load_breaks_value_symmetry_not_geometry(self, bend_dataset):
        layout = layout_charts(bend_dataset, ViewConfig(kinds=FACETS))
        tick = bend_dataset.matrices[Attribute.FORCE_MAGNITUDE].snap_index(1.5)
        left = layout.chart_for("C5C6_facetL")
        right = layout.chart_for("C5C6_facetR")
        assert right.heights[tick] > 0.0
        assert left.heights[tick] == 0.0

    def test_split_rows_keep_facets_mirrored(self, bend_dataset):
        # discs and facets together: discs take the upper half-row, facets the
        # lower, but left/right facet geometry still mirrors exactly
        layout = layout_charts(bend_dataset, ViewConfig(kinds=(DISC,) + FACETS))
        left = layout.chart_for("C4C5_facetL")
        right = layout.chart_for("C4C5_facetR")
        disc = layout.chart_for("C4C5")
        assert left.xs == tuple(mirror_x(x, layout.axis_x) for x in right.xs)
        assert left.frame[1] == right.frame[1]
        assert disc.baseline_y <= left.frame[1]  # disc row sits above the facet row


class TestSharedScale:
    def test_height_ratio_tracks_value_ratio(self, short_dataset):
        for r in (2.0, 5.0, 10.0):
            ds = with_magnitudes(short_dataset, {"C2C3": 3.0 * r, "C5C6": 3.0})
            layout = layout_charts(ds, ViewConfig(kinds=(DISC,)))
            tall = max(layout.chart_for("C2C3").heights)
            short = max(layout.chart_for("C5C6").heights)
            assert abs(tall - r * short) <= 1.0  # within one device unit

    def test_px_per_unit_is_global(self, short_dataset):
        layout = layout_charts(short_dataset, ViewConfig(kinds=(DISC,)))
        lo, hi = layout.value_range
        fm = short_dataset.matrices[Attribute.FORCE_MAGNITUDE]
        for chart in layout.charts:
            series = np.abs(fm.values[:, fm.columns.index(chart.structure)])
            expected = (series - lo) * layout.px_per_unit
            assert np.allclose(chart.heights, expected, atol=1e-9)

    def test_auto_range_spans_zero_to_peak(self, short_dataset):
        layout = layout_charts(short_dataset, ViewConfig(kinds=(DISC,) + FACETS))
        fm = short_dataset.matrices[Attribute.FORCE_MAGNITUDE]
        assert layout.value_range[0] == 0.0
        assert layout.value_range[1] == pytest.approx(float(np.nanmax(fm.values)))

    def test_pinned_range_wins(self, short_dataset):
        layout = layout_charts(short_dataset, ViewConfig(value_range=(0.0, 200.0)))
        assert layout.value_range == (0.0, 200.0)

    def test_vector_attribute_charts_norms(self, short_dataset):
        layout = layout_charts(
            short_dataset, ViewConfig(attribute=Attribute.FORCE_VECTOR)
        )
        fv = short_dataset.matrices[Attribute.FORCE_VECTOR]
        chart = layout.chart_for("C2C3")
        norms = np.linalg.norm(fv.values[:, fv.columns.index("C2C3")], axis=1)
        lo, hi = layout.value_range
        assert np.allclose(chart.heights, (norms - lo) * layout.px_per_unit, atol=1e-9)

    def test_time_axis_endpoints(self, short_dataset):
        layout = layout_charts(short_dataset, ViewConfig())
        w = layout.canvas[0]
        assert layout.x_of_tick(0) == pytest.approx(layout.axis_x + CHART_GAP_FRACTION * w)
        assert layout.x_of_tick(len(layout.times) - 1) == pytest.approx(w - MARGIN)


class TestOverlay:
    def test_reference_above_primary_becomes_line(self):
        overlay = overlay_comparison([3.0, 5.0, 2.0], [4.0, 4.0, 4.0], 1.0)
        assert overlay.modes == (MODE_LINE, MODE_AREA, MODE_LINE)
        assert overlay.spans == (
            (0, 0, MODE_LINE),
            (1, 1, MODE_AREA),
            (2, 2, MODE_LINE),
        )

    def test_runs_merge(self):
        overlay = overlay_comparison([0.0, 0.0, 5.0, 5.0], [1.0, 1.0, 1.0, 1.0], 2.0)
        assert overlay.modes == (MODE_LINE, MODE_LINE, MODE_AREA, MODE_AREA)
        assert overlay.spans == ((0, 1, MODE_LINE), (2, 3, MODE_AREA))
        assert overlay.ref_heights == (2.0, 2.0, 2.0, 2.0)

    def test_ties_and_zeros_stay_area(self):
        overlay = overlay_comparison([4.0, 0.0], [4.0, 0.0], 1.0)
        assert overlay.modes == (MODE_AREA, MODE_AREA)
        assert overlay.spans == ((0, 1, MODE_AREA),)

    def test_nan_reference_never_claims_line(self):
        overlay = overlay_comparison([1.0, 1.0], [math.nan, 2.0], 1.0)
        assert overlay.modes == (MODE_AREA, MODE_LINE)

    def test_length_mismatch_rejected(self):
        with pytest.raises(QueryError):
            overlay_comparison([1.0, 2.0], [1.0], 1.0)

    @given(
        values=st.lists(
            st.tuples(
                st.floats(min_value=0, max_value=100, allow_nan=False),
                st.floats(min_value=0, max_value=100, allow_nan=False),
            ),
            min_size=1,
            max_size=30,
        )
    )
    @settings(max_examples=80, deadline=None)
    def test_spans_partition_the_series(self, values):
        primary = [p for p, _ in values]
        reference = [r for _, r in values]
        overlay = overlay_comparison(primary, reference, 1.5)
        covered = []
        for start, end, mode in overlay.spans:
            assert start <= end
            covered.extend(range(start, end + 1))
            assert all(overlay.modes[i] == mode for i in range(start, end + 1))
        assert covered == list(range(len(values)))

    def test_layout_attaches_overlay(self, short_dataset, static_dataset):
        doubled = with_magnitudes(
            short_dataset,
            {"C2C3": 100.0},
        )
        layout = layout_charts(short_dataset, ViewConfig(), compare=doubled)
        chart = layout.chart_for("C2C3")
        assert chart.overlay is not None
        assert MODE_LINE in chart.overlay.modes
        # comparison participates in the shared range
        assert layout.value_range[1] == pytest.approx(100.0)

    def test_timebase_mismatch_rejected(self, short_dataset, static_dataset):
        with pytest.raises(QueryError):
            layout_charts(short_dataset, ViewConfig(), compare=static_dataset)

    def test_absent_attribute_rejected(self, short_dataset):
        slim = dataclasses.replace(
            short_dataset,
            matrices={
                k: v
                for k, v in short_dataset.matrices.items()
                if k is not Attribute.DEFORMATION
            },
        )
        with pytest.raises(QueryError):
            layout_charts(slim, ViewConfig(attribute=Attribute.DEFORMATION))


class TestStrips:
    def test_rows_stack_inside_each_level_band(self, short_dataset):
        members = [short_dataset, short_dataset, short_dataset]
        strips = simplified_strips(members, ViewConfig(kinds=(DISC,)))
        by_structure: dict[str, list] = {}
        for s in strips:
            by_structure.setdefault(s.structure, []).append(s)
        for rows in by_structure.values():
            assert [r.dataset_index for r in rows] == [0, 1, 2]
            heights = {round(r.frame[3] - r.frame[1], 9) for r in rows}
            assert len(heights) == 1  # equal split
            for upper, lower in zip(rows, rows[1:]):
                assert lower.frame[1] == pytest.approx(upper.frame[3])

    def test_colors_recompute_from_raw_values(self, short_dataset, bend_dataset):
        members = [short_dataset]
        config = ViewConfig(kinds=(DISC,), mode=ViewMode.SIMPLIFIED)
        strips = simplified_strips(members, config)
        fm = short_dataset.matrices[Attribute.FORCE_MAGNITUDE]
        hi = float(np.nanmax(np.abs(fm.values)))
        bins = DEFAULT_SIMPLIFIED_BINS
        for strip in strips:
            series = np.abs(fm.values[:, fm.columns.index(strip.structure)])
            expected = tuple(
                bin_color(discretize(float(v), (0.0, hi), bins), bins) for v in series
            )
            assert strip.colors == expected

    def test_deformation_defaults_to_millimetre_bins(self, short_dataset):
        strips = simplified_strips(
            [short_dataset], ViewConfig(attribute=Attribute.DEFORMATION)
        )
        assert strips
        layout = layout_charts(
            short_dataset,
            ViewConfig(attribute=Attribute.DEFORMATION, mode=ViewMode.SIMPLIFIED),
        )
        assert layout.value_range == (0.0, 4.0)
        # 2 mm falls exactly on a bin edge with the default four bins
        assert discretize(2.0, layout.value_range, DEFAULT_SIMPLIFIED_BINS) == 2
        assert discretize(1.999999, layout.value_range, DEFAULT_SIMPLIFIED_BINS) == 1

    def test_cell_edges_bracket_every_tick(self, short_dataset):
        strips = simplified_strips([short_dataset], ViewConfig(kinds=(DISC,)))
        layout = layout_charts(
            short_dataset, ViewConfig(kinds=(DISC,), mode=ViewMode.SIMPLIFIED)
        )
        for strip in strips:
            assert len(strip.xs) == len(layout.times) + 1
            edges = strip.xs if strip.side == SIDE_RIGHT else strip.xs[::-1]
            assert all(a < b for a, b in zip(edges, edges[1:]))

    def test_left_strip_edges_mirror(self, bend_dataset):
        strips = simplified_strips([bend_dataset], ViewConfig(kinds=FACETS))
        layout = layout_charts(
            bend_dataset, ViewConfig(kinds=FACETS, mode=ViewMode.SIMPLIFIED)
        )
        lefts = [s for s in strips if s.side == SIDE_LEFT]
        rights = {s.structure: s for s in strips if s.side == SIDE_RIGHT}
        assert lefts
        for left in lefts:
            right = rights[left.structure.replace("facetL", "facetR")]
            assert left.xs == tuple(mirror_x(x, layout.axis_x) for x in right.xs)

    def test_empty_ensemble_rejected(self):
        with pytest.raises(ParameterError):
            simplified_strips([], ViewConfig())


class TestCursor:
    @pytest.fixture()
    def coarse_dataset(self, short_dataset):
        """Three exactly representable ticks so the midpoint rule is testable."""
        fm = short_dataset.matrices[Attribute.FORCE_MAGNITUDE]
        times = np.array([0.0, 0.25, 0.5])
        matrices = dict(short_dataset.matrices)
        matrices[Attribute.FORCE_MAGNITUDE] = ValueMatrix(
            fm.attribute, times, fm.columns, fm.values[:3]
        )
        return dataclasses.replace(short_dataset, matrices=matrices)

    def test_snaps_to_nearest_tick(self, coarse_dataset):
        layout = layout_charts(coarse_dataset, ViewConfig())
        assert time_cursor(layout, coarse_dataset, 0.12).tick == 0
        assert time_cursor(layout, coarse_dataset, 0.13).tick == 1
        assert time_cursor(layout, coarse_dataset, 0.249).tick == 1

    def test_exact_midpoint_takes_the_later_tick(self, coarse_dataset):
        layout = layout_charts(coarse_dataset, ViewConfig())
        cursor = time_cursor(layout, coarse_dataset, 0.125)
        assert cursor.tick == 1
        assert cursor.time == 0.25

    def test_out_of_range_clamps(self, coarse_dataset):
        layout = layout_charts(coarse_dataset, ViewConfig())
        assert time_cursor(layout, coarse_dataset, -9.0).tick == 0
        assert time_cursor(layout, coarse_dataset, 9.0).tick == 2

    def test_cursor_x_matches_tick_grid(self, short_dataset):
        layout = layout_charts(short_dataset, ViewConfig(kinds=FACETS))
        cursor = time_cursor(layout, short_dataset, 0.2)
        assert cursor.x_right == layout.x_of_tick(cursor.tick, SIDE_RIGHT)
        assert cursor.x_left == layout.x_of_tick(cursor.tick, SIDE_LEFT)
        assert cursor.x_left == mirror_x(cursor.x_right, layout.axis_x)

    def test_labels_print_snapped_values(self, short_dataset):
        layout = layout_charts(short_dataset, ViewConfig(kinds=(DISC,)))
        cursor = time_cursor(layout, short_dataset, 0.3)
        fm = short_dataset.matrices[Attribute.FORCE_MAGNITUDE]
        by_structure = {s: text for s, text, _ in cursor.labels}
        for disc in ("C2C3", "Th2Th3"):
            expected = f"{float(fm.values[cursor.tick][fm.columns.index(disc)]):.2f}"
            assert by_structure[disc] == expected

    def test_missing_cell_labels_dash(self, missing_facet_dataset):
        layout = layout_charts(missing_facet_dataset, ViewConfig(kinds=FACETS))
        cursor = time_cursor(layout, missing_facet_dataset, 0.1)
        by_structure = {s: text for s, text, _ in cursor.labels}
        assert by_structure["C3C4_facetL"] == "–"
        assert by_structure["C3C4_facetR"] != "–"

    def test_simplified_mode_suppresses_labels(self, short_dataset):
        layout = layout_charts(
            short_dataset, ViewConfig(mode=ViewMode.SIMPLIFIED, kinds=(DISC,))
        )
        cursor = time_cursor(layout, short_dataset, 0.2)
        assert cursor.labels == ()

    def test_cursor_spans_the_chart_block(self, short_dataset):
        layout = layout_charts(short_dataset, ViewConfig(kinds=(DISC,)))
        cursor = time_cursor(layout, short_dataset, 0.2)
        assert cursor.y_top == min(c.frame[1] for c in layout.charts)
        assert cursor.y_bottom == max(c.frame[3] for c in layout.charts)


class TestLayoutPurity:
    def test_identical_inputs_identical_geometry(self, short_dataset):
        config = ViewConfig(kinds=(DISC,) + FACETS, spacing=0.4, bins=6)
        assert layout_charts(short_dataset, config) == layout_charts(
            short_dataset, config
        )

    def test_missing_column_flags_chart(self, missing_facet_dataset):
        layout = layout_charts(missing_facet_dataset, ViewConfig(kinds=FACETS))
        chart = layout.chart_for("C3C4_facetL")
        assert chart.missing
        assert all(math.isnan(h) for h in chart.heights)
        assert set(chart.colors) == {None}
        assert layout.chart_for("C3C4_facetR").missing is False

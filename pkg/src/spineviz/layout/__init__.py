from .charts import (
    Chart,
    ChartLayout,
    Cursor,
    Overlay,
    Strip,
    VertebraPlacement,
    ViewConfig,
    ViewMode,
    expand_spine,
    layout_charts,
    mirror_x,
    overlay_comparison,
    simplified_strips,
    time_cursor,
)
from .colormap import bin_color, discretize, sample_color, viridis

__all__ = [
    "Chart",
    "ChartLayout",
    "Cursor",
    "Overlay",
    "Strip",
    "VertebraPlacement",
    "ViewConfig",
    "ViewMode",
    "expand_spine",
    "layout_charts",
    "mirror_x",
    "overlay_comparison",
    "simplified_strips",
    "time_cursor",
    "bin_color",
    "discretize",
    "sample_color",
    "viridis",
]

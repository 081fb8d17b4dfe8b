"""Deterministic SVG rendering of scene primitives.

Every numeric attribute is printed with fixed 4-decimal formatting, primitives
are rendered in the order the scene lists them, and the document structure
never varies with content — so identical scenes always produce byte-identical
documents, which is what makes golden-file fixtures trustworthy.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from ..errors import ParameterError
from .scene import SceneDescription

_HATCH = (
    '<pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" '
    'patternTransform="rotate(45)">'
    '<line x1="0" y1="0" x2="0" y2="6" stroke="rgb(120,120,120)" stroke-width="1"/>'
    "</pattern>"
)


def _num(value: float) -> str:
    return f"{float(value):.4f}"


def _color(value) -> str:
    if value == "none":
        return "none"
    if value == "hatch":
        return "url(#hatch)"
    r, g, b = (max(0, min(255, round(float(c) * 255.0))) for c in value)
    return f"rgb({r},{g},{b})"


def _points(points) -> str:
    return " ".join(f"{_num(x)},{_num(y)}" for x, y in points)


def _polygon_tag(prim: dict) -> str:
    parts = [f'<polygon points="{_points(prim["points"])}"']
    parts.append(f' fill="{_color(prim["fill"])}"')
    if prim.get("opacity", 1.0) != 1.0:
        parts.append(f' fill-opacity="{_num(prim["opacity"])}"')
    stroke = prim.get("stroke", "none")
    if stroke != "none":
        parts.append(f' stroke="{_color(stroke)}"')
        parts.append(f' stroke-width="{_num(prim.get("stroke_width", 1.0))}"')
    parts.append("/>")
    return "".join(parts)


def _polyline_tag(prim: dict) -> str:
    parts = [f'<polyline points="{_points(prim["points"])}" fill="none"']
    parts.append(f' stroke="{_color(prim["stroke"])}"')
    parts.append(f' stroke-width="{_num(prim.get("stroke_width", 1.0))}"')
    if prim.get("opacity", 1.0) != 1.0:
        parts.append(f' stroke-opacity="{_num(prim["opacity"])}"')
    parts.append("/>")
    return "".join(parts)


def _label_tag(prim: dict) -> str:
    x, y = prim["pos"]
    anchor = prim.get("anchor", "start")
    size = prim.get("size", 10.0)
    text = escape(str(prim["text"]))
    return (
        f'<text x="{_num(x)}" y="{_num(y)}" font-size="{_num(size)}" '
        f'font-family="sans-serif" text-anchor="{anchor}">{text}</text>'
    )


_RENDERERS = {"polygon": _polygon_tag, "polyline": _polyline_tag, "label": _label_tag}


def export_svg(scene: SceneDescription, size: tuple[float, float] | None = None) -> bytes:
    """Render a scene to an SVG byte sequence. `size` overrides the display
    size while the internal coordinate system stays the scene canvas."""
    canvas_w, canvas_h = scene.canvas
    if canvas_w <= 0 or canvas_h <= 0:
        raise ParameterError("scene canvas must have positive size")
    out_w, out_h = size if size is not None else (canvas_w, canvas_h)
    if out_w <= 0 or out_h <= 0:
        raise ParameterError("export size must be positive")

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(out_w)}" '
            f'height="{_num(out_h)}" viewBox="0 0 {_num(canvas_w)} {_num(canvas_h)}">'
        ),
        f"<defs>{_HATCH}</defs>",
    ]
    for prim in scene.primitives:
        try:
            renderer = _RENDERERS[prim["kind"]]
        except KeyError:
            raise ParameterError(f"unknown primitive kind {prim.get('kind')!r}") from None
        lines.append(renderer(prim))
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")

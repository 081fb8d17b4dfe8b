from .scene import SCHEMA_VERSION, SceneDescription, build_scene, glyph_still_scene, scene_json
from .svg import export_svg

__all__ = [
    "SCHEMA_VERSION",
    "SceneDescription",
    "build_scene",
    "glyph_still_scene",
    "scene_json",
    "export_svg",
]

"""
Force glyphs through a sideways push
====================================

Where do the disc forces point while the head is pushed sideways? The glyph
view answers in the disc's own frame: an arrow per disc (frame-corrected, so
twisting vertebrae don't smear the direction), a perpendicular disc plane
for reading shear, isolines on the disc surface, and a fading trajectory fan
showing how the direction moved over the last half second.

    python3 demos/glyph_tour.py
"""

import dataclasses
from pathlib import Path

from spineviz.exporter.scene import glyph_still_scene
from spineviz.exporter.svg import export_svg
from spineviz.layout.charts import ViewConfig
from spineviz.simkernel.model import load_model, load_scenario
from spineviz.simkernel.run import run

OUT = Path("demos/out")
OUT.mkdir(parents=True, exist_ok=True)

model = load_model("cervical_default")
dataset = run(model, load_scenario("lateral_bend"))
print("dataset", dataset.manifest.id)

# Three stations of the scenario: settling under gravity, the sideways push
# held, and the swing back after release. The arrows only unfold once the
# spine is pulled apart past the spacing threshold; the isolines are there
# either way.
for tag, t in (("settled", 0.4), ("held", 1.5), ("released", 2.4)):
    scene = glyph_still_scene(dataset, ViewConfig(t=t, spacing=0.6))
    path = OUT / f"glyphs_{tag}.svg"
    path.write_bytes(export_svg(scene))

    glyphs = scene.payload3d["glyphs"]
    shears = [g["shear_angle_deg"] for g in glyphs if g["shear_angle_deg"] is not None]
    swing = max((g["trajectory"]["swept_angle_deg"] for g in glyphs), default=0.0)
    print(
        f"t={t:.1f}s: {len(glyphs)} glyphs, "
        f"max shear {max(shears):.1f} deg, max swept {swing:.0f} deg -> {path}"
    )

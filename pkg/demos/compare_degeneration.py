"""
Degeneration sweep as simplified strips
=======================================

Soften the discs step by step and look at the whole ensemble at once. The
simplified view drops exact numbers in favor of discretized color strips;
with a bin edge at 2 mm, "deforms more than 2 mm" is readable straight off
the palette.

    python3 demos/compare_degeneration.py
"""

import dataclasses
from pathlib import Path

import numpy as np

from spineviz.dataset.matrices import Attribute
from spineviz.exporter.scene import build_scene
from spineviz.exporter.svg import export_svg
from spineviz.layout.charts import ViewConfig
from spineviz.simkernel.model import load_model, load_scenario
from spineviz.simkernel.run import run

OUT = Path("demos/out")
OUT.mkdir(parents=True, exist_ok=True)

model = load_model("cervical_default")
bend = dataclasses.replace(load_scenario("lateral_bend"), duration=1.5)
disc_ids = [j.id for j in model.joints if j.disc]

# One run per degeneration degree. Degree 1 is healthy; each step softens
# every disc by the same factor, so deformation can only grow.
runs = []
for degree in (1, 3, 5):
    scenario = dataclasses.replace(
        bend, degeneration={d: degree for d in disc_ids}
    )
    dataset = run(model, scenario)
    peak = float(np.nanmax(dataset.matrices[Attribute.DEFORMATION].values))
    print(f"degree {degree}: peak deformation {peak:.2f} mm ({dataset.manifest.id})")
    runs.append(dataset)

# ---------------------------------------------------------------------------
# Primary plus ensemble: the healthy run anchors the strips, the softened
# runs stack underneath each disc row. Default binning (four bins over
# 0..4 mm) puts the clinically interesting 2 mm boundary on a bin edge.
config = ViewConfig(mode="simplified", attribute="deformation", t=1.0)
scene = build_scene(runs[0], config, ensemble=runs)
(OUT / "degeneration_strips.svg").write_bytes(export_svg(scene))
print("wrote", OUT / "degeneration_strips.svg")

# For a head-to-head of just two runs, the overlay view keeps the numbers:
# the softened run is drawn as a gray area behind the healthy one and the
# healthy series becomes a line wherever the gray rises above it.
overlay = ViewConfig(t=1.0, compare=runs[2].manifest.id)
scene = build_scene(runs[0], overlay, compare=runs[2])
(OUT / "healthy_vs_soft.svg").write_bytes(export_svg(scene))
print("wrote", OUT / "healthy_vs_soft.svg")

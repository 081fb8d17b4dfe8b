"""Deterministic stand-in meshes for vertebrae and discs.

Low-poly capped cylinders around each body's rest position (vertebrae) and
each disc joint's midpoint (discs). Vertices are in world-rest coordinates;
the client applies per-tick rigid transforms relative to the rest pose.
"""

from __future__ import annotations

import numpy as np

from ..dataset.meshes import Mesh

VERTEBRA_RADIUS = 17.0
VERTEBRA_HEIGHT = 12.0
DISC_RADIUS = 13.0
DISC_HEIGHT = 7.0
SEGMENTS = 12


def capped_cylinder(center, radius: float, height: float, segments: int = SEGMENTS,
                    owner: str = "") -> Mesh:
    """Y-axis cylinder: two vertex rings, two cap centers, 4*segments triangles."""
    center = np.asarray(center, dtype=float)
    angles = 2.0 * np.pi * np.arange(segments) / segments
    ring = np.stack([radius * np.cos(angles), np.zeros(segments), radius * np.sin(angles)], axis=1)
    half = np.array([0.0, height / 2.0, 0.0])
    top = ring + half
    bottom = ring - half
    verts = np.vstack([top, bottom, half[None, :], -half[None, :]]) + center

    i_top_center = 2 * segments
    i_bottom_center = 2 * segments + 1
    tris = []
    for k in range(segments):
        k2 = (k + 1) % segments
        t0, t1 = k, k2
        b0, b1 = segments + k, segments + k2
        tris.append([t0, b0, t1])
        tris.append([t1, b0, b1])
        tris.append([i_top_center, t0, t1])
        tris.append([i_bottom_center, b1, b0])
    return Mesh(verts, np.array(tris, dtype=int), owner)


def vertebra_mesh(center, owner: str) -> Mesh:
    return capped_cylinder(center, VERTEBRA_RADIUS, VERTEBRA_HEIGHT, owner=owner)


def disc_mesh(center, owner: str) -> Mesh:
    return capped_cylinder(center, DISC_RADIUS, DISC_HEIGHT, owner=owner)

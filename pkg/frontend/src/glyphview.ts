// Builders that turn the scene's 3D payload into named three.js objects.
// Geometry arrives fully computed (tips, planes, isoline chains, trajectory
// quads); this module only instantiates it, which keeps the objects easy to
// count in tests and easy to toggle from the UI.

import * as THREE from 'three';
import type { Chart3d, GlyphPayload } from './types';

function vec3(p: [number, number, number]): THREE.Vector3 {
    return new THREE.Vector3(p[0], p[1], p[2]);
}

function lineFrom(points: THREE.Vector3[], closed: boolean, color: number): THREE.Line {
    const geometry = new THREE.BufferGeometry().setFromPoints(points);
    const material = new THREE.LineBasicMaterial({ color });
    return closed ? new THREE.LineLoop(geometry, material) : new THREE.Line(geometry, material);
}

const PLANE_SEGMENTS = 48;

/**
 * One group per disc. Isolines are always present; the arrow, shear plane
 * and trajectory strip only when the glyph is visible (spacing gate or a
 * zero force hides them - silently, per the payload's `visible` flag).
 */
export function buildGlyphObjects(glyphs: GlyphPayload[]): THREE.Group {
    const root = new THREE.Group();
    root.name = 'glyphs';
    for (const glyph of glyphs) {
        const group = new THREE.Group();
        group.name = `glyph:${glyph.disc}`;

        for (const iso of glyph.isolines) {
            for (const chain of iso.chains) {
                const line = lineFrom(chain.points.map(vec3), chain.closed, 0x6b7f99);
                line.name = 'isoline';
                group.add(line);
            }
        }

        if (glyph.visible) {
            const tail = vec3(glyph.tail);
            const tip = vec3(glyph.tip);
            const shaft = lineFrom([tail, tip], false, 0xb03a2e);
            shaft.name = 'arrow';
            group.add(shaft);

            const dir = tip.clone().sub(tail);
            if (dir.lengthSq() > 0) {
                const head = new THREE.Mesh(
                    new THREE.ConeGeometry(glyph.length * 0.06, glyph.length * 0.18, 12),
                    new THREE.MeshBasicMaterial({ color: 0xb03a2e }),
                );
                head.name = 'arrow-head';
                head.position.copy(tip);
                head.quaternion.setFromUnitVectors(
                    new THREE.Vector3(0, 1, 0),
                    dir.normalize(),
                );
                group.add(head);
            }

            const center = vec3(glyph.plane_center);
            const u = vec3(glyph.plane_u);
            const v = vec3(glyph.plane_v);
            const rim: THREE.Vector3[] = [];
            for (let i = 0; i < PLANE_SEGMENTS; i++) {
                const a = (2 * Math.PI * i) / PLANE_SEGMENTS;
                rim.push(
                    center
                        .clone()
                        .addScaledVector(u, glyph.plane_radius * Math.cos(a))
                        .addScaledVector(v, glyph.plane_radius * Math.sin(a)),
                );
            }
            const plane = lineFrom(rim, true, 0x444444);
            plane.name = 'plane';
            group.add(plane);

            glyph.trajectory.quads.forEach((quad, i) => {
                const corners = quad.map(vec3);
                const geometry = new THREE.BufferGeometry().setFromPoints([
                    corners[0], corners[1], corners[2],
                    corners[0], corners[2], corners[3],
                ]);
                geometry.computeVertexNormals();
                const alpha = glyph.trajectory.opacities[i];
                const mesh = new THREE.Mesh(
                    geometry,
                    new THREE.MeshBasicMaterial({
                        color: 0x598cc4,
                        transparent: true,
                        opacity: (alpha[0] + alpha[1] + alpha[2] + alpha[3]) / 4,
                        side: THREE.DoubleSide,
                        depthWrite: false,
                    }),
                );
                mesh.name = 'trajectory-quad';
                group.add(mesh);
            });
        }
        root.add(group);
    }
    return root;
}

const CHART_MARGIN_MM = 25;

/**
 * Ribbons for the stacked view: each chart becomes a filled time/value strip
 * standing at its anatomical level, extending laterally on the chart's side.
 * Heights and colors are used exactly as shipped; gaps (missing ticks) break
 * the ribbon.
 */
export function buildCharts3d(charts: Chart3d[], times: number[]): THREE.Group {
    const root = new THREE.Group();
    root.name = 'charts3d';
    const n = Math.max(times.length, 2);
    for (const chart of charts) {
        const sign = chart.side === 'left' ? -1 : 1;
        const baseY = chart.anchor_world[1];
        const positions: number[] = [];
        const colors: number[] = [];

        const pushQuad = (k: number) => {
            const h0 = chart.heights_norm[k];
            const h1 = chart.heights_norm[k + 1];
            if (h0 === null || h1 === null) return;
            const x0 = sign * (CHART_MARGIN_MM + (k / (n - 1)) * chart.width_mm);
            const x1 = sign * (CHART_MARGIN_MM + ((k + 1) / (n - 1)) * chart.width_mm);
            const y0 = baseY + h0 * chart.height_mm;
            const y1 = baseY + h1 * chart.height_mm;
            const quad = [
                [x0, baseY, 0], [x1, baseY, 0], [x1, y1, 0],
                [x0, baseY, 0], [x1, y1, 0], [x0, y0, 0],
            ];
            const c0 = chart.colors[k] ?? [0.6, 0.6, 0.6];
            const c1 = chart.colors[k + 1] ?? [0.6, 0.6, 0.6];
            const cs = [c0, c1, c1, c0, c1, c0];
            quad.forEach((p, i) => {
                positions.push(p[0], p[1], p[2]);
                colors.push(cs[i][0], cs[i][1], cs[i][2]);
            });
        };
        for (let k = 0; k < chart.heights_norm.length - 1; k++) pushQuad(k);

        const geometry = new THREE.BufferGeometry();
        geometry.setAttribute('position', new THREE.Float32BufferAttribute(positions, 3));
        geometry.setAttribute('color', new THREE.Float32BufferAttribute(colors, 3));
        const mesh = new THREE.Mesh(
            geometry,
            new THREE.MeshBasicMaterial({ vertexColors: true, side: THREE.DoubleSide }),
        );
        mesh.name = `chart:${chart.structure}`;
        root.add(mesh);
    }
    return root;
}

export interface GlyphCounts {
    groups: number;
    arrows: number;
    planes: number;
    isolines: number;
    trajectoryQuads: number;
}

/** Tally the named children - the unit tests assert against these. */
export function countGlyphObjects(root: THREE.Group): GlyphCounts {
    const counts: GlyphCounts = {
        groups: 0,
        arrows: 0,
        planes: 0,
        isolines: 0,
        trajectoryQuads: 0,
    };
    for (const group of root.children) {
        counts.groups += 1;
        for (const child of group.children) {
            if (child.name === 'arrow') counts.arrows += 1;
            else if (child.name === 'plane') counts.planes += 1;
            else if (child.name === 'isoline') counts.isolines += 1;
            else if (child.name === 'trajectory-quad') counts.trajectoryQuads += 1;
        }
    }
    return counts;
}

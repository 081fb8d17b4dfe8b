// Rigid-body animation window: vertebra meshes posed straight from the
// kinematics track. No interpolation - the pose shown is always an actual
// solver tick, the same one the charts' cursor is snapped to.

import * as THREE from 'three';
import type { KinematicsPayload, MeshPayload } from './types';

/**
 * Index of the tick nearest to t; an exact midpoint rounds to the later
 * tick, and out-of-range times clamp. Matches the server's snapping, so a
 * locally computed pose agrees with the scene cursor for the same t.
 */
export function nearestTick(times: number[], t: number): number {
    if (times.length === 0) throw new Error('empty time track');
    if (t <= times[0]) return 0;
    if (t >= times[times.length - 1]) return times.length - 1;
    let lo = 0;
    let hi = times.length - 1;
    while (hi - lo > 1) {
        const mid = (lo + hi) >> 1;
        if (times[mid] <= t) lo = mid;
        else hi = mid;
    }
    return t - times[lo] >= times[hi] - t ? hi : lo;
}

export interface BodyPose {
    quaternion: [number, number, number, number]; // (w, x, y, z)
    translation: [number, number, number];
}

export class AnimationWindow {
    readonly root = new THREE.Group();
    private readonly nodes = new Map<string, THREE.Group>();
    private readonly bodyIndex = new Map<string, number>();

    constructor(private readonly kin: KinematicsPayload) {
        kin.bodies.forEach((body, i) => this.bodyIndex.set(body, i));
    }

    /**
     * Register a body's mesh. The rest-pose origin (tick-0 translation) is
     * baked into the geometry so poses apply as plain quaternion+position.
     */
    addBody(body: string, mesh: MeshPayload): THREE.Group {
        const idx = this.bodyIndex.get(body);
        if (idx === undefined) throw new Error(`no kinematics for body ${body}`);
        const rest = this.kin.translations[0][idx];

        const geometry = new THREE.BufferGeometry();
        geometry.setAttribute(
            'position',
            new THREE.Float32BufferAttribute(mesh.vertices.flat(), 3),
        );
        geometry.setIndex(mesh.triangles.flat());
        geometry.translate(-rest[0], -rest[1], -rest[2]);
        geometry.computeVertexNormals();

        const material = new THREE.MeshLambertMaterial({ color: 0xd9d4c8 });
        const node = new THREE.Group();
        node.name = body;
        node.add(new THREE.Mesh(geometry, material));
        this.nodes.set(body, node);
        this.root.add(node);
        this.applyPose(node, 0, idx);
        return node;
    }

    bodies(): string[] {
        return [...this.nodes.keys()];
    }

    pose(tick: number, body: string): BodyPose {
        const idx = this.bodyIndex.get(body);
        if (idx === undefined) throw new Error(`no kinematics for body ${body}`);
        return {
            quaternion: this.kin.quaternions[tick][idx],
            translation: this.kin.translations[tick][idx],
        };
    }

    /** Pose every registered body at the given solver tick. */
    applyTick(tick: number): void {
        if (tick < 0 || tick >= this.kin.times.length) {
            throw new Error(`tick ${tick} outside kinematics track`);
        }
        for (const [body, node] of this.nodes) {
            this.applyPose(node, tick, this.bodyIndex.get(body)!);
        }
    }

    private applyPose(node: THREE.Group, tick: number, idx: number): void {
        const [w, x, y, z] = this.kin.quaternions[tick][idx];
        const [tx, ty, tz] = this.kin.translations[tick][idx];
        node.quaternion.set(x, y, z, w); // stored (w,x,y,z); three wants (x,y,z,w)
        node.position.set(tx, ty, tz);
    }
}

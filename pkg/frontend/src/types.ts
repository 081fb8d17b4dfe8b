// Mirrors of the wire formats served by the core. The scene document is the
// single source of truth for layout: this client renders what it is given
// and never computes chart geometry itself.

export type Rgb = [number, number, number];
export type Fill = Rgb | 'none' | 'hatch';

export interface PolygonPrimitive {
    kind: 'polygon';
    layer: string;
    points: [number, number][];
    fill: Fill;
    stroke: Rgb | 'none';
    stroke_width: number;
    opacity: number;
}

export interface PolylinePrimitive {
    kind: 'polyline';
    layer: string;
    points: [number, number][];
    stroke: Rgb | 'none';
    stroke_width: number;
    opacity: number;
}

export interface LabelPrimitive {
    kind: 'label';
    layer: string;
    text: string;
    pos: [number, number];
    anchor: 'start' | 'middle' | 'end';
    size: number;
}

export type Primitive = PolygonPrimitive | PolylinePrimitive | LabelPrimitive;

export interface Cursor {
    tick: number;
    time: number;
    x_right: number;
    x_left: number;
    y_top: number;
    y_bottom: number;
    labels: [string, string, [number, number]][];
}

export interface GlyphTrajectory {
    quads: [number, number, number][][];
    opacities: number[][];
    swept_angle_deg: number;
}

export interface GlyphPayload {
    disc: string;
    t: number;
    visible: boolean;
    tail: [number, number, number];
    tip: [number, number, number];
    length: number;
    plane_center: [number, number, number];
    plane_normal: [number, number, number];
    plane_u: [number, number, number];
    plane_v: [number, number, number];
    plane_radius: number;
    shear_angle_deg: number | null;
    isolines: { level: number; chains: { closed: boolean; points: [number, number, number][] }[] }[];
    trajectory: GlyphTrajectory;
}

export interface BodyTransform {
    id: string;
    quaternion: [number, number, number, number]; // (w, x, y, z)
    translation: [number, number, number];
    rest_origin: [number, number, number];
}

export interface Chart3d {
    structure: string;
    side: string;
    anchor_world: [number, number, number];
    width_mm: number;
    height_mm: number;
    heights_norm: (number | null)[]; // null where the tick is missing
    colors: (Rgb | null)[];
}

export interface Payload3d {
    meshes: string[];
    transforms: BodyTransform[];
    charts3d: Chart3d[];
    glyphs: GlyphPayload[];
}

export interface SceneDocument {
    schema_version: number;
    dataset: string;
    mode: string;
    config: Record<string, unknown>;
    canvas: [number, number];
    times: number[];
    time_range: [number, number];
    value_range: [number, number];
    attributes: string[];
    cursor: Cursor;
    primitives: Primitive[];
    payload3d: Payload3d;
}

export interface Manifest {
    id: string;
    span: string;
    dt: number;
    matrices: Record<string, string>;
    kinematics: string;
    meshes: Record<string, string>;
    compare: string | null;
}

export interface MeshPayload {
    structure: string;
    vertices: [number, number, number][];
    triangles: [number, number, number][];
}

export interface KinematicsPayload {
    times: number[];
    bodies: string[];
    // [tick][body] -> (w, x, y, z) / (x, y, z)
    quaternions: [number, number, number, number][][];
    translations: [number, number, number][][];
}

export const SUPPORTED_SCHEMA = 1;

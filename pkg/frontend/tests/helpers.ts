// Shared test doubles: a canvas context that records its call sequence, and
// a factory for minimal but well-formed scene documents.

import type { Canvas2DLike } from '../src/charts';
import type { Primitive, SceneDocument } from '../src/types';

export type Op = [string, ...unknown[]];

export class RecordingCtx implements Canvas2DLike {
    ops: Op[] = [];

    private record(name: string, ...args: unknown[]): void {
        this.ops.push([name, ...args]);
    }

    // style state - recorded as ops so ordering is observable
    set fillStyle(v: string | CanvasGradient | CanvasPattern) {
        this.record('set fillStyle', v);
    }
    get fillStyle(): string {
        return this.last('set fillStyle');
    }
    set strokeStyle(v: string | CanvasGradient | CanvasPattern) {
        this.record('set strokeStyle', v);
    }
    get strokeStyle(): string {
        return this.last('set strokeStyle');
    }
    set lineWidth(v: number) {
        this.record('set lineWidth', v);
    }
    get lineWidth(): number {
        return Number(this.last('set lineWidth'));
    }
    set globalAlpha(v: number) {
        this.record('set globalAlpha', v);
    }
    get globalAlpha(): number {
        return Number(this.last('set globalAlpha'));
    }
    set font(v: string) {
        this.record('set font', v);
    }
    get font(): string {
        return this.last('set font');
    }
    set textAlign(v: CanvasTextAlign) {
        this.record('set textAlign', v);
    }
    get textAlign(): CanvasTextAlign {
        return this.last('set textAlign') as CanvasTextAlign;
    }

    save(): void {
        this.record('save');
    }
    restore(): void {
        this.record('restore');
    }
    scale(x: number, y: number): void {
        this.record('scale', x, y);
    }
    translate(x: number, y: number): void {
        this.record('translate', x, y);
    }
    clearRect(x: number, y: number, w: number, h: number): void {
        this.record('clearRect', x, y, w, h);
    }
    beginPath(): void {
        this.record('beginPath');
    }
    moveTo(x: number, y: number): void {
        this.record('moveTo', x, y);
    }
    lineTo(x: number, y: number): void {
        this.record('lineTo', x, y);
    }
    closePath(): void {
        this.record('closePath');
    }
    fill(): void {
        this.record('fill');
    }
    stroke(): void {
        this.record('stroke');
    }
    clip(): void {
        this.record('clip');
    }
    fillText(text: string, x: number, y: number): void {
        this.record('fillText', text, x, y);
    }

    calls(name: string): Op[] {
        return this.ops.filter(([op]) => op === name);
    }

    private last(name: string): string {
        for (let i = this.ops.length - 1; i >= 0; i--) {
            if (this.ops[i][0] === name) return String(this.ops[i][1]);
        }
        return '';
    }
}

export function makeScene(overrides: Partial<SceneDocument> = {}): SceneDocument {
    const times = overrides.times ?? [0, 0.1, 0.2, 0.3, 0.4, 0.5];
    const base: SceneDocument = {
        schema_version: 1,
        dataset: 'ds',
        mode: 'charts2d',
        config: {},
        canvas: [200, 100],
        times,
        time_range: [times[0], times[times.length - 1]],
        value_range: [0, 1],
        attributes: ['force_magnitude'],
        cursor: {
            tick: 0,
            time: times[0],
            x_right: 0,
            x_left: 0,
            y_top: 0,
            y_bottom: 100,
            labels: [],
        },
        primitives: [],
        payload3d: { meshes: [], transforms: [], charts3d: [], glyphs: [] },
    };
    return { ...base, ...overrides };
}

export function polygon(overrides: Partial<Primitive> & { points: [number, number][] }): Primitive {
    return {
        kind: 'polygon',
        layer: 'chart-area',
        fill: [0.2, 0.4, 0.6],
        stroke: 'none',
        stroke_width: 0,
        opacity: 1,
        ...overrides,
    } as Primitive;
}

// 2D scene renderer. The server ships primitives already in painter order,
// so drawing is a single forward pass - the client never re-layers, never
// re-layouts, never touches the numbers.

import type { Fill, Primitive, Rgb, SceneDocument } from './types';

/**
 * The slice of CanvasRenderingContext2D we actually use. Structural, so
 * tests can substitute a recording stub without a DOM.
 */
export interface Canvas2DLike {
    fillStyle: string | CanvasGradient | CanvasPattern;
    strokeStyle: string | CanvasGradient | CanvasPattern;
    lineWidth: number;
    globalAlpha: number;
    font: string;
    textAlign: CanvasTextAlign;
    save(): void;
    restore(): void;
    scale(x: number, y: number): void;
    translate(x: number, y: number): void;
    clearRect(x: number, y: number, w: number, h: number): void;
    beginPath(): void;
    moveTo(x: number, y: number): void;
    lineTo(x: number, y: number): void;
    closePath(): void;
    fill(): void;
    stroke(): void;
    clip(): void;
    fillText(text: string, x: number, y: number): void;
}

export function cssColor(value: Rgb): string {
    const [r, g, b] = value.map((c) => Math.round(Math.min(Math.max(c, 0), 1) * 255));
    return `rgb(${r}, ${g}, ${b})`;
}

const HATCH_STEP = 6;

function tracePath(ctx: Canvas2DLike, points: [number, number][], close: boolean): void {
    ctx.beginPath();
    points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
    if (close) ctx.closePath();
}

function fillPolygon(ctx: Canvas2DLike, points: [number, number][], fill: Fill): void {
    if (fill === 'none') return;
    if (fill === 'hatch') {
        // Clip to the polygon, then rule diagonal lines across its bounds.
        const xs = points.map((p) => p[0]);
        const ys = points.map((p) => p[1]);
        const x0 = Math.min(...xs);
        const x1 = Math.max(...xs);
        const y0 = Math.min(...ys);
        const y1 = Math.max(...ys);
        ctx.save();
        tracePath(ctx, points, true);
        ctx.clip();
        ctx.strokeStyle = 'rgb(120, 120, 120)';
        ctx.lineWidth = 0.7;
        ctx.beginPath();
        const span = y1 - y0;
        for (let x = x0 - span; x <= x1; x += HATCH_STEP) {
            ctx.moveTo(x, y1);
            ctx.lineTo(x + span, y0);
        }
        ctx.stroke();
        ctx.restore();
        return;
    }
    tracePath(ctx, points, true);
    ctx.fillStyle = cssColor(fill);
    ctx.fill();
}

function drawPrimitive(ctx: Canvas2DLike, prim: Primitive): void {
    switch (prim.kind) {
        case 'polygon': {
            ctx.globalAlpha = prim.opacity;
            fillPolygon(ctx, prim.points, prim.fill);
            if (prim.stroke !== 'none' && prim.stroke_width > 0) {
                tracePath(ctx, prim.points, true);
                ctx.strokeStyle = cssColor(prim.stroke);
                ctx.lineWidth = prim.stroke_width;
                ctx.stroke();
            }
            break;
        }
        case 'polyline': {
            if (prim.stroke === 'none') break;
            ctx.globalAlpha = prim.opacity;
            tracePath(ctx, prim.points, false);
            ctx.strokeStyle = cssColor(prim.stroke);
            ctx.lineWidth = prim.stroke_width;
            ctx.stroke();
            break;
        }
        case 'label': {
            ctx.globalAlpha = 1;
            ctx.fillStyle = 'rgb(40, 40, 40)';
            ctx.font = `${prim.size}px sans-serif`;
            ctx.textAlign =
                prim.anchor === 'middle' ? 'center' : prim.anchor === 'end' ? 'right' : 'left';
            ctx.fillText(prim.text, prim.pos[0], prim.pos[1]);
            break;
        }
    }
}

/**
 * Paint a scene document onto a canvas of the given pixel size. The scene's
 * own canvas is fit with a uniform scale and centered; aspect is preserved.
 */
export function renderScene(
    ctx: Canvas2DLike,
    scene: SceneDocument,
    width: number,
    height: number,
): void {
    ctx.save();
    ctx.clearRect(0, 0, width, height);
    const [cw, ch] = scene.canvas;
    const s = Math.min(width / cw, height / ch);
    ctx.translate((width - cw * s) / 2, (height - ch * s) / 2);
    ctx.scale(s, s);
    for (const prim of scene.primitives) drawPrimitive(ctx, prim);
    ctx.restore();
}

/** Count primitives per kind - handy for tests and the status bar. */
export function primitiveCensus(scene: SceneDocument): Record<string, number> {
    const counts: Record<string, number> = {};
    for (const prim of scene.primitives) {
        counts[prim.kind] = (counts[prim.kind] ?? 0) + 1;
    }
    return counts;
}

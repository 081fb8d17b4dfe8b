import { describe, expect, it } from 'vitest';
import type { SceneParams } from '../src/api';
import { nearestTick } from '../src/anim';
import { Workbench, type SceneSource } from '../src/state';
import type { SceneDocument } from '../src/types';
import { makeScene } from './helpers';

const TIMES = [0, 0.1, 0.2, 0.3, 0.4, 0.5];

/** Emulates the server: snaps t to the grid and echoes the mode back. */
class FakeApi implements SceneSource {
    calls: SceneParams[] = [];
    schemaVersion = 1;
    failNext = false;

    async scene(_id: string, params: SceneParams): Promise<SceneDocument> {
        this.calls.push(params);
        if (this.failNext) {
            this.failNext = false;
            throw new Error('boom');
        }
        const t = Math.min(Math.max(params.t ?? 0, TIMES[0]), TIMES[TIMES.length - 1]);
        const tick = nearestTick(TIMES, t);
        return makeScene({
            schema_version: this.schemaVersion,
            mode: params.mode,
            times: TIMES,
            cursor: {
                tick,
                time: TIMES[tick],
                x_right: 0,
                x_left: 0,
                y_top: 0,
                y_bottom: 100,
                labels: [],
            },
        });
    }
}

function workbench(api: SceneSource = new FakeApi()) {
    return new Workbench(api, { debounceMs: 1 });
}

describe('Workbench time handling', () => {
    it('shows the snapped cursor time, not the raw slider value', async () => {
        const wb = workbench();
        await wb.open('ds');
        wb.scrub(0.248);
        await wb.flush();
        expect(wb.scene!.cursor.tick).toBe(2);
        expect(wb.displayedT()).toBeCloseTo(0.2, 12);
    });

    it('snaps an exact midpoint to the later tick', async () => {
        const wb = workbench();
        await wb.open('ds');
        wb.scrub(0.25);
        await wb.flush();
        expect(wb.scene!.cursor.tick).toBe(3);
    });

    it('clamps scrubbed times to the scene range', async () => {
        const api = new FakeApi();
        const wb = workbench(api);
        await wb.open('ds');
        wb.scrub(999);
        await wb.flush();
        expect(api.calls.at(-1)!.t).toBe(0.5);
        wb.scrub(-7);
        await wb.flush();
        expect(api.calls.at(-1)!.t).toBe(0);
    });

    it('pauses playback when the user scrubs', async () => {
        const wb = workbench();
        await wb.open('ds');
        wb.play();
        expect(wb.playback.playing).toBe(true);
        wb.scrub(0.2);
        expect(wb.playback.playing).toBe(false);
        await wb.flush();
    });

    it('coalesces rapid scrubs into one request', async () => {
        const api = new FakeApi();
        const wb = workbench(api);
        await wb.open('ds');
        const before = api.calls.length;
        for (const t of [0.11, 0.12, 0.13, 0.14, 0.31]) wb.scrub(t);
        await wb.flush();
        expect(api.calls.length).toBe(before + 1);
        expect(api.calls.at(-1)!.t).toBe(0.31);
    });
});

describe('Workbench playback', () => {
    it('advances time at real speed times the multiplier', async () => {
        const wb = workbench();
        await wb.open('ds');
        wb.play();
        wb.playback.speed = 2;
        wb.tickPlayback(0.1);
        expect(wb.view.t).toBeCloseTo(0.2, 12);
        await wb.flush();
    });

    it('loops at the end of the range', async () => {
        const wb = workbench();
        await wb.open('ds');
        wb.play();
        wb.view.t = 0.45;
        const wrapped = wb.tickPlayback(0.1); // 0.55 > 0.5
        expect(wrapped).toBe(true);
        expect(wb.view.t).toBeCloseTo(0.05, 12);
        await wb.flush();
    });

    it('does nothing while paused', async () => {
        const wb = workbench();
        await wb.open('ds');
        wb.view.t = 0.2;
        expect(wb.tickPlayback(0.5)).toBe(false);
        expect(wb.view.t).toBe(0.2);
    });
});

describe('Workbench comparison picking', () => {
    it('keeps the current mode for a single reference dataset', async () => {
        const api = new FakeApi();
        const wb = workbench(api);
        await wb.open('ds');
        wb.comparePick('other');
        await wb.flush();
        expect(wb.view.mode).toBe('charts2d');
        expect(api.calls.at(-1)!.compare).toEqual(['other']);
    });

    it('forces simplified mode for more than one pick', async () => {
        const wb = workbench();
        await wb.open('ds');
        wb.ensemblePick(['a', 'b', 'c']);
        await wb.flush();
        expect(wb.view.mode).toBe('simplified');
        expect(wb.scene!.mode).toBe('simplified');
    });

    it('returns to plain charts when everything is deselected', async () => {
        const wb = workbench();
        await wb.open('ds');
        wb.ensemblePick(['a', 'b']);
        await wb.flush();
        wb.ensemblePick([]);
        await wb.flush();
        expect(wb.view.mode).toBe('charts2d');
        expect(wb.view.compare).toEqual([]);
    });
});

describe('Workbench response handling', () => {
    it('discards stale responses by sequence number', async () => {
        const gates: ((doc: SceneDocument) => void)[] = [];
        const api: SceneSource = {
            scene: () => new Promise((resolve) => gates.push(resolve)),
        };
        const wb = new Workbench(api, { debounceMs: 1 });
        wb.view.datasetId = 'ds';
        wb.view.t = 0.1;
        const first = wb.refresh();
        wb.view.t = 0.3;
        const second = wb.refresh();
        expect(gates.length).toBe(2);

        const fresh = makeScene({ cursor: { ...makeScene().cursor, tick: 3, time: 0.3 } });
        const stale = makeScene({ cursor: { ...makeScene().cursor, tick: 1, time: 0.1 } });
        gates[1](fresh);
        await second;
        expect(wb.scene!.cursor.tick).toBe(3);
        gates[0](stale); // arrives late; must not win
        await first;
        expect(wb.scene!.cursor.tick).toBe(3);
    });

    it('raises a blocking banner on a schema version mismatch', async () => {
        const api = new FakeApi();
        const wb = workbench(api);
        await wb.open('ds');
        const shown = wb.scene;
        expect(shown).not.toBeNull();

        api.schemaVersion = 99;
        wb.scrub(0.4);
        await wb.flush();
        expect(wb.error).toMatch(/schema/);
        expect(wb.scene).toBe(shown); // the unsupported scene was not applied
    });

    it('surfaces fetch errors and recovers on the next success', async () => {
        const api = new FakeApi();
        const wb = workbench(api);
        await wb.open('ds');
        api.failNext = true;
        wb.scrub(0.3);
        await wb.flush();
        expect(wb.error).toMatch(/boom/);
        wb.scrub(0.2);
        await wb.flush();
        expect(wb.error).toBeNull();
    });

    it('notifies the change listener on every applied update', async () => {
        let pings = 0;
        const wb = new Workbench(new FakeApi(), {
            debounceMs: 1,
            onChange: () => {
                pings += 1;
            },
        });
        await wb.open('ds');
        expect(pings).toBeGreaterThan(0);
    });
});

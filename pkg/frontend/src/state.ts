// UI state and the fetch pipeline. The rules worth reading twice:
//  - the server snaps time; the UI always shows the scene it was last given,
//    so slider, cursor line and animation pose can never disagree;
//  - responses are guarded by a sequence number - a slow old response never
//    overwrites a newer one;
//  - picking one comparison dataset keeps the current mode (gray overlay),
//    picking more than one forces the simplified strip view.

import type { SceneParams } from './api';
import { SUPPORTED_SCHEMA, type SceneDocument } from './types';

/** What the store needs from the API client; tests substitute a fake. */
export interface SceneSource {
    scene(id: string, params: SceneParams): Promise<SceneDocument>;
}

export interface ViewState {
    datasetId: string | null;
    mode: string;
    t: number;
    spacing: number;
    bins: number;
    attribute: string;
    compare: string[];
    kinds: string;
}

export interface Playback {
    playing: boolean;
    speed: number;
}

const DEFAULT_VIEW: Omit<ViewState, 'datasetId'> = {
    mode: 'charts2d',
    t: 0,
    spacing: 0,
    bins: 0,
    attribute: 'force_magnitude',
    compare: [],
    kinds: 'disc',
};

export interface WorkbenchOptions {
    debounceMs?: number;
    onChange?: () => void;
}

export class Workbench {
    view: ViewState = { datasetId: null, ...DEFAULT_VIEW };
    playback: Playback = { playing: false, speed: 1 };
    scene: SceneDocument | null = null;
    error: string | null = null;

    private seq = 0;
    private readonly debounceMs: number;
    private readonly onChange: () => void;
    private timer: ReturnType<typeof setTimeout> | null = null;
    private inflight: Promise<void> = Promise.resolve();

    constructor(
        private readonly api: SceneSource,
        options: WorkbenchOptions = {},
    ) {
        this.debounceMs = options.debounceMs ?? 60;
        this.onChange = options.onChange ?? (() => {});
    }

    /** Switch datasets: view parameters reset, scene refetched at t=0. */
    async open(datasetId: string): Promise<void> {
        this.view = { datasetId, ...DEFAULT_VIEW };
        this.playback.playing = false;
        await this.refresh();
    }

    timeRange(): [number, number] | null {
        return this.scene ? this.scene.time_range : null;
    }

    /** The time the user actually sees: the snapped cursor of the last scene. */
    displayedT(): number {
        return this.scene ? this.scene.cursor.time : this.view.t;
    }

    /** Manual time selection. Pauses playback - the user's t wins. */
    scrub(t: number): void {
        this.playback.playing = false;
        this.setT(t);
        this.scheduleRefresh();
    }

    play(): void {
        this.playback.playing = true;
        this.onChange();
    }

    pause(): void {
        this.playback.playing = false;
        this.onChange();
    }

    /**
     * Advance playback by dt wall-clock seconds (called once per frame).
     * Time moves at real speed x `playback.speed` and loops at the end.
     * Returns true when the loop wrapped.
     */
    tickPlayback(dt: number): boolean {
        if (!this.playback.playing || !this.scene) return false;
        const [t0, t1] = this.scene.time_range;
        const span = t1 - t0;
        if (span <= 0) return false;
        const advanced = this.view.t + dt * this.playback.speed;
        const wrapped = advanced > t1;
        this.view.t = wrapped ? t0 + ((advanced - t0) % span) : advanced;
        this.scheduleRefresh();
        return wrapped;
    }

    setMode(mode: string): void {
        this.view.mode = mode;
        void this.refresh();
    }

    setSpacing(spacing: number): void {
        this.view.spacing = Math.min(Math.max(spacing, 0), 1);
        this.scheduleRefresh();
    }

    setBins(bins: number): void {
        this.view.bins = bins;
        void this.refresh();
    }

    setAttribute(attribute: string): void {
        this.view.attribute = attribute;
        void this.refresh();
    }

    setKinds(kinds: string): void {
        this.view.kinds = kinds;
        void this.refresh();
    }

    /** One reference dataset: gray overlay within the existing charts. */
    comparePick(id: string | null): void {
        this.ensemblePick(id ? [id] : []);
    }

    /**
     * Any number of comparison datasets. More than one forces the simplified
     * strip view (continuous charts cannot stack that many); dropping back to
     * none returns to plain charts.
     */
    ensemblePick(ids: string[]): void {
        this.view.compare = [...ids];
        if (ids.length > 1) {
            this.view.mode = 'simplified';
        } else if (ids.length === 0 && this.view.mode === 'simplified') {
            this.view.mode = 'charts2d';
        }
        void this.refresh();
    }

    /** Run any pending debounced fetch now and wait for it. */
    async flush(): Promise<void> {
        if (this.timer !== null) {
            clearTimeout(this.timer);
            this.timer = null;
            await this.refresh();
        }
        await this.inflight;
    }

    private setT(t: number): void {
        const range = this.timeRange();
        this.view.t = range ? Math.min(Math.max(t, range[0]), range[1]) : t;
    }

    private scheduleRefresh(): void {
        this.onChange();
        if (this.timer !== null) clearTimeout(this.timer);
        this.timer = setTimeout(() => {
            this.timer = null;
            void this.refresh();
        }, this.debounceMs);
    }

    async refresh(): Promise<void> {
        if (!this.view.datasetId) return;
        const mySeq = ++this.seq;
        const params: SceneParams = {
            mode: this.view.mode,
            t: this.view.t,
            spacing: this.view.spacing,
            bins: this.view.bins,
            attr: this.view.attribute,
            compare: this.view.compare,
            kinds: this.view.kinds,
        };
        const request = this.api
            .scene(this.view.datasetId, params)
            .then((scene) => {
                if (mySeq !== this.seq) return; // a newer request superseded us
                if (scene.schema_version !== SUPPORTED_SCHEMA) {
                    this.error =
                        `scene schema ${scene.schema_version} not supported ` +
                        `(expected ${SUPPORTED_SCHEMA}); update the client`;
                    this.onChange();
                    return;
                }
                this.scene = scene;
                this.error = null;
                this.onChange();
            })
            .catch((err: unknown) => {
                if (mySeq !== this.seq) return;
                this.error = err instanceof Error ? err.message : String(err);
                this.onChange();
            });
        this.inflight = request;
        await request;
    }
}

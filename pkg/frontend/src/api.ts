// Thin typed client over the service HTTP API. All data reaches the UI
// through these calls; there is no file access and no local recomputation.

import type { KinematicsPayload, Manifest, MeshPayload, SceneDocument } from './types';

export interface SceneParams {
    mode?: string;
    t?: number;
    spacing?: number;
    bins?: number;
    attr?: string;
    compare?: string[]; // first id = overlay reference, all ids = ensemble
    kinds?: string;
}

export class ApiError extends Error {
    constructor(
        public readonly status: number,
        detail: string,
    ) {
        super(`HTTP ${status}: ${detail}`);
    }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
    constructor(
        private readonly base: string,
        private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
    ) {}

    private async get<T>(path: string): Promise<T> {
        const response = await this.fetchImpl(this.base + path);
        if (!response.ok) {
            throw new ApiError(response.status, await detailOf(response));
        }
        return (await response.json()) as T;
    }

    listDatasets(): Promise<string[]> {
        return this.get('/datasets');
    }

    manifest(id: string): Promise<Manifest> {
        return this.get(`/datasets/${encodeURIComponent(id)}/manifest`);
    }

    scene(id: string, params: SceneParams): Promise<SceneDocument> {
        return this.get(`/datasets/${encodeURIComponent(id)}/scene${sceneQuery(params)}`);
    }

    mesh(id: string, structure: string): Promise<MeshPayload> {
        return this.get(
            `/datasets/${encodeURIComponent(id)}/mesh/${encodeURIComponent(structure)}`,
        );
    }

    kinematics(id: string): Promise<KinematicsPayload> {
        return this.get(`/datasets/${encodeURIComponent(id)}/kinematics`);
    }

    async simulate(body: { model?: unknown; scenario?: unknown }): Promise<string> {
        const response = await this.fetchImpl(`${this.base}/simulate`, {
            method: 'POST',
            headers: { 'content-type': 'application/json' },
            body: JSON.stringify(body),
        });
        if (!response.ok) {
            throw new ApiError(response.status, await detailOf(response));
        }
        const payload = (await response.json()) as { id: string };
        return payload.id;
    }
}

export function sceneQuery(params: SceneParams): string {
    const q = new URLSearchParams();
    if (params.mode !== undefined) q.set('mode', params.mode);
    if (params.t !== undefined) q.set('t', String(params.t));
    if (params.spacing !== undefined && params.spacing !== 0) {
        q.set('spacing', String(params.spacing));
    }
    if (params.bins !== undefined && params.bins !== 0) q.set('bins', String(params.bins));
    if (params.attr !== undefined) q.set('attr', params.attr);
    if (params.compare !== undefined && params.compare.length > 0) {
        q.set('compare', params.compare.join(','));
    }
    if (params.kinds !== undefined) q.set('kinds', params.kinds);
    const text = q.toString();
    return text ? `?${text}` : '';
}

async function detailOf(response: Response): Promise<string> {
    try {
        const body = (await response.json()) as { detail?: string };
        return body.detail ?? response.statusText;
    } catch {
        return response.statusText;
    }
}

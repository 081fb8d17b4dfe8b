// Browser entry point: wires the state store to the DOM, a 2D chart canvas
// and two three.js windows (posed vertebrae; glyphs / stacked ribbons).
// All numbers come from the server - this file only routes them.

import * as THREE from 'three';
import { OrbitControls } from 'three/addons/controls/OrbitControls.js';
import { ApiClient } from './api';
import { AnimationWindow, nearestTick } from './anim';
import { renderScene } from './charts';
import { buildCharts3d, buildGlyphObjects } from './glyphview';
import { Workbench } from './state';
import './style.css';

const api = new ApiClient('');
const wb = new Workbench(api, { onChange: onStateChange });

function el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node as T;
}

const banner = el<HTMLDivElement>('banner');
const datasetList = el<HTMLDivElement>('datasets');
const modeSelect = el<HTMLSelectElement>('mode');
const attrSelect = el<HTMLSelectElement>('attr');
const spacingInput = el<HTMLInputElement>('spacing');
const binsSelect = el<HTMLSelectElement>('bins');
const timeSlider = el<HTMLInputElement>('time');
const timeLabel = el<HTMLSpanElement>('time-label');
const playButton = el<HTMLButtonElement>('play');
const speedSelect = el<HTMLSelectElement>('speed');
const chartCanvas = el<HTMLCanvasElement>('charts');
const statusLine = el<HTMLDivElement>('status');

let kinTimes: number[] = [];
let animWindow: AnimationWindow | null = null;

interface View3d {
    renderer: THREE.WebGLRenderer;
    scene: THREE.Scene;
    camera: THREE.PerspectiveCamera;
    controls: OrbitControls;
}

function makeView3d(canvas: HTMLCanvasElement): View3d {
    const renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    renderer.setPixelRatio(window.devicePixelRatio);
    const scene = new THREE.Scene();
    scene.background = new THREE.Color(0xf4f2ee);
    const camera = new THREE.PerspectiveCamera(40, 1, 1, 5000);
    camera.position.set(150, 80, 260);
    scene.add(new THREE.AmbientLight(0xffffff, 0.7));
    const key = new THREE.DirectionalLight(0xffffff, 1.2);
    key.position.set(200, 300, 250);
    scene.add(key);
    const controls = new OrbitControls(camera, canvas);
    controls.enableDamping = true;
    return { renderer, scene, camera, controls };
}

const animView = makeView3d(el<HTMLCanvasElement>('anim'));
const payloadView = makeView3d(el<HTMLCanvasElement>('payload'));
let payloadGroup: THREE.Group | null = null;

async function openDataset(id: string): Promise<void> {
    animWindow?.root.removeFromParent();
    animWindow = null;
    kinTimes = [];
    await wb.open(id);
    const kin = await api.kinematics(id);
    kinTimes = kin.times;
    const win = new AnimationWindow(kin);
    for (const body of kin.bodies) {
        try {
            win.addBody(body, await api.mesh(id, body));
        } catch {
            // bodies without a mesh just stay invisible
        }
    }
    animView.scene.add(win.root);
    animWindow = win;
    frameCamera(animView, win.root);
}

function frameCamera(view: View3d, object: THREE.Object3D): void {
    const box = new THREE.Box3().setFromObject(object);
    if (box.isEmpty()) return;
    const center = box.getCenter(new THREE.Vector3());
    const size = box.getSize(new THREE.Vector3()).length();
    view.controls.target.copy(center);
    view.camera.position.copy(center).add(new THREE.Vector3(size, size * 0.4, size * 1.4));
    view.camera.far = size * 20;
    view.camera.updateProjectionMatrix();
}

function rebuildPayloadView(): void {
    payloadGroup?.removeFromParent();
    payloadGroup = null;
    const scene = wb.scene;
    if (!scene) return;
    const group = new THREE.Group();
    group.add(buildGlyphObjects(scene.payload3d.glyphs));
    if (wb.view.mode === 'stacked3d') {
        group.add(buildCharts3d(scene.payload3d.charts3d, scene.times));
    }
    payloadView.scene.add(group);
    payloadGroup = group;
    if (group.children.some((c) => c.children.length > 0)) frameCamera(payloadView, group);
}

function redrawCharts(): void {
    const ctx = chartCanvas.getContext('2d');
    const scene = wb.scene;
    if (!ctx || !scene) return;
    const rect = chartCanvas.getBoundingClientRect();
    const dpr = window.devicePixelRatio || 1;
    chartCanvas.width = Math.max(1, Math.round(rect.width * dpr));
    chartCanvas.height = Math.max(1, Math.round(rect.height * dpr));
    ctx.save();
    ctx.scale(dpr, dpr);
    renderScene(ctx, scene, rect.width, rect.height);
    ctx.restore();
}

function onStateChange(): void {
    banner.hidden = wb.error === null;
    banner.textContent = wb.error ?? '';
    const scene = wb.scene;
    if (scene) {
        const [t0, t1] = scene.time_range;
        timeSlider.min = String(t0);
        timeSlider.max = String(t1);
        timeSlider.step = scene.times.length > 1 ? String(scene.times[1] - scene.times[0]) : '0.01';
        if (!wb.playback.playing) timeSlider.value = String(wb.displayedT());
        timeLabel.textContent = `t = ${wb.displayedT().toFixed(3)} s  (tick ${scene.cursor.tick})`;
        modeSelect.value = wb.view.mode;
        if ([...attrSelect.options].length !== scene.attributes.length) {
            attrSelect.replaceChildren(
                ...scene.attributes.map((a) => new Option(a, a)),
            );
        }
        attrSelect.value = wb.view.attribute;
        statusLine.textContent =
            `${scene.dataset} — ${scene.mode}, ` +
            `${scene.primitives.length} primitives, ` +
            `${scene.payload3d.glyphs.length} glyphs`;
    }
    playButton.textContent = wb.playback.playing ? 'pause' : 'play';
    redrawCharts();
    rebuildPayloadView();
}

async function refreshDatasetList(selected?: string): Promise<void> {
    const ids = await api.listDatasets();
    datasetList.replaceChildren(
        ...ids.map((id) => {
            const row = document.createElement('div');
            row.className = 'dataset-row';
            const view = document.createElement('input');
            view.type = 'radio';
            view.name = 'view-dataset';
            view.checked = id === (selected ?? wb.view.datasetId);
            view.addEventListener('change', () => void openDataset(id));
            const pick = document.createElement('input');
            pick.type = 'checkbox';
            pick.className = 'pick';
            pick.dataset.id = id;
            pick.addEventListener('change', () => {
                const picked = [...datasetList.querySelectorAll<HTMLInputElement>('.pick')]
                    .filter((box) => box.checked && box.dataset.id !== wb.view.datasetId)
                    .map((box) => box.dataset.id!);
                wb.ensemblePick(picked);
            });
            const label = document.createElement('span');
            label.textContent = id;
            row.append(view, pick, label);
            return row;
        }),
    );
}

modeSelect.addEventListener('change', () => wb.setMode(modeSelect.value));
attrSelect.addEventListener('change', () => wb.setAttribute(attrSelect.value));
spacingInput.addEventListener('input', () => wb.setSpacing(Number(spacingInput.value)));
binsSelect.addEventListener('change', () => wb.setBins(Number(binsSelect.value)));
timeSlider.addEventListener('input', () => wb.scrub(Number(timeSlider.value)));
playButton.addEventListener('click', () => (wb.playback.playing ? wb.pause() : wb.play()));
speedSelect.addEventListener('change', () => {
    wb.playback.speed = Number(speedSelect.value);
});

el<HTMLButtonElement>('run-sim').addEventListener('click', () => {
    const scenario = el<HTMLSelectElement>('scenario').value;
    el<HTMLButtonElement>('run-sim').disabled = true;
    api.simulate({ model: 'cervical_default', scenario })
        .then(async (id) => {
            await refreshDatasetList(id);
            await openDataset(id);
        })
        .catch((err: unknown) => {
            wb.error = err instanceof Error ? err.message : String(err);
            onStateChange();
        })
        .finally(() => {
            el<HTMLButtonElement>('run-sim').disabled = false;
        });
});

let lastFrame = performance.now();
function frame(now: number): void {
    const dt = (now - lastFrame) / 1000;
    lastFrame = now;
    if (wb.tickPlayback(dt)) {
        // looped; nothing extra to do, the tick already queued a refetch
    }
    if (wb.playback.playing) {
        timeSlider.value = String(wb.view.t);
        timeLabel.textContent = `t = ${wb.view.t.toFixed(3)} s`;
    }
    if (animWindow && kinTimes.length) {
        animWindow.applyTick(nearestTick(kinTimes, wb.view.t));
    }
    for (const view of [animView, payloadView]) {
        const canvas = view.renderer.domElement;
        const w = canvas.clientWidth;
        const h = canvas.clientHeight;
        if (w > 0 && h > 0 && (canvas.width !== w || canvas.height !== h)) {
            view.renderer.setSize(w, h, false);
            view.camera.aspect = w / h;
            view.camera.updateProjectionMatrix();
        }
        view.controls.update();
        view.renderer.render(view.scene, view.camera);
    }
    requestAnimationFrame(frame);
}

void (async () => {
    await refreshDatasetList();
    const first = datasetList.querySelector<HTMLInputElement>('input[type=radio]');
    if (first) {
        first.checked = true;
        const id = first.parentElement?.querySelector('span')?.textContent;
        if (id) await openDataset(id);
    }
    requestAnimationFrame(frame);
})();

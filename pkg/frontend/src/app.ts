/** Browser shell: owns the DOM, the render loop, and the data feeds; all
 * behavior it triggers lives in the pure modules. */

import { ApiClient, SnapshotStream, appParam } from './client.js';
import { gradientCss } from './gradient.js';
import { pick, type PickTarget } from './pick.js';
import { popupFor } from './popup.js';
import { fitCameraToBoxes } from './project.js';
import { buildScene, type Scene } from './scene.js';
import type { HeatmapView, MetricDescriptor, Snapshot } from './types.js';
import { ViewState } from './viewState.js';
import { render } from './renderer.js';

const MODE_LABEL: Record<string, string> = {
  snapshot: 'snapshot',
  aggregated: 'aggregated',
  windowed: 'windowed',
};

export class App {
  private readonly view = new ViewState();
  private readonly client: ApiClient;
  private readonly stream: SnapshotStream;
  private snapshot: Snapshot | null = null;
  private heat: HeatmapView | null = null;
  private scene: Scene;
  private descriptors: MetricDescriptor[] = [];
  private hovered: PickTarget | null = null;
  private heatRequest = 0;
  private cameraFitted = false;
  private dragging: { startX: number; startY: number; panX: number; panY: number } | null =
    null;

  private readonly canvas: HTMLCanvasElement;
  private readonly ctx: CanvasRenderingContext2D;
  private readonly popupEl: HTMLDivElement;
  private readonly noticeEl: HTMLDivElement;
  private readonly statusEl: HTMLSpanElement;
  private readonly statsEl: HTMLSpanElement;
  private readonly metricSelect: HTMLSelectElement;
  private readonly heatmapButton: HTMLButtonElement;
  private readonly legendEl: HTMLDivElement;
  private readonly legendStrip: HTMLDivElement;
  private readonly legendMin: HTMLSpanElement;
  private readonly legendMax: HTMLSpanElement;
  private readonly legendMode: HTMLSpanElement;

  constructor(root: HTMLElement, baseUrl: string = window.location.origin) {
    this.client = new ApiClient(baseUrl);
    this.scene = buildScene(null, this.view, null);

    root.innerHTML = `
      <canvas id="city"></canvas>
      <div id="toolbar">
        <span id="title">citypulse</span>
        <label>metric
          <select id="metric"></select>
        </label>
        <button id="heat-toggle">heat map</button>
        <span id="status"></span>
        <span id="stats"></span>
      </div>
      <div id="legend" hidden>
        <button id="mode-prev" title="previous mode">‹</button>
        <div id="legend-body">
          <div id="legend-mode"></div>
          <div id="legend-strip"></div>
          <div id="legend-range"><span id="legend-min"></span><span id="legend-max"></span></div>
        </div>
        <button id="mode-next" title="next mode">›</button>
      </div>
      <div id="notice" hidden></div>
      <div id="popup" hidden></div>
      <div id="waiting">waiting for data…</div>
    `;

    this.canvas = root.querySelector('#city') as HTMLCanvasElement;
    this.ctx = this.canvas.getContext('2d') as CanvasRenderingContext2D;
    this.popupEl = root.querySelector('#popup') as HTMLDivElement;
    this.noticeEl = root.querySelector('#notice') as HTMLDivElement;
    this.statusEl = root.querySelector('#status') as HTMLSpanElement;
    this.statsEl = root.querySelector('#stats') as HTMLSpanElement;
    this.metricSelect = root.querySelector('#metric') as HTMLSelectElement;
    this.heatmapButton = root.querySelector('#heat-toggle') as HTMLButtonElement;
    this.legendEl = root.querySelector('#legend') as HTMLDivElement;
    this.legendStrip = root.querySelector('#legend-strip') as HTMLDivElement;
    this.legendMin = root.querySelector('#legend-min') as HTMLSpanElement;
    this.legendMax = root.querySelector('#legend-max') as HTMLSpanElement;
    this.legendMode = root.querySelector('#legend-mode') as HTMLSpanElement;

    this.metricSelect.addEventListener('change', () => {
      this.view.selectMetric(this.metricSelect.value);
      this.metricSelect.value = this.view.selectedMetricId;
      this.refreshHeatmap();
    });
    this.heatmapButton.addEventListener('click', () => {
      this.view.toggleHeatmap();
      this.heatmapButton.classList.toggle('active', this.view.heatmapEnabled);
      this.refreshHeatmap();
    });
    (root.querySelector('#mode-prev') as HTMLButtonElement).addEventListener('click', () => {
      this.view.cycleMode(-1);
      this.refreshHeatmap();
    });
    (root.querySelector('#mode-next') as HTMLButtonElement).addEventListener('click', () => {
      this.view.cycleMode(1);
      this.refreshHeatmap();
    });

    this.canvas.addEventListener('mousedown', (event) => {
      this.dragging = {
        startX: event.clientX,
        startY: event.clientY,
        panX: this.view.camera.panX,
        panY: this.view.camera.panY,
      };
    });
    window.addEventListener('mouseup', () => {
      this.dragging = null;
    });
    this.canvas.addEventListener('mousemove', (event) => this.onMouseMove(event));
    this.canvas.addEventListener('click', (event) => this.onClick(event));
    this.canvas.addEventListener('wheel', (event) => this.onWheel(event), { passive: false });
    window.addEventListener('resize', () => this.resize());

    this.stream = new SnapshotStream(baseUrl, {
      onSnapshot: (snapshot) => this.onSnapshot(snapshot),
      onStatus: (status) => {
        this.statusEl.textContent = status === 'websocket' ? 'live' : status;
      },
    });
  }

  start(): void {
    this.resize();
    this.client
      .metrics()
      .then((descriptors) => {
        this.descriptors = descriptors;
        this.view.setMetrics(descriptors);
        this.metricSelect.innerHTML = '';
        for (const d of descriptors) {
          const option = document.createElement('option');
          option.value = d.metricId;
          option.textContent = d.displayName;
          option.title = d.description;
          this.metricSelect.append(option);
        }
        this.metricSelect.value = this.view.selectedMetricId;
      })
      .catch(() => {
        // metric list is cosmetic at startup; the default still works
      });
    this.stream.start();
    const loop = () => {
      this.draw();
      requestAnimationFrame(loop);
    };
    requestAnimationFrame(loop);
  }

  private onSnapshot(snapshot: Snapshot): void {
    this.snapshot = snapshot;
    this.view.reconcile(snapshot);
    if (!this.cameraFitted) {
      this.view.camera = fitCameraToBoxes(
        snapshot.geometry.boxes,
        this.canvas.width,
        this.canvas.height,
      );
      this.cameraFitted = true;
    }
    const s = snapshot.stats;
    this.statsEl.textContent =
      `${appParam(snapshot)} · tick ${snapshot.tickIndex} · ` +
      `${s.spanCount} spans / ${s.traceCount} traces · ${s.classCount} classes`;
    this.refreshHeatmap();
    this.rebuild();
  }

  /** Fetch the overlay for the current metric/mode; stale responses (the
   * user switched again mid-flight) are dropped. */
  private refreshHeatmap(): void {
    if (!this.view.heatmapEnabled || this.snapshot === null) {
      this.heat = null;
      this.rebuild();
      return;
    }
    const request = ++this.heatRequest;
    this.client
      .heatmap(this.view.selectedMetricId, this.view.mode, appParam(this.snapshot))
      .then((heat) => {
        if (request !== this.heatRequest) return;
        this.heat = heat;
        this.rebuild();
      })
      .catch(() => {
        if (request !== this.heatRequest) return;
        this.heat = null;
        this.rebuild();
      });
  }

  private rebuild(): void {
    this.scene = buildScene(this.snapshot, this.view, this.heat);

    const legend = this.scene.legend;
    this.legendEl.hidden = legend === null;
    if (legend !== null) {
      // Endpoints shown verbatim from the API response.
      this.legendMin.textContent = String(legend.min);
      this.legendMax.textContent = String(legend.max);
      this.legendMode.textContent = `${legend.metricId} · ${MODE_LABEL[legend.mode] ?? legend.mode}`;
      this.legendStrip.style.background = gradientCss(legend.stops);
    }

    this.noticeEl.hidden = this.view.notice === null;
    this.noticeEl.textContent = this.view.notice ?? '';

    (document.querySelector('#waiting') as HTMLDivElement).hidden = !this.scene.waiting;
  }

  private onMouseMove(event: MouseEvent): void {
    if (this.dragging !== null) {
      this.view.camera.panX = this.dragging.panX + (event.clientX - this.dragging.startX);
      this.view.camera.panY = this.dragging.panY + (event.clientY - this.dragging.startY);
      return;
    }
    const rect = this.canvas.getBoundingClientRect();
    const sx = event.clientX - rect.left;
    const sy = event.clientY - rect.top;
    this.hovered = pick(this.scene, sx, sy, this.view.camera);
    this.view.hoveredEntity =
      this.hovered !== null && this.hovered.kind !== 'edge' ? this.hovered.nodeId : null;

    const content =
      this.snapshot !== null
        ? popupFor(this.hovered, this.snapshot, this.descriptors)
        : null;
    this.popupEl.hidden = content === null;
    if (content !== null) {
      this.popupEl.innerHTML = '';
      const title = document.createElement('strong');
      title.textContent = content.title;
      this.popupEl.append(title);
      for (const line of content.lines) {
        const div = document.createElement('div');
        div.textContent = line;
        this.popupEl.append(div);
      }
      this.popupEl.style.left = `${event.clientX + 14}px`;
      this.popupEl.style.top = `${event.clientY + 14}px`;
    }
  }

  private onClick(event: MouseEvent): void {
    const rect = this.canvas.getBoundingClientRect();
    const target = pick(
      this.scene,
      event.clientX - rect.left,
      event.clientY - rect.top,
      this.view.camera,
    );
    if (target === null || target.kind === 'foundation') {
      this.view.clickClass(null);
    } else if (target.kind === 'class') {
      this.view.clickClass(target.nodeId);
    } else if (target.kind === 'package') {
      this.view.togglePackage(target.nodeId);
    }
    this.rebuild();
  }

  private onWheel(event: WheelEvent): void {
    event.preventDefault();
    const factor = event.deltaY < 0 ? 1.1 : 1 / 1.1;
    const camera = this.view.camera;
    const rect = this.canvas.getBoundingClientRect();
    const sx = event.clientX - rect.left;
    const sy = event.clientY - rect.top;
    // Zoom around the cursor: keep the world point under it fixed.
    camera.panX = sx - (sx - camera.panX) * factor;
    camera.panY = sy - (sy - camera.panY) * factor;
    camera.zoom *= factor;
  }

  private resize(): void {
    this.canvas.width = window.innerWidth;
    this.canvas.height = window.innerHeight;
  }

  private draw(): void {
    render(
      this.ctx,
      this.scene,
      this.view.camera,
      this.canvas.width,
      this.canvas.height,
      this.view.hoveredEntity,
    );
  }
}

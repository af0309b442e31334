/** End-to-end against the real backend: boots `citypulse serve`, replays the
 * bundled workload, and drives the UI modules the way the browser would —
 * stream client in, scene/legend/popup out. Headless stand-in for a browser
 * session; no DOM needed because every behavior under test is in the pure
 * modules.
 */

import { spawn, type ChildProcess } from 'node:child_process';
import { once } from 'node:events';
import { fileURLToPath } from 'node:url';
import { dirname, join } from 'node:path';
import WebSocket from 'ws';
import { afterAll, beforeAll, describe, expect, test } from 'vitest';

import { ApiClient, SnapshotStream, appParam } from '../src/client.js';
import { popupFor } from '../src/popup.js';
import { buildScene } from '../src/scene.js';
import type { HeatmapView, MetricDescriptor, Snapshot } from '../src/types.js';
import { MODE_CYCLE, ViewState } from '../src/viewState.js';

const HTTP_PORT = 18561;
const TCP_PORT = 19561;
const BASE_URL = `http://127.0.0.1:${HTTP_PORT}`;
const HERE = dirname(fileURLToPath(import.meta.url));
const FIXTURE = join(HERE, '..', '..', 'src', 'citypulse', 'fixtures', 'petclinic.ndjson');

let server: ChildProcess;
let covering: Snapshot; // the tick whose window contains the whole replay
let descriptors: MetricDescriptor[];
let heat: HeatmapView;

const client = new ApiClient(BASE_URL);

function sleep(millis: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, millis));
}

async function waitForHttp(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      await client.metrics();
      return;
    } catch {
      await sleep(150);
    }
  }
  throw new Error('server did not come up');
}

function collectSnapshots(
  onSnapshot: (snapshot: Snapshot) => void,
): SnapshotStream {
  const stream = new SnapshotStream(BASE_URL, {
    onSnapshot,
    wsFactory: (url) => new WebSocket(url),
  });
  stream.start();
  return stream;
}

beforeAll(async () => {
  server = spawn(
    'citypulse',
    [
      'serve',
      '--http-port', String(HTTP_PORT),
      '--ingest-tcp-port', String(TCP_PORT),
      '--tick-seconds', '2',
      '--bind-host', '127.0.0.1',
    ],
    { stdio: ['ignore', 'pipe', 'pipe'] },
  );
  await waitForHttp();
  descriptors = await client.metrics();

  // Structure first, so the application exists before any span arrives.
  const lines = (await import('node:fs/promises')).readFile(FIXTURE, 'utf8');
  const structure = (await lines)
    .split('\n')
    .filter((line) => line.includes('"kind":"structure"'))
    .join('\n');
  const posted = await fetch(`${BASE_URL}/ingest`, { method: 'POST', body: structure });
  expect(posted.ok).toBe(true);

  // Sync to a tick boundary: once a fresh snapshot arrives, a 2 s window has
  // just opened and the accelerated replay (< 1 s) fits inside it whole.
  await new Promise<void>((resolve) => {
    const sync = collectSnapshots(() => {
      sync.stop();
      resolve();
    });
  });

  const replay = spawn('citypulse', [
    'replay', FIXTURE,
    '--target', `127.0.0.1:${TCP_PORT}`,
    '--speed', '10',
  ]);
  const [code] = (await once(replay, 'exit')) as [number];
  expect(code).toBe(0);

  covering = await new Promise<Snapshot>((resolve, reject) => {
    const timer = setTimeout(() => {
      watcher.stop();
      reject(new Error('no covering tick within 30 s'));
    }, 30_000);
    const watcher = collectSnapshots((snapshot) => {
      if (snapshot.stats.spanCount === 289) {
        clearTimeout(timer);
        watcher.stop();
        resolve(snapshot);
      }
    });
  });

  heat = (await client.heatmap('instance_count', 'snapshot', appParam(covering)))!;
}, 60_000);

afterAll(async () => {
  server.kill('SIGTERM');
  await Promise.race([once(server, 'exit'), sleep(5000)]);
});

function findClassId(suffix: string): string {
  const box = covering.geometry.boxes.find(
    (b) => b.kind === 'class' && b.nodeId.endsWith(suffix),
  );
  expect(box, `class ${suffix} present in the snapshot`).toBeDefined();
  return box!.nodeId;
}

describe('UI round trip against the live backend', () => {
  test('the covering tick reproduces the demo workload', () => {
    expect(covering.stats.spanCount).toBe(289);
    expect(covering.stats.traceCount).toBe(47);
    const base = findClassId('.BaseEntity');
    expect(covering.metricScores.instance_count[base]).toBe(46);
  });

  test('legend shows the heat-map range verbatim', () => {
    const view = new ViewState();
    view.setMetrics(descriptors);
    view.toggleHeatmap();
    const scene = buildScene(covering, view, heat);

    expect(scene.legend).not.toBeNull();
    expect(scene.legend!.min).toBe(heat.legendMin);
    expect(scene.legend!.max).toBe(heat.legendMax);
    expect(heat.legendMax).toBe(46); // BaseEntity dominates instance_count
  });

  test('the red-most heat spot sits on BaseEntity', () => {
    const view = new ViewState();
    view.toggleHeatmap();
    const scene = buildScene(covering, view, heat);
    expect(scene.spots.length).toBeGreaterThan(0);

    const redMost = [...scene.spots].sort(
      (a, b) => b.color[0] - a.color[0] || a.color[2] - b.color[2],
    )[0];
    expect(redMost.classId).toBe(findClassId('.BaseEntity'));
    expect(redMost.color).toEqual([255, 0, 0]);
  });

  test('hovering BaseEntity yields popup text containing 46', () => {
    const popup = popupFor(
      { kind: 'class', nodeId: findClassId('.BaseEntity') },
      covering,
      descriptors,
    );
    expect(popup!.lines.join('\n')).toContain('46');
    expect(popup!.lines).toContain('46 objects were instantiated');
  });

  test('three arrow clicks cycle the mode back to the start, each mode served', async () => {
    const view = new ViewState();
    const initial = view.mode;
    const seen: string[] = [];
    for (let click = 0; click < 3; click++) {
      const mode = view.cycleMode(1);
      seen.push(mode);
      const response = await client.heatmap('instance_count', mode, appParam(covering));
      expect(response).not.toBeNull();
      expect(response!.mode).toBe(mode);
    }
    expect(view.mode).toBe(initial);
    expect(new Set(seen)).toEqual(new Set(MODE_CYCLE));
  });

  test('the BaseEntity box is the tallest building', () => {
    const classes = covering.geometry.boxes.filter((b) => b.kind === 'class');
    const tallest = classes.reduce((a, b) => (b.height > a.height ? b : a));
    expect(tallest.nodeId).toBe(findClassId('.BaseEntity'));
  });

  test('selecting BaseEntity leaves exactly its two partners un-faded', () => {
    const view = new ViewState();
    view.clickClass(findClassId('.BaseEntity'));
    const scene = buildScene(covering, view, null);

    const unfaded = scene.boxes
      .filter((b) => b.box.kind === 'class' && !b.faded)
      .map((b) => b.box.nodeId);
    const partners = unfaded.filter((id) => id !== view.selectedClass);
    expect(partners).toHaveLength(2);
    expect(partners.some((id) => id.endsWith('.Person'))).toBe(true);
    expect(unfaded.length).toBeLessThan(
      scene.boxes.filter((b) => b.box.kind === 'class').length,
    );
  });

  test('edge popup narrates the Person to BaseEntity call count', () => {
    const person = findClassId('.Person');
    const base = findClassId('.BaseEntity');
    const edge = covering.edges.find(
      (e) => e.callerClassId === person && e.calleeClassId === base,
    );
    expect(edge).toBeDefined();
    expect(edge!.callCount).toBe(24);

    const popup = popupFor({ kind: 'edge', edge: edge! }, covering, descriptors);
    expect(popup!.lines).toContain('Person called BaseEntity 24 times');
  });
});

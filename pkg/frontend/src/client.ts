/** HTTP + WebSocket access to the snapshot service.
 *
 * Both transports are injectable so tests can run without a browser: pass a
 * `ws`-backed factory under Node, or none at all to force the polling path.
 */

import type { HeatmapView, MetricDescriptor, Snapshot } from './types.js';

export interface FetchResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
  text(): Promise<string>;
}

export type FetchLike = (url: string) => Promise<FetchResponse>;

// Event parameters are deliberately `any`: both the browser's WebSocket and
// the `ws` package must satisfy this structurally, and their event types
// differ.
export interface WebSocketLike {
  onopen: ((event: any) => void) | null;
  onmessage: ((event: any) => void) | null;
  onclose: ((event: any) => void) | null;
  onerror: ((event: any) => void) | null;
  close(): void;
}

export type WebSocketFactory = (url: string) => WebSocketLike;

function defaultFetch(): FetchLike {
  return (url) => fetch(url);
}

function defaultWsFactory(): WebSocketFactory | null {
  const ctor = (globalThis as { WebSocket?: new (url: string) => WebSocketLike }).WebSocket;
  return ctor === undefined ? null : (url) => new ctor(url);
}

export function appParam(snapshot: Snapshot): string {
  return `${snapshot.app.hostname}/${snapshot.app.appName}`;
}

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchImpl: FetchLike = defaultFetch(),
  ) {
    this.fetchImpl = fetchImpl;
  }

  async metrics(): Promise<MetricDescriptor[]> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/v1/metrics`);
    if (!response.ok) throw new Error(`metrics: HTTP ${response.status}`);
    return (await response.json()) as MetricDescriptor[];
  }

  /** Latest snapshot, or null while the server has not published one yet. */
  async latestSnapshot(app?: string): Promise<Snapshot | null> {
    const query = app === undefined ? '' : `?app=${encodeURIComponent(app)}`;
    const response = await this.fetchImpl(`${this.baseUrl}/api/v1/snapshot/latest${query}`);
    if (response.status === 404) return null;
    if (!response.ok) throw new Error(`snapshot: HTTP ${response.status}`);
    return (await response.json()) as Snapshot;
  }

  async heatmap(metric: string, mode: string, app?: string): Promise<HeatmapView | null> {
    const params = new URLSearchParams({ metric, mode });
    if (app !== undefined) params.set('app', app);
    const response = await this.fetchImpl(`${this.baseUrl}/api/v1/heatmap?${params}`);
    if (response.status === 404) return null;
    if (!response.ok) throw new Error(`heatmap: ${await response.text()}`);
    return (await response.json()) as HeatmapView;
  }
}

export type StreamStatus = 'connecting' | 'websocket' | 'polling' | 'stopped';

export interface StreamOptions {
  onSnapshot: (snapshot: Snapshot) => void;
  onStatus?: (status: StreamStatus) => void;
  app?: string; // "hostname/appName"; unset accepts every application
  wsFactory?: WebSocketFactory | null;
  fetchImpl?: FetchLike;
  pollMillis?: number;
}

/** Live snapshot feed: WebSocket stream first, HTTP polling as fallback.
 * Once the socket fails or closes we poll until stop(); duplicate ticks are
 * filtered either way. */
export class SnapshotStream {
  private readonly client: ApiClient;
  private readonly wsFactory: WebSocketFactory | null;
  private readonly pollMillis: number;
  private socket: WebSocketLike | null = null;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private lastTick: number | null = null;
  private lastApp: string | null = null;
  private stopped = false;

  constructor(
    private readonly baseUrl: string,
    private readonly options: StreamOptions,
  ) {
    this.client = new ApiClient(baseUrl, options.fetchImpl ?? defaultFetch());
    this.wsFactory = options.wsFactory === undefined ? defaultWsFactory() : options.wsFactory;
    this.pollMillis = options.pollMillis ?? 1000;
  }

  start(): void {
    this.stopped = false;
    if (this.wsFactory === null) {
      this.startPolling();
      return;
    }
    this.setStatus('connecting');
    const url = `${this.baseUrl.replace(/^http/, 'ws')}/api/v1/stream`;
    let socket: WebSocketLike;
    try {
      socket = this.wsFactory(url);
    } catch {
      this.startPolling();
      return;
    }
    this.socket = socket;
    socket.onopen = () => this.setStatus('websocket');
    socket.onmessage = (event: { data: unknown }) => {
      try {
        this.deliver(JSON.parse(String(event.data)) as Snapshot);
      } catch {
        // tolerate one bad frame rather than killing the feed
      }
    };
    socket.onerror = () => this.fallBack();
    socket.onclose = () => this.fallBack();
  }

  stop(): void {
    this.stopped = true;
    if (this.socket !== null) {
      const socket = this.socket;
      this.socket = null;
      socket.onclose = null;
      socket.onerror = null;
      try {
        socket.close();
      } catch {
        // already dead
      }
    }
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
    this.setStatus('stopped');
  }

  private fallBack(): void {
    if (this.stopped || this.pollTimer !== null) return;
    if (this.socket !== null) {
      this.socket.onclose = null;
      this.socket.onerror = null;
      try {
        this.socket.close();
      } catch {
        // already dead
      }
      this.socket = null;
    }
    this.startPolling();
  }

  private startPolling(): void {
    if (this.stopped || this.pollTimer !== null) return;
    this.setStatus('polling');
    const poll = () => {
      this.client
        .latestSnapshot(this.options.app)
        .then((snapshot) => {
          if (snapshot !== null) this.deliver(snapshot);
        })
        .catch(() => {
          // server briefly unreachable; next interval retries
        });
    };
    poll();
    this.pollTimer = setInterval(poll, this.pollMillis);
  }

  private deliver(snapshot: Snapshot): void {
    if (this.stopped) return;
    const app = appParam(snapshot);
    if (this.options.app !== undefined && app !== this.options.app) return;
    if (app === this.lastApp && snapshot.tickIndex === this.lastTick) return;
    this.lastApp = app;
    this.lastTick = snapshot.tickIndex;
    this.options.onSnapshot(snapshot);
  }

  private setStatus(status: StreamStatus): void {
    this.options.onStatus?.(status);
  }
}

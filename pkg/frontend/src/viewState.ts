/** All user-steerable view state, kept separate from the data so it survives
 * snapshot updates: metric, mode, heat-map toggle, opened packages, selection,
 * hover, and the camera pose. */

import type { HeatmapMode, MetricDescriptor, Snapshot } from './types.js';

export const MODE_CYCLE: HeatmapMode[] = ['snapshot', 'aggregated', 'windowed'];

export interface CameraPose {
  panX: number;
  panY: number;
  zoom: number;
}

export class ViewState {
  heatmapEnabled = false;
  mode: HeatmapMode = 'snapshot';
  selectedClass: string | null = null;
  hoveredEntity: string | null = null;
  camera: CameraPose = { panX: 0, panY: 0, zoom: 1 };
  notice: string | null = null;

  private metricId = 'instance_count';
  private knownMetrics: string[] = ['instance_count'];
  private closedPackages = new Set<string>(); // packages start open

  get selectedMetricId(): string {
    return this.metricId;
  }

  setMetrics(descriptors: MetricDescriptor[]): void {
    if (descriptors.length === 0) return;
    this.knownMetrics = descriptors.map((d) => d.metricId);
    if (!this.knownMetrics.includes(this.metricId)) {
      this.selectMetric(this.metricId); // re-runs the fallback path
    }
  }

  /** Unknown metrics fall back to instance_count and leave a visible notice. */
  selectMetric(metricId: string): void {
    if (this.knownMetrics.includes(metricId)) {
      this.metricId = metricId;
      this.notice = null;
    } else {
      this.metricId = this.knownMetrics.includes('instance_count')
        ? 'instance_count'
        : this.knownMetrics[0];
      this.notice = `unknown metric "${metricId}", showing ${this.metricId}`;
    }
  }

  cycleMode(direction: 1 | -1): HeatmapMode {
    const index = MODE_CYCLE.indexOf(this.mode);
    this.mode = MODE_CYCLE[(index + direction + MODE_CYCLE.length) % MODE_CYCLE.length];
    return this.mode;
  }

  toggleHeatmap(): boolean {
    this.heatmapEnabled = !this.heatmapEnabled;
    return this.heatmapEnabled;
  }

  isPackageOpen(packageId: string): boolean {
    return !this.closedPackages.has(packageId);
  }

  togglePackage(packageId: string): void {
    if (this.closedPackages.has(packageId)) {
      this.closedPackages.delete(packageId);
    } else {
      this.closedPackages.add(packageId);
    }
  }

  /** Click semantics: clicking the selected class (or empty space, passing
   * null) deselects; clicking another class moves the selection. */
  clickClass(classId: string | null): void {
    this.selectedClass = classId === this.selectedClass ? null : classId;
  }

  /** Drop references to entities that no longer exist; everything else
   * (metric, mode, toggle, camera, surviving selection) persists. */
  reconcile(snapshot: Snapshot): void {
    const ids = new Set(snapshot.geometry.boxes.map((box) => box.nodeId));
    if (this.selectedClass !== null && !ids.has(this.selectedClass)) {
      this.selectedClass = null;
    }
    if (this.hoveredEntity !== null && !ids.has(this.hoveredEntity)) {
      this.hoveredEntity = null;
    }
    for (const packageId of [...this.closedPackages]) {
      if (!ids.has(packageId)) this.closedPackages.delete(packageId);
    }
  }
}

/** DTOs for the snapshot-service JSON API. Field names mirror the wire exactly. */

export interface ClassNode {
  name: string;
  classId: string;
  operations: string[];
}

export interface PackageNode {
  name: string;
  packageId: string;
  packages: PackageNode[];
  classes: ClassNode[];
}

export interface StructureTree {
  hostname: string;
  appName: string;
  packages: PackageNode[];
}

export type BoxKind = 'foundation' | 'package' | 'class';

export interface LayoutBox {
  nodeId: string;
  kind: BoxKind;
  x: number;
  z: number;
  width: number;
  depth: number;
  yBase: number;
  height: number;
}

export interface HeatSpotAnchor {
  classId: string;
  x: number;
  z: number;
}

export type ThicknessClass = 'small' | 'medium' | 'large';

export interface CommunicationEdge {
  callerClassId: string;
  calleeClassId: string;
  callCount: number;
  thicknessClass: ThicknessClass;
}

export interface SnapshotStats {
  spanCount: number;
  traceCount: number;
  orphanCount: number;
  droppedRecords: number;
  invalidTraces: number;
  classCount: number;
  packageCount: number;
  tickMillis: number;
}

export interface Snapshot {
  tickIndex: number;
  window: { startNanos: number; endNanos: number };
  app: { hostname: string; appName: string };
  structure: StructureTree;
  geometry: { boxes: LayoutBox[]; anchors: HeatSpotAnchor[] };
  edges: CommunicationEdge[];
  metricScores: Record<string, Record<string, number>>;
  stats: SnapshotStats;
}

export type HeatmapMode = 'snapshot' | 'aggregated' | 'windowed';

export interface HeatmapView {
  metricId: string;
  mode: HeatmapMode;
  tickIndex: number;
  values: Record<string, number>;
  legendMin: number;
  legendMax: number;
  gradientStops: [number, number, number][];
}

export interface MetricDescriptor {
  metricId: string;
  displayName: string;
  description: string;
  valueKind: 'count' | 'score';
}

/** Trailing segment of a class id ("host/app/pkg.Cls" -> "Cls"). */
export function shortClassName(classId: string): string {
  const fqn = classId.slice(classId.lastIndexOf('/') + 1);
  return fqn.slice(fqn.lastIndexOf('.') + 1);
}

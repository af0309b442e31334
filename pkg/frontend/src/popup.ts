/** Hover popup content. Pure: numbers come straight from the snapshot, the
 * UI never recomputes a metric. */

import type { PickTarget } from './pick.js';
import { shortClassName, type MetricDescriptor, type PackageNode, type Snapshot } from './types.js';

export interface PopupContent {
  title: string;
  lines: string[];
}

function formatValue(value: number): string {
  return Number.isInteger(value) ? String(value) : value.toFixed(2);
}

function findPackage(packages: PackageNode[], packageId: string): PackageNode | null {
  for (const pkg of packages) {
    if (pkg.packageId === packageId) return pkg;
    const nested = findPackage(pkg.packages, packageId);
    if (nested !== null) return nested;
  }
  return null;
}

function countClasses(pkg: PackageNode): number {
  return pkg.classes.length + pkg.packages.reduce((n, sub) => n + countClasses(sub), 0);
}

function classLines(
  classId: string,
  snapshot: Snapshot,
  descriptors: MetricDescriptor[],
): string[] {
  const lines: string[] = [];
  for (const descriptor of descriptors) {
    const scores = snapshot.metricScores[descriptor.metricId];
    const value = scores !== undefined ? scores[classId] ?? 0 : 0;
    if (descriptor.metricId === 'instance_count') {
      lines.push(`${formatValue(value)} objects were instantiated`);
    } else {
      lines.push(`${descriptor.displayName}: ${formatValue(value)}`);
    }
  }
  return lines;
}

/** Popup for the hovered entity; the foundation plate has none. */
export function popupFor(
  target: PickTarget | null,
  snapshot: Snapshot,
  descriptors: MetricDescriptor[],
): PopupContent | null {
  if (target === null) return null;
  switch (target.kind) {
    case 'foundation':
      return null;
    case 'class':
      return {
        title: shortClassName(target.nodeId),
        lines: classLines(target.nodeId, snapshot, descriptors),
      };
    case 'package': {
      const pkg = findPackage(snapshot.structure.packages, target.nodeId);
      if (pkg === null) return null;
      return {
        title: pkg.name,
        lines: [`${countClasses(pkg)} classes inside`],
      };
    }
    case 'edge': {
      const caller = shortClassName(target.edge.callerClassId);
      const callee = shortClassName(target.edge.calleeClassId);
      return {
        title: `${caller} → ${callee}`,
        lines: [`${caller} called ${callee} ${target.edge.callCount} times`],
      };
    }
  }
}

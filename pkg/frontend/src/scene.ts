/** Pure scene assembly: one snapshot + the view state in, flat draw lists out.
 *
 * Everything interactive (package folding, selection fade, the heat overlay)
 * is decided here so it can be tested without a canvas. The renderer just
 * paints what this module returns.
 */

import { valueToColor, type Rgb } from './gradient.js';
import type {
  CommunicationEdge,
  HeatmapView,
  LayoutBox,
  PackageNode,
  Snapshot,
  ThicknessClass,
} from './types.js';
import type { ViewState } from './viewState.js';

// City dims to this while the heat map is shown; faded elements drop further.
export const HEATMAP_CITY_OPACITY = 0.4;
export const FADE_FACTOR = 0.25;

// Diffuse kernel: radius relative to the class footprint side.
export const SPOT_RADIUS_FACTOR = 1.5;

const EDGE_WIDTH: Record<ThicknessClass, number> = { small: 1.5, medium: 3, large: 4.5 };

export interface Point3 {
  x: number;
  y: number;
  z: number;
}

export interface SceneBox {
  box: LayoutBox;
  selected: boolean;
  faded: boolean;
  opacity: number;
}

export interface SceneEdge {
  edge: CommunicationEdge;
  from: Point3;
  to: Point3;
  width: number;
  faded: boolean;
  opacity: number;
}

export interface SceneSpot {
  classId: string;
  center: Point3;
  radius: number;
  value: number;
  color: Rgb;
}

export interface SceneConnector {
  classId: string;
  from: Point3; // class roof center
  to: Point3; // spot center on the foundation plate
}

export interface SceneLegend {
  metricId: string;
  mode: string;
  min: number; // displayed verbatim, never recomputed
  max: number;
  stops: Rgb[];
}

export interface Scene {
  waiting: boolean;
  boxes: SceneBox[]; // painter order: low level first, back to front
  edges: SceneEdge[];
  spots: SceneSpot[];
  connectors: SceneConnector[];
  legend: SceneLegend | null;
}

const EMPTY_SCENE: Scene = {
  waiting: true,
  boxes: [],
  edges: [],
  spots: [],
  connectors: [],
  legend: null,
};

/** Node ids hidden by closed packages. The closed package's own tile stays
 * visible; every descendant package and class disappears. */
export function hiddenNodeIds(snapshot: Snapshot, view: ViewState): Set<string> {
  const hidden = new Set<string>();
  const bury = (pkg: PackageNode) => {
    for (const sub of pkg.packages) {
      hidden.add(sub.packageId);
      bury(sub);
    }
    for (const cls of pkg.classes) hidden.add(cls.classId);
  };
  const walk = (pkg: PackageNode) => {
    if (!view.isPackageOpen(pkg.packageId)) {
      bury(pkg);
      return;
    }
    for (const sub of pkg.packages) walk(sub);
  };
  for (const pkg of snapshot.structure.packages) walk(pkg);
  return hidden;
}

/** Classes sharing at least one visible edge with classId, either direction. */
export function communicationPartners(
  edges: readonly CommunicationEdge[],
  classId: string,
): Set<string> {
  const partners = new Set<string>();
  for (const edge of edges) {
    if (edge.callerClassId === classId) partners.add(edge.calleeClassId);
    else if (edge.calleeClassId === classId) partners.add(edge.callerClassId);
  }
  return partners;
}

function roofCenter(box: LayoutBox): Point3 {
  return {
    x: box.x + box.width / 2,
    y: box.yBase + box.height,
    z: box.z + box.depth / 2,
  };
}

export function buildScene(
  snapshot: Snapshot | null,
  view: ViewState,
  heat: HeatmapView | null,
): Scene {
  if (snapshot === null) return EMPTY_SCENE;

  const hidden = hiddenNodeIds(snapshot, view);
  const boxesById = new Map<string, LayoutBox>();
  for (const box of snapshot.geometry.boxes) boxesById.set(box.nodeId, box);

  const visibleEdges = snapshot.edges.filter(
    (edge) => !hidden.has(edge.callerClassId) && !hidden.has(edge.calleeClassId),
  );

  // Selection fades every class without a direct edge to the selected one;
  // a selection hidden inside a closed package fades nothing.
  const selected = view.selectedClass !== null && !hidden.has(view.selectedClass)
    ? view.selectedClass
    : null;
  const unfaded = selected !== null ? communicationPartners(visibleEdges, selected) : null;
  if (unfaded !== null && selected !== null) unfaded.add(selected);

  const overlayOn = view.heatmapEnabled && heat !== null;
  const cityOpacity = overlayOn ? HEATMAP_CITY_OPACITY : 1;

  const boxes: SceneBox[] = [];
  for (const box of snapshot.geometry.boxes) {
    if (hidden.has(box.nodeId)) continue;
    const faded = unfaded !== null && box.kind === 'class' && !unfaded.has(box.nodeId);
    boxes.push({
      box,
      selected: box.nodeId === selected,
      faded,
      opacity: faded ? cityOpacity * FADE_FACTOR : cityOpacity,
    });
  }
  boxes.sort(
    (a, b) => a.box.yBase - b.box.yBase || a.box.x + a.box.z - (b.box.x + b.box.z),
  );

  const edges: SceneEdge[] = [];
  for (const edge of visibleEdges) {
    const caller = boxesById.get(edge.callerClassId);
    const callee = boxesById.get(edge.calleeClassId);
    if (caller === undefined || callee === undefined) continue;
    const faded =
      selected !== null &&
      edge.callerClassId !== selected &&
      edge.calleeClassId !== selected;
    edges.push({
      edge,
      from: roofCenter(caller),
      to: roofCenter(callee),
      width: EDGE_WIDTH[edge.thicknessClass],
      faded,
      opacity: faded ? cityOpacity * FADE_FACTOR : cityOpacity,
    });
  }

  const spots: SceneSpot[] = [];
  const connectors: SceneConnector[] = [];
  let legend: SceneLegend | null = null;
  if (overlayOn && heat !== null) {
    const stops = heat.gradientStops.map((s) => [s[0], s[1], s[2]] as Rgb);
    legend = {
      metricId: heat.metricId,
      mode: heat.mode,
      min: heat.legendMin,
      max: heat.legendMax,
      stops,
    };
    const foundation = snapshot.geometry.boxes.find((b) => b.kind === 'foundation');
    const plateY = foundation !== undefined ? foundation.yBase + foundation.height : 0;
    for (const anchor of snapshot.geometry.anchors) {
      if (hidden.has(anchor.classId)) continue;
      const value = heat.values[anchor.classId];
      if (value === undefined) continue; // no activity, no spot
      const box = boxesById.get(anchor.classId);
      const footprint = box !== undefined ? Math.max(box.width, box.depth) : 1;
      const center = { x: anchor.x, y: plateY, z: anchor.z };
      spots.push({
        classId: anchor.classId,
        center,
        radius: SPOT_RADIUS_FACTOR * footprint,
        value,
        color: valueToColor(value, heat.legendMin, heat.legendMax, stops),
      });
      if (box !== undefined) {
        connectors.push({ classId: anchor.classId, from: roofCenter(box), to: center });
      }
    }
  }

  return { waiting: false, boxes, edges, spots, connectors, legend };
}

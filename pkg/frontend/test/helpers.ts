/** Hand-built snapshot shaped like the server's petclinic output, small
 * enough to reason about in scene and popup tests. */

import type {
  HeatmapView,
  LayoutBox,
  MetricDescriptor,
  Snapshot,
} from '../src/types.js';

export const APP = 'demo-host/spring-petclinic';
export const MODEL_PKG = `${APP}/model`;
export const OWNER_PKG = `${APP}/owner`;

export const BASE_ENTITY = `${MODEL_PKG}.BaseEntity`;
export const PERSON = `${MODEL_PKG}.Person`;
export const NAMED_ENTITY = `${MODEL_PKG}.NamedEntity`;
export const OWNER = `${OWNER_PKG}.Owner`;
export const PET = `${OWNER_PKG}.Pet`;
export const MISC = `${MODEL_PKG}.Misc`; // no edges at all

function classBox(nodeId: string, x: number, z: number, height: number): LayoutBox {
  return { nodeId, kind: 'class', x, z, width: 1, depth: 1, yBase: 0.4, height };
}

export function makeSnapshot(): Snapshot {
  const classes = [
    { name: 'BaseEntity', classId: BASE_ENTITY, operations: ['<init>'] },
    { name: 'Misc', classId: MISC, operations: ['tick'] },
    { name: 'NamedEntity', classId: NAMED_ENTITY, operations: ['<init>'] },
    { name: 'Person', classId: PERSON, operations: ['<init>'] },
  ];
  const boxes: LayoutBox[] = [
    { nodeId: APP, kind: 'foundation', x: 0, z: 0, width: 10, depth: 6, yBase: 0, height: 0.2 },
    { nodeId: MODEL_PKG, kind: 'package', x: 0.3, z: 0.3, width: 5, depth: 5, yBase: 0.2, height: 0.2 },
    { nodeId: OWNER_PKG, kind: 'package', x: 5.8, z: 0.3, width: 3.5, depth: 3, yBase: 0.2, height: 0.2 },
    classBox(BASE_ENTITY, 0.6, 0.6, 6),
    classBox(PERSON, 2, 0.6, 3.3),
    classBox(NAMED_ENTITY, 3.4, 0.6, 3.1),
    classBox(MISC, 0.6, 2, 1),
    classBox(OWNER, 6.1, 0.6, 1.4),
    classBox(PET, 7.5, 0.6, 1.4),
  ];
  return {
    tickIndex: 3,
    window: { startNanos: 30_000_000_000, endNanos: 40_000_000_000 },
    app: { hostname: 'demo-host', appName: 'spring-petclinic' },
    structure: {
      hostname: 'demo-host',
      appName: 'spring-petclinic',
      packages: [
        { name: 'model', packageId: MODEL_PKG, packages: [], classes },
        {
          name: 'owner',
          packageId: OWNER_PKG,
          packages: [],
          classes: [
            { name: 'Owner', classId: OWNER, operations: ['<init>'] },
            { name: 'Pet', classId: PET, operations: ['<init>'] },
          ],
        },
      ],
    },
    geometry: {
      boxes,
      anchors: boxes
        .filter((b) => b.kind === 'class')
        .map((b) => ({ classId: b.nodeId, x: b.x + b.width / 2, z: b.z + b.depth / 2 })),
    },
    edges: [
      { callerClassId: PERSON, calleeClassId: BASE_ENTITY, callCount: 24, thicknessClass: 'large' },
      { callerClassId: NAMED_ENTITY, calleeClassId: BASE_ENTITY, callCount: 22, thicknessClass: 'medium' },
      { callerClassId: OWNER, calleeClassId: PET, callCount: 5, thicknessClass: 'small' },
    ],
    metricScores: {
      instance_count: {
        [BASE_ENTITY]: 46,
        [PERSON]: 24,
        [NAMED_ENTITY]: 22,
        [OWNER]: 5,
        [PET]: 5,
      },
      ec_cd: { [BASE_ENTITY]: 46, [PET]: 5 },
    },
    stats: {
      spanCount: 289,
      traceCount: 46,
      orphanCount: 0,
      droppedRecords: 0,
      invalidTraces: 0,
      classCount: 6,
      packageCount: 2,
      tickMillis: 1.5,
    },
  };
}

export function makeHeat(): HeatmapView {
  return {
    metricId: 'instance_count',
    mode: 'snapshot',
    tickIndex: 3,
    values: {
      [BASE_ENTITY]: 46,
      [PERSON]: 24,
      [NAMED_ENTITY]: 22,
      [OWNER]: 5,
      // PET intentionally absent: no activity, no spot
    },
    legendMin: 5,
    legendMax: 46,
    gradientStops: [
      [0, 0, 255],
      [0, 255, 255],
      [0, 255, 0],
      [255, 255, 0],
      [255, 0, 0],
    ],
  };
}

export const DESCRIPTORS: MetricDescriptor[] = [
  {
    metricId: 'instance_count',
    displayName: 'Instance count',
    description: 'objects created per window',
    valueKind: 'count',
  },
  {
    metricId: 'ec_cd',
    displayName: 'Export coupling',
    description: 'incoming calls per window',
    valueKind: 'count',
  },
];

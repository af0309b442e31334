/** Hit-testing of the rendered scene for hover and click. */

import { boxFaces, distanceToSegment, pointInPolygon, project } from './project.js';
import type { Scene } from './scene.js';
import type { BoxKind, CommunicationEdge } from './types.js';
import type { CameraPose } from './viewState.js';

const EDGE_PICK_SLACK = 4; // px beyond the line's own width

export type PickTarget =
  | { kind: BoxKind; nodeId: string }
  | { kind: 'edge'; edge: CommunicationEdge };

/** Topmost entity under the pointer: edges win over boxes (they are drawn
 * above the roofs), then boxes in reverse painter order. */
export function pick(
  scene: Scene,
  sx: number,
  sy: number,
  camera: CameraPose,
): PickTarget | null {
  for (const sceneEdge of scene.edges) {
    const a = project(sceneEdge.from, camera);
    const b = project(sceneEdge.to, camera);
    if (distanceToSegment(sx, sy, a, b) <= sceneEdge.width + EDGE_PICK_SLACK) {
      return { kind: 'edge', edge: sceneEdge.edge };
    }
  }
  for (let i = scene.boxes.length - 1; i >= 0; i--) {
    const { box } = scene.boxes[i];
    const faces = boxFaces(box, camera);
    if (
      pointInPolygon(sx, sy, faces.top) ||
      pointInPolygon(sx, sy, faces.left) ||
      pointInPolygon(sx, sy, faces.right)
    ) {
      return { kind: box.kind, nodeId: box.nodeId };
    }
  }
  return null;
}

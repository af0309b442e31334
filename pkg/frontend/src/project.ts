/** Isometric projection of world boxes onto the canvas.
 *
 * Classic 2:1 dimetric look: +x runs down-right, +z down-left, +y straight
 * up. All functions are pure; the camera only pans and zooms.
 */

import type { Point3 } from './scene.js';
import type { LayoutBox } from './types.js';
import type { CameraPose } from './viewState.js';

// Pixels per world unit along each iso axis at zoom 1.
export const ISO_X = 28;
export const ISO_Y = 14;
export const ISO_H = 24;

export interface Point2 {
  sx: number;
  sy: number;
}

export function project(p: Point3, camera: CameraPose): Point2 {
  return {
    sx: (p.x - p.z) * ISO_X * camera.zoom + camera.panX,
    sy: ((p.x + p.z) * ISO_Y - p.y * ISO_H) * camera.zoom + camera.panY,
  };
}

export interface BoxFaces {
  top: Point2[];
  left: Point2[]; // the face along +z (down-left on screen)
  right: Point2[]; // the face along +x (down-right on screen)
}

/** The three visible faces of an axis-aligned box, each a screen-space quad
 * in draw order. */
export function boxFaces(box: LayoutBox, camera: CameraPose): BoxFaces {
  const x0 = box.x;
  const x1 = box.x + box.width;
  const z0 = box.z;
  const z1 = box.z + box.depth;
  const y0 = box.yBase;
  const y1 = box.yBase + box.height;
  const at = (x: number, y: number, z: number) => project({ x, y, z }, camera);

  return {
    top: [at(x0, y1, z0), at(x1, y1, z0), at(x1, y1, z1), at(x0, y1, z1)],
    left: [at(x0, y1, z1), at(x1, y1, z1), at(x1, y0, z1), at(x0, y0, z1)],
    right: [at(x1, y1, z0), at(x1, y1, z1), at(x1, y0, z1), at(x1, y0, z0)],
  };
}

/** Pan/zoom that centers the given boxes in a width×height viewport with a
 * small margin. Degenerate bounds fall back to zoom 1. */
export function fitCameraToBoxes(
  boxes: readonly LayoutBox[],
  width: number,
  height: number,
): CameraPose {
  const neutral: CameraPose = { panX: 0, panY: 0, zoom: 1 };
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const box of boxes) {
    for (const dx of [0, box.width]) {
      for (const dz of [0, box.depth]) {
        for (const dy of [0, box.height]) {
          const p = project(
            { x: box.x + dx, y: box.yBase + dy, z: box.z + dz },
            neutral,
          );
          minX = Math.min(minX, p.sx);
          maxX = Math.max(maxX, p.sx);
          minY = Math.min(minY, p.sy);
          maxY = Math.max(maxY, p.sy);
        }
      }
    }
  }
  if (!Number.isFinite(minX) || maxX === minX || maxY === minY) {
    return { panX: width / 2, panY: height / 2, zoom: 1 };
  }
  const zoom = 0.85 * Math.min(width / (maxX - minX), height / (maxY - minY));
  return {
    panX: width / 2 - ((minX + maxX) / 2) * zoom,
    panY: height / 2 - ((minY + maxY) / 2) * zoom,
    zoom,
  };
}

export function pointInPolygon(sx: number, sy: number, polygon: Point2[]): boolean {
  let inside = false;
  for (let i = 0, j = polygon.length - 1; i < polygon.length; j = i++) {
    const a = polygon[i];
    const b = polygon[j];
    const crosses =
      a.sy > sy !== b.sy > sy &&
      sx < ((b.sx - a.sx) * (sy - a.sy)) / (b.sy - a.sy) + a.sx;
    if (crosses) inside = !inside;
  }
  return inside;
}

export function distanceToSegment(sx: number, sy: number, a: Point2, b: Point2): number {
  const dx = b.sx - a.sx;
  const dy = b.sy - a.sy;
  const lengthSq = dx * dx + dy * dy;
  const t =
    lengthSq === 0
      ? 0
      : Math.min(1, Math.max(0, ((sx - a.sx) * dx + (sy - a.sy) * dy) / lengthSq));
  const px = a.sx + t * dx;
  const py = a.sy + t * dy;
  return Math.hypot(sx - px, sy - py);
}

/** Canvas2D painter. Pure drawing: every visual decision (visibility, fade,
 * colors of heat spots) was already made by buildScene. */

import { rgbCss } from './gradient.js';
import { boxFaces, project } from './project.js';
import type { Scene, SceneBox } from './scene.js';
import type { CameraPose } from './viewState.js';

export const BACKGROUND = '#10141a';

const FOUNDATION_COLOR: Rgb3 = [154, 161, 169];
const PACKAGE_COLORS: Rgb3[] = [
  [46, 125, 70],
  [63, 158, 90],
];
const CLASS_COLOR: Rgb3 = [70, 104, 176];
const SELECTED_COLOR: Rgb3 = [208, 58, 47];
const EDGE_COLOR = 'rgba(255,140,26,';
const TILE = 0.2; // keep in sync with the layout's tile thickness

type Rgb3 = [number, number, number];

function shade([r, g, b]: Rgb3, factor: number, alpha: number): string {
  return `rgba(${Math.round(r * factor)},${Math.round(g * factor)},${Math.round(b * factor)},${alpha})`;
}

function baseColor(sceneBox: SceneBox): Rgb3 {
  if (sceneBox.selected) return SELECTED_COLOR;
  const { box } = sceneBox;
  if (box.kind === 'foundation') return FOUNDATION_COLOR;
  if (box.kind === 'package') {
    const level = Math.max(0, Math.round(box.yBase / TILE));
    return PACKAGE_COLORS[level % PACKAGE_COLORS.length];
  }
  return CLASS_COLOR;
}

function fillQuad(
  ctx: CanvasRenderingContext2D,
  quad: { sx: number; sy: number }[],
  style: string,
): void {
  ctx.beginPath();
  ctx.moveTo(quad[0].sx, quad[0].sy);
  for (let i = 1; i < quad.length; i++) ctx.lineTo(quad[i].sx, quad[i].sy);
  ctx.closePath();
  ctx.fillStyle = style;
  ctx.fill();
}

export function render(
  ctx: CanvasRenderingContext2D,
  scene: Scene,
  camera: CameraPose,
  width: number,
  height: number,
  hoveredId: string | null = null,
): void {
  ctx.fillStyle = BACKGROUND;
  ctx.fillRect(0, 0, width, height);
  if (scene.waiting) return;

  for (const sceneBox of scene.boxes) {
    const color = baseColor(sceneBox);
    const faces = boxFaces(sceneBox.box, camera);
    fillQuad(ctx, faces.left, shade(color, 0.55, sceneBox.opacity));
    fillQuad(ctx, faces.right, shade(color, 0.75, sceneBox.opacity));
    fillQuad(ctx, faces.top, shade(color, 1, sceneBox.opacity));
    if (sceneBox.box.nodeId === hoveredId) {
      ctx.beginPath();
      ctx.moveTo(faces.top[0].sx, faces.top[0].sy);
      for (let i = 1; i < faces.top.length; i++) ctx.lineTo(faces.top[i].sx, faces.top[i].sy);
      ctx.closePath();
      ctx.strokeStyle = 'rgba(255,255,255,0.9)';
      ctx.lineWidth = 1.5;
      ctx.stroke();
    }
  }

  for (const sceneEdge of scene.edges) {
    const a = project(sceneEdge.from, camera);
    const b = project(sceneEdge.to, camera);
    ctx.beginPath();
    ctx.moveTo(a.sx, a.sy);
    ctx.lineTo(b.sx, b.sy);
    ctx.strokeStyle = `${EDGE_COLOR}${sceneEdge.opacity})`;
    ctx.lineWidth = sceneEdge.width * camera.zoom;
    ctx.stroke();
  }

  // Heat overlay last so the diffuse spots read through the dimmed city.
  for (const spot of scene.spots) {
    const center = project(spot.center, camera);
    const radius = spot.radius * 28 * camera.zoom;
    const gradient = ctx.createRadialGradient(
      center.sx,
      center.sy,
      0,
      center.sx,
      center.sy,
      radius,
    );
    gradient.addColorStop(0, rgbCss(spot.color, 0.85));
    gradient.addColorStop(1, rgbCss(spot.color, 0));
    ctx.fillStyle = gradient;
    ctx.beginPath();
    ctx.arc(center.sx, center.sy, radius, 0, 2 * Math.PI);
    ctx.fill();
  }

  for (const connector of scene.connectors) {
    const a = project(connector.from, camera);
    const b = project(connector.to, camera);
    ctx.beginPath();
    ctx.moveTo(a.sx, a.sy);
    ctx.lineTo(b.sx, b.sy);
    ctx.strokeStyle = 'rgba(0,0,0,0.8)';
    ctx.lineWidth = 1;
    ctx.stroke();
  }
}

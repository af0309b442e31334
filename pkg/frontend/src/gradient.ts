/** Color interpolation along the server-provided gradient stops.
 *
 * The numbers shown to the user (values, legend range) always come from the
 * API; this module only turns them into pixels.
 */

export type Rgb = [number, number, number];

export const DEFAULT_STOPS: Rgb[] = [
  [0, 0, 255],
  [0, 255, 255],
  [0, 255, 0],
  [255, 255, 0],
  [255, 0, 0],
];

/** Map a value within [min, max] onto the gradient; degenerate ranges render
 * the middle color, out-of-range values clamp to the endpoints. */
export function valueToColor(
  value: number,
  legendMin: number,
  legendMax: number,
  stops: Rgb[] = DEFAULT_STOPS,
): Rgb {
  const u =
    legendMin === legendMax
      ? 0.5
      : Math.min(1, Math.max(0, (value - legendMin) / (legendMax - legendMin)));
  const position = u * (stops.length - 1);
  const index = Math.min(Math.floor(position), stops.length - 2);
  const t = position - index;
  const [a, b] = [stops[index], stops[index + 1]];
  return [
    Math.round(a[0] + (b[0] - a[0]) * t),
    Math.round(a[1] + (b[1] - a[1]) * t),
    Math.round(a[2] + (b[2] - a[2]) * t),
  ];
}

export function rgbCss([r, g, b]: Rgb, alpha = 1): string {
  return alpha >= 1 ? `rgb(${r},${g},${b})` : `rgba(${r},${g},${b},${alpha})`;
}

/** CSS linear-gradient string for the legend strip. */
export function gradientCss(stops: Rgb[]): string {
  const parts = stops.map((stop, i) => `${rgbCss(stop)} ${(100 * i) / (stops.length - 1)}%`);
  return `linear-gradient(to right, ${parts.join(', ')})`;
}

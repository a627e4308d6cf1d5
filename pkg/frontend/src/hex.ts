// Honeycomb geometry mirroring the server convention: odd rows shifted right
// by half a key width, vertical pitch keyWidth * sqrt(3)/2, origin at the
// top-left key center, y growing downward. All six neighbors of an interior
// key sit at exactly one key width.

export interface Key {
  row: number
  col: number
  cx: number
  cy: number
}

export const ROW_PITCH = Math.sqrt(3) / 2

export function buildGrid(rows: number, cols: number, keyWidth: number): Key[] {
  const keys: Key[] = []
  for (let r = 0; r < rows; r++) {
    const offset = r % 2 === 1 ? keyWidth / 2 : 0
    for (let c = 0; c < cols; c++) {
      keys.push({ row: r, col: c, cx: c * keyWidth + offset, cy: r * keyWidth * ROW_PITCH })
    }
  }
  return keys
}

export function distance(a: { cx: number; cy: number }, b: { cx: number; cy: number }): number {
  return Math.hypot(a.cx - b.cx, a.cy - b.cy)
}

// Clicks are attributed to the nearest key center; ties resolve row-major.
export function nearestKey(keys: Key[], x: number, y: number): Key {
  let best = keys[0]
  let bestDist = Infinity
  for (const key of keys) {
    const d = (key.cx - x) ** 2 + (key.cy - y) ** 2
    if (d < bestDist - 1e-9) {
      best = key
      bestDist = d
    }
  }
  return best
}

// Pointy-side-up hexagon outline with circumradius keyWidth / sqrt(3), so
// opposite flats are exactly one key width apart.
export function hexOutline(cx: number, cy: number, keyWidth: number): string {
  const r = keyWidth / Math.sqrt(3)
  const points: string[] = []
  for (let i = 0; i < 6; i++) {
    const angle = (Math.PI / 180) * (60 * i + 30)
    points.push(`${(cx + r * Math.cos(angle)).toFixed(2)},${(cy + r * Math.sin(angle)).toFixed(2)}`)
  }
  return points.join(" ")
}

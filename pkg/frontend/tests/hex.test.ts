import { describe, expect, it } from "vitest"

import { buildGrid, distance, hexOutline, nearestKey, ROW_PITCH } from "../src/hex.js"

describe("honeycomb geometry", () => {
  const keys = buildGrid(9, 9, 130)

  it("has 81 keys with the server's coordinate convention", () => {
    expect(keys.length).toBe(81)
    const at = (r: number, c: number) => keys[r * 9 + c]
    expect(at(0, 0)).toMatchObject({ cx: 0, cy: 0 })
    expect(at(1, 0).cx).toBeCloseTo(65, 10)
    expect(at(1, 0).cy).toBeCloseTo(130 * ROW_PITCH, 10)
    expect(at(2, 4).cx).toBe(4 * 130)
  })

  it("renders neighbor centers 130 +/- 1 CSS px apart at zoom 1", () => {
    const at = (r: number, c: number) => keys[r * 9 + c]
    const center = at(4, 4)
    const neighbors = [at(4, 3), at(4, 5), at(3, 3), at(3, 4), at(5, 3), at(5, 4)]
    for (const n of neighbors) {
      expect(Math.abs(distance(center, n) - 130)).toBeLessThanOrEqual(1)
      expect(distance(center, n)).toBeCloseTo(130, 9)
    }
  })

  it("attributes clicks to the nearest key center", () => {
    const at = (r: number, c: number) => keys[r * 9 + c]
    const key = at(3, 5)
    expect(nearestKey(keys, key.cx + 40, key.cy - 30)).toBe(key)
    expect(nearestKey(keys, key.cx, key.cy)).toBe(key)
    // halfway toward the right neighbor, biased right
    expect(nearestKey(keys, key.cx + 66, key.cy)).toBe(at(3, 6))
  })

  it("resolves equidistant clicks row-major", () => {
    const at = (r: number, c: number) => keys[r * 9 + c]
    expect(nearestKey(keys, at(0, 0).cx + 65, 0)).toBe(at(0, 0))
  })

  it("hexagon outline keeps opposite flats one key width apart", () => {
    const points = hexOutline(0, 0, 130)
      .split(" ")
      .map((p) => p.split(",").map(Number))
    expect(points).toHaveLength(6)
    // flats face sideways so same-row neighbors touch: x extent is the key
    // pitch, y extent is the larger vertex-to-vertex diameter
    const xs = points.map(([x]) => x)
    const ys = points.map(([, y]) => y)
    expect(Math.max(...xs) - Math.min(...xs)).toBeCloseTo(130, 1)
    expect(Math.max(...ys) - Math.min(...ys)).toBeCloseTo((2 * 130) / Math.sqrt(3), 1)
  })
})

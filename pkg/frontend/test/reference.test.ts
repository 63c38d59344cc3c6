// Cross-implementation fidelity: the viewer's pixel math re-renders the
// exporter's fixtures and must agree with the f32 renders produced by
// the exporting toolchain, and it must not care about splat order.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { renderCpu } from "../src/cpu_reference.js";
import { parseWsplat, permuteRecords } from "../src/format.js";

const FIXTURES = join(__dirname, "..", "fixtures");
const cases = JSON.parse(readFileSync(join(FIXTURES, "cases.json"), "utf-8")).cases;

function load(name: string): ArrayBuffer {
  const buf = readFileSync(join(FIXTURES, name));
  return buf.buffer.slice(buf.byteOffset, buf.byteOffset + buf.byteLength);
}

function meanAbsDiff(a: ArrayLike<number>, b: ArrayLike<number>): number {
  let total = 0;
  for (let i = 0; i < a.length; i += 1) total += Math.abs(a[i] - b[i]);
  return total / a.length;
}

describe("viewer pixel math vs exporter renders", () => {
  it.each(cases.map((c: any) => [c.name, c]))(
    "mean abs diff < 2/255 (%s)",
    (_name, c: any) => {
      const scene = parseWsplat(load(c.file));
      const image = renderCpu(scene, c.camera);
      expect(image.length).toBe(c.expected.length);
      const diff = meanAbsDiff(image, c.expected);
      expect(diff).toBeLessThan(2 / 255);
    },
  );

  it.each(cases.map((c: any) => [c.name, c]))(
    "order shuffle changes the image by < 1/255 (%s)",
    (_name, c: any) => {
      const scene = parseWsplat(load(c.file));
      const base = renderCpu(scene, c.camera);
      const order = new Uint32Array(scene.count);
      for (let i = 0; i < scene.count; i += 1) order[i] = (i * 7 + 3) % scene.count;
      const seen = new Set(order);
      expect(seen.size).toBe(scene.count); // sanity: a real permutation
      const shuffled = { ...scene, records: permuteRecords(scene, order) };
      const image = renderCpu(shuffled, c.camera);
      expect(meanAbsDiff(image, base)).toBeLessThan(1 / 255);
    },
  );

  it("renders the empty scene as the background color", () => {
    const scene = parseWsplat(load("empty.wsplat"));
    const cam = cases[0].camera;
    const image = renderCpu(scene, cam);
    for (let p = 0; p < cam.width * cam.height; p += 1) {
      expect(image[3 * p]).toBeCloseTo(scene.backgroundColor[0], 6);
      expect(image[3 * p + 1]).toBeCloseTo(scene.backgroundColor[1], 6);
      expect(image[3 * p + 2]).toBeCloseTo(scene.backgroundColor[2], 6);
    }
  });
});

// Orbit camera: clamps, view-matrix sanity, and agreement with the
// exporter-side camera construction recorded in the fixtures.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { OrbitCamera } from "../src/orbit.js";

const cases = JSON.parse(
  readFileSync(join(__dirname, "..", "fixtures", "cases.json"), "utf-8"),
).cases;

describe("OrbitCamera", () => {
  it("clamps elevation to (-89, 89) degrees", () => {
    const cam = new OrbitCamera();
    cam.orbit(0, 10);
    expect(cam.elevation).toBeLessThanOrEqual((89 * Math.PI) / 180);
    cam.orbit(0, -20);
    expect(cam.elevation).toBeGreaterThanOrEqual((-89 * Math.PI) / 180);
  });

  it("zoom clamps at the near distance", () => {
    const cam = new OrbitCamera({ distance: 2, near: 0.5 });
    for (let i = 0; i < 50; i += 1) cam.zoom(0.5);
    expect(cam.distance).toBeGreaterThan(cam.near);
  });

  it("produces an orthonormal right-handed view rotation", () => {
    const cam = new OrbitCamera({ azimuth: 0.7, elevation: -0.4, distance: 3 });
    const view = cam.view(64, 48);
    const r = view.rotation;
    for (let i = 0; i < 3; i += 1) {
      for (let j = 0; j < 3; j += 1) {
        let dot = 0;
        for (let k = 0; k < 3; k += 1) dot += r[3 * i + k] * r[3 * j + k];
        expect(dot).toBeCloseTo(i === j ? 1 : 0, 10);
      }
    }
    const det =
      r[0] * (r[4] * r[8] - r[5] * r[7]) -
      r[1] * (r[3] * r[8] - r[5] * r[6]) +
      r[2] * (r[3] * r[7] - r[4] * r[6]);
    expect(det).toBeCloseTo(1, 10);
  });

  it("pan moves the target without changing the distance", () => {
    const cam = new OrbitCamera({ distance: 3 });
    const before = [...cam.target];
    cam.pan(0.1, -0.05);
    expect(cam.target).not.toEqual(before);
    expect(cam.distance).toBeCloseTo(3, 12);
  });

  it.each(cases.map((c: any) => [c.name, c]))(
    "matches the exporter-side camera derivation (%s)",
    (_name, c: any) => {
      const o = c.camera.orbit;
      const cam = new OrbitCamera({
        target: o.target,
        distance: o.distance,
        azimuth: o.azimuth,
        elevation: o.elevation,
        fovY: o.fov_y,
        near: o.near,
        far: o.far,
      });
      const view = cam.view(o.width, o.height);
      expect(view.fx).toBeCloseTo(c.camera.fx, 6);
      expect(view.fy).toBeCloseTo(c.camera.fy, 6);
      expect(view.cx).toBeCloseTo(c.camera.cx, 6);
      for (let i = 0; i < 9; i += 1) {
        expect(view.rotation[i]).toBeCloseTo(c.camera.rotation[i], 6);
      }
      for (let i = 0; i < 3; i += 1) {
        expect(view.translation[i]).toBeCloseTo(c.camera.translation[i], 6);
      }
    },
  );
});

// Structural restatement of the sort-free claim: no depth-sort code
// path exists anywhere in the viewer sources, and the accumulation pass
// is additive.

import { readFileSync, readdirSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { ACCUM_FRAGMENT, NORMALIZE_FRAGMENT } from "../src/shaders.js";

const SRC = join(__dirname, "..", "src");

describe("sort-free structure", () => {
  it("no source file sorts anything", () => {
    for (const name of readdirSync(SRC)) {
      const text = readFileSync(join(SRC, name), "utf-8");
      expect(text, `${name} must not sort`).not.toMatch(/\.sort\(/);
      expect(text.toLowerCase(), `${name} must not mention depth sorting`).not.toContain("depthsort");
    }
  });

  it("the accumulation pass emits the commutative sums", () => {
    expect(ACCUM_FRAGMENT).toContain("vec4(vColor * aw, aw)");
  });

  it("the renderer uses purely additive blending and no depth test", () => {
    const text = readFileSync(join(SRC, "renderer.ts"), "utf-8");
    expect(text).toContain("gl.blendFunc(gl.ONE, gl.ONE)");
    expect(text).toContain("gl.disable(gl.DEPTH_TEST)");
  });

  it("the normalization pass divides by the weighted background total", () => {
    expect(NORMALIZE_FRAGMENT).toContain("sums.a + uBackgroundWeight");
    expect(NORMALIZE_FRAGMENT).toContain("uBackgroundColor * uBackgroundWeight");
  });
});

// Parser contracts against fixtures produced by the exporter.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  HEADER_SIZE,
  parseWsplat,
  permuteRecords,
  recordFloats,
  recordOffsets,
  WsplatParseError,
} from "../src/format.js";

const FIXTURES = join(__dirname, "..", "fixtures");

function load(name: string): ArrayBuffer {
  const buf = readFileSync(join(FIXTURES, name));
  return buf.buffer.slice(buf.byteOffset, buf.byteOffset + buf.byteLength);
}

const cases = JSON.parse(readFileSync(join(FIXTURES, "cases.json"), "utf-8")).cases;

describe("parseWsplat", () => {
  it("parses the empty scene to count 0", () => {
    const scene = parseWsplat(load("empty.wsplat"));
    expect(scene.count).toBe(0);
    expect(scene.records.length).toBe(0);
    expect(scene.weightModel).toBe("lc");
    expect(scene.backgroundColor[2]).toBeCloseTo(0.4, 6);
  });

  it.each(cases.map((c: any) => [c.name, c]))("round-trips exporter fields (%s)", (_name, c: any) => {
    const scene = parseWsplat(load(c.file));
    expect(scene.count).toBe(c.meta.count);
    expect(scene.weightModel).toBe(c.meta.weight_model);
    expect(scene.shDegreeColor).toBe(c.meta.sh_degree_color);
    expect(scene.shDegreeOpacity).toBe(c.meta.sh_degree_opacity);
    expect(scene.sigma).toBeCloseTo(c.meta.sigma, 6);
    expect(scene.backgroundWeight).toBeCloseTo(c.meta.background_weight, 6);
    const off = recordOffsets(scene);
    expect(scene.records.length).toBe(scene.count * off.stride);
    expect(off.stride).toBe(recordFloats(scene.shDegreeColor, scene.shDegreeOpacity));
    for (let axis = 0; axis < 3; axis += 1) {
      expect(scene.records[off.position + axis]).toBeCloseTo(c.meta.first_position[axis], 5);
    }
    expect(scene.records[off.lcV]).toBeCloseTo(c.meta.first_lc_v, 6);
  });

  it("rejects a corrupted magic", () => {
    const buf = load("toy20.wsplat");
    new Uint8Array(buf)[0] = 0x58;
    expect(() => parseWsplat(buf)).toThrowError(WsplatParseError);
    expect(() => parseWsplat(buf)).toThrowError(/magic/);
  });

  it("rejects an unsupported version", () => {
    const buf = load("toy20.wsplat");
    new DataView(buf).setUint32(4, 9, true);
    expect(() => parseWsplat(buf)).toThrowError(/version 9/);
  });

  it("rejects truncation at every record boundary with a located offset", () => {
    const full = load("toy20.wsplat");
    const scene = parseWsplat(full);
    const strideBytes = 4 * recordOffsets(scene).stride;
    for (let k = 0; k < scene.count; k += 1) {
      const cut = full.slice(0, HEADER_SIZE + k * strideBytes + 5);
      try {
        parseWsplat(cut);
        expect.unreachable("truncated parse must throw");
      } catch (err) {
        expect(err).toBeInstanceOf(WsplatParseError);
        expect((err as WsplatParseError).offset).toBe(HEADER_SIZE + k * strideBytes);
      }
    }
  });

  it("rejects a file shorter than the header", () => {
    expect(() => parseWsplat(new ArrayBuffer(10))).toThrowError(/header/);
  });
});

describe("permuteRecords", () => {
  it("reorders whole records", () => {
    const scene = parseWsplat(load("toy20.wsplat"));
    const off = recordOffsets(scene);
    const order = new Uint32Array(scene.count);
    for (let i = 0; i < scene.count; i += 1) order[i] = scene.count - 1 - i;
    const permuted = permuteRecords(scene, order);
    for (let i = 0; i < scene.count; i += 1) {
      const src = (scene.count - 1 - i) * off.stride;
      for (let f = 0; f < off.stride; f += 1) {
        expect(permuted[i * off.stride + f]).toBe(scene.records[src + f]);
      }
    }
  });
});

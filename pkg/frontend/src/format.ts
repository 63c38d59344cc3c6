// Parser for the .wsplat binary scene format (little-endian).
//
// Layout: "WSPL" | u32 version | u32 count | u8 model | u8 degC | u8 degO
// | u8 reserved | 6 x f32 globals (sigma, beta, wB, background rgb), then
// per-splat f32 records: position(3), quaternion wxyz(4), log scale(3),
// color SH (3 * (degC+1)^2, channel-major), opacity SH ((degO+1)^2), lcV(1).

export const MAGIC = "WSPL";
export const VERSION = 1;
export const HEADER_SIZE = 40;

export type WeightModelName = "dir" | "exp" | "lc";
const MODEL_NAMES: WeightModelName[] = ["dir", "exp", "lc"];

export interface WsplatScene {
  count: number;
  weightModel: WeightModelName;
  shDegreeColor: number;
  shDegreeOpacity: number;
  sigma: number;
  beta: number;
  backgroundWeight: number;
  backgroundColor: [number, number, number];
  /** Raw per-splat records, `recordFloats` floats each, file order. */
  records: Float32Array;
}

export class WsplatParseError extends Error {
  readonly offset: number;

  constructor(message: string, offset: number) {
    super(`${message} (byte offset ${offset})`);
    this.name = "WsplatParseError";
    this.offset = offset;
  }
}

export function nBasis(degree: number): number {
  return (degree + 1) * (degree + 1);
}

export function recordFloats(shDegreeColor: number, shDegreeOpacity: number): number {
  return 3 + 4 + 3 + 3 * nBasis(shDegreeColor) + nBasis(shDegreeOpacity) + 1;
}

export function parseWsplat(buffer: ArrayBuffer): WsplatScene {
  if (buffer.byteLength < HEADER_SIZE) {
    throw new WsplatParseError("file shorter than the header", buffer.byteLength);
  }
  const view = new DataView(buffer);
  const magic = String.fromCharCode(
    view.getUint8(0), view.getUint8(1), view.getUint8(2), view.getUint8(3),
  );
  if (magic !== MAGIC) {
    throw new WsplatParseError(`bad magic ${JSON.stringify(magic)}`, 0);
  }
  const version = view.getUint32(4, true);
  if (version !== VERSION) {
    throw new WsplatParseError(`unsupported version ${version}`, 4);
  }
  const count = view.getUint32(8, true);
  const modelCode = view.getUint8(12);
  const shDegreeColor = view.getUint8(13);
  const shDegreeOpacity = view.getUint8(14);
  if (modelCode >= MODEL_NAMES.length) {
    throw new WsplatParseError(`unknown weight model code ${modelCode}`, 12);
  }
  if (shDegreeColor > 3 || shDegreeOpacity > 3) {
    throw new WsplatParseError(
      `SH degrees out of range: color ${shDegreeColor}, opacity ${shDegreeOpacity}`, 13,
    );
  }
  const sigma = view.getFloat32(16, true);
  const beta = view.getFloat32(20, true);
  const backgroundWeight = view.getFloat32(24, true);
  const backgroundColor: [number, number, number] = [
    view.getFloat32(28, true),
    view.getFloat32(32, true),
    view.getFloat32(36, true),
  ];

  const stride = recordFloats(shDegreeColor, shDegreeOpacity);
  const expected = count * stride * 4;
  const body = buffer.byteLength - HEADER_SIZE;
  if (body < expected) {
    const complete = Math.floor(body / (stride * 4));
    throw new WsplatParseError(
      `truncated body: expected ${count} records, found ${complete} complete`,
      HEADER_SIZE + complete * stride * 4,
    );
  }
  const records = new Float32Array(buffer.slice(HEADER_SIZE, HEADER_SIZE + expected));
  return {
    count,
    weightModel: MODEL_NAMES[modelCode],
    shDegreeColor,
    shDegreeOpacity,
    sigma,
    beta,
    backgroundWeight,
    backgroundColor,
    records,
  };
}

/** Field offsets (in floats) inside one splat record. */
export function recordOffsets(scene: Pick<WsplatScene, "shDegreeColor" | "shDegreeOpacity">) {
  const kc = nBasis(scene.shDegreeColor);
  const ko = nBasis(scene.shDegreeOpacity);
  const position = 0;
  const quat = 3;
  const logScale = 7;
  const colorSh = 10;
  const opacitySh = colorSh + 3 * kc;
  const lcV = opacitySh + ko;
  return { position, quat, logScale, colorSh, opacitySh, lcV, kc, ko, stride: lcV + 1 };
}

/** Permute splat record order in place-on-copy; the image must not change. */
export function permuteRecords(scene: WsplatScene, order: Uint32Array): Float32Array {
  const { stride } = recordOffsets(scene);
  const out = new Float32Array(scene.records.length);
  for (let j = 0; j < scene.count; j += 1) {
    const src = order[j] * stride;
    out.set(scene.records.subarray(src, src + stride), j * stride);
  }
  return out;
}

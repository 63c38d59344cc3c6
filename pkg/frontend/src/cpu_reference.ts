// CPU mirror of the shader math, used by the test suite to pin the
// viewer's pixel pipeline against renders produced by the exporter's
// toolchain, and by the dev harness as an on-page verification probe.
//
// The math matches the accumulation + normalization passes exactly:
// anisotropic covariance -> camera space -> 2D footprint (with the
// 0.3 px floor and 3 sigma radius), SH color with the +0.5 offset and
// zero clamp, unclamped SH opacity, per-model depth weight, then plain
// commutative sums divided against the weighted background.

import { CameraView } from "./orbit.js";
import { WsplatScene, recordOffsets } from "./format.js";

export const SH_C0 = 0.28209479177387814;
const SH_C1 = 0.4886025119029199;
const SH_C2 = [1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
  -1.0925484305920792, 0.5462742152960396];
const SH_C3 = [-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
  0.3731763325901154, -0.4570457994644658, 1.445305721320277, -0.5900435899266435];

export const COV2D_FLOOR = 0.3;
export const RADIUS_SIGMAS = 3.0;
export const ALPHA_FLOOR = 1.0 / 255.0;

export function shBasis(degree: number, d: [number, number, number]): number[] {
  const [x, y, z] = d;
  const out = [SH_C0];
  if (degree >= 1) {
    out.push(-SH_C1 * y, SH_C1 * z, -SH_C1 * x);
  }
  if (degree >= 2) {
    const xx = x * x; const yy = y * y; const zz = z * z;
    out.push(
      SH_C2[0] * x * y,
      SH_C2[1] * y * z,
      SH_C2[2] * (2 * zz - xx - yy),
      SH_C2[3] * x * z,
      SH_C2[4] * (xx - yy),
    );
  }
  if (degree >= 3) {
    const xx = x * x; const yy = y * y; const zz = z * z;
    out.push(
      SH_C3[0] * y * (3 * xx - yy),
      SH_C3[1] * x * y * z,
      SH_C3[2] * y * (4 * zz - xx - yy),
      SH_C3[3] * z * (2 * zz - 3 * xx - 3 * yy),
      SH_C3[4] * x * (4 * zz - xx - yy),
      SH_C3[5] * z * (xx - yy),
      SH_C3[6] * x * (xx - 3 * yy),
    );
  }
  return out;
}

function quatToRot(w: number, x: number, y: number, z: number): number[] {
  const n = Math.hypot(w, x, y, z);
  w /= n; x /= n; y /= n; z /= n;
  return [
    1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
    2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
    2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y),
  ];
}

export function weightOf(scene: WsplatScene, depth: number, lcV: number): number {
  if (scene.weightModel === "exp") {
    return Math.exp(-scene.sigma * Math.pow(depth, scene.beta));
  }
  if (scene.weightModel === "lc") {
    return Math.max(0, 1 - depth / scene.sigma) * lcV;
  }
  return 1.0;
}

export function renderCpu(scene: WsplatScene, cam: CameraView): Float32Array {
  const { width: w, height: h } = cam;
  const num = new Float64Array(w * h * 3);
  const den = new Float64Array(w * h);
  const off = recordOffsets(scene);
  const r = cam.rotation;
  const t = cam.translation;
  // Focal point in world space: -R^T t.
  const fpt: [number, number, number] = [
    -(r[0] * t[0] + r[3] * t[1] + r[6] * t[2]),
    -(r[1] * t[0] + r[4] * t[1] + r[7] * t[2]),
    -(r[2] * t[0] + r[5] * t[1] + r[8] * t[2]),
  ];

  for (let i = 0; i < scene.count; i += 1) {
    const rec = scene.records.subarray(i * off.stride, (i + 1) * off.stride);
    const px = rec[off.position]; const py = rec[off.position + 1]; const pz = rec[off.position + 2];
    const xc = r[0] * px + r[1] * py + r[2] * pz + t[0];
    const yc = r[3] * px + r[4] * py + r[5] * pz + t[1];
    const zc = r[6] * px + r[7] * py + r[8] * pz + t[2];
    if (zc <= cam.near || zc >= cam.far) continue;

    // 3D covariance R diag(exp(ls)^2) R^T.
    const rq = quatToRot(rec[off.quat], rec[off.quat + 1], rec[off.quat + 2], rec[off.quat + 3]);
    const s0 = Math.exp(rec[off.logScale]);
    const s1 = Math.exp(rec[off.logScale + 1]);
    const s2 = Math.exp(rec[off.logScale + 2]);
    // m = Rq * diag(s); sigma3d = m m^T
    const m = [rq[0] * s0, rq[1] * s1, rq[2] * s2,
      rq[3] * s0, rq[4] * s1, rq[5] * s2,
      rq[6] * s0, rq[7] * s1, rq[8] * s2];
    const sig = [
      m[0] * m[0] + m[1] * m[1] + m[2] * m[2],
      m[0] * m[3] + m[1] * m[4] + m[2] * m[5],
      m[0] * m[6] + m[1] * m[7] + m[2] * m[8],
      m[3] * m[3] + m[4] * m[4] + m[5] * m[5],
      m[3] * m[6] + m[4] * m[7] + m[5] * m[8],
      m[6] * m[6] + m[7] * m[7] + m[8] * m[8],
    ]; // xx xy xz yy yz zz

    // jw = J * R with J the pinhole Jacobian at (xc, yc, zc).
    const iz = 1 / zc; const iz2 = iz * iz;
    const j00 = cam.fx * iz; const j02 = -cam.fx * xc * iz2;
    const j11 = cam.fy * iz; const j12 = -cam.fy * yc * iz2;
    const a0 = j00 * r[0] + j02 * r[6];
    const a1 = j00 * r[1] + j02 * r[7];
    const a2 = j00 * r[2] + j02 * r[8];
    const b0 = j11 * r[3] + j12 * r[6];
    const b1 = j11 * r[4] + j12 * r[7];
    const b2 = j11 * r[5] + j12 * r[8];
    // cov2d = jw sigma3d jw^T + floor
    const sx0 = sig[0] * a0 + sig[1] * a1 + sig[2] * a2;
    const sx1 = sig[1] * a0 + sig[3] * a1 + sig[4] * a2;
    const sx2 = sig[2] * a0 + sig[4] * a1 + sig[5] * a2;
    const sy0 = sig[0] * b0 + sig[1] * b1 + sig[2] * b2;
    const sy1 = sig[1] * b0 + sig[3] * b1 + sig[4] * b2;
    const sy2 = sig[2] * b0 + sig[4] * b1 + sig[5] * b2;
    const caa = a0 * sx0 + a1 * sx1 + a2 * sx2 + COV2D_FLOOR;
    const cab = b0 * sx0 + b1 * sx1 + b2 * sx2;
    const cbb = b0 * sy0 + b1 * sy1 + b2 * sy2 + COV2D_FLOOR;
    const det = caa * cbb - cab * cab;
    if (det <= 0) continue;
    const qa = cbb / det; const qb = -cab / det; const qc = caa / det;
    const mid = 0.5 * (caa + cbb);
    const radius = RADIUS_SIGMAS * Math.sqrt(mid + Math.sqrt(Math.max(mid * mid - det, 0)));
    const mx = cam.fx * xc * iz + cam.cx;
    const my = cam.fy * yc * iz + cam.cy;
    if (mx + radius <= 0 || mx - radius >= w || my + radius <= 0 || my - radius >= h) continue;

    // Shading: direction from splat toward the focal point.
    let dx = fpt[0] - px; let dy = fpt[1] - py; let dz = fpt[2] - pz;
    const dn = Math.hypot(dx, dy, dz) || 1;
    dx /= dn; dy /= dn; dz /= dn;
    const basisC = shBasis(scene.shDegreeColor, [dx, dy, dz]);
    const basisO = shBasis(scene.shDegreeOpacity, [dx, dy, dz]);
    const color = [0, 0, 0];
    for (let ch = 0; ch < 3; ch += 1) {
      let acc = 0.5;
      for (let k = 0; k < off.kc; k += 1) {
        acc += basisC[k] * rec[off.colorSh + ch * off.kc + k];
      }
      color[ch] = Math.max(acc, 0);
    }
    let u = 0;
    for (let k = 0; k < off.ko; k += 1) {
      u += basisO[k] * rec[off.opacitySh + k];
    }
    const weight = weightOf(scene, zc, rec[off.lcV]);

    const x0 = Math.max(0, Math.floor(mx - radius));
    const x1 = Math.min(w, Math.ceil(mx + radius) + 1);
    const y0 = Math.max(0, Math.floor(my - radius));
    const y1 = Math.min(h, Math.ceil(my + radius) + 1);
    for (let yy = y0; yy < y1; yy += 1) {
      const ddy = yy + 0.5 - my;
      for (let xx = x0; xx < x1; xx += 1) {
        const ddx = xx + 0.5 - mx;
        const e = 0.5 * (qa * ddx * ddx + qc * ddy * ddy) + qb * ddx * ddy;
        const g = Math.exp(-e);
        if (g < ALPHA_FLOOR) continue;
        const aw = u * g * weight;
        const p = yy * w + xx;
        num[3 * p] += aw * color[0];
        num[3 * p + 1] += aw * color[1];
        num[3 * p + 2] += aw * color[2];
        den[p] += aw;
      }
    }
  }

  const out = new Float32Array(w * h * 3);
  const [br, bg, bb] = scene.backgroundColor;
  const wb = scene.backgroundWeight;
  for (let p = 0; p < w * h; p += 1) {
    const total = den[p] + wb;
    let cr: number; let cg: number; let cb: number;
    if (total <= 0) {
      cr = br; cg = bg; cb = bb;
    } else {
      cr = (num[3 * p] + br * wb) / total;
      cg = (num[3 * p + 1] + bg * wb) / total;
      cb = (num[3 * p + 2] + bb * wb) / total;
    }
    out[3 * p] = Math.min(1, Math.max(0, cr));
    out[3 * p + 1] = Math.min(1, Math.max(0, cg));
    out[3 * p + 2] = Math.min(1, Math.max(0, cb));
  }
  return out;
}

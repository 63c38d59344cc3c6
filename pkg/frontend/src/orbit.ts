// Orbit camera: spherical coordinates around a target, derived each frame
// into the same pinhole convention the exporter's renderer uses
// (camera x right, y down, z forward; world-to-camera rotation rows).

export interface CameraView {
  width: number;
  height: number;
  fx: number;
  fy: number;
  cx: number;
  cy: number;
  rotation: number[]; // 9, row-major world-to-camera
  translation: number[]; // 3
  near: number;
  far: number;
}

const MAX_ELEVATION = (89 * Math.PI) / 180;

type Vec3 = [number, number, number];

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

function normalize(a: Vec3): Vec3 {
  const n = Math.hypot(a[0], a[1], a[2]);
  return [a[0] / n, a[1] / n, a[2] / n];
}

export class OrbitCamera {
  target: Vec3;
  distance: number;
  azimuth: number;
  elevation: number;
  fovY: number;
  near: number;
  far: number;

  constructor(options: Partial<OrbitCamera> = {}) {
    this.target = options.target ?? [0, 0, 0];
    this.distance = options.distance ?? 4.0;
    this.azimuth = options.azimuth ?? 0.5;
    this.elevation = options.elevation ?? 0.3;
    this.fovY = options.fovY ?? 0.9;
    this.near = options.near ?? 0.05;
    this.far = options.far ?? 200.0;
    this.clamp();
  }

  private clamp(): void {
    this.elevation = Math.min(MAX_ELEVATION, Math.max(-MAX_ELEVATION, this.elevation));
    this.distance = Math.max(this.distance, this.near * 1.5);
  }

  eye(): Vec3 {
    const ce = Math.cos(this.elevation);
    return [
      this.target[0] + this.distance * Math.cos(this.azimuth) * ce,
      this.target[1] + this.distance * Math.sin(this.elevation),
      this.target[2] + this.distance * Math.sin(this.azimuth) * ce,
    ];
  }

  orbit(dAzimuth: number, dElevation: number): void {
    this.azimuth += dAzimuth;
    this.elevation += dElevation;
    this.clamp();
  }

  zoom(factor: number): void {
    this.distance *= factor;
    this.clamp();
  }

  /** Pan in the view plane; deltas are scaled by distance for a constant feel. */
  pan(dxView: number, dyView: number): void {
    const { right, down } = this.axes();
    const s = this.distance;
    this.target = [
      this.target[0] + s * (dxView * right[0] + dyView * down[0]),
      this.target[1] + s * (dxView * right[1] + dyView * down[1]),
      this.target[2] + s * (dxView * right[2] + dyView * down[2]),
    ];
  }

  private axes(): { right: Vec3; down: Vec3; forward: Vec3 } {
    const forward = normalize(sub(this.target, this.eye()));
    const right = normalize(cross(forward, [0, 1, 0]));
    const down = cross(forward, right);
    return { right, down, forward };
  }

  view(width: number, height: number): CameraView {
    const { right, down, forward } = this.axes();
    const eye = this.eye();
    const rotation = [...right, ...down, ...forward];
    const translation = [
      -(right[0] * eye[0] + right[1] * eye[1] + right[2] * eye[2]),
      -(down[0] * eye[0] + down[1] * eye[1] + down[2] * eye[2]),
      -(forward[0] * eye[0] + forward[1] * eye[1] + forward[2] * eye[2]),
    ];
    const fy = 0.5 * height / Math.tan(0.5 * this.fovY);
    return {
      width,
      height,
      fx: fy,
      fy,
      cx: width / 2,
      cy: height / 2,
      rotation,
      translation,
      near: this.near,
      far: this.far,
    };
  }
}

// GLSL for the two render passes.
//
// Pass 1 (accumulation): one instanced quad per splat; the vertex stage
// fetches the splat record from a float texture, projects the 3D
// covariance to the 2D footprint, evaluates SH color/opacity and the
// depth weight, and the fragment stage emits (alpha*w*rgb, alpha*w)
// into a float target with additive blending. Summation is commutative,
// so instances may arrive in any order and no sort exists anywhere.
//
// Pass 2 (normalize): full-screen division by (weight sum + background
// weight), mixing in the background color.

export const ACCUM_VERTEX = `#version 300 es
precision highp float;
precision highp int;
precision highp sampler2D;

uniform sampler2D uData;       // RGBA32F, one row per splat
uniform vec3 uRotRow0;         // world-to-camera rows
uniform vec3 uRotRow1;
uniform vec3 uRotRow2;
uniform vec3 uTranslation;
uniform vec3 uFocalPoint;      // camera center in world space
uniform vec2 uViewport;        // pixels
uniform vec4 uIntrinsics;      // fx, fy, cx, cy
uniform vec2 uDepthRange;      // near, far
uniform int uDegColor;
uniform int uDegOpacity;
uniform int uWeightModel;      // 0 dir, 1 exp, 2 lc
uniform vec2 uSigmaBeta;

out vec2 vMean;                // image coords, y down
out vec3 vConic;               // a, b, c
out vec3 vColor;
out float vAlphaScale;         // view-dependent opacity u
out float vWeight;             // w(depth)

float fetchFloat(int splat, int idx) {
  ivec2 at = ivec2(idx >> 2, splat);
  vec4 texel = texelFetch(uData, at, 0);
  int c = idx & 3;
  if (c == 0) return texel.x;
  if (c == 1) return texel.y;
  if (c == 2) return texel.z;
  return texel.w;
}

void shBasis(int degree, vec3 d, out float basis[16]) {
  for (int i = 0; i < 16; i++) basis[i] = 0.0;
  basis[0] = 0.28209479177387814;
  if (degree >= 1) {
    basis[1] = -0.4886025119029199 * d.y;
    basis[2] = 0.4886025119029199 * d.z;
    basis[3] = -0.4886025119029199 * d.x;
  }
  if (degree >= 2) {
    float xx = d.x * d.x; float yy = d.y * d.y; float zz = d.z * d.z;
    basis[4] = 1.0925484305920792 * d.x * d.y;
    basis[5] = -1.0925484305920792 * d.y * d.z;
    basis[6] = 0.31539156525252005 * (2.0 * zz - xx - yy);
    basis[7] = -1.0925484305920792 * d.x * d.z;
    basis[8] = 0.5462742152960396 * (xx - yy);
  }
  if (degree >= 3) {
    float xx = d.x * d.x; float yy = d.y * d.y; float zz = d.z * d.z;
    basis[9] = -0.5900435899266435 * d.y * (3.0 * xx - yy);
    basis[10] = 2.890611442640554 * d.x * d.y * d.z;
    basis[11] = -0.4570457994644658 * d.y * (4.0 * zz - xx - yy);
    basis[12] = 0.3731763325901154 * d.z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
    basis[13] = -0.4570457994644658 * d.x * (4.0 * zz - xx - yy);
    basis[14] = 1.445305721320277 * d.z * (xx - yy);
    basis[15] = -0.5900435899266435 * d.x * (xx - 3.0 * yy);
  }
}

mat3 quatToRot(vec4 q) {
  q /= length(q);
  float w = q.x; float x = q.y; float y = q.z; float z = q.w;
  return mat3(
    1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y + w * z), 2.0 * (x * z - w * y),
    2.0 * (x * y - w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z + w * x),
    2.0 * (x * z + w * y), 2.0 * (y * z - w * x), 1.0 - 2.0 * (x * x + y * y)
  ); // columns: GLSL mat3 is column-major; this lays out R with rows as in the exporter
}

void main() {
  int splat = gl_InstanceID;
  vec3 p = vec3(fetchFloat(splat, 0), fetchFloat(splat, 1), fetchFloat(splat, 2));
  vec4 q = vec4(fetchFloat(splat, 3), fetchFloat(splat, 4), fetchFloat(splat, 5), fetchFloat(splat, 6));
  vec3 ls = vec3(fetchFloat(splat, 7), fetchFloat(splat, 8), fetchFloat(splat, 9));

  vec3 xc = vec3(dot(uRotRow0, p), dot(uRotRow1, p), dot(uRotRow2, p)) + uTranslation;
  if (xc.z <= uDepthRange.x || xc.z >= uDepthRange.y) {
    gl_Position = vec4(0.0, 0.0, 2.0, 1.0);  // clipped away
    return;
  }

  mat3 rq = quatToRot(q);
  vec3 s = exp(ls);
  mat3 ms = mat3(rq[0] * s.x, rq[1] * s.y, rq[2] * s.z);
  mat3 sigma = ms * transpose(ms);

  float iz = 1.0 / xc.z;
  float fx = uIntrinsics.x; float fy = uIntrinsics.y;
  // Rows of J * R (the affine screen Jacobian composed with the view rotation).
  vec3 ja = fx * iz * uRotRow0 - fx * xc.x * iz * iz * uRotRow2;
  vec3 jb = fy * iz * uRotRow1 - fy * xc.y * iz * iz * uRotRow2;
  float caa = dot(ja, sigma * ja) + 0.3;
  float cab = dot(ja, sigma * jb);
  float cbb = dot(jb, sigma * jb) + 0.3;
  float det = caa * cbb - cab * cab;
  if (det <= 0.0) {
    gl_Position = vec4(0.0, 0.0, 2.0, 1.0);
    return;
  }
  vConic = vec3(cbb / det, -cab / det, caa / det);
  float mid = 0.5 * (caa + cbb);
  float radius = 3.0 * sqrt(mid + sqrt(max(mid * mid - det, 0.0)));
  vMean = vec2(fx * xc.x * iz + uIntrinsics.z, fy * xc.y * iz + uIntrinsics.w);

  vec3 dir = normalize(uFocalPoint - p);
  float basis[16];
  shBasis(uDegColor, dir, basis);
  int kc = (uDegColor + 1) * (uDegColor + 1);
  vec3 color = vec3(0.5);
  for (int k = 0; k < kc; k++) {
    color.r += basis[k] * fetchFloat(splat, 10 + k);
    color.g += basis[k] * fetchFloat(splat, 10 + kc + k);
    color.b += basis[k] * fetchFloat(splat, 10 + 2 * kc + k);
  }
  vColor = max(color, vec3(0.0));

  shBasis(uDegOpacity, dir, basis);
  int ko = (uDegOpacity + 1) * (uDegOpacity + 1);
  float u = 0.0;
  for (int k = 0; k < ko; k++) {
    u += basis[k] * fetchFloat(splat, 10 + 3 * kc + k);
  }
  vAlphaScale = u;  // deliberately unclamped

  float lcv = fetchFloat(splat, 10 + 3 * kc + ko);
  if (uWeightModel == 1) {
    vWeight = exp(-uSigmaBeta.x * pow(xc.z, uSigmaBeta.y));
  } else if (uWeightModel == 2) {
    vWeight = max(0.0, 1.0 - xc.z / uSigmaBeta.x) * lcv;
  } else {
    vWeight = 1.0;
  }

  vec2 corner = vec2(
    (gl_VertexID & 1) == 1 ? 1.0 : -1.0,
    (gl_VertexID & 2) == 2 ? 1.0 : -1.0
  );
  vec2 pix = vMean + corner * radius;
  gl_Position = vec4(
    2.0 * pix.x / uViewport.x - 1.0,
    1.0 - 2.0 * pix.y / uViewport.y,
    0.0,
    1.0
  );
}
`;

export const ACCUM_FRAGMENT = `#version 300 es
precision highp float;

uniform vec2 uViewport;
uniform float uAlphaFloor;

in vec2 vMean;
in vec3 vConic;
in vec3 vColor;
in float vAlphaScale;
in float vWeight;

out vec4 outSum;

void main() {
  // gl_FragCoord is bottom-left pixel-center; the footprint lives in
  // top-left y-down image coordinates.
  vec2 frag = vec2(gl_FragCoord.x, uViewport.y - gl_FragCoord.y);
  vec2 d = frag - vMean;
  float e = 0.5 * (vConic.x * d.x * d.x + vConic.z * d.y * d.y) + vConic.y * d.x * d.y;
  float g = exp(-e);
  if (g < uAlphaFloor) discard;
  float aw = vAlphaScale * g * vWeight;
  outSum = vec4(vColor * aw, aw);
}
`;

export const NORMALIZE_VERTEX = `#version 300 es
precision highp float;

void main() {
  // Full-screen triangle from gl_VertexID.
  vec2 xy = vec2((gl_VertexID << 1) & 2, gl_VertexID & 2);
  gl_Position = vec4(xy * 2.0 - 1.0, 0.0, 1.0);
}
`;

export const NORMALIZE_FRAGMENT = `#version 300 es
precision highp float;

uniform sampler2D uSums;
uniform vec3 uBackgroundColor;
uniform float uBackgroundWeight;

out vec4 outColor;

void main() {
  vec4 sums = texelFetch(uSums, ivec2(gl_FragCoord.xy), 0);
  float total = sums.a + uBackgroundWeight;
  vec3 color = total > 0.0
    ? (sums.rgb + uBackgroundColor * uBackgroundWeight) / total
    : uBackgroundColor;
  outColor = vec4(clamp(color, 0.0, 1.0), 1.0);
}
`;

// WebGL2 renderer: additive accumulation into a half-float target,
// full-screen normalization, no depth test, no sort.

import { WsplatScene, recordOffsets } from "./format.js";
import { CameraView } from "./orbit.js";
import { ACCUM_FRAGMENT, ACCUM_VERTEX, NORMALIZE_FRAGMENT, NORMALIZE_VERTEX } from "./shaders.js";

const MODEL_CODES: Record<string, number> = { dir: 0, exp: 1, lc: 2 };

function compile(gl: WebGL2RenderingContext, type: number, source: string): WebGLShader {
  const shader = gl.createShader(type)!;
  gl.shaderSource(shader, source);
  gl.compileShader(shader);
  if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
    throw new Error(`shader compile failed: ${gl.getShaderInfoLog(shader)}`);
  }
  return shader;
}

function link(gl: WebGL2RenderingContext, vs: string, fs: string): WebGLProgram {
  const program = gl.createProgram()!;
  gl.attachShader(program, compile(gl, gl.VERTEX_SHADER, vs));
  gl.attachShader(program, compile(gl, gl.FRAGMENT_SHADER, fs));
  gl.linkProgram(program);
  if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
    throw new Error(`program link failed: ${gl.getProgramInfoLog(program)}`);
  }
  return program;
}

export class ViewerRenderer {
  private gl: WebGL2RenderingContext;
  private accumProgram: WebGLProgram;
  private normalizeProgram: WebGLProgram;
  private dataTexture: WebGLTexture | null = null;
  private accumTexture: WebGLTexture | null = null;
  private framebuffer: WebGLFramebuffer;
  private fbWidth = 0;
  private fbHeight = 0;
  private vao: WebGLVertexArrayObject;
  scene: WsplatScene | null = null;
  backgroundOverride: [number, number, number] | null = null;

  constructor(canvas: HTMLCanvasElement) {
    const gl = canvas.getContext("webgl2", { antialias: false, preserveDrawingBuffer: true });
    if (!gl) {
      throw new Error("WebGL2 is not available in this browser.");
    }
    this.gl = gl;
    if (!gl.getExtension("EXT_color_buffer_float")) {
      throw new Error(
        "This device cannot render to float targets (EXT_color_buffer_float missing); " +
        "the weighted sums need a 16-bit-or-wider float render target.",
      );
    }
    this.accumProgram = link(gl, ACCUM_VERTEX, ACCUM_FRAGMENT);
    this.normalizeProgram = link(gl, NORMALIZE_VERTEX, NORMALIZE_FRAGMENT);
    this.framebuffer = gl.createFramebuffer()!;
    this.vao = gl.createVertexArray()!;
  }

  loadScene(scene: WsplatScene): void {
    this.scene = scene;
    this.uploadRecords(scene.records);
  }

  /** Re-upload the splat records (used by the order-shuffle control). */
  uploadRecords(records: Float32Array): void {
    if (!this.scene) return;
    const gl = this.gl;
    const { stride } = recordOffsets(this.scene);
    const texelsPerSplat = Math.ceil(stride / 4);
    const count = Math.max(this.scene.count, 1);
    const padded = new Float32Array(texelsPerSplat * 4 * count);
    for (let i = 0; i < this.scene.count; i += 1) {
      padded.set(records.subarray(i * stride, (i + 1) * stride), i * texelsPerSplat * 4);
    }
    if (!this.dataTexture) this.dataTexture = gl.createTexture();
    gl.bindTexture(gl.TEXTURE_2D, this.dataTexture);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MIN_FILTER, gl.NEAREST);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MAG_FILTER, gl.NEAREST);
    gl.texImage2D(
      gl.TEXTURE_2D, 0, gl.RGBA32F, texelsPerSplat, count, 0, gl.RGBA, gl.FLOAT, padded,
    );
  }

  private ensureAccumTarget(width: number, height: number): void {
    if (this.fbWidth === width && this.fbHeight === height && this.accumTexture) return;
    const gl = this.gl;
    if (this.accumTexture) gl.deleteTexture(this.accumTexture);
    this.accumTexture = gl.createTexture();
    gl.bindTexture(gl.TEXTURE_2D, this.accumTexture);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MIN_FILTER, gl.NEAREST);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MAG_FILTER, gl.NEAREST);
    gl.texImage2D(gl.TEXTURE_2D, 0, gl.RGBA16F, width, height, 0, gl.RGBA, gl.FLOAT, null);
    gl.bindFramebuffer(gl.FRAMEBUFFER, this.framebuffer);
    gl.framebufferTexture2D(
      gl.FRAMEBUFFER, gl.COLOR_ATTACHMENT0, gl.TEXTURE_2D, this.accumTexture, 0,
    );
    gl.bindFramebuffer(gl.FRAMEBUFFER, null);
    this.fbWidth = width;
    this.fbHeight = height;
  }

  renderFrame(cam: CameraView): void {
    const gl = this.gl;
    const scene = this.scene;
    const bg = this.backgroundOverride ?? scene?.backgroundColor ?? [0, 0, 0];
    this.ensureAccumTarget(cam.width, cam.height);
    gl.viewport(0, 0, cam.width, cam.height);
    gl.disable(gl.DEPTH_TEST);
    gl.bindVertexArray(this.vao);

    // Pass 1: commutative accumulation.
    gl.bindFramebuffer(gl.FRAMEBUFFER, this.framebuffer);
    gl.clearColor(0, 0, 0, 0);
    gl.clear(gl.COLOR_BUFFER_BIT);
    if (scene && scene.count > 0) {
      gl.enable(gl.BLEND);
      gl.blendFunc(gl.ONE, gl.ONE);
      gl.useProgram(this.accumProgram);
      const u = (name: string) => gl.getUniformLocation(this.accumProgram, name);
      gl.activeTexture(gl.TEXTURE0);
      gl.bindTexture(gl.TEXTURE_2D, this.dataTexture);
      gl.uniform1i(u("uData"), 0);
      gl.uniform3fv(u("uRotRow0"), cam.rotation.slice(0, 3));
      gl.uniform3fv(u("uRotRow1"), cam.rotation.slice(3, 6));
      gl.uniform3fv(u("uRotRow2"), cam.rotation.slice(6, 9));
      gl.uniform3fv(u("uTranslation"), cam.translation);
      const r = cam.rotation; const t = cam.translation;
      gl.uniform3f(
        u("uFocalPoint"),
        -(r[0] * t[0] + r[3] * t[1] + r[6] * t[2]),
        -(r[1] * t[0] + r[4] * t[1] + r[7] * t[2]),
        -(r[2] * t[0] + r[5] * t[1] + r[8] * t[2]),
      );
      gl.uniform2f(u("uViewport"), cam.width, cam.height);
      gl.uniform4f(u("uIntrinsics"), cam.fx, cam.fy, cam.cx, cam.cy);
      gl.uniform2f(u("uDepthRange"), cam.near, cam.far);
      gl.uniform1i(u("uDegColor"), scene.shDegreeColor);
      gl.uniform1i(u("uDegOpacity"), scene.shDegreeOpacity);
      gl.uniform1i(u("uWeightModel"), MODEL_CODES[scene.weightModel]);
      gl.uniform2f(u("uSigmaBeta"), scene.sigma, scene.beta);
      gl.uniform1f(
        gl.getUniformLocation(this.accumProgram, "uAlphaFloor") as WebGLUniformLocation,
        1 / 255,
      );
      gl.drawArraysInstanced(gl.TRIANGLE_STRIP, 0, 4, scene.count);
      gl.disable(gl.BLEND);
    }

    // Pass 2: normalize against the background term.
    gl.bindFramebuffer(gl.FRAMEBUFFER, null);
    gl.useProgram(this.normalizeProgram);
    gl.activeTexture(gl.TEXTURE0);
    gl.bindTexture(gl.TEXTURE_2D, this.accumTexture);
    gl.uniform1i(gl.getUniformLocation(this.normalizeProgram, "uSums"), 0);
    gl.uniform3fv(gl.getUniformLocation(this.normalizeProgram, "uBackgroundColor"), bg);
    gl.uniform1f(
      gl.getUniformLocation(this.normalizeProgram, "uBackgroundWeight"),
      scene?.backgroundWeight ?? 1.0,
    );
    gl.drawArrays(gl.TRIANGLES, 0, 3);
    gl.bindVertexArray(null);
  }

  /** Read back the displayed frame as RGBA8 (used by the dev probe). */
  readFrame(width: number, height: number): Uint8Array {
    const gl = this.gl;
    const out = new Uint8Array(width * height * 4);
    gl.readPixels(0, 0, width, height, gl.RGBA, gl.UNSIGNED_BYTE, out);
    return out;
  }
}

"""Binary scene export consumed by the browser viewer.

Layout (all little-endian):
    bytes 0..3    magic "WSPL"
    u32           version (1)
    u32           splat count
    u8            weight model (0 = dir, 1 = exp, 2 = lc)
    u8            color SH degree
    u8            opacity SH degree
    u8            reserved (0)
    f32 x 6       sigma, beta, background weight, background RGB
then `count` records of f32:
    position(3), quaternion wxyz(4), log scale(3),
    color SH (3 * (Dc+1)^2, channel-major), opacity SH ((Do+1)^2), lc_v(1)
"""

from __future__ import annotations

import struct

import numpy as np

from ..scene import Scene, WeightModel
from ..sh import n_basis

MAGIC = b"WSPL"
VERSION = 1
HEADER_SIZE = 40
MODEL_CODES = {"dir": 0, "exp": 1, "lc": 2}
MODEL_NAMES = {v: k for k, v in MODEL_CODES.items()}


class WsplatParseError(ValueError):
    """Malformed .wsplat payload; carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def record_floats(degree_color: int, degree_opacity: int) -> int:
    return 3 + 4 + 3 + 3 * n_basis(degree_color) + n_basis(degree_opacity) + 1


def export_wsplat(scene: Scene, path: str) -> None:
    header = MAGIC + struct.pack(
        "<IIBBBB",
        VERSION,
        scene.n,
        MODEL_CODES[scene.weight_model.variant],
        scene.sh_degree_color,
        scene.sh_degree_opacity,
        0,
    )
    header += struct.pack(
        "<6f",
        scene.weight_model.sigma,
        scene.weight_model.beta,
        scene.background_weight,
        *[float(c) for c in scene.background_color],
    )
    assert len(header) == HEADER_SIZE

    stride = record_floats(scene.sh_degree_color, scene.sh_degree_opacity)
    records = np.empty((scene.n, stride), dtype="<f4")
    if scene.n:
        col = 0
        for block in (
            scene.positions,
            scene.quats,
            scene.log_scales,
            scene.color_sh.reshape(scene.n, -1),
            scene.opacity_sh,
            scene.lc_v[:, None],
        ):
            block = block.reshape(scene.n, -1)
            records[:, col : col + block.shape[1]] = block
            col += block.shape[1]
        assert col == stride
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(records.tobytes())


def load_wsplat(path: str) -> Scene:
    """Parse a .wsplat file back into a scene (the viewer's reference parser)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < HEADER_SIZE:
        raise WsplatParseError("file shorter than the header", len(data))
    if data[:4] != MAGIC:
        raise WsplatParseError(f"bad magic {data[:4]!r}", 0)
    version, count, model_code, deg_c, deg_o, _reserved = struct.unpack_from("<IIBBBB", data, 4)
    if version != VERSION:
        raise WsplatParseError(f"unsupported version {version}", 4)
    if model_code not in MODEL_NAMES:
        raise WsplatParseError(f"unknown weight model code {model_code}", 12)
    if deg_c > 3 or deg_o > 3:
        raise WsplatParseError(f"SH degrees out of range: color {deg_c}, opacity {deg_o}", 13)
    sigma, beta, w_b, br, bg, bb = struct.unpack_from("<6f", data, 16)

    stride = record_floats(deg_c, deg_o)
    body = data[HEADER_SIZE:]
    expected = count * stride * 4
    if len(body) < expected:
        complete = len(body) // (stride * 4)
        raise WsplatParseError(
            f"truncated body: expected {count} records, found {complete} complete",
            HEADER_SIZE + complete * stride * 4,
        )
    raw = np.frombuffer(body[:expected], dtype="<f4").reshape(count, stride).astype(np.float64)

    kc = n_basis(deg_c)
    ko = n_basis(deg_o)
    off = 0

    def take(width: int) -> np.ndarray:
        nonlocal off
        block = raw[:, off : off + width]
        off += width
        return block

    variant = MODEL_NAMES[model_code]
    model = WeightModel(variant, sigma=float(sigma), beta=float(beta))
    return Scene(
        positions=take(3),
        quats=take(4),
        log_scales=take(3),
        color_sh=take(3 * kc).reshape(count, 3, kc),
        opacity_sh=take(ko),
        lc_v=take(1)[:, 0],
        weight_model=model,
        background_color=np.array([br, bg, bb], dtype=np.float64),
        background_weight=float(w_b),
        sh_degree_color=deg_c,
        sh_degree_opacity=deg_o,
    )

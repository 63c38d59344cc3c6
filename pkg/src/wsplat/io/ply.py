"""Binary little-endian PLY checkpoints, 3DGS-layout compatible.

Plain 3DGS files (x/y/z, f_dc, f_rest, opacity, scale, rot) import with
the stored opacity logit mapped through a sigmoid onto the degree-0
opacity coefficient. Files written here add the extension fields
o_rest_* (opacity SH rest) and lc_v, and store the raw degree-0 opacity
coefficient in the `opacity` slot so the round trip is bit exact;
weight-model globals live in a `<path>.wsr.json` sidecar so the PLY
itself stays digestible by third-party 3DGS tools.
"""

from __future__ import annotations

import json
import os

import numpy as np

from ..scene import LC_V_INIT, Scene, WeightModel
from ..sh import SH_C0, n_basis

SIDECAR_SUFFIX = ".wsr.json"
SIDECAR_FORMAT = "wsplat-sidecar"


class PlyParseError(ValueError):
    """Malformed splat PLY; carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def _property_names(degree_color: int, degree_opacity: int) -> list[str]:
    names = ["x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2"]
    names += [f"f_rest_{i}" for i in range(3 * (n_basis(degree_color) - 1))]
    names += ["opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"]
    names += [f"o_rest_{i}" for i in range(n_basis(degree_opacity) - 1)]
    names += ["lc_v"]
    return names


def sidecar_path(path: str) -> str:
    return path + SIDECAR_SUFFIX


def save_ply(scene: Scene, path: str) -> None:
    """Write the scene as binary little-endian PLY plus the globals sidecar."""
    names = _property_names(scene.sh_degree_color, scene.sh_degree_opacity)
    header = ["ply", "format binary_little_endian 1.0", f"element vertex {scene.n}"]
    header += [f"property float {name}" for name in names]
    header.append("end_header")

    kc = n_basis(scene.sh_degree_color)
    ko = n_basis(scene.sh_degree_opacity)
    record = np.empty((scene.n, len(names)), dtype="<f4")
    if scene.n:
        col = 0

        def put(block: np.ndarray) -> None:
            nonlocal col
            block = block.reshape(scene.n, -1)
            record[:, col : col + block.shape[1]] = block
            col += block.shape[1]

        put(scene.positions)
        put(scene.color_sh[:, :, 0])
        if kc > 1:
            put(scene.color_sh[:, :, 1:].reshape(scene.n, -1))  # channel-major rest
        put(scene.opacity_sh[:, 0])  # raw degree-0 coefficient (see module doc)
        put(scene.log_scales)
        put(scene.quats)
        if ko > 1:
            put(scene.opacity_sh[:, 1:])
        put(scene.lc_v)
        assert col == len(names)

    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        fh.write(record.tobytes())

    model = scene.weight_model
    sidecar = {
        "format": SIDECAR_FORMAT,
        "version": 1,
        "weight_model": model.variant,
        "sigma": model.sigma,
        "beta": model.beta,
        "background_color": [float(c) for c in scene.background_color],
        "background_weight": float(scene.background_weight),
        "sh_degree_color": scene.sh_degree_color,
        "sh_degree_opacity": scene.sh_degree_opacity,
    }
    with open(sidecar_path(path), "w", encoding="ascii") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _rest_degree(count: int, channels: int, path_offset: int) -> int:
    for degree in range(4):
        if count == channels * (n_basis(degree) - 1):
            return degree
    raise PlyParseError(f"cannot map {count} rest coefficients to an SH degree", path_offset)


def load_ply(path: str) -> Scene:
    """Read a splat PLY (3DGS or this package's extended layout)."""
    with open(path, "rb") as fh:
        data = fh.read()

    end_marker = b"end_header\n"
    end = data.find(end_marker)
    if not data.startswith(b"ply\n") or end < 0:
        raise PlyParseError("not a PLY file (missing magic or end_header)", 0)
    body_start = end + len(end_marker)
    header_lines = data[:end].decode("ascii", errors="replace").splitlines()

    count = None
    names: list[str] = []
    for line in header_lines[1:]:
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            if parts[1] != "binary_little_endian":
                raise PlyParseError(f"unsupported PLY format {parts[1]!r}", 0)
        elif parts[0] == "element":
            if parts[1] != "vertex":
                raise PlyParseError(f"unsupported element {parts[1]!r}", 0)
            count = int(parts[2])
        elif parts[0] == "property":
            if parts[1] not in ("float", "float32"):
                raise PlyParseError(f"unsupported property type {parts[1]!r}", 0)
            names.append(parts[2])
    if count is None:
        raise PlyParseError("header declares no vertex element", 0)

    required = ["x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity",
                "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"]
    missing = [r for r in required if r not in names]
    if missing:
        raise PlyParseError(f"missing required fields {missing}", 0)

    stride = 4 * len(names)
    body = data[body_start:]
    if len(body) < count * stride:
        complete = len(body) // stride
        raise PlyParseError(
            f"truncated body: expected {count} records, found {complete} complete",
            body_start + complete * stride,
        )
    raw = np.frombuffer(body[: count * stride], dtype="<f4").reshape(count, len(names))
    cols = {name: raw[:, j].astype(np.float64) for j, name in enumerate(names)}

    n_rest_c = sum(1 for name in names if name.startswith("f_rest_"))
    degree_color = _rest_degree(n_rest_c, 3, body_start)
    n_rest_o = sum(1 for name in names if name.startswith("o_rest_"))
    degree_opacity = _rest_degree(n_rest_o, 1, body_start)
    is_wsr = "lc_v" in names or n_rest_o > 0

    kc = n_basis(degree_color)
    color_sh = np.zeros((count, 3, kc))
    for c in range(3):
        color_sh[:, c, 0] = cols[f"f_dc_{c}"]
    for j in range(n_rest_c):  # channel-major rest layout
        color_sh[:, j // (kc - 1), 1 + j % (kc - 1)] = cols[f"f_rest_{j}"]

    ko = n_basis(degree_opacity)
    opacity_sh = np.zeros((count, ko))
    if is_wsr:
        opacity_sh[:, 0] = cols["opacity"]
    else:
        # 3DGS stores pre-sigmoid logits; recover the actual max opacity
        # and express it as the degree-0 coefficient.
        opacity_sh[:, 0] = 1.0 / (1.0 + np.exp(-cols["opacity"])) / SH_C0
    for j in range(n_rest_o):
        opacity_sh[:, 1 + j] = cols[f"o_rest_{j}"]

    lc_v = cols["lc_v"] if "lc_v" in names else np.full(count, LC_V_INIT)

    sidecar = sidecar_path(path)
    if os.path.exists(sidecar):
        with open(sidecar, "r", encoding="ascii") as fh:
            meta = json.load(fh)
        if meta.get("format") != SIDECAR_FORMAT:
            raise PlyParseError(f"unrecognized sidecar format in {sidecar}", 0)
        variant = meta["weight_model"]
        model = WeightModel(variant, sigma=meta.get("sigma", 0.0), beta=meta.get("beta", 0.0))
        background_color = np.asarray(meta["background_color"], dtype=np.float64)
        background_weight = float(meta["background_weight"])
        if int(meta["sh_degree_color"]) != degree_color or int(meta["sh_degree_opacity"]) != degree_opacity:
            raise PlyParseError("sidecar SH degrees disagree with the PLY layout", 0)
    else:
        model = WeightModel.lc()
        background_color = np.zeros(3)
        background_weight = 1.0

    return Scene(
        positions=np.stack([cols["x"], cols["y"], cols["z"]], axis=1),
        quats=np.stack([cols[f"rot_{i}"] for i in range(4)], axis=1),
        log_scales=np.stack([cols[f"scale_{i}"] for i in range(3)], axis=1),
        color_sh=color_sh,
        opacity_sh=opacity_sh,
        lc_v=lc_v,
        weight_model=model,
        background_color=background_color,
        background_weight=background_weight,
        sh_degree_color=degree_color,
        sh_degree_opacity=degree_opacity,
    )

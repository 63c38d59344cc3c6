"""Camera list JSON: id, intrinsics, row-major rotation, translation."""

from __future__ import annotations

import json

import numpy as np

from ..camera import Camera


def load_cameras(path: str) -> list[Camera]:
    """Parse and validate a JSON camera array.

    A rotation that fails the orthonormality check (tolerance 1e-4) is
    rejected with the offending camera id in the message.
    """
    with open(path, "r", encoding="utf-8") as fh:
        entries = json.load(fh)
    if not isinstance(entries, list):
        raise ValueError("camera file must contain a JSON array")
    cameras = []
    for k, entry in enumerate(entries):
        cam_id = str(entry.get("id", k))
        rotation = np.asarray(entry["rotation"], dtype=np.float64).reshape(3, 3)
        err = float(np.abs(rotation @ rotation.T - np.eye(3)).max())
        if err > 1e-4:
            raise ValueError(
                f"camera {cam_id!r}: rotation is not orthonormal (max residual {err:.3g})"
            )
        # Re-orthonormalize tiny drift so the Camera invariant (1e-6) holds.
        u, _, vt = np.linalg.svd(rotation)
        rotation = u @ vt
        cameras.append(
            Camera(
                fx=float(entry["fx"]),
                fy=float(entry["fy"]),
                cx=float(entry["cx"]),
                cy=float(entry["cy"]),
                width=int(entry["width"]),
                height=int(entry["height"]),
                rotation=rotation,
                translation=np.asarray(entry["translation"], dtype=np.float64),
                near=float(entry.get("near", 0.01)),
                far=float(entry.get("far", 1000.0)),
                cam_id=cam_id,
            )
        )
    return cameras


def save_cameras(cameras: list[Camera], path: str) -> None:
    entries = []
    for k, cam in enumerate(cameras):
        entries.append(
            {
                "id": cam.cam_id or f"view_{k:03d}",
                "width": cam.width,
                "height": cam.height,
                "fx": cam.fx,
                "fy": cam.fy,
                "cx": cam.cx,
                "cy": cam.cy,
                "rotation": [float(v) for v in cam.rotation.ravel()],
                "translation": [float(v) for v in cam.translation],
                "near": cam.near,
                "far": cam.far,
            }
        )
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(entries, fh, indent=2, sort_keys=True)
        fh.write("\n")

"""Pinhole camera model and rigid world-to-camera transforms.

Conventions: camera x right, y down, z forward (depth is camera-space
z); pixel centers at (col + 0.5, row + 0.5).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Camera:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    rotation: np.ndarray       # (3, 3) world-to-camera
    translation: np.ndarray    # (3,)
    near: float = 0.01
    far: float = 1000.0
    cam_id: str = ""

    def __post_init__(self) -> None:
        self.rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if not 0 < self.near < self.far:
            raise ValueError(f"need 0 < near < far, got near={self.near}, far={self.far}")
        err = float(np.abs(self.rotation @ self.rotation.T - np.eye(3)).max())
        if err > 1e-6:
            raise ValueError(
                f"camera {self.cam_id or '<unnamed>'}: rotation is not orthonormal "
                f"(max residual {err:.3g})"
            )

    @property
    def center(self) -> np.ndarray:
        """World-space position of the focal point."""
        return -self.rotation.T @ self.translation


def world_to_camera(cam: Camera, point: np.ndarray):
    """Map a world point into camera space; returns (camera point, depth)."""
    p = cam.rotation @ np.asarray(point, dtype=np.float64) + cam.translation
    return p, float(p[2])


def look_at(
    eye,
    target,
    up=(0.0, 1.0, 0.0),
    *,
    fx: float = 100.0,
    fy: float | None = None,
    width: int = 64,
    height: int = 64,
    near: float = 0.01,
    far: float = 1000.0,
    cam_id: str = "",
) -> Camera:
    """Camera at `eye` looking toward `target`, principal point centered."""
    eye = np.asarray(eye, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - eye
    norm = np.linalg.norm(forward)
    if norm < 1e-12:
        raise ValueError("eye and target coincide")
    forward = forward / norm
    right = np.cross(forward, np.asarray(up, dtype=np.float64))
    rnorm = np.linalg.norm(right)
    if rnorm < 1e-12:
        raise ValueError("up vector is parallel to the view direction")
    right = right / rnorm
    down = np.cross(forward, right)
    rot = np.stack([right, down, forward])
    return Camera(
        fx=fx,
        fy=fy if fy is not None else fx,
        cx=width / 2.0,
        cy=height / 2.0,
        width=width,
        height=height,
        rotation=rot,
        translation=-rot @ eye,
        near=near,
        far=far,
        cam_id=cam_id,
    )


def orbit_ring(
    n_views: int,
    radius: float,
    *,
    elevation: float = 0.3,
    target=(0.0, 0.0, 0.0),
    azimuth_start: float = 0.0,
    azimuth_end: float | None = None,
    endpoint: bool = False,
    **camera_kwargs,
) -> list[Camera]:
    """Cameras on a horizontal ring, all looking at `target`.

    `elevation` is the polar angle above the ring plane in radians.
    """
    target = np.asarray(target, dtype=np.float64)
    if azimuth_end is None:
        azimuth_end = azimuth_start + 2.0 * np.pi
    azimuths = np.linspace(azimuth_start, azimuth_end, n_views, endpoint=endpoint)
    cams = []
    for i, az in enumerate(azimuths):
        eye = target + radius * np.array(
            [np.cos(az) * np.cos(elevation), np.sin(elevation), np.sin(az) * np.cos(elevation)]
        )
        cams.append(look_at(eye, target, cam_id=f"view_{i:03d}", **camera_kwargs))
    return cams

"""Projection of 3D Gaussians to screen-space footprints and frustum culling.

The 2D covariance is the affine approximation J W Sigma W^T J^T with J
the pinhole Jacobian at the splat center, plus a 0.3-pixel isotropic
floor; footprint radius is 3 sigma of the widest axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import Camera
from .covariance import cov3d_many
from .scene import GaussianElement, Scene

COV2D_FLOOR = 0.3   # pixels^2, anti-aliasing floor on the diagonal
RADIUS_SIGMAS = 3.0


@dataclass
class SplatProjection:
    """Screen-space footprint of one splat."""

    mean2d: np.ndarray   # (2,) pixels
    cov2d: np.ndarray    # (2, 2) pixels^2, includes the floor
    conic: np.ndarray    # (2, 2) inverse of cov2d
    depth: float         # camera-space z
    radius: float        # pixels, 3 sigma bound
    visible: bool


@dataclass
class SceneProjection:
    """Batched footprints for every splat of a scene under one camera."""

    x_cam: np.ndarray    # (N, 3)
    mean2d: np.ndarray   # (N, 2)
    cov2d: np.ndarray    # (N, 2, 2)
    conic: np.ndarray    # (N, 2, 2)
    depth: np.ndarray    # (N,)
    radius: np.ndarray   # (N,)
    visible: np.ndarray  # (N,) bool

    def splat(self, i: int) -> SplatProjection:
        return SplatProjection(
            mean2d=self.mean2d[i].copy(),
            cov2d=self.cov2d[i].copy(),
            conic=self.conic[i].copy(),
            depth=float(self.depth[i]),
            radius=float(self.radius[i]),
            visible=bool(self.visible[i]),
        )


def perspective_jacobians(cam: Camera, x_cam: np.ndarray) -> np.ndarray:
    """Pinhole projection Jacobians (N, 2, 3) at camera-space points."""
    x, y, z = x_cam[:, 0], x_cam[:, 1], x_cam[:, 2]
    inv_z = 1.0 / z
    inv_z2 = inv_z * inv_z
    jac = np.zeros((x_cam.shape[0], 2, 3), dtype=np.float64)
    jac[:, 0, 0] = cam.fx * inv_z
    jac[:, 0, 2] = -cam.fx * x * inv_z2
    jac[:, 1, 1] = cam.fy * inv_z
    jac[:, 1, 2] = -cam.fy * y * inv_z2
    return jac


def project_scene(scene: Scene, cam: Camera) -> SceneProjection:
    """Project every splat; invisible splats keep placeholder footprints."""
    n = scene.n
    x_cam = scene.positions @ cam.rotation.T + cam.translation
    depth = x_cam[:, 2].copy()
    in_depth = (depth > cam.near) & (depth < cam.far)

    # Guard z for the masked-out entries so the algebra below stays finite.
    safe = x_cam.copy()
    safe[:, 2] = np.where(in_depth, x_cam[:, 2], 1.0)

    mean2d = np.empty((n, 2), dtype=np.float64)
    mean2d[:, 0] = cam.fx * safe[:, 0] / safe[:, 2] + cam.cx
    mean2d[:, 1] = cam.fy * safe[:, 1] / safe[:, 2] + cam.cy

    sigma3d = cov3d_many(scene.quats, scene.scales())
    jac = perspective_jacobians(cam, safe)
    jw = jac @ cam.rotation
    cov2d = jw @ sigma3d @ np.swapaxes(jw, -1, -2)
    cov2d[:, 0, 0] += COV2D_FLOOR
    cov2d[:, 1, 1] += COV2D_FLOOR

    a, b, c = cov2d[:, 0, 0], cov2d[:, 0, 1], cov2d[:, 1, 1]
    det = a * c - b * b
    ok = det > 0
    safe_det = np.where(ok, det, 1.0)
    conic = np.empty_like(cov2d)
    conic[:, 0, 0] = c / safe_det
    conic[:, 0, 1] = -b / safe_det
    conic[:, 1, 0] = -b / safe_det
    conic[:, 1, 1] = a / safe_det

    mid = 0.5 * (a + c)
    lam_max = mid + np.sqrt(np.maximum(mid * mid - det, 0.0))
    radius = RADIUS_SIGMAS * np.sqrt(np.maximum(lam_max, 0.0))

    on_screen = (
        (mean2d[:, 0] + radius > 0)
        & (mean2d[:, 0] - radius < cam.width)
        & (mean2d[:, 1] + radius > 0)
        & (mean2d[:, 1] - radius < cam.height)
    )
    visible = in_depth & ok & on_screen
    return SceneProjection(
        x_cam=x_cam,
        mean2d=mean2d,
        cov2d=cov2d,
        conic=conic,
        depth=depth,
        radius=radius,
        visible=visible,
    )


def project_gaussian(cam: Camera, element: GaussianElement) -> SplatProjection:
    """Project a single splat (see project_scene for the batched path)."""
    scene = Scene.from_elements([element])
    return project_scene(scene, cam).splat(0)


def frustum_cull(cam: Camera, scene: Scene) -> np.ndarray:
    """Indices of visible splats, in stable input order."""
    return np.flatnonzero(project_scene(scene, cam).visible)

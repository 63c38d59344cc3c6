"""Anisotropic 3D covariance construction from rotation and scale."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Cov3D:
    """Symmetric 3x3 covariance stored as its six upper-triangular entries."""

    xx: float
    xy: float
    xz: float
    yy: float
    yz: float
    zz: float

    def matrix(self) -> np.ndarray:
        m = np.array(
            [
                [self.xx, self.xy, self.xz],
                [self.xy, self.yy, self.yz],
                [self.xz, self.yz, self.zz],
            ],
            dtype=np.float64,
        )
        return m

    @staticmethod
    def from_matrix(m: np.ndarray) -> "Cov3D":
        return Cov3D(m[0, 0], m[0, 1], m[0, 2], m[1, 1], m[1, 2], m[2, 2])


def quat_to_rotmat_many(quats: np.ndarray) -> np.ndarray:
    """Rotation matrices for a batch of (w, x, y, z) quaternions.

    Quaternions are normalized internally; zero quaternions are rejected.
    Returns (N, 3, 3).
    """
    q = np.asarray(quats, dtype=np.float64)
    norms = np.linalg.norm(q, axis=-1)
    if np.any(norms <= 1e-9):
        raise ValueError("zero-length quaternion")
    q = q / norms[:, None]
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    r = np.empty(q.shape[:-1] + (3, 3), dtype=np.float64)
    r[:, 0, 0] = 1.0 - 2.0 * (y * y + z * z)
    r[:, 0, 1] = 2.0 * (x * y - w * z)
    r[:, 0, 2] = 2.0 * (x * z + w * y)
    r[:, 1, 0] = 2.0 * (x * y + w * z)
    r[:, 1, 1] = 1.0 - 2.0 * (x * x + z * z)
    r[:, 1, 2] = 2.0 * (y * z - w * x)
    r[:, 2, 0] = 2.0 * (x * z - w * y)
    r[:, 2, 1] = 2.0 * (y * z + w * x)
    r[:, 2, 2] = 1.0 - 2.0 * (x * x + y * y)
    return r


def quat_to_rotmat(quat: np.ndarray) -> np.ndarray:
    """Rotation matrix for one (w, x, y, z) quaternion."""
    return quat_to_rotmat_many(np.asarray(quat, dtype=np.float64)[None, :])[0]


def cov3d_many(quats: np.ndarray, scales: np.ndarray) -> np.ndarray:
    """Batched R diag(s^2) R^T. `scales` are linear (already exponentiated)."""
    rot = quat_to_rotmat_many(quats)
    ms = rot * np.asarray(scales, dtype=np.float64)[:, None, :]
    return ms @ np.swapaxes(ms, -1, -2)


def quat_scale_to_cov(quat: np.ndarray, scale: np.ndarray) -> Cov3D:
    """Covariance of an anisotropic Gaussian from rotation and per-axis scale.

    Args:
        quat: (w, x, y, z), any nonzero length.
        scale: per-axis standard deviations, strictly positive.

    Returns:
        The symmetric PSD matrix R diag(s^2) R^T as a Cov3D.
    """
    s = np.asarray(scale, dtype=np.float64)
    if s.shape != (3,):
        raise ValueError(f"scale must be a 3-vector, got shape {s.shape}")
    if np.any(s <= 0):
        raise ValueError(f"scale components must be positive, got {s}")
    m = cov3d_many(np.asarray(quat, dtype=np.float64)[None, :], s[None, :])[0]
    return Cov3D.from_matrix(m)

"""Real spherical harmonics evaluation for view-dependent color and opacity.

Basis values follow the band-major layout used by 3DGS checkpoints
(l = 0..degree, m = -l..l within each band), including the sign
convention baked into those files. Color evaluation applies the usual
+0.5 offset and clamps at zero; scalar (opacity) evaluation is raw and
unclamped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_DEGREE = 3

SH_C0 = 0.28209479177387814  # 1 / (2 sqrt(pi))
SH_C1 = 0.4886025119029199   # sqrt(3) / (2 sqrt(pi))
SH_C2 = (
    1.0925484305920792,      # sqrt(15) / (2 sqrt(pi))
    -1.0925484305920792,
    0.31539156525252005,     # sqrt(5) / (4 sqrt(pi))
    -1.0925484305920792,
    0.5462742152960396,      # sqrt(15) / (4 sqrt(pi))
)
SH_C3 = (
    -0.5900435899266435,     # sqrt(70/pi) / 8
    2.890611442640554,       # sqrt(105/pi) / 2
    -0.4570457994644658,     # sqrt(42/pi) / 8
    0.3731763325901154,      # sqrt(7/pi) / 4
    -0.4570457994644658,
    1.445305721320277,       # sqrt(105/pi) / 4
    -0.5900435899266435,
)

COLOR_OFFSET = 0.5  # added to SH color before the clamp at zero


def n_basis(degree: int) -> int:
    """Number of basis functions for a max band `degree`."""
    return (degree + 1) ** 2


@dataclass
class ShCoeffs:
    """Spherical-harmonics coefficient block for one splat attribute.

    `values` has shape (channels, (degree+1)^2): 3 channels for color,
    1 for opacity. A flat array is reshaped on construction.
    """

    degree: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if not 0 <= self.degree <= MAX_DEGREE:
            raise ValueError(f"SH degree must be in [0, {MAX_DEGREE}], got {self.degree}")
        vals = np.asarray(self.values, dtype=np.float64)
        k = n_basis(self.degree)
        if vals.ndim == 1:
            if vals.size % k != 0:
                raise ValueError(
                    f"flat coefficient length {vals.size} is not a multiple of {k}"
                )
            vals = vals.reshape(vals.size // k, k)
        if vals.ndim != 2 or vals.shape[1] != k:
            raise ValueError(f"expected (channels, {k}) coefficients, got {vals.shape}")
        if vals.shape[0] not in (1, 3):
            raise ValueError(f"expected 1 or 3 channels, got {vals.shape[0]}")
        self.values = vals

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def n_basis(self) -> int:
        return self.values.shape[1]


def _check_unit(direction: np.ndarray) -> np.ndarray:
    d = np.asarray(direction, dtype=np.float64)
    if d.shape != (3,):
        raise ValueError(f"direction must be a 3-vector, got shape {d.shape}")
    norm = float(np.linalg.norm(d))
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"direction must be unit length, got |d| = {norm}")
    return d


def sh_basis_many(degree: int, dirs: np.ndarray) -> np.ndarray:
    """Evaluate the basis for a batch of unit directions.

    Args:
        degree: max band, 0..3.
        dirs: (N, 3) unit vectors (not re-validated; hot path).

    Returns:
        (N, (degree+1)^2) basis values.
    """
    if not 0 <= degree <= MAX_DEGREE:
        raise ValueError(f"SH degree must be in [0, {MAX_DEGREE}], got {degree}")
    dirs = np.asarray(dirs, dtype=np.float64)
    x, y, z = dirs[:, 0], dirs[:, 1], dirs[:, 2]
    out = np.empty((dirs.shape[0], n_basis(degree)), dtype=np.float64)
    out[:, 0] = SH_C0
    if degree >= 1:
        out[:, 1] = -SH_C1 * y
        out[:, 2] = SH_C1 * z
        out[:, 3] = -SH_C1 * x
    if degree >= 2:
        xx, yy, zz = x * x, y * y, z * z
        out[:, 4] = SH_C2[0] * x * y
        out[:, 5] = SH_C2[1] * y * z
        out[:, 6] = SH_C2[2] * (2.0 * zz - xx - yy)
        out[:, 7] = SH_C2[3] * x * z
        out[:, 8] = SH_C2[4] * (xx - yy)
    if degree >= 3:
        xx, yy, zz = x * x, y * y, z * z
        out[:, 9] = SH_C3[0] * y * (3.0 * xx - yy)
        out[:, 10] = SH_C3[1] * x * y * z
        out[:, 11] = SH_C3[2] * y * (4.0 * zz - xx - yy)
        out[:, 12] = SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy)
        out[:, 13] = SH_C3[4] * x * (4.0 * zz - xx - yy)
        out[:, 14] = SH_C3[5] * z * (xx - yy)
        out[:, 15] = SH_C3[6] * x * (xx - 3.0 * yy)
    return out


def sh_basis(degree: int, direction: np.ndarray) -> np.ndarray:
    """Evaluate the real SH basis at one unit direction.

    Raises ValueError for a degree outside [0, 3] or a non-unit direction.
    """
    d = _check_unit(direction)
    return sh_basis_many(degree, d[None, :])[0]


def sh_basis_grad_many(degree: int, dirs: np.ndarray) -> np.ndarray:
    """Partial derivatives of each basis value w.r.t. the direction components.

    Returns (N, (degree+1)^2, 3). These are ambient-coordinate partials of
    the band polynomials; callers chaining through a normalization must
    project out the radial component themselves.
    """
    if not 0 <= degree <= MAX_DEGREE:
        raise ValueError(f"SH degree must be in [0, {MAX_DEGREE}], got {degree}")
    dirs = np.asarray(dirs, dtype=np.float64)
    x, y, z = dirs[:, 0], dirs[:, 1], dirs[:, 2]
    n = dirs.shape[0]
    g = np.zeros((n, n_basis(degree), 3), dtype=np.float64)
    if degree >= 1:
        g[:, 1, 1] = -SH_C1
        g[:, 2, 2] = SH_C1
        g[:, 3, 0] = -SH_C1
    if degree >= 2:
        g[:, 4, 0] = SH_C2[0] * y
        g[:, 4, 1] = SH_C2[0] * x
        g[:, 5, 1] = SH_C2[1] * z
        g[:, 5, 2] = SH_C2[1] * y
        g[:, 6, 0] = SH_C2[2] * (-2.0 * x)
        g[:, 6, 1] = SH_C2[2] * (-2.0 * y)
        g[:, 6, 2] = SH_C2[2] * (4.0 * z)
        g[:, 7, 0] = SH_C2[3] * z
        g[:, 7, 2] = SH_C2[3] * x
        g[:, 8, 0] = SH_C2[4] * (2.0 * x)
        g[:, 8, 1] = SH_C2[4] * (-2.0 * y)
    if degree >= 3:
        xx, yy, zz = x * x, y * y, z * z
        g[:, 9, 0] = SH_C3[0] * 6.0 * x * y
        g[:, 9, 1] = SH_C3[0] * (3.0 * xx - 3.0 * yy)
        g[:, 10, 0] = SH_C3[1] * y * z
        g[:, 10, 1] = SH_C3[1] * x * z
        g[:, 10, 2] = SH_C3[1] * x * y
        g[:, 11, 0] = SH_C3[2] * (-2.0 * x * y)
        g[:, 11, 1] = SH_C3[2] * (4.0 * zz - xx - 3.0 * yy)
        g[:, 11, 2] = SH_C3[2] * (8.0 * y * z)
        g[:, 12, 0] = SH_C3[3] * (-6.0 * x * z)
        g[:, 12, 1] = SH_C3[3] * (-6.0 * y * z)
        g[:, 12, 2] = SH_C3[3] * (6.0 * zz - 3.0 * xx - 3.0 * yy)
        g[:, 13, 0] = SH_C3[4] * (4.0 * zz - 3.0 * xx - yy)
        g[:, 13, 1] = SH_C3[4] * (-2.0 * x * y)
        g[:, 13, 2] = SH_C3[4] * (8.0 * x * z)
        g[:, 14, 0] = SH_C3[5] * (2.0 * x * z)
        g[:, 14, 1] = SH_C3[5] * (-2.0 * y * z)
        g[:, 14, 2] = SH_C3[5] * (xx - yy)
        g[:, 15, 0] = SH_C3[6] * (3.0 * xx - 3.0 * yy)
        g[:, 15, 1] = SH_C3[6] * (-6.0 * x * y)
    return g


def sh_eval(coeffs: ShCoeffs, direction: np.ndarray) -> np.ndarray:
    """Evaluate SH coefficients at a unit direction.

    Color blocks (3 channels) get the +0.5 offset and are clamped at
    zero, matching the 3DGS convention. Opacity blocks (1 channel)
    return the raw dot product: the opacity is deliberately unclamped.
    """
    basis = sh_basis(coeffs.degree, direction)
    raw = coeffs.values @ basis
    if coeffs.channels == 3:
        return np.maximum(raw + COLOR_OFFSET, 0.0)
    return raw


def compact_color_eval(
    base: np.ndarray, specular: np.ndarray, intensity: ShCoeffs, direction: np.ndarray
) -> np.ndarray:
    """Reduced color model: base color plus an SH-modulated specular color.

    `intensity` must be a single-channel coefficient block; its raw SH
    value (no offset, no clamp) scales `specular`. The combined color is
    clamped at zero.
    """
    if intensity.channels != 1:
        raise ValueError("intensity coefficients must be single-channel")
    base = np.asarray(base, dtype=np.float64)
    specular = np.asarray(specular, dtype=np.float64)
    if base.shape != (3,) or specular.shape != (3,):
        raise ValueError("base and specular colors must be 3-vectors")
    x = float(sh_eval(intensity, direction)[0])
    return np.maximum(base + x * specular, 0.0)

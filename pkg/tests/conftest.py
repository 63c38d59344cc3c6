"""Shared scene/camera builders for the test suite."""

import numpy as np
import pytest

from wsplat.camera import look_at
from wsplat.scene import Scene, WeightModel
from wsplat.sh import SH_C0, n_basis


def make_scene(
    n: int,
    seed: int,
    *,
    variant: str = "dir",
    sh_degree_color: int = 0,
    sh_degree_opacity: int = 0,
    u_range=(0.3, 0.9),
    sh_noise: float = 0.0,
    spread: float = 0.6,
    scale_range=(0.15, 0.4),
    background_weight: float = 1.0,
    background_color=(0.0, 0.0, 0.0),
    lc_sigma: float = 10.0,
    v_range=(0.08, 0.3),
) -> Scene:
    """Random scene with controlled, well-conditioned splats.

    Opacities and colors stay positive and depths stay clear of the
    weight-model kinks, so rendered images are smooth in every
    parameter (needed by the finite-difference checks).
    """
    rng = np.random.default_rng(seed)
    positions = rng.uniform(-spread, spread, size=(n, 3))
    quats = rng.normal(size=(n, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    log_scales = np.log(rng.uniform(*scale_range, size=(n, 3)))

    kc = n_basis(sh_degree_color)
    color_sh = np.zeros((n, 3, kc))
    color_sh[:, :, 0] = (rng.uniform(0.25, 0.75, size=(n, 3)) - 0.5) / SH_C0
    if kc > 1 and sh_noise > 0:
        color_sh[:, :, 1:] = rng.normal(0.0, sh_noise, size=(n, 3, kc - 1))

    ko = n_basis(sh_degree_opacity)
    opacity_sh = np.zeros((n, ko))
    opacity_sh[:, 0] = rng.uniform(*u_range, size=n) / SH_C0
    if ko > 1 and sh_noise > 0:
        opacity_sh[:, 1:] = rng.normal(0.0, sh_noise, size=(n, ko - 1))

    if variant == "exp":
        model = WeightModel.exp()
    elif variant == "lc":
        model = WeightModel.lc(sigma=lc_sigma)
    else:
        model = WeightModel.dir()
    return Scene(
        positions=positions,
        quats=quats,
        log_scales=log_scales,
        color_sh=color_sh,
        opacity_sh=opacity_sh,
        lc_v=rng.uniform(*v_range, size=n),
        weight_model=model,
        background_color=np.asarray(background_color, dtype=np.float64),
        background_weight=background_weight,
        sh_degree_color=sh_degree_color,
        sh_degree_opacity=sh_degree_opacity,
    )


def make_camera(width=32, height=32, radius=4.0, azimuth=0.4, elevation=0.3, fx=None):
    eye = radius * np.array(
        [np.cos(azimuth) * np.cos(elevation), np.sin(elevation), np.sin(azimuth) * np.cos(elevation)]
    )
    return look_at(
        eye,
        (0.0, 0.0, 0.0),
        fx=fx if fx is not None else 1.1 * max(width, height),
        width=width,
        height=height,
        near=0.1,
        far=50.0,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

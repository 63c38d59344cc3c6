"""Deterministic synthetic scenes used by the acceptance experiments.

`toy20` is the small reconstruction benchmark: 20 vivid splats, 12 ring
cameras, 64x64 ground-truth images rendered with the sorted reference
renderer (so occlusion is real and the weighted-sum trainer has to earn
it). `two_splat` is the popping probe: two overlapping splats whose
depth order flips mid-sweep.
"""

from __future__ import annotations

import os

import numpy as np

from .camera import Camera, orbit_ring
from .renderer import RenderOptions, render_sorted_reference
from .scene import Scene, WeightModel
from .sh import SH_C0

TOY20_SEED = 20240
TOY20_VIEWS = 12
TOY20_SIZE = 64
TWO_SPLAT_FRAMES = 61


def toy20_scene(seed: int = TOY20_SEED) -> Scene:
    """20 splats arranged as 10 depth-swap pairs.

    Each pair sits on a line through the origin with contrasting colors
    and near-opaque opacity, so every ring camera sees one member
    occluding the other and the winner flips across the ring. That makes
    occlusion genuinely view dependent: a constant blend weight cannot
    represent these images, a depth-dependent one can.
    """
    rng = np.random.default_rng(seed)
    n_pairs = 10
    positions, colors = [], []
    for k in range(n_pairs):
        azimuth = 2.0 * np.pi * k / n_pairs + rng.uniform(-0.1, 0.1)
        elevation = rng.uniform(-0.35, 0.35)
        axis = np.array(
            [np.cos(azimuth) * np.cos(elevation), np.sin(elevation), np.sin(azimuth) * np.cos(elevation)]
        )
        radius = rng.uniform(0.35, 0.55)
        center = rng.uniform(-0.15, 0.15, size=3)
        positions.append(center + radius * axis)
        positions.append(center - radius * axis)
        c = rng.uniform(0.08, 0.92, size=3)
        colors.append(c)
        colors.append(1.0 - c)
    n = 2 * n_pairs
    quats = rng.normal(size=(n, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    log_scales = np.log(rng.uniform(0.2, 0.38, size=(n, 3)))
    color_sh = np.zeros((n, 3, 1))
    color_sh[:, :, 0] = (np.array(colors) - 0.5) / SH_C0
    opacity_sh = rng.uniform(0.9, 0.98, size=(n, 1)) / SH_C0
    return Scene(
        positions=np.array(positions),
        quats=quats,
        log_scales=log_scales,
        color_sh=color_sh,
        opacity_sh=opacity_sh,
        lc_v=np.full(n, 0.1),
        weight_model=WeightModel.lc(),
        background_color=np.zeros(3),
        background_weight=1.0,
    )


def toy20_train_config(variant: str = "lc", iterations: int = 2000):
    """Training preset for the toy reconstruction benchmark.

    Degree-0 SH isolates the weight model (no view-dependent escape
    hatches), and the global-parameter learning rates are raised so the
    depth ramp can sharpen within the iteration budget.
    """
    from .train import TrainConfig

    model = {"dir": WeightModel.dir, "exp": WeightModel.exp, "lc": WeightModel.lc}[variant]()
    return TrainConfig(
        iterations=iterations,
        seed=1,
        eval_interval=250,
        n_init=40,
        init_extent=0.9,
        sh_degree_color=0,
        sh_degree_opacity=0,
        weight_model=model,
        densify_enabled=False,
        learning_rates={
            "sigma": 1e-1,
            "beta": 5e-3,
            "color_sh": 1e-2,
            "positions": 5e-4,
            "log_scales": 1e-2,
        },
    )


def toy20_cameras(size: int = TOY20_SIZE, n_views: int = TOY20_VIEWS) -> list[Camera]:
    return orbit_ring(
        n_views, radius=3.2, elevation=0.35, fx=70.0, width=size, height=size,
        near=0.1, far=20.0,
    )


def toy20(out_dir: str | None = None, seed: int = TOY20_SEED):
    """Ground-truth scene, cameras, and sorted-reference images.

    Writes scene.ply (+ sidecar), cameras.json, and images/<id>.png when
    an output directory is given.
    """
    scene = toy20_scene(seed)
    cameras = toy20_cameras()
    opts = RenderOptions(precision="f64")
    images = [render_sorted_reference(scene, cam, opts) for cam in cameras]
    if out_dir is not None:
        from .io import save_cameras, save_ply, write_image

        os.makedirs(os.path.join(out_dir, "images"), exist_ok=True)
        save_ply(scene, os.path.join(out_dir, "scene.ply"))
        save_cameras(cameras, os.path.join(out_dir, "cameras.json"))
        for cam, img in zip(cameras, images):
            write_image(os.path.join(out_dir, "images", f"{cam.cam_id}.png"), img)
    return scene, cameras, images


def two_splat_scene() -> Scene:
    quats = np.zeros((2, 4))
    quats[:, 0] = 1.0
    return Scene(
        positions=np.array([[0.28, 0.0, 0.0], [-0.28, 0.0, 0.0]]),
        quats=quats,
        log_scales=np.log(np.full((2, 3), 0.35)),
        color_sh=(np.array([[[0.9], [0.12], [0.1]], [[0.1], [0.15], [0.9]]]) - 0.5) / SH_C0,
        opacity_sh=np.array([[0.85], [0.85]]) / SH_C0,
        lc_v=np.full(2, 1.0),
        weight_model=WeightModel.exp(),
        background_color=np.zeros(3),
        background_weight=1.0,
    )


def two_splat_path(frames: int = TWO_SPLAT_FRAMES, size: int = TOY20_SIZE) -> list[Camera]:
    """Azimuth sweep through the symmetry point where the depth order flips."""
    half_sweep = 0.06
    return orbit_ring(
        frames,
        radius=4.0,
        elevation=0.1,
        fx=70.0,
        width=size,
        height=size,
        near=0.1,
        far=20.0,
        azimuth_start=np.pi / 2 - half_sweep,
        azimuth_end=np.pi / 2 + half_sweep,
        endpoint=True,
    )


def two_splat(out_dir: str | None = None):
    """Depth-swap scene plus its 61-frame camera sweep."""
    scene = two_splat_scene()
    path = two_splat_path()
    if out_dir is not None:
        from .io import save_cameras, save_ply

        os.makedirs(out_dir, exist_ok=True)
        save_ply(scene, os.path.join(out_dir, "scene.ply"))
        save_cameras(path, os.path.join(out_dir, "cameras.json"))
        save_cameras(path, os.path.join(out_dir, "path.json"))
    return scene, path


def gradcheck_scene(variant: str, seed: int = 7, n: int = 3,
                    sh_degree_color: int = 1, sh_degree_opacity: int = 1) -> Scene:
    """Compact well-conditioned random scene for gradient audits.

    Opacities and colors stay positive and depths stay away from the
    weight-model kinks so the loss is smooth at the sample point.
    """
    from .sh import n_basis

    rng = np.random.default_rng(seed)
    positions = rng.uniform(-0.6, 0.6, size=(n, 3))
    quats = rng.normal(size=(n, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    log_scales = np.log(rng.uniform(0.15, 0.4, size=(n, 3)))
    kc = n_basis(sh_degree_color)
    color_sh = np.zeros((n, 3, kc))
    color_sh[:, :, 0] = (rng.uniform(0.25, 0.75, size=(n, 3)) - 0.5) / SH_C0
    if kc > 1:
        color_sh[:, :, 1:] = rng.normal(0.0, 0.1, size=(n, 3, kc - 1))
    ko = n_basis(sh_degree_opacity)
    opacity_sh = np.zeros((n, ko))
    opacity_sh[:, 0] = rng.uniform(0.35, 0.7, size=n) / SH_C0
    if ko > 1:
        opacity_sh[:, 1:] = rng.normal(0.0, 0.1, size=(n, ko - 1))
    model = {"dir": WeightModel.dir, "exp": WeightModel.exp, "lc": WeightModel.lc}[variant]()
    return Scene(
        positions=positions,
        quats=quats,
        log_scales=log_scales,
        color_sh=color_sh,
        opacity_sh=opacity_sh,
        lc_v=rng.uniform(0.08, 0.3, size=n),
        weight_model=model,
        sh_degree_color=sh_degree_color,
        sh_degree_opacity=sh_degree_opacity,
    )


def gradcheck_camera(width: int = 16, height: int = 12):
    from .camera import look_at

    eye = 4.0 * np.array([np.cos(0.4) * np.cos(0.3), np.sin(0.3), np.sin(0.4) * np.cos(0.3)])
    return look_at(eye, (0.0, 0.0, 0.0), fx=1.1 * max(width, height),
                   width=width, height=height, near=0.1, far=50.0)

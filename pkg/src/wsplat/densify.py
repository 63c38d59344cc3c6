"""Densification: clone or split splats that accumulate large screen-space
positional gradients. There is no opacity-threshold pruning; only
degenerate footprints (huge projected radius) are removed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import quat_to_rotmat_many
from .scene import Scene

SPLIT_SCALE_SHRINK = 1.6
SPLIT_EXTENT_RATIO = 0.01  # splats larger than 1% of scene extent split


@dataclass
class DensifyConfig:
    interval: int = 300
    start_iteration: int = 300
    stop_iteration: int = 10_000_000
    grad_threshold: float = 2e-4
    max_radius: float = 512.0       # pixels; degenerate-splat guard
    max_elements: int = 200_000


class GradStats:
    """Per-element gradient statistics accumulated between densify steps."""

    def __init__(self, n: int) -> None:
        self.sum_screen_norm = np.zeros(n)
        self.sum_position_grad = np.zeros((n, 3))
        self.count = np.zeros(n, dtype=np.int64)
        self.max_radius = np.zeros(n)

    def update(self, step_stats: dict) -> None:
        norm = step_stats["screen_grad_norm"]
        self.sum_screen_norm += norm
        self.sum_position_grad += step_stats["position_grad"]
        self.count += norm > 0
        self.max_radius = np.maximum(self.max_radius, step_stats["radius"])

    def mean_screen_norm(self) -> np.ndarray:
        return self.sum_screen_norm / np.maximum(self.count, 1)

    def mean_position_grad(self) -> np.ndarray:
        return self.sum_position_grad / np.maximum(self.count, 1)[:, None]


def scene_extent(scene: Scene) -> float:
    if scene.n == 0:
        return 1.0
    span = scene.positions.max(axis=0) - scene.positions.min(axis=0)
    return max(float(np.linalg.norm(span)), 1e-6)


def densify(scene: Scene, stats: GradStats, cfg: DensifyConfig, rng: np.random.Generator):
    """Apply clone/split/degenerate-removal rules.

    Returns (new_scene, parents) where parents[j] is the surviving
    element's old index, or -1 for freshly created elements (their
    optimizer moments start at zero). Small high-gradient splats are
    cloned one mean-scale step along the descent direction; large ones
    are replaced by two children sampled from the parent with scales
    shrunk by 1.6.
    """
    n = scene.n
    if n == 0:
        return scene, np.zeros(0, dtype=np.int64)
    mean_grad = stats.mean_screen_norm()
    extent = scene_extent(scene)
    scales = np.exp(scene.log_scales)
    big = scales.max(axis=1) > SPLIT_EXTENT_RATIO * extent

    hot = mean_grad > cfg.grad_threshold
    room = max(cfg.max_elements - n, 0)
    if room <= 0:
        hot[:] = False
    clone_idx = np.flatnonzero(hot & ~big)
    split_idx = np.flatnonzero(hot & big)
    # Respect the element budget, clones first (cheaper).
    if clone_idx.size + split_idx.size > room:
        keep = room
        clone_idx = clone_idx[:keep]
        split_idx = split_idx[: max(0, keep - clone_idx.size)]

    degenerate = stats.max_radius > cfg.max_radius
    keep_mask = ~degenerate
    keep_mask[split_idx] = False  # split replaces the parent by two children

    fields = {}
    parents_parts = [np.flatnonzero(keep_mask)]
    for name in ("positions", "quats", "log_scales", "color_sh", "opacity_sh", "lc_v"):
        fields[name] = [getattr(scene, name)[keep_mask]]

    if clone_idx.size:
        g = stats.mean_position_grad()[clone_idx]
        g_norm = np.linalg.norm(g, axis=1, keepdims=True)
        direction = np.where(g_norm > 1e-12, g / np.maximum(g_norm, 1e-12), 0.0)
        step = np.exp(scene.log_scales[clone_idx].mean(axis=1, keepdims=True))
        fields["positions"].append(scene.positions[clone_idx] - step * direction)
        for name in ("quats", "log_scales", "color_sh", "opacity_sh", "lc_v"):
            fields[name].append(getattr(scene, name)[clone_idx])
        parents_parts.append(np.full(clone_idx.size, -1, dtype=np.int64))

    if split_idx.size:
        rot = quat_to_rotmat_many(scene.quats[split_idx])
        for _ in range(2):
            eps = rng.normal(size=(split_idx.size, 3)) * scales[split_idx]
            fields["positions"].append(
                scene.positions[split_idx] + np.einsum("nij,nj->ni", rot, eps)
            )
            fields["log_scales"].append(scene.log_scales[split_idx] - np.log(SPLIT_SCALE_SHRINK))
            for name in ("quats", "color_sh", "opacity_sh", "lc_v"):
                fields[name].append(getattr(scene, name)[split_idx])
            parents_parts.append(np.full(split_idx.size, -1, dtype=np.int64))

    new_scene = Scene(
        positions=np.concatenate(fields["positions"]),
        quats=np.concatenate(fields["quats"]),
        log_scales=np.concatenate(fields["log_scales"]),
        color_sh=np.concatenate(fields["color_sh"]),
        opacity_sh=np.concatenate(fields["opacity_sh"]),
        lc_v=np.concatenate(fields["lc_v"]),
        weight_model=scene.weight_model,
        background_color=scene.background_color.copy(),
        background_weight=scene.background_weight,
        sh_degree_color=scene.sh_degree_color,
        sh_degree_opacity=scene.sh_degree_opacity,
    )
    return new_scene, np.concatenate(parents_parts)

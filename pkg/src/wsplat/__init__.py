"""Sort-free Gaussian splatting via weighted sum rendering."""

from .accum import StableAccumulator
from .backward import Gradients, backward_wsr, finite_diff_check, loss
from .camera import Camera, look_at, orbit_ring, world_to_camera
from .covariance import Cov3D, quat_scale_to_cov
from .densify import DensifyConfig, densify
from .metrics import PoppingReport, popping_metric, psnr, ssim
from .optim import AdamState, adam_step
from .projection import SplatProjection, frustum_cull, project_gaussian, project_scene
from .renderer import (
    RenderOptions,
    depth_order,
    render_sorted_reference,
    render_wsr,
    weight_eval,
)
from .scene import (
    GaussianElement,
    ParamView,
    Scene,
    WeightModel,
    scene_new_random,
    scene_param_count,
)
from .sh import ShCoeffs, compact_color_eval, sh_basis, sh_eval
from .train import TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "Camera",
    "Cov3D",
    "DensifyConfig",
    "GaussianElement",
    "Gradients",
    "ParamView",
    "PoppingReport",
    "RenderOptions",
    "Scene",
    "ShCoeffs",
    "SplatProjection",
    "StableAccumulator",
    "TrainConfig",
    "WeightModel",
    "adam_step",
    "backward_wsr",
    "compact_color_eval",
    "densify",
    "depth_order",
    "finite_diff_check",
    "frustum_cull",
    "look_at",
    "loss",
    "orbit_ring",
    "popping_metric",
    "project_gaussian",
    "project_scene",
    "psnr",
    "quat_scale_to_cov",
    "render_sorted_reference",
    "render_wsr",
    "scene_new_random",
    "scene_param_count",
    "sh_basis",
    "sh_eval",
    "ssim",
    "train",
    "weight_eval",
    "world_to_camera",
]

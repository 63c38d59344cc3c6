"""Training loop: sample a view, backpropagate, step Adam, periodically densify."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .backward import DSSIM_WEIGHT, L1_WEIGHT, backward_wsr
from .camera import Camera
from .densify import DensifyConfig, GradStats, densify
from .metrics import psnr
from .optim import AdamState, adam_step
from .renderer import RenderOptions, render_wsr
from .scene import EXP as EXP_VARIANT
from .scene import LC as LC_VARIANT
from .scene import ELEMENT_GROUPS, ParamView, Scene, WeightModel, scene_new_random


@dataclass
class TrainConfig:
    iterations: int = 2000
    seed: int = 0
    eval_interval: int = 100
    l1_weight: float = L1_WEIGHT
    dssim_weight: float = DSSIM_WEIGHT
    learning_rates: dict = field(default_factory=dict)
    position_decay_horizon: int = 0  # 0: decay over `iterations`
    densify_enabled: bool = True
    densify: DensifyConfig = field(default_factory=DensifyConfig)
    # Random-init parameters, used when no starting scene is supplied.
    n_init: int = 80
    init_extent: float = 1.0
    init_opacity: float = 0.3
    weight_model: WeightModel = field(default_factory=WeightModel.lc)
    sh_degree_color: int = 1
    sh_degree_opacity: int = 1
    background_color: tuple = (0.0, 0.0, 0.0)
    checkpoint_path: str | None = None


def _remap_adam(state: AdamState, parents: np.ndarray, old_scene: Scene, new_scene: Scene) -> AdamState:
    """Carry optimizer moments through a densify step.

    Surviving elements keep their moments; fresh clones/splits start at
    zero (parent index -1).
    """
    new_state = AdamState.for_scene(
        new_scene, state.lr_table, position_decay_horizon=state.position_decay_horizon
    )
    new_state.step = state.step
    old_view = ParamView(old_scene)
    new_view = ParamView(new_scene)
    kept = parents >= 0
    src = parents[kept]
    dst = np.flatnonzero(kept)
    for moments_old, moments_new in ((state.m, new_state.m), (state.v, new_state.v)):
        for name in ELEMENT_GROUPS:
            per = getattr(old_scene, name).size // max(old_scene.n, 1)
            old_block = moments_old[
                old_view.offset(name) : old_view.offset(name) + getattr(old_scene, name).size
            ].reshape(old_scene.n, per)
            new_block = moments_new[
                new_view.offset(name) : new_view.offset(name) + getattr(new_scene, name).size
            ].reshape(new_scene.n, per)
            new_block[dst] = old_block[src]
        for name in new_view.globals:
            moments_new[new_view.offset(name)] = moments_old[old_view.offset(name)]
    return new_state


def _project_globals(scene: Scene, floor: float = 1e-4) -> None:
    """Keep the global parameters inside their validity domains."""
    scene.background_weight = max(scene.background_weight, 0.0)
    model = scene.weight_model
    if model.variant in (EXP_VARIANT, LC_VARIANT):
        model.sigma = max(model.sigma, floor)
    if model.variant == EXP_VARIANT:
        model.beta = max(model.beta, floor)


def evaluate_psnr(scene: Scene, dataset, opts: RenderOptions | None = None) -> float:
    opts = opts or RenderOptions()
    values = [psnr(render_wsr(scene, cam, opts), target) for cam, target in dataset]
    return float(np.mean(values))


def train(dataset, config: TrainConfig, scene: Scene | None = None):
    """Optimize a scene against (camera, image) pairs.

    Deterministic for a fixed seed. Returns (scene, log) where log holds
    the per-iteration loss and the periodic PSNR evaluations.
    """
    if not dataset:
        raise ValueError("dataset must contain at least one (camera, image) pair")
    for cam, target in dataset:
        if not isinstance(cam, Camera):
            raise ValueError("dataset entries must be (Camera, image) pairs")
        if target.shape != (cam.height, cam.width, 3):
            raise ValueError(
                f"target shape {target.shape} does not match camera "
                f"({cam.height}, {cam.width}, 3)"
            )

    rng = np.random.default_rng(config.seed)
    if scene is None:
        half = config.init_extent
        scene = scene_new_random(
            config.n_init,
            [(-half, -half, -half), (half, half, half)],
            seed=config.seed,
            weight_model=config.weight_model,
            sh_degree_color=config.sh_degree_color,
            sh_degree_opacity=config.sh_degree_opacity,
            background_color=config.background_color,
            init_opacity=config.init_opacity,
        )
    else:
        scene = scene.copy()

    horizon = config.position_decay_horizon or config.iterations
    state = AdamState.for_scene(scene, config.learning_rates, position_decay_horizon=horizon)
    stats = GradStats(scene.n)
    opts = RenderOptions(precision="f64")
    log = {"loss": [], "eval": []}

    def record_eval(iteration: int, recent_loss: float) -> None:
        value = evaluate_psnr(scene, dataset, opts)
        log["eval"].append(
            {"iteration": iteration, "psnr": value, "loss": recent_loss, "elements": scene.n}
        )
        if config.checkpoint_path:
            from .io import save_ply

            save_ply(scene, config.checkpoint_path)

    dcfg = config.densify
    for it in range(1, config.iterations + 1):
        cam, target = dataset[int(rng.integers(len(dataset)))]
        step_stats: dict = {}
        value, grads = backward_wsr(
            scene, cam, target, opts, config.l1_weight, config.dssim_weight, stats=step_stats
        )
        adam_step(scene, grads, state)
        _project_globals(scene)
        stats.update(step_stats)
        log["loss"].append(value)

        if (
            config.densify_enabled
            and it % dcfg.interval == 0
            and dcfg.start_iteration <= it <= dcfg.stop_iteration
        ):
            old_scene = scene
            scene, parents = densify(scene, stats, dcfg, rng)
            state = _remap_adam(state, parents, old_scene, scene)
            stats = GradStats(scene.n)

        if it % config.eval_interval == 0 or it == config.iterations:
            record_eval(it, value)

    if config.iterations == 0:
        record_eval(0, float("nan"))
    return scene, log

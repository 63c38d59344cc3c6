"""Adam, densification rules, and training-loop contracts."""

import numpy as np
import pytest

from wsplat.backward import Gradients, backward_wsr
from wsplat.densify import DensifyConfig, GradStats, densify
from wsplat.optim import ADAM_BETA1, ADAM_BETA2, ADAM_EPS, AdamState, adam_step
from wsplat.renderer import RenderOptions, render_wsr
from wsplat.scene import ParamView, WeightModel, scene_new_random
from wsplat.train import TrainConfig, train

from conftest import make_camera, make_scene

BOUNDS = [(-1.0, -1.0, -1.0), (1.0, 1.0, 1.0)]


# --- adam ----------------------------------------------------------------------

def test_adam_zero_gradient_no_change():
    scene = scene_new_random(4, BOUNDS, seed=1)
    view = ParamView(scene)
    before = view.get_flat()
    state = AdamState.for_scene(scene)
    adam_step(scene, Gradients.zeros(scene), state)
    np.testing.assert_array_equal(ParamView(scene).get_flat(), before)


def test_adam_descends_against_constant_gradient():
    scene = scene_new_random(1, BOUNDS, seed=2)
    state = AdamState.for_scene(scene)
    start = scene.positions[0, 0]
    for _ in range(20):
        g = Gradients.zeros(scene)
        g.positions[0, 0] = 2.5
        adam_step(scene, g, state)
    assert scene.positions[0, 0] < start


def test_adam_matches_textbook_formula():
    scene = scene_new_random(1, BOUNDS, seed=3, weight_model=WeightModel.dir())
    view = ParamView(scene)
    theta0 = view.get_flat()
    g = Gradients.zeros(scene)
    g.positions[0] = np.array([0.3, -0.7, 1.1])
    lr = 1.6e-4
    state = AdamState.for_scene(scene)
    adam_step(scene, g, state)
    flat_g = g.flat(scene)
    m = (1 - ADAM_BETA1) * flat_g / (1 - ADAM_BETA1)
    v = (1 - ADAM_BETA2) * flat_g**2 / (1 - ADAM_BETA2)
    expected = theta0[:3] - lr * m[:3] / (np.sqrt(v[:3]) + ADAM_EPS)
    np.testing.assert_array_equal(ParamView(scene).get_flat()[:3], expected)


def test_adam_unknown_lr_group_rejected():
    scene = scene_new_random(1, BOUNDS, seed=3)
    with pytest.raises(ValueError):
        AdamState.for_scene(scene, {"nope": 1.0})


# --- densify -------------------------------------------------------------------

def quiet_stats(scene, radius=1.0):
    stats = GradStats(scene.n)
    stats.count[:] = 1
    stats.max_radius[:] = radius
    return stats


def test_densify_no_hot_elements_unchanged():
    scene = scene_new_random(6, BOUNDS, seed=4)
    out, parents = densify(scene, quiet_stats(scene), DensifyConfig(), np.random.default_rng(0))
    assert out.n == 6
    np.testing.assert_array_equal(parents, np.arange(6))
    np.testing.assert_array_equal(out.positions, scene.positions)


def test_densify_clone_small_splat():
    scene = scene_new_random(3, BOUNDS, seed=5)
    scene.log_scales[:] = np.log(1e-4)  # all tiny -> clone branch
    stats = quiet_stats(scene)
    stats.sum_screen_norm[1] = 1.0  # mean grad 1.0 > threshold
    stats.sum_position_grad[1] = np.array([1.0, 0.0, 0.0])
    out, parents = densify(scene, stats, DensifyConfig(), np.random.default_rng(0))
    assert out.n == 4
    assert (parents == -1).sum() == 1
    # Clone steps one mean-scale along the descent direction.
    clone_pos = out.positions[3]
    step = np.exp(scene.log_scales[1].mean())
    np.testing.assert_allclose(clone_pos, scene.positions[1] - step * np.array([1, 0, 0]), atol=1e-12)
    np.testing.assert_array_equal(out.color_sh[3], scene.color_sh[1])


def test_densify_split_large_splat():
    scene = scene_new_random(3, BOUNDS, seed=6)
    scene.log_scales[2] = np.log(0.5)  # large vs extent -> split branch
    stats = quiet_stats(scene)
    stats.sum_screen_norm[2] = 1.0
    out, parents = densify(scene, stats, DensifyConfig(), np.random.default_rng(1))
    assert out.n == 4  # parent removed, two children added
    assert (parents == -1).sum() == 2
    children = out.positions[2:]
    np.testing.assert_allclose(
        np.exp(out.log_scales[2:]),
        np.broadcast_to(np.exp(scene.log_scales[2]) / 1.6, (2, 3)),
        atol=1e-12,
    )
    assert not np.allclose(children[0], children[1])


def test_densify_removes_degenerate_radius():
    scene = scene_new_random(4, BOUNDS, seed=7)
    stats = quiet_stats(scene)
    stats.max_radius[0] = 9999.0
    out, parents = densify(scene, stats, DensifyConfig(max_radius=512), np.random.default_rng(0))
    assert out.n == 3
    np.testing.assert_array_equal(parents, [1, 2, 3])


def test_densify_respects_element_cap():
    scene = scene_new_random(4, BOUNDS, seed=8)
    scene.log_scales[:] = np.log(1e-4)
    stats = quiet_stats(scene)
    stats.sum_screen_norm[:] = 1.0
    out, _ = densify(scene, stats, DensifyConfig(max_elements=5), np.random.default_rng(0))
    assert out.n == 5


# --- train loop ----------------------------------------------------------------

def tiny_dataset(n_views=3, size=16, seed=50):
    scene = make_scene(8, seed=seed, u_range=(0.5, 0.9))
    cams = [make_camera(width=size, height=size, azimuth=0.4 + 0.5 * k) for k in range(n_views)]
    images = [render_wsr(scene, cam, RenderOptions()) for cam in cams]
    return list(zip(cams, images))


def quick_config(**overrides):
    base = dict(
        iterations=30,
        seed=3,
        eval_interval=15,
        n_init=10,
        densify_enabled=False,
        sh_degree_color=0,
        sh_degree_opacity=0,
        dssim_weight=0.2,
    )
    base.update(overrides)
    return TrainConfig(**base)


def test_train_zero_iterations_returns_initial():
    dataset = tiny_dataset()
    scene = make_scene(5, seed=9)
    out, log = train(dataset, quick_config(iterations=0), scene)
    np.testing.assert_array_equal(out.positions, scene.positions)
    np.testing.assert_array_equal(out.color_sh, scene.color_sh)


def test_train_deterministic():
    dataset = tiny_dataset()
    _, log_a = train(dataset, quick_config())
    _, log_b = train(dataset, quick_config())
    assert log_a["loss"] == log_b["loss"]
    assert log_a["eval"] == log_b["eval"]


def test_train_empty_dataset_rejected():
    with pytest.raises(ValueError):
        train([], quick_config())


def test_train_descends_smoothed_loss():
    # Single view: every iteration is a full-batch step.
    dataset = tiny_dataset(n_views=1, size=16)
    _, log = train(dataset, quick_config(iterations=50, n_init=12))
    losses = np.asarray(log["loss"])
    first = losses[:10].mean()
    last = losses[-10:].mean()
    assert last < first


def test_train_densify_keeps_optimizer_consistent():
    dataset = tiny_dataset(n_views=2, size=16)
    cfg = quick_config(
        iterations=40,
        densify_enabled=True,
    )
    cfg.densify.interval = 10
    cfg.densify.start_iteration = 10
    cfg.densify.grad_threshold = 1e-9  # force clones/splits
    cfg.densify.max_elements = 40
    out, log = train(dataset, cfg)
    assert out.n >= 10
    assert np.isfinite(log["loss"]).all()

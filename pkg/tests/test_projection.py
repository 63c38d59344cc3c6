"""Camera transforms, splat projection, and frustum culling."""

import numpy as np
import pytest

from wsplat.camera import Camera, look_at, world_to_camera
from wsplat.projection import COV2D_FLOOR, frustum_cull, project_gaussian, project_scene
from wsplat.scene import GaussianElement, scene_new_random
from wsplat.sh import ShCoeffs

from conftest import make_camera, make_scene


def identity_camera(width=64, height=64, fx=80.0):
    return Camera(
        fx=fx, fy=fx, cx=width / 2, cy=height / 2, width=width, height=height,
        rotation=np.eye(3), translation=np.zeros(3), near=0.1, far=100.0,
    )


def isotropic_element(position, sigma_world, u=0.5):
    return GaussianElement(
        position=np.asarray(position, dtype=np.float64),
        quat=np.array([1.0, 0.0, 0.0, 0.0]),
        log_scale=np.log(np.full(3, sigma_world)),
        color_sh=ShCoeffs(0, np.zeros((3, 1))),
        opacity_sh=ShCoeffs(0, np.array([[u / 0.28209479177387814]])),
    )


def test_world_to_camera_identity():
    cam = identity_camera()
    _, depth = world_to_camera(cam, np.array([0.0, 0.0, 5.0]))
    assert depth == 5.0


def test_world_to_camera_translation():
    cam = identity_camera()
    cam = Camera(**{**cam.__dict__, "translation": np.array([0.0, 0.0, -1.0])})
    _, depth = world_to_camera(cam, np.array([0.0, 0.0, 5.0]))
    assert depth == 4.0


def test_world_to_camera_homogeneous_oracle(rng):
    cam = make_camera()
    m = np.eye(4)
    m[:3, :3] = cam.rotation
    m[:3, 3] = cam.translation
    for _ in range(20):
        p = rng.normal(size=3)
        got, depth = world_to_camera(cam, p)
        want = (m @ np.append(p, 1.0))[:3]
        np.testing.assert_allclose(got, want, atol=1e-12)
        assert depth == pytest.approx(want[2], abs=1e-12)


def test_isotropic_on_axis_cov2d():
    cam = identity_camera(fx=80.0)
    z, sw = 5.0, 0.2
    proj = project_gaussian(cam, isotropic_element([0.0, 0.0, z], sw))
    expected = np.diag([(cam.fx * sw / z) ** 2, (cam.fy * sw / z) ** 2]) + COV2D_FLOOR * np.eye(2)
    np.testing.assert_allclose(proj.cov2d, expected, atol=1e-6)
    assert proj.visible
    assert proj.depth == pytest.approx(z)
    np.testing.assert_allclose(proj.mean2d, [cam.cx, cam.cy], atol=1e-9)


def test_behind_camera_invisible():
    cam = identity_camera()
    proj = project_gaussian(cam, isotropic_element([0.0, 0.0, -3.0], 0.2))
    assert not proj.visible


def test_inverse_depth_scaling():
    cam = identity_camera(fx=120.0)
    sw = 0.3
    p1 = project_gaussian(cam, isotropic_element([0.0, 0.0, 4.0], sw))
    p2 = project_gaussian(cam, isotropic_element([0.0, 0.0, 8.0], sw))
    std1 = np.sqrt(p1.cov2d[0, 0] - COV2D_FLOOR)
    std2 = np.sqrt(p2.cov2d[0, 0] - COV2D_FLOOR)
    assert std2 == pytest.approx(std1 / 2.0, rel=1e-6)


def test_conic_is_exact_inverse(rng):
    scene = make_scene(40, seed=21)
    proj = project_scene(scene, make_camera())
    for i in np.flatnonzero(proj.visible):
        residual = np.abs(proj.conic[i] @ proj.cov2d[i] - np.eye(2)).max()
        assert residual < 1e-6


def test_translation_consistency():
    scene = make_scene(20, seed=4)
    cam = make_camera()
    shift = np.array([5.0, -3.0, 2.0])
    moved_scene = scene.copy()
    moved_scene.positions = scene.positions + shift
    moved_cam = Camera(
        fx=cam.fx, fy=cam.fy, cx=cam.cx, cy=cam.cy, width=cam.width, height=cam.height,
        rotation=cam.rotation, translation=cam.translation - cam.rotation @ shift,
        near=cam.near, far=cam.far,
    )
    a = project_scene(scene, cam)
    b = project_scene(moved_scene, moved_cam)
    np.testing.assert_allclose(a.mean2d, b.mean2d, atol=1e-9)
    np.testing.assert_allclose(a.cov2d, b.cov2d, atol=1e-9)
    np.testing.assert_allclose(a.depth, b.depth, atol=1e-9)
    np.testing.assert_array_equal(a.visible, b.visible)


def test_frustum_cull_all_visible():
    scene = make_scene(15, seed=8, spread=0.3)
    cam = make_camera()
    np.testing.assert_array_equal(frustum_cull(cam, scene), np.arange(15))


def test_frustum_cull_all_behind():
    scene = make_scene(10, seed=8, spread=0.3)
    eye = np.array([0.0, 0.0, -4.0])
    cam = look_at(eye, (0.0, 0.0, -8.0), width=32, height=32, fx=40.0, near=0.1, far=50.0)
    assert frustum_cull(cam, scene).size == 0


def test_frustum_cull_matches_per_element():
    scene = make_scene(30, seed=13, spread=4.0)
    cam = make_camera(radius=5.0)
    got = frustum_cull(cam, scene)
    want = [i for i in range(scene.n) if project_gaussian(cam, scene.element(i)).visible]
    np.testing.assert_array_equal(got, want)


def test_camera_validation():
    with pytest.raises(ValueError):
        Camera(fx=1.0, fy=1.0, cx=0, cy=0, width=2, height=2,
               rotation=np.eye(3) * 1.1, translation=np.zeros(3))
    with pytest.raises(ValueError):
        Camera(fx=-1.0, fy=1.0, cx=0, cy=0, width=2, height=2,
               rotation=np.eye(3), translation=np.zeros(3))
    with pytest.raises(ValueError):
        Camera(fx=1.0, fy=1.0, cx=0, cy=0, width=2, height=2,
               rotation=np.eye(3), translation=np.zeros(3), near=5.0, far=1.0)

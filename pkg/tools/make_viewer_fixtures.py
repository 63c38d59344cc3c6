"""Regenerate the viewer test fixtures in frontend/fixtures/.

Each case carries a .wsplat scene exported by the package, the exact
camera (plus the orbit parameters that produce it), and the f32 render
of the same scene by this package's weighted-sum renderer. The viewer's
test suite re-renders each case with its CPU mirror of the shader math
and must stay within 2/255 mean absolute difference.
"""

import json
import os
import sys

import numpy as np

from wsplat.camera import look_at
from wsplat.io import export_wsplat
from wsplat.renderer import RenderOptions, render_wsr
from wsplat.scene import Scene, WeightModel
from wsplat.sh import SH_C0, n_basis
from wsplat.synth import toy20_scene

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "..", "frontend", "fixtures")


def orbit_camera(target, distance, azimuth, elevation, fov_y, width, height, near, far):
    """Mirror of the viewer's OrbitCamera -> CameraView derivation."""
    target = np.asarray(target, dtype=np.float64)
    ce = np.cos(elevation)
    eye = target + distance * np.array([np.cos(azimuth) * ce, np.sin(elevation), np.sin(azimuth) * ce])
    fy = 0.5 * height / np.tan(0.5 * fov_y)
    return look_at(eye, target, fx=fy, width=width, height=height, near=near, far=far)


def degree3_exp_scene(seed=606, n=5):
    rng = np.random.default_rng(seed)
    quats = rng.normal(size=(n, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    color_sh = np.zeros((n, 3, n_basis(3)))
    color_sh[:, :, 0] = (rng.uniform(0.2, 0.8, size=(n, 3)) - 0.5) / SH_C0
    color_sh[:, :, 1:] = rng.normal(0.0, 0.08, size=(n, 3, 15))
    opacity_sh = np.zeros((n, n_basis(3)))
    opacity_sh[:, 0] = rng.uniform(0.5, 0.9, size=n) / SH_C0
    opacity_sh[:, 1:] = rng.normal(0.0, 0.08, size=(n, 15))
    return Scene(
        positions=rng.uniform(-0.5, 0.5, size=(n, 3)),
        quats=quats,
        log_scales=np.log(rng.uniform(0.15, 0.35, size=(n, 3))),
        color_sh=color_sh,
        opacity_sh=opacity_sh,
        lc_v=rng.uniform(0.1, 0.4, size=n),
        weight_model=WeightModel.exp(),
        background_color=np.array([0.05, 0.05, 0.1]),
        background_weight=1.0,
        sh_degree_color=3,
        sh_degree_opacity=3,
    )


def empty_scene():
    return Scene(
        positions=np.zeros((0, 3)),
        quats=np.zeros((0, 4)),
        log_scales=np.zeros((0, 3)),
        color_sh=np.zeros((0, 3, 1)),
        opacity_sh=np.zeros((0, 1)),
        lc_v=np.zeros(0),
        weight_model=WeightModel.lc(),
        background_color=np.array([0.2, 0.3, 0.4]),
    )


def camera_entry(cam, orbit):
    return {
        "width": cam.width,
        "height": cam.height,
        "fx": cam.fx,
        "fy": cam.fy,
        "cx": cam.cx,
        "cy": cam.cy,
        "rotation": [float(v) for v in cam.rotation.ravel()],
        "translation": [float(v) for v in cam.translation],
        "near": cam.near,
        "far": cam.far,
        "orbit": orbit,
    }


def main() -> int:
    os.makedirs(FIXTURE_DIR, exist_ok=True)
    opts = RenderOptions(precision="f32")
    cases = []

    specs = [
        (
            "toy20",
            toy20_scene(),
            dict(target=[0.0, 0.0, 0.0], distance=3.2, azimuth=1.1, elevation=0.35,
                 fov_y=0.86, width=64, height=64, near=0.1, far=20.0),
        ),
        (
            "deg3_exp",
            degree3_exp_scene(),
            dict(target=[0.0, 0.05, 0.0], distance=2.6, azimuth=-0.4, elevation=0.15,
                 fov_y=0.9, width=48, height=40, near=0.1, far=30.0),
        ),
    ]
    for name, scene, orbit in specs:
        cam = orbit_camera(
            orbit["target"], orbit["distance"], orbit["azimuth"], orbit["elevation"],
            orbit["fov_y"], orbit["width"], orbit["height"], orbit["near"], orbit["far"],
        )
        export_wsplat(scene, os.path.join(FIXTURE_DIR, f"{name}.wsplat"))
        image = render_wsr(scene, cam, opts).astype(np.float64)
        cases.append({
            "name": name,
            "file": f"{name}.wsplat",
            "camera": camera_entry(cam, orbit),
            "expected": [round(float(v), 6) for v in image.ravel()],
            "meta": {
                "count": scene.n,
                "weight_model": scene.weight_model.variant,
                "sh_degree_color": scene.sh_degree_color,
                "sh_degree_opacity": scene.sh_degree_opacity,
                "sigma": scene.weight_model.sigma,
                "beta": scene.weight_model.beta,
                "background_weight": scene.background_weight,
                "background_color": [float(c) for c in scene.background_color],
                "first_position": [float(v) for v in scene.positions[0]],
                "first_lc_v": float(scene.lc_v[0]),
            },
        })

    export_wsplat(empty_scene(), os.path.join(FIXTURE_DIR, "empty.wsplat"))
    with open(os.path.join(FIXTURE_DIR, "cases.json"), "w", encoding="utf-8") as fh:
        json.dump({"cases": cases}, fh)
        fh.write("\n")
    print(f"wrote {len(cases)} render cases + empty scene to {FIXTURE_DIR}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

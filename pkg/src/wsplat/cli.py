"""Command-line interface: train, render, eval, export, bench, popping,
gradcheck, and synthetic scene generation.

Report-producing subcommands write a CSV next to their primary output
and render a matplotlib figure alongside it.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass, field
from dataclasses import fields as dataclasses_fields

import numpy as np

from .backward import finite_diff_check
from .camera import Camera, look_at
from .densify import DensifyConfig
from .metrics import popping_metric, psnr, ssim
from .optim import DEFAULT_LR
from .renderer import (
    RenderOptions,
    _composite_sorted,
    _rasterize_wsr,
    depth_order,
    prepare,
    render_sorted_reference,
    render_wsr,
)
from .scene import Scene, WeightModel
from .train import TrainConfig, train
from . import synth

GRADCHECK_TOLERANCE = 1e-4

_WEIGHT_MODEL_KEYS = {"variant", "sigma", "beta"}
_DENSIFY_KEYS = {
    "enabled", "interval", "start_iteration", "stop_iteration",
    "grad_threshold", "max_radius", "max_elements",
}
_TOP_KEYS = {
    "seed", "iterations", "eval_interval", "n_init", "init_extent", "init_opacity",
    "sh_degree_color", "sh_degree_opacity", "l1_weight", "dssim_weight", "precision",
    "workers", "background_color", "position_decay_horizon", "checkpoint_path",
    "weight_model", "densify", "learning_rates",
}


@dataclass
class RunConfig:
    """Serializable run configuration; unknown keys are rejected."""

    seed: int = 0
    iterations: int = 2000
    eval_interval: int = 100
    n_init: int = 80
    init_extent: float = 1.0
    init_opacity: float = 0.3
    sh_degree_color: int = 1
    sh_degree_opacity: int = 1
    l1_weight: float = 0.8
    dssim_weight: float = 0.2
    precision: str = "f64"
    workers: int = 0  # 0: auto; the numpy backend is worker-count independent
    background_color: tuple = (0.0, 0.0, 0.0)
    position_decay_horizon: int = 0
    checkpoint_path: str | None = None
    weight_model: dict = field(default_factory=lambda: {"variant": "lc"})
    densify: dict = field(default_factory=dict)
    learning_rates: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses_fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = list(value)
            if value is None:
                continue
            out[f.name] = value
        return out

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @staticmethod
    def from_file(path: str) -> "RunConfig":
        if path.endswith(".json"):
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        else:
            import tomli

            with open(path, "rb") as fh:
                raw = tomli.load(fh)
        unknown = set(raw) - _TOP_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for section, allowed in (
            ("weight_model", _WEIGHT_MODEL_KEYS),
            ("densify", _DENSIFY_KEYS),
            ("learning_rates", set(DEFAULT_LR)),
        ):
            bad = set(raw.get(section, {})) - allowed
            if bad:
                raise ValueError(f"unknown {section} config keys: {sorted(bad)}")
        return RunConfig(**raw)

    def build_weight_model(self) -> WeightModel:
        spec = dict(self.weight_model)
        variant = spec.get("variant", "lc")
        if variant == "dir":
            return WeightModel.dir()
        if variant == "exp":
            return WeightModel.exp(spec.get("sigma", 0.1), spec.get("beta", 0.8))
        if variant == "lc":
            return WeightModel.lc(spec.get("sigma", 10.0))
        raise ValueError(f"unknown weight model variant {variant!r}")

    def to_train_config(self) -> TrainConfig:
        d = dict(self.densify)
        enabled = d.pop("enabled", True)
        return TrainConfig(
            iterations=self.iterations,
            seed=self.seed,
            eval_interval=self.eval_interval,
            l1_weight=self.l1_weight,
            dssim_weight=self.dssim_weight,
            learning_rates=dict(self.learning_rates),
            position_decay_horizon=self.position_decay_horizon,
            densify_enabled=enabled,
            densify=DensifyConfig(**d),
            n_init=self.n_init,
            init_extent=self.init_extent,
            init_opacity=self.init_opacity,
            weight_model=self.build_weight_model(),
            sh_degree_color=self.sh_degree_color,
            sh_degree_opacity=self.sh_degree_opacity,
            background_color=tuple(self.background_color),
            checkpoint_path=self.checkpoint_path,
        )


def _workers(args) -> int:
    env = os.environ.get("WSR_WORKERS")
    if getattr(args, "workers", 0):
        return args.workers
    if env:
        return int(env)
    return os.cpu_count() or 1


def _load_scene(path: str) -> Scene:
    from .io import load_ply

    return load_ply(path)


def _load_dataset(cameras_path: str, images_dir: str):
    from .io import load_cameras, read_image

    cams = load_cameras(cameras_path)
    dataset = []
    for cam in cams:
        img_path = os.path.join(images_dir, f"{cam.cam_id}.png")
        if not os.path.exists(img_path):
            img_path = os.path.join(images_dir, f"{cam.cam_id}.ppm")
        if not os.path.exists(img_path):
            raise FileNotFoundError(f"no image for camera {cam.cam_id!r} in {images_dir}")
        dataset.append((cam, read_image(img_path)))
    return dataset


def _auto_camera(scene: Scene, width: int = 64, height: int = 64) -> Camera:
    center = scene.positions.mean(axis=0) if scene.n else np.zeros(3)
    span = 1.0
    if scene.n:
        span = max(
            float(np.linalg.norm(scene.positions.max(axis=0) - scene.positions.min(axis=0))), 0.5
        )
    eye = center + np.array([0.9, 0.6, 1.4]) * (1.6 * span)
    return look_at(eye, center, fx=1.2 * max(width, height), width=width, height=height,
                   near=0.01 * span, far=100.0 * span)


# --- subcommands ---------------------------------------------------------------

def cmd_synth(args) -> int:
    if args.preset == "toy20":
        scene, cameras, images = synth.toy20(args.out, seed=args.seed)
        print(f"toy20: {scene.n} splats, {len(cameras)} cameras, "
              f"{len(images)} ground-truth images -> {args.out}")
    else:
        scene, path = synth.two_splat(args.out)
        print(f"two-splat: {scene.n} splats, {len(path)}-frame sweep -> {args.out}")
    return 0


def cmd_train(args) -> int:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    if args.seed is not None:
        config.seed = args.seed
    if args.iterations is not None:
        config.iterations = args.iterations
    tc = config.to_train_config()

    dataset = _load_dataset(args.cameras, args.images)
    scene = None if args.scene == "synth" else _load_scene(args.scene)
    t0 = time.perf_counter()
    trained, log = train(dataset, tc, scene)
    wall = time.perf_counter() - t0

    from .io import save_ply
    from .plots import save_training_curves

    out_dir = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(out_dir, exist_ok=True)
    save_ply(trained, args.out)
    csv_path = os.path.join(out_dir, "metrics.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "psnr", "loss", "elements"])
        for row in log["eval"]:
            writer.writerow([row["iteration"], f"{row['psnr']:.4f}",
                             f"{row['loss']:.6f}", row["elements"]])
    save_training_curves(log, os.path.join(out_dir, "training.png"))

    final = log["eval"][-1] if log["eval"] else {"psnr": float("nan")}
    print(f"trained {tc.iterations} iterations in {wall:.1f}s; "
          f"final train PSNR {final['psnr']:.2f} dB; {trained.n} splats")
    print(f"scene -> {args.out}; metrics -> {csv_path}")
    return 0


def cmd_render(args) -> int:
    from .io import load_cameras, write_image

    scene = _load_scene(args.scene)
    cams = load_cameras(args.cameras)
    opts = RenderOptions(precision=args.precision)
    os.makedirs(args.out, exist_ok=True)
    render = render_wsr if args.renderer == "wsr" else render_sorted_reference
    for cam in cams:
        img = render(scene, cam, opts)
        write_image(os.path.join(args.out, f"{cam.cam_id}.png"), img)
    print(f"rendered {len(cams)} views with {args.renderer} -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    dataset = _load_dataset(args.cameras, args.images)
    scene = _load_scene(args.scene)
    opts = RenderOptions(precision=args.precision)
    rows = []
    for cam, target in dataset:
        img = render_wsr(scene, cam, opts)
        rows.append({
            "view": cam.cam_id,
            "psnr": psnr(img, target),
            "ssim": ssim(img, target),
        })
    header = f"{'view':<12}{'PSNR (dB)':>12}{'SSIM':>10}{'LPIPS':>8}"
    print(header)
    print("-" * len(header))
    for r in rows:
        print(f"{r['view']:<12}{r['psnr']:>12.3f}{r['ssim']:>10.4f}{'n/a':>8}")
    mean_psnr = float(np.mean([r["psnr"] for r in rows]))
    mean_ssim = float(np.mean([r["ssim"] for r in rows]))
    print("-" * len(header))
    print(f"{'mean':<12}{mean_psnr:>12.3f}{mean_ssim:>10.4f}{'n/a':>8}")

    if args.out:
        from .plots import save_eval_figure

        os.makedirs(args.out, exist_ok=True)
        csv_path = os.path.join(args.out, "eval.csv")
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["view", "psnr", "ssim", "lpips"])
            for r in rows:
                writer.writerow([r["view"], f"{r['psnr']:.5f}", f"{r['ssim']:.6f}", "n/a"])
            writer.writerow(["mean", f"{mean_psnr:.5f}", f"{mean_ssim:.6f}", "n/a"])
        save_eval_figure(rows, os.path.join(args.out, "eval.png"))
        print(f"report -> {csv_path}")
    return 0


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def cmd_export(args) -> int:
    from .io import export_wsplat

    scene = _load_scene(args.scene)
    _ensure_parent(args.out)
    export_wsplat(scene, args.out)
    print(f"exported {scene.n} splats -> {args.out}")
    return 0


def cmd_bench(args) -> int:
    from .io import load_cameras

    scene = _load_scene(args.scene)
    cams = load_cameras(args.cameras)
    cam = cams[0]
    opts = RenderOptions(precision=args.precision)

    samples: dict[str, list] = {"project": [], "rasterize": []}
    if args.renderer == "sorted":
        samples["sort"] = []
    for _ in range(args.repeat):
        t0 = time.perf_counter()
        prep = prepare(scene, cam, opts)
        t1 = time.perf_counter()
        samples["project"].append(t1 - t0)
        if args.renderer == "sorted":
            order = depth_order(scene, cam)
            t2 = time.perf_counter()
            samples["sort"].append(t2 - t1)
            _composite_sorted(scene, cam, prep, order, opts)
            samples["rasterize"].append(time.perf_counter() - t2)
        else:
            _rasterize_wsr(scene, cam, prep, opts)
            samples["rasterize"].append(time.perf_counter() - t1)

    stages = {name: float(np.median(vals) * 1e3) for name, vals in samples.items()}
    report = {
        "renderer": args.renderer,
        "repeat": args.repeat,
        "width": cam.width,
        "height": cam.height,
        "splats": scene.n,
        "workers": _workers(args),
        "stages_ms": stages,
        "total_ms": float(sum(stages.values())),
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        _ensure_parent(args.out)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return 0


def cmd_popping(args) -> int:
    from .io import load_cameras
    from .plots import save_popping_figure

    scene = _load_scene(args.scene)
    path_cams = load_cameras(args.path)
    opts = RenderOptions(precision=args.precision)
    reports = {
        name: popping_metric(scene, path_cams, renderer=name, opts=opts).to_dict()
        for name in ("sorted", "wsr")
    }
    sorted_rep, wsr_rep = reports["sorted"], reports["wsr"]
    summary = {
        "sorted_spike_over_median": (
            sorted_rep["max_delta"] / sorted_rep["median_delta"]
            if sorted_rep["median_delta"] > 0 else float("inf")
        ),
        "wsr_max_over_sorted_spike": (
            wsr_rep["max_delta"] / sorted_rep["max_delta"]
            if sorted_rep["max_delta"] > 0 else float("inf")
        ),
    }
    payload = {"reports": reports, "summary": summary}
    _ensure_parent(args.out)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    base = os.path.splitext(args.out)[0]
    with open(base + ".csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "sorted_delta", "wsr_delta"])
        for i, (a, b) in enumerate(zip(sorted_rep["deltas"], wsr_rep["deltas"])):
            writer.writerow([i + 1, f"{a:.8f}", f"{b:.8f}"])
    save_popping_figure(reports, base + ".png")

    print(f"sorted: max delta {sorted_rep['max_delta']:.4f} at frame {sorted_rep['max_index'] + 1}, "
          f"median {sorted_rep['median_delta']:.4f} "
          f"(spike ratio {summary['sorted_spike_over_median']:.1f}x)")
    print(f"wsr:    max delta {wsr_rep['max_delta']:.4f} "
          f"({summary['wsr_max_over_sorted_spike']:.3f}x the sorted spike)")
    print(f"report -> {args.out}")
    return 0


def cmd_gradcheck(args) -> int:
    if args.scene == "synth":
        scene = synth.gradcheck_scene(args.model, seed=args.seed)
        cam = synth.gradcheck_camera()
    else:
        scene = _load_scene(args.scene)
        variant = args.model
        if variant != scene.weight_model.variant:
            scene.weight_model = {
                "dir": WeightModel.dir, "exp": WeightModel.exp, "lc": WeightModel.lc
            }[variant]()
        cam = _auto_camera(scene)
    target = render_sorted_reference(scene, cam, RenderOptions(precision="f64"))
    report = finite_diff_check(scene, cam, target, opts=RenderOptions(exact=True))
    ok = report.max_rel_error < GRADCHECK_TOLERANCE
    print(f"gradcheck [{args.model}] over {len(report.labels)} slots: "
          f"max rel error {report.max_rel_error:.3e} at {report.worst_slot} "
          f"({'OK' if ok else 'FAIL'} at {GRADCHECK_TOLERANCE:.0e})")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wsplat", description="Sort-free Gaussian splatting toolkit."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="emit the deterministic test scenes")
    p.add_argument("--preset", choices=["two-splat", "toy20"], required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=synth.TOY20_SEED)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="optimize a scene against posed images")
    p.add_argument("--config", help="TOML or JSON run configuration")
    p.add_argument("--scene", required=True, help="starting scene PLY, or 'synth' for random init")
    p.add_argument("--cameras", required=True)
    p.add_argument("--images", required=True)
    p.add_argument("--out", required=True, help="output scene PLY")
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--workers", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("render", help="render one PNG per camera")
    p.add_argument("--scene", required=True)
    p.add_argument("--cameras", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--renderer", choices=["wsr", "sorted"], default="wsr")
    p.add_argument("--precision", choices=["f32", "f64"], default="f32")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("eval", help="PSNR/SSIM table against ground-truth images")
    p.add_argument("--scene", required=True)
    p.add_argument("--cameras", required=True)
    p.add_argument("--images", required=True)
    p.add_argument("--out", help="directory for eval.csv and eval.png")
    p.add_argument("--precision", choices=["f32", "f64"], default="f64")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export", help="write the binary viewer scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("bench", help="per-stage render timings as JSON")
    p.add_argument("--scene", required=True)
    p.add_argument("--cameras", required=True)
    p.add_argument("--renderer", choices=["wsr", "sorted"], default="wsr")
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--precision", choices=["f32", "f64"], default="f32")
    p.add_argument("--workers", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("popping", help="temporal popping probe over a camera path")
    p.add_argument("--scene", required=True)
    p.add_argument("--path", required=True, help="camera path JSON")
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--precision", choices=["f32", "f64"], default="f64")
    p.set_defaults(func=cmd_popping)

    p = sub.add_parser("gradcheck", help="finite-difference audit of the analytic gradients")
    p.add_argument("--scene", default="synth", help="scene PLY, or 'synth' for the built-in preset")
    p.add_argument("--model", choices=["dir", "exp", "lc"], required=True)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses exit code 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Forward rendering: sort-free weighted-sum rendering and the sorted reference.

The weighted-sum path accumulates commutative per-pixel sums of
alpha * weight * color and alpha * weight and divides once against the
weighted background term, so splat traversal order never matters and no
depth sort exists anywhere on that path. The reference renderer is the
classic sorted front-to-back alpha blend used to quantify the
approximation and the popping behavior of sorting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .accum import ExpPixelBuffer, SumPixelBuffer
from .camera import Camera
from .projection import SceneProjection, project_scene
from .scene import DIR, EXP, LC, Scene
from .sh import COLOR_OFFSET, sh_basis_many

DEFAULT_ALPHA_FLOOR = 1.0 / 255.0
SORTED_ALPHA_MAX = 0.99
SORTED_EARLY_STOP = 1e-4

# Test hook: incremented by every depth_order call. The weighted-sum
# path must leave it untouched.
DEPTH_ORDER_CALLS = 0


@dataclass
class RenderOptions:
    """Rendering knobs shared by both renderers.

    alpha_floor is a relative cutoff: pixels where the Gaussian falloff
    drops below this fraction of the splat's peak contribution are
    skipped. Keeping it relative preserves the scale invariance of the
    weighted-sum quotient. `exact` disables the cutoff and the 3-sigma
    bounding box (every splat covers the whole image); gradient checks
    use it to keep the loss smooth in every parameter.
    """

    precision: str = "f64"
    alpha_floor: float = DEFAULT_ALPHA_FLOOR
    deterministic_order: bool = True
    shuffle_seed: int = 0
    exact: bool = False
    early_stop: float = SORTED_EARLY_STOP

    def __post_init__(self) -> None:
        if self.precision not in ("f32", "f64"):
            raise ValueError(f"precision must be 'f32' or 'f64', got {self.precision!r}")
        if self.alpha_floor < 0:
            raise ValueError(f"alpha_floor must be >= 0, got {self.alpha_floor}")

    @property
    def dtype(self):
        return np.float32 if self.precision == "f32" else np.float64


def weight_eval(model, d: float, v: float = 0.0) -> float:
    """Per-splat blend weight at depth d under the given weight model."""
    if model.variant == DIR:
        return 1.0
    if model.variant == EXP:
        if d <= 0:
            raise ValueError(f"exp weight model needs depth > 0, got {d}")
        return float(np.exp(-model.sigma * d**model.beta))
    return float(max(0.0, 1.0 - d / model.sigma) * v)


def depth_order(scene: Scene, cam: Camera) -> np.ndarray:
    """Visible splat indices sorted by ascending center depth (stable)."""
    global DEPTH_ORDER_CALLS
    DEPTH_ORDER_CALLS += 1
    proj = project_scene(scene, cam)
    vis = np.flatnonzero(proj.visible)
    return vis[np.argsort(proj.depth[vis], kind="stable")]


def _order_visible(proj: SceneProjection, cam: Camera, opts: RenderOptions) -> np.ndarray:
    if opts.exact:
        # Keep the footprint test out of the visibility decision so the
        # rendered image is smooth in every parameter.
        vis = np.flatnonzero((proj.depth > cam.near) & (proj.depth < cam.far))
    else:
        vis = np.flatnonzero(proj.visible)
    if not opts.deterministic_order:
        rng = np.random.default_rng(opts.shuffle_seed)
        vis = rng.permutation(vis)
    return vis


@dataclass
class RenderPrep:
    """Per-view shading state shared by the renderers and the backward pass."""

    proj: SceneProjection
    order: np.ndarray            # traversal order over visible splats
    dirs: np.ndarray             # (N, 3) unit directions splat -> focal point
    basis_color: np.ndarray      # (N, Kc)
    basis_opacity: np.ndarray    # (N, Ko)
    colors: np.ndarray           # (N, 3), offset + clamped at zero
    color_active: np.ndarray     # (N, 3) bool, False where the zero clamp engaged
    u: np.ndarray                # (N,) view-dependent opacity, unclamped
    weights: np.ndarray          # (N,) blend weight w(d) (exp model: e^{-exponent})
    exponents: np.ndarray | None  # (N,) sigma * d^beta for the exp model, else None


def prepare(scene: Scene, cam: Camera, opts: RenderOptions) -> RenderPrep:
    proj = project_scene(scene, cam)
    order = _order_visible(proj, cam, opts)

    rel = cam.center[None, :] - scene.positions
    norms = np.linalg.norm(rel, axis=1)
    norms = np.where(norms > 1e-12, norms, 1.0)
    dirs = rel / norms[:, None]

    basis_c = sh_basis_many(scene.sh_degree_color, dirs)
    basis_o = sh_basis_many(scene.sh_degree_opacity, dirs)
    raw = np.einsum("nck,nk->nc", scene.color_sh, basis_c) + COLOR_OFFSET
    color_active = raw > 0.0
    colors = np.maximum(raw, 0.0)
    u = np.einsum("nk,nk->n", scene.opacity_sh, basis_o)

    model = scene.weight_model
    exponents = None
    if model.variant == EXP:
        d = np.where(proj.depth > 0, proj.depth, 1.0)
        exponents = model.sigma * d**model.beta
        weights = np.exp(-exponents)
    elif model.variant == LC:
        weights = np.maximum(0.0, 1.0 - proj.depth / model.sigma) * scene.lc_v
    else:
        weights = np.ones(scene.n)
    return RenderPrep(
        proj=proj,
        order=order,
        dirs=dirs,
        basis_color=basis_c,
        basis_opacity=basis_o,
        colors=colors,
        color_active=color_active,
        u=u,
        weights=weights,
        exponents=exponents,
    )


def splat_region(prep: RenderPrep, i: int, cam: Camera, opts: RenderOptions):
    """Footprint rectangle and falloff of splat i.

    Returns (ys, xs, g) with g already zeroed below the relative cutoff,
    or None when the rectangle is empty.
    """
    if opts.exact:
        x0, x1, y0, y1 = 0, cam.width, 0, cam.height
    else:
        mx, my = prep.proj.mean2d[i]
        r = prep.proj.radius[i]
        x0 = max(0, int(np.floor(mx - r)))
        x1 = min(cam.width, int(np.ceil(mx + r)) + 1)
        y0 = max(0, int(np.floor(my - r)))
        y1 = min(cam.height, int(np.ceil(my + r)) + 1)
        if x0 >= x1 or y0 >= y1:
            return None
    dx = np.arange(x0, x1, dtype=np.float64) + 0.5 - prep.proj.mean2d[i, 0]
    dy = np.arange(y0, y1, dtype=np.float64) + 0.5 - prep.proj.mean2d[i, 1]
    qa = prep.proj.conic[i, 0, 0]
    qb = prep.proj.conic[i, 0, 1]
    qc = prep.proj.conic[i, 1, 1]
    e = 0.5 * (qa * dx[None, :] ** 2 + qc * dy[:, None] ** 2) + qb * dy[:, None] * dx[None, :]
    g = np.exp(-e)
    if not opts.exact and opts.alpha_floor > 0:
        g[g < opts.alpha_floor] = 0.0
    return slice(y0, y1), slice(x0, x1), g


def render_wsr(
    scene: Scene, cam: Camera, opts: RenderOptions | None = None, diagnostics: dict | None = None
):
    """Sort-free weighted-sum render; returns an (H, W, 3) image in [0, 1].

    Each visible splat adds alpha * w * color and alpha * w at the pixels
    it covers; the exponential model routes the weight through the
    min-exponent-normalized accumulator. The pixel color is the quotient
    against the weighted background, so any traversal order gives the
    same image.
    """
    opts = opts or RenderOptions()
    prep = prepare(scene, cam, opts)
    img, degenerate = _rasterize_wsr(scene, cam, prep, opts)
    if diagnostics is not None:
        diagnostics["degenerate_pixels"] = degenerate
        diagnostics["splats_rendered"] = int(prep.order.size)
    return img


def _rasterize_wsr(scene: Scene, cam: Camera, prep: RenderPrep, opts: RenderOptions):
    dtype = opts.dtype
    model = scene.weight_model
    if model.variant == EXP:
        buf = ExpPixelBuffer(cam.height, cam.width, dtype=dtype)
    else:
        buf = SumPixelBuffer(cam.height, cam.width, dtype=dtype)

    for i in prep.order:
        region = splat_region(prep, i, cam, opts)
        if region is None:
            continue
        ys, xs, g = region
        g = g.astype(dtype, copy=False)
        alpha = dtype(prep.u[i]) * g
        color = prep.colors[i].astype(dtype)
        if model.variant == EXP:
            buf.add_region(ys, xs, prep.exponents[i], alpha[..., None] * color, alpha)
        else:
            aw = alpha * dtype(prep.weights[i])
            buf.add_region(ys, xs, aw[..., None] * color, aw)

    img, degenerate = buf.quotient(
        scene.background_color.astype(dtype), dtype(scene.background_weight)
    )
    return np.clip(img, 0.0, 1.0), degenerate


def render_sorted_reference(scene: Scene, cam: Camera, opts: RenderOptions | None = None):
    """Depth-sorted front-to-back alpha compositing (the 3DGS-style baseline).

    Alpha is clamped to [0, 0.99] (the view-dependent opacity is
    unclamped, the OVER operator is not), transmittance below the
    early-stop threshold freezes a pixel, and remaining transmittance is
    blended with the background color.
    """
    opts = opts or RenderOptions()
    prep = prepare(scene, cam, opts)
    order = depth_order(scene, cam)
    return _composite_sorted(scene, cam, prep, order, opts)


def _composite_sorted(scene: Scene, cam: Camera, prep: RenderPrep, order, opts: RenderOptions):
    dtype = opts.dtype
    color = np.zeros((cam.height, cam.width, 3), dtype=dtype)
    trans = np.ones((cam.height, cam.width), dtype=dtype)
    for i in order:
        region = splat_region(prep, i, cam, opts)
        if region is None:
            continue
        ys, xs, g = region
        alpha = np.clip(prep.u[i] * g, 0.0, SORTED_ALPHA_MAX).astype(dtype)
        t = trans[ys, xs]
        alive = t >= opts.early_stop if opts.early_stop > 0 else np.ones_like(t, dtype=bool)
        contrib = np.where(alive, alpha * t, 0.0)
        color[ys, xs] += contrib[..., None] * prep.colors[i].astype(dtype)
        trans[ys, xs] = np.where(alive, t * (1.0 - alpha), t)
    color += trans[..., None] * scene.background_color.astype(dtype)
    return np.clip(color, 0.0, 1.0)

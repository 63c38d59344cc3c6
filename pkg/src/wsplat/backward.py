"""Loss and analytic two-pass gradients for weighted-sum rendering.

Pass one renders and stores the per-pixel numerator/denominator sums
and the raw quotient; pass two walks the splats again and, because the
pixel color is a plain quotient of sums, reads every parameter's
gradient straight off those stored values:

    d r_l / d c_il     = (alpha_i w_i) / (w_B + sum alpha w)
    d r_l / d (aw)_i   = (c_il - r_l) / (w_B + sum alpha w)
    d r_l / d w_B      = (c_Bl - r_l) / (w_B + sum alpha w)

and chains onward through the opacity SH, the 2D falloff, the
projection, the weight model, and the view direction. No ordering is
needed in either pass. Everything here runs in float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .camera import Camera
from .covariance import cov3d_many, quat_to_rotmat_many
from .metrics import SSIM_WINDOW, ssim, ssim_with_grad
from .renderer import RenderOptions, RenderPrep, prepare, splat_region
from .scene import EXP, LC, ParamView, Scene
from .sh import sh_basis_grad_many

L1_WEIGHT = 0.8
DSSIM_WEIGHT = 0.2
FD_STEP = 1e-5
FD_ABS_FLOOR = 1e-8


class NumericsError(RuntimeError):
    """A gradient or update became non-finite; the message names the slot."""


def loss(
    rendered: np.ndarray,
    target: np.ndarray,
    l1_weight: float = L1_WEIGHT,
    dssim_weight: float = DSSIM_WEIGHT,
) -> float:
    """Training loss: l1_weight * mean|r - s| + dssim_weight * (1 - SSIM)."""
    rendered = np.asarray(rendered, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if rendered.shape != target.shape:
        raise ValueError(f"image shapes differ: {rendered.shape} vs {target.shape}")
    value = l1_weight * float(np.mean(np.abs(rendered - target)))
    if dssim_weight:
        value += dssim_weight * (1.0 - ssim(rendered, target))
    return value


def loss_with_grad(rendered, target, l1_weight=L1_WEIGHT, dssim_weight=DSSIM_WEIGHT):
    rendered = np.asarray(rendered, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if rendered.shape != target.shape:
        raise ValueError(f"image shapes differ: {rendered.shape} vs {target.shape}")
    diff = rendered - target
    value = l1_weight * float(np.mean(np.abs(diff)))
    grad = l1_weight * np.sign(diff) / diff.size
    if dssim_weight:
        s, sgrad = ssim_with_grad(rendered, target)
        value += dssim_weight * (1.0 - s)
        grad -= dssim_weight * sgrad
    return value, grad


@dataclass
class Gradients:
    """One gradient scalar per trainable slot, shaped like the scene."""

    positions: np.ndarray
    quats: np.ndarray
    log_scales: np.ndarray
    color_sh: np.ndarray
    opacity_sh: np.ndarray
    lc_v: np.ndarray
    sigma: float = 0.0
    beta: float = 0.0
    background_weight: float = 0.0

    @staticmethod
    def zeros(scene: Scene) -> "Gradients":
        return Gradients(
            positions=np.zeros_like(scene.positions),
            quats=np.zeros_like(scene.quats),
            log_scales=np.zeros_like(scene.log_scales),
            color_sh=np.zeros_like(scene.color_sh),
            opacity_sh=np.zeros_like(scene.opacity_sh),
            lc_v=np.zeros_like(scene.lc_v),
        )

    def flat(self, scene: Scene) -> np.ndarray:
        """Flatten in ParamView order for the scene's weight model."""
        view = ParamView(scene)
        out = np.zeros(view.n_params)
        for name in ("positions", "quats", "log_scales", "color_sh", "opacity_sh", "lc_v"):
            arr = getattr(self, name)
            out[view.offset(name) : view.offset(name) + arr.size] = arr.ravel()
        for name in view.globals:
            out[view.offset(name)] = getattr(self, name)
        return out

    def check_finite(self, scene: Scene) -> None:
        flat = self.flat(scene)
        bad = np.flatnonzero(~np.isfinite(flat))
        if bad.size:
            label = ParamView(scene).slot_label(int(bad[0]))
            raise NumericsError(f"non-finite gradient at slot {label}")

    def add_scaled(self, other: "Gradients", scale: float = 1.0) -> None:
        for name in ("positions", "quats", "log_scales", "color_sh", "opacity_sh", "lc_v"):
            getattr(self, name).__iadd__(scale * getattr(other, name))
        self.sigma += scale * other.sigma
        self.beta += scale * other.beta
        self.background_weight += scale * other.background_weight


@dataclass
class PixelSums:
    """Per-pixel state stored by the first pass.

    For the exponential model `num`/`den` live in the min-exponent
    normalized frame with per-pixel exponent `mu`; otherwise they are
    plain sums and `mu` is None. `quotient` is the raw (unclamped)
    rendered color; `inv` and `shift` are the precomputed factors such
    that a splat's weight share is exp(shift - d_i) * inv (exponential)
    or w_i * inv (direct/linear), and `t_bg` is 1 / (w_B + raw sum).
    """

    num: np.ndarray
    den: np.ndarray
    mu: np.ndarray | None
    quotient: np.ndarray
    degenerate: np.ndarray
    inv: np.ndarray
    shift: np.ndarray
    t_bg: np.ndarray


def forward_sums(scene: Scene, cam: Camera, prep: RenderPrep, opts: RenderOptions) -> PixelSums:
    """First pass: accumulate the per-pixel sums and derived factors (f64)."""
    h, w = cam.height, cam.width
    w_b = float(scene.background_weight)
    c_b = scene.background_color
    is_exp = scene.weight_model.variant == EXP

    num = np.zeros((h, w, 3))
    den = np.zeros((h, w))
    mu = np.full((h, w), np.inf) if is_exp else None
    for i in prep.order:
        region = splat_region(prep, i, cam, opts)
        if region is None:
            continue
        ys, xs, g = region
        alpha = prep.u[i] * g
        if is_exp:
            d = prep.exponents[i]
            m = mu[ys, xs]
            new_mu = np.minimum(m, d)
            s_old = np.exp(new_mu - m)
            s_new = np.exp(new_mu - d)
            num[ys, xs] = num[ys, xs] * s_old[..., None] + (alpha * s_new)[..., None] * prep.colors[i]
            den[ys, xs] = den[ys, xs] * s_old + alpha * s_new
            mu[ys, xs] = new_mu
        else:
            aw = alpha * prep.weights[i]
            num[ys, xs] += aw[..., None] * prep.colors[i]
            den[ys, xs] += aw

    if is_exp:
        empty = np.isinf(mu)
        mu_f = np.where(empty, 0.0, mu)
        if w_b == 0.0:
            # No background term: the normalized frame cancels in the
            # quotient and in every weight share.
            denom = den.copy()
            denom[empty] = 0.0
            numer = num.copy()
            shift = mu_f.copy()
        else:
            neg = (mu_f < 0.0) & ~empty
            denom = np.where(neg, w_b * np.exp(mu_f) + den, w_b + np.exp(-mu_f) * den)
            denom[empty] = w_b
            numer = np.where(
                neg[..., None],
                c_b[None, None, :] * (w_b * np.exp(mu_f))[..., None] + num,
                c_b[None, None, :] * w_b + np.exp(-mu_f)[..., None] * num,
            )
            numer[empty] = c_b * w_b
            shift = np.where(neg, mu_f, 0.0)
    else:
        denom = w_b + den
        numer = c_b[None, None, :] * w_b + num
        shift = np.zeros((h, w))

    degenerate = denom <= 0.0
    inv = np.where(degenerate, 0.0, 1.0 / np.where(degenerate, 1.0, denom))
    quotient = numer * inv[..., None]
    quotient[degenerate] = c_b
    t_bg = np.exp(shift) * inv if is_exp else inv
    return PixelSums(
        num=num, den=den, mu=mu, quotient=quotient, degenerate=degenerate,
        inv=inv, shift=shift, t_bg=t_bg,
    )


def _rotation_partials_many(qn: np.ndarray) -> np.ndarray:
    """d R / d q_hat for unit quaternions (w, x, y, z); shape (V, 4, 3, 3)."""
    w, x, y, z = qn[:, 0], qn[:, 1], qn[:, 2], qn[:, 3]
    zero = np.zeros_like(w)
    p = np.empty((qn.shape[0], 4, 3, 3), dtype=np.float64)
    p[:, 0] = np.moveaxis(
        np.array([[zero, -z, y], [z, zero, -x], [-y, x, zero]]), -1, 0
    )
    p[:, 1] = np.moveaxis(
        np.array([[zero, y, z], [y, -2 * x, -w], [z, w, -2 * x]]), -1, 0
    )
    p[:, 2] = np.moveaxis(
        np.array([[-2 * y, x, w], [x, zero, z], [-w, z, -2 * y]]), -1, 0
    )
    p[:, 3] = np.moveaxis(
        np.array([[-2 * z, -w, x], [w, -2 * z, y], [x, y, zero]]), -1, 0
    )
    return 2.0 * p


def backward_wsr(
    scene: Scene,
    cam: Camera,
    target: np.ndarray,
    opts: RenderOptions | None = None,
    l1_weight: float = L1_WEIGHT,
    dssim_weight: float = DSSIM_WEIGHT,
    stats: dict | None = None,
):
    """Render, evaluate the loss, and return (loss, Gradients).

    The loss is computed on the clamped image exactly as `render_wsr`
    produces it; gradients flow only where the clamp and the degenerate
    background fallback are inactive.
    """
    opts = opts or RenderOptions()
    target = np.asarray(target, dtype=np.float64)
    if target.shape != (cam.height, cam.width, 3):
        raise ValueError(f"target must be ({cam.height}, {cam.width}, 3), got {target.shape}")
    if dssim_weight and min(cam.height, cam.width) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW}px per side for the D-SSIM term")

    prep = prepare(scene, cam, opts)
    sums = forward_sums(scene, cam, prep, opts)
    rendered = np.clip(sums.quotient, 0.0, 1.0)
    value, g_img = loss_with_grad(rendered, target, l1_weight, dssim_weight)

    # Clamp and degenerate-pixel pass-through masks.
    pass_mask = (sums.quotient >= 0.0) & (sums.quotient <= 1.0)
    pass_mask &= ~sums.degenerate[..., None]
    g_img = g_img * pass_mask

    grads = Gradients.zeros(scene)
    model = scene.weight_model
    is_exp = model.variant == EXP
    r_raw = sums.quotient
    c_b = scene.background_color

    # Background weight: every pixel contributes through the quotient.
    grads.background_weight = float(
        np.sum(g_img * (c_b[None, None, :] - r_raw) * sums.t_bg[..., None])
    )

    vis = prep.order
    if vis.size == 0:
        grads.check_finite(scene)
        if stats is not None:
            stats["screen_grad_norm"] = np.zeros(scene.n)
            stats["radius"] = prep.proj.radius.copy()
        return value, grads

    n_vis = vis.size
    acc_color = np.zeros((n_vis, 3))   # dL/d c_i (pre SH chain, clamp handled later)
    acc_du = np.zeros(n_vis)           # dL/d u_i
    acc_dw = np.zeros(n_vis)           # dL/d w_i (dir/lc) or dL/d exponent_i (exp)
    acc_mean = np.zeros((n_vis, 2))    # dL/d mean2d
    acc_q = np.zeros((n_vis, 2, 2))    # dL/d conic (full-matrix adjoint)

    for k, i in enumerate(vis):
        region = splat_region(prep, i, cam, opts)
        if region is None:
            continue
        ys, xs, g = region
        g_sub = g_img[ys, xs]
        inv = sums.inv[ys, xs]
        if is_exp:
            sf = np.exp(sums.shift[ys, xs] - prep.exponents[i]) * inv
        else:
            sf = inv
        diff = prep.colors[i][None, None, :] - r_raw[ys, xs]
        e_prime = np.einsum("hwc,hwc->hw", g_sub, diff)
        gsf = g * sf
        acc_color[k] = np.einsum("hwc,hw->c", g_sub, gsf)
        b_red = float(np.sum(e_prime * gsf))
        if is_exp:
            acc_du[k] = b_red
            acc_dw[k] = -prep.u[i] * b_red     # d loss / d exponent
            common = e_prime * sf * prep.u[i]
        else:
            acc_du[k] = prep.weights[i] * b_red
            acc_dw[k] = prep.u[i] * b_red
            common = e_prime * sf * (prep.u[i] * prep.weights[i])
        cc = common * g
        mx, my = prep.proj.mean2d[i]
        dx = np.arange(xs.start, xs.stop, dtype=np.float64) + 0.5 - mx
        dy = np.arange(ys.start, ys.stop, dtype=np.float64) + 0.5 - my
        qa, qb, qc = prep.proj.conic[i, 0, 0], prep.proj.conic[i, 0, 1], prep.proj.conic[i, 1, 1]
        cc_dx = cc @ dx
        cc_dy = cc.T @ dy
        sum_dx2 = float(np.sum(cc * dx[None, :] ** 2))
        sum_dy2 = float(np.sum(cc * (dy**2)[:, None]))
        sum_dxdy = float(dy @ cc @ dx)
        acc_mean[k, 0] = qa * np.sum(cc_dx) + qb * np.sum(cc_dy)
        acc_mean[k, 1] = qb * np.sum(cc_dx) + qc * np.sum(cc_dy)
        acc_q[k, 0, 0] = -0.5 * sum_dx2
        acc_q[k, 0, 1] = acc_q[k, 1, 0] = -0.5 * sum_dxdy
        acc_q[k, 1, 1] = -0.5 * sum_dy2

    # dL/d c through the color SH (zero where the color clamp engaged),
    # dL/d u through the opacity SH. The exponential weight already sits
    # inside sf; the direct/linear weight is a separate per-splat factor.
    color_scale = prep.u[vis] if is_exp else prep.u[vis] * prep.weights[vis]
    dc = acc_color * color_scale[:, None] * prep.color_active[vis]
    grads.color_sh[vis] += dc[:, :, None] * prep.basis_color[vis][:, None, :]
    grads.opacity_sh[vis] += acc_du[:, None] * prep.basis_opacity[vis]

    # View-direction chain: colors and opacity both depend on the
    # direction toward the focal point, hence on the position.
    grad_basis_c = sh_basis_grad_many(scene.sh_degree_color, prep.dirs[vis])
    grad_basis_o = sh_basis_grad_many(scene.sh_degree_opacity, prep.dirs[vis])
    gcoef_c = np.einsum("vc,vck->vk", dc, scene.color_sh[vis])
    d_dir = np.einsum("vk,vkx->vx", gcoef_c, grad_basis_c)
    d_dir += np.einsum("v,vk,vkx->vx", acc_du, scene.opacity_sh[vis], grad_basis_o)
    rel = cam.center[None, :] - scene.positions[vis]
    norms = np.linalg.norm(rel, axis=1)
    dirs = prep.dirs[vis]
    proj_dir = d_dir - dirs * np.einsum("vx,vx->v", dirs, d_dir)[:, None]
    grads.positions[vis] += -proj_dir / norms[:, None]

    # Weight model chain.
    depths = prep.proj.depth[vis]
    d_depth = np.zeros(n_vis)
    if is_exp:
        sigma, beta = model.sigma, model.beta
        pow_db = depths**beta
        grads.sigma = float(np.sum(acc_dw * pow_db))
        grads.beta = float(np.sum(acc_dw * sigma * pow_db * np.log(depths)))
        d_depth = acc_dw * sigma * beta * depths ** (beta - 1.0)
    elif model.variant == LC:
        active = (1.0 - depths / model.sigma) > 0.0
        hinge = np.maximum(0.0, 1.0 - depths / model.sigma)
        grads.lc_v[vis] += acc_dw * hinge
        v = scene.lc_v[vis]
        grads.sigma = float(np.sum(acc_dw * v * active * depths / model.sigma**2))
        d_depth = acc_dw * v * active * (-1.0 / model.sigma)

    # Conic -> 2D covariance -> (3D covariance, projection Jacobian).
    conic = prep.proj.conic[vis]
    d_cov2d = -conic @ acc_q @ conic
    rot_w = cam.rotation
    x_cam = prep.proj.x_cam[vis]
    jac = np.zeros((n_vis, 2, 3))
    xs_, ys_, zs_ = x_cam[:, 0], x_cam[:, 1], x_cam[:, 2]
    inv_z = 1.0 / zs_
    jac[:, 0, 0] = cam.fx * inv_z
    jac[:, 0, 2] = -cam.fx * xs_ * inv_z**2
    jac[:, 1, 1] = cam.fy * inv_z
    jac[:, 1, 2] = -cam.fy * ys_ * inv_z**2
    m = jac @ rot_w
    sigma3d = cov3d_many(scene.quats[vis], np.exp(scene.log_scales[vis]))
    d_sigma3d = np.swapaxes(m, 1, 2) @ d_cov2d @ m
    d_m = 2.0 * d_cov2d @ m @ sigma3d
    d_jac = d_m @ rot_w.T

    # Jacobian entries depend on the camera-space mean.
    d_xcam = np.zeros((n_vis, 3))
    d_xcam[:, 0] = d_jac[:, 0, 2] * (-cam.fx * inv_z**2)
    d_xcam[:, 1] = d_jac[:, 1, 2] * (-cam.fy * inv_z**2)
    d_xcam[:, 2] = (
        d_jac[:, 0, 0] * (-cam.fx * inv_z**2)
        + d_jac[:, 0, 2] * (2.0 * cam.fx * xs_ * inv_z**3)
        + d_jac[:, 1, 1] * (-cam.fy * inv_z**2)
        + d_jac[:, 1, 2] * (2.0 * cam.fy * ys_ * inv_z**3)
    )
    # Screen mean and depth also live in camera space.
    d_xcam += np.einsum("vij,vi->vj", jac, acc_mean)
    d_xcam[:, 2] += d_depth
    grads.positions[vis] += d_xcam @ rot_w

    # 3D covariance -> quaternion and log-scale.
    scales = np.exp(scene.log_scales[vis])
    rotq = quat_to_rotmat_many(scene.quats[vis])
    mrot = rotq * scales[:, None, :]
    d_mrot = 2.0 * d_sigma3d @ mrot
    d_scales = np.einsum("vij,vij->vj", rotq, d_mrot)
    grads.log_scales[vis] += d_scales * scales
    d_rotq = d_mrot * scales[:, None, :]
    qlen = np.linalg.norm(scene.quats[vis], axis=1, keepdims=True)
    qn = scene.quats[vis] / qlen
    partials = _rotation_partials_many(qn)
    d_qn = np.einsum("vkij,vij->vk", partials, d_rotq)
    radial = np.einsum("vk,vk->v", qn, d_qn)
    grads.quats[vis] += (d_qn - qn * radial[:, None]) / qlen

    grads.check_finite(scene)
    if stats is not None:
        norm = np.zeros(scene.n)
        norm[vis] = np.linalg.norm(acc_mean, axis=1)
        stats["screen_grad_norm"] = norm
        stats["radius"] = prep.proj.radius.copy()
        stats["position_grad"] = grads.positions.copy()
    return value, grads


@dataclass
class FiniteDiffReport:
    """Central-difference audit of the analytic gradients."""

    max_rel_error: float
    worst_slot: str
    errors: np.ndarray = field(repr=False)
    analytic: np.ndarray = field(repr=False)
    numeric: np.ndarray = field(repr=False)
    labels: list = field(repr=False)


def finite_diff_check(
    scene: Scene,
    cam: Camera,
    target: np.ndarray,
    slots=None,
    h: float = FD_STEP,
    opts: RenderOptions | None = None,
    l1_weight: float = L1_WEIGHT,
    dssim_weight: float = DSSIM_WEIGHT,
) -> FiniteDiffReport:
    """Compare analytic gradients to central differences, slot by slot.

    Relative error uses an absolute fallback below 1e-8 magnitude. The
    step is scaled per slot as h * max(1, |theta|).
    """
    from .renderer import render_wsr

    opts = opts or RenderOptions(exact=True)
    _, grads = backward_wsr(scene, cam, target, opts, l1_weight, dssim_weight)
    analytic = grads.flat(scene)

    work = scene.copy()
    view = ParamView(work)
    if slots is None:
        slots = range(view.n_params)
    slots = list(slots)
    if not slots:
        raise ValueError("need at least one slot to check")

    def loss_at() -> float:
        img = render_wsr(work, cam, opts)
        return loss(img, target, l1_weight, dssim_weight)

    base = view.get_flat()
    errors = np.zeros(len(slots))
    numeric = np.zeros(len(slots))
    labels = [view.slot_label(int(s)) for s in slots]
    for j, s in enumerate(slots):
        theta = base[int(s)]
        step = h * max(1.0, abs(theta))
        view.set(int(s), theta + step)
        up = loss_at()
        view.set(int(s), theta - step)
        down = loss_at()
        view.set(int(s), theta)
        fd = (up - down) / (2.0 * step)
        numeric[j] = fd
        a = analytic[int(s)]
        denom = max(abs(a), abs(fd))
        errors[j] = abs(a - fd) if denom < FD_ABS_FLOOR else abs(a - fd) / denom
    worst = int(np.argmax(errors))
    return FiniteDiffReport(
        max_rel_error=float(errors[worst]),
        worst_slot=labels[worst],
        errors=errors,
        analytic=analytic[np.asarray(slots, dtype=int)],
        numeric=numeric,
        labels=labels,
    )

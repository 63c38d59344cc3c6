"""Image quality metrics and the temporal popping analyzer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve2d

PSNR_CAP_DB = 99.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


def _check_pair(a: np.ndarray, b: np.ndarray):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB on [0, 1] images, capped at 99."""
    a, b = _check_pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * np.log10(1.0 / mse))


def _gaussian_kernel(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    half = (size - 1) / 2.0
    x = np.arange(size) - half
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    k = np.outer(g, g)
    return k / k.sum()


_SSIM_KERNEL = _gaussian_kernel()


def _filter_valid(img: np.ndarray) -> np.ndarray:
    return convolve2d(img, _SSIM_KERNEL, mode="valid")


def _ssim_maps(x: np.ndarray, y: np.ndarray):
    mu_x = _filter_valid(x)
    mu_y = _filter_valid(y)
    mxx = _filter_valid(x * x)
    myy = _filter_valid(y * y)
    mxy = _filter_valid(x * y)
    var_x = mxx - mu_x**2
    var_y = myy - mu_y**2
    cov = mxy - mu_x * mu_y
    a1 = 2.0 * mu_x * mu_y + SSIM_C1
    a2 = 2.0 * cov + SSIM_C2
    b1 = mu_x**2 + mu_y**2 + SSIM_C1
    b2 = var_x + var_y + SSIM_C2
    return mu_x, mu_y, a1, a2, b1, b2


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Structural similarity with the standard 11x11 Gaussian window.

    Windows are valid-mode (no padding); per-channel maps are averaged.
    Images must be at least 11 pixels on each side.
    """
    a, b = _check_pair(a, b)
    if min(a.shape[0], a.shape[1]) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW}px per side, got {a.shape}")
    total = 0.0
    for c in range(a.shape[2]):
        _, _, a1, a2, b1, b2 = _ssim_maps(a[:, :, c], b[:, :, c])
        total += float(np.mean(a1 * a2 / (b1 * b2)))
    return total / a.shape[2]


def ssim_with_grad(a: np.ndarray, b: np.ndarray):
    """SSIM value plus its analytic gradient with respect to image `a`.

    The adjoint of a valid-mode correlation is a full-mode convolution
    with the same (symmetric) kernel, which carries each window's
    contribution back onto the pixels it saw.
    """
    a, b = _check_pair(a, b)
    if min(a.shape[0], a.shape[1]) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW}px per side, got {a.shape}")
    channels = a.shape[2]
    grad = np.zeros_like(a)
    total = 0.0
    for c in range(channels):
        x = a[:, :, c]
        y = b[:, :, c]
        mu_x, mu_y, a1, a2, b1, b2 = _ssim_maps(x, y)
        denom = b1 * b2
        smap = a1 * a2 / denom
        total += float(np.mean(smap))
        q = 1.0 / (smap.size * channels)
        d_a1 = q * a2 / denom
        d_a2 = q * a1 / denom
        d_b1 = -q * smap / b1
        d_b2 = -q * smap / b2
        # Adjoints of the window statistics (holding the raw moments fixed).
        g_mu = 2.0 * mu_y * d_a1 + 2.0 * mu_x * d_b1 - 2.0 * mu_y * d_a2 - 2.0 * mu_x * d_b2
        g_mxx = d_b2
        g_mxy = 2.0 * d_a2
        grad[:, :, c] = (
            convolve2d(g_mu, _SSIM_KERNEL, mode="full")
            + 2.0 * x * convolve2d(g_mxx, _SSIM_KERNEL, mode="full")
            + y * convolve2d(g_mxy, _SSIM_KERNEL, mode="full")
        )
    return total / channels, grad


@dataclass
class PoppingReport:
    """Per-frame temporal deltas along a camera path for one renderer."""

    renderer: str
    deltas: np.ndarray = field(repr=False)  # (frames - 1,) max abs pixel delta
    max_delta: float = 0.0
    max_index: int = 0

    @property
    def median_delta(self) -> float:
        return float(np.median(self.deltas)) if self.deltas.size else 0.0

    def to_dict(self) -> dict:
        return {
            "renderer": self.renderer,
            "deltas": [float(d) for d in self.deltas],
            "max_delta": self.max_delta,
            "max_index": self.max_index,
            "median_delta": self.median_delta,
        }


def popping_metric(scene, camera_path, renderer: str = "wsr", opts=None) -> PoppingReport:
    """Max per-pixel frame-to-frame change while sweeping a camera path.

    A depth-order swap shows up as a spike in the sorted renderer's
    series; the weighted-sum renderer's series stays at the smooth-motion
    level.
    """
    from .renderer import render_sorted_reference, render_wsr

    if len(camera_path) < 2:
        raise ValueError("camera path needs at least two cameras")
    if renderer not in ("wsr", "sorted"):
        raise ValueError(f"renderer must be 'wsr' or 'sorted', got {renderer!r}")
    render = render_wsr if renderer == "wsr" else render_sorted_reference
    prev = None
    deltas = []
    for cam in camera_path:
        frame = render(scene, cam, opts)
        if prev is not None:
            deltas.append(float(np.max(np.abs(frame - prev))))
        prev = frame
    deltas = np.asarray(deltas)
    idx = int(np.argmax(deltas))
    return PoppingReport(
        renderer=renderer, deltas=deltas, max_delta=float(deltas[idx]), max_index=idx
    )

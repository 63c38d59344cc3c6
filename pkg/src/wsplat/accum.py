"""Numerically stable weighted-sum accumulation.

Quotients of exponentially weighted sums are invariant to a constant
shift of every exponent, so both running sums are kept in a frame
normalized by the smallest exponent seen so far (largest weight). Each
accumulated term with exponent d and coefficients (a, b) contributes
a*e^{-d} to the numerator and b*e^{-d} to the denominator; the stored
sums equal e^{mu} times those raw sums, which keeps every intermediate
factor in (0, 1] regardless of how extreme the exponents are.
"""

from __future__ import annotations

import numpy as np


class StableAccumulator:
    """Streaming min-exponent-normalized sums for one pixel.

    `num` and `den` share one normalization exponent `mu` (the running
    minimum), so the final quotient needs no denormalization. Not thread
    safe: each accumulator has a single owner.
    """

    __slots__ = ("mu", "num", "den", "count")

    def __init__(self) -> None:
        self.mu = np.inf
        self.num = np.zeros(3, dtype=np.float64)
        self.den = 0.0
        self.count = 0

    def add(self, exponent: float, rgb: np.ndarray, alpha: float) -> "StableAccumulator":
        """Accumulate one term: alpha * rgb * e^{-exponent} / alpha * e^{-exponent}.

        Rescales the stored sums when the new exponent becomes the
        minimum; otherwise scales the incoming term down. Raises
        ValueError for a non-finite exponent.
        """
        if not np.isfinite(exponent):
            raise ValueError(f"exponent must be finite, got {exponent}")
        rgb = np.asarray(rgb, dtype=np.float64)
        a = alpha * rgb
        if exponent < self.mu:
            scale = np.exp(exponent - self.mu)  # exp(-inf) = 0 on the first add
            self.num = a + scale * self.num
            self.den = alpha + scale * self.den
            self.mu = exponent
        else:
            scale = np.exp(self.mu - exponent)
            self.num = self.num + scale * a
            self.den = self.den + scale * alpha
        self.count += 1
        return self

    def quotient(self, background_rgb: np.ndarray, background_w: float) -> np.ndarray:
        """Weighted-average color including a background term of weight w_B.

        The quotient is evaluated in the normalized frame: the background
        weight (which lives at exponent zero) is scaled up to w_B * e^{mu}.
        If that overflows, the background outweighs every stored term by
        construction and its color is returned; with no background term
        the stored sums divide directly (the frame cancels). A zero total
        weight returns the background color.
        """
        c_b = np.asarray(background_rgb, dtype=np.float64)
        if self.count == 0:
            return c_b.copy()
        if background_w == 0.0:
            wb = 0.0
        else:
            wb = background_w * np.exp(self.mu)
            if not np.isfinite(wb):
                return c_b.copy()
        denom = wb + self.den
        if denom == 0.0:
            return c_b.copy()
        return (c_b * wb + self.num) / denom


class ExpPixelBuffer:
    """Image-wide vectorization of StableAccumulator for the render path.

    Exponents are per-splat constants, so a splat updates a whole pixel
    rectangle with one scalar exponent. The branchless form rescales both
    the old sums and the new term by factors that never exceed one.
    """

    def __init__(self, height: int, width: int, dtype=np.float64) -> None:
        self.dtype = np.dtype(dtype)
        self.mu = np.full((height, width), np.inf, dtype=self.dtype)
        self.num = np.zeros((height, width, 3), dtype=self.dtype)
        self.den = np.zeros((height, width), dtype=self.dtype)

    def add_region(self, ys: slice, xs: slice, exponent: float, a: np.ndarray, b: np.ndarray) -> None:
        """Add per-pixel terms (a, b) over a rectangle at one shared exponent."""
        d = self.dtype.type(exponent)
        mu = self.mu[ys, xs]
        new_mu = np.minimum(mu, d)
        s_old = np.exp(new_mu - mu)  # 0 where the pixel was empty (mu = inf)
        s_new = np.exp(new_mu - d)
        num = self.num[ys, xs]
        num *= s_old[..., None]
        num += a * s_new[..., None]
        den = self.den[ys, xs]
        den *= s_old
        den += b * s_new
        self.mu[ys, xs] = new_mu

    def quotient(self, background_rgb: np.ndarray, background_w: float):
        """Per-pixel quotient against the background term.

        Returns (image, degenerate_count) where degenerate pixels (total
        weight <= 0) were replaced by the background color. With a
        background the quotient is evaluated with the frame split so that
        neither side can overflow; without one the stored sums divide
        directly (the normalization cancels).
        """
        c_b = np.asarray(background_rgb, dtype=self.dtype)
        empty = np.isinf(self.mu)
        if background_w == 0.0:
            numer = self.num
            denom = self.den.copy()
            denom[empty] = 0.0
        else:
            mu = np.where(empty, 0.0, self.mu)
            wb_eff = background_w * np.exp(np.minimum(mu, 0.0))
            scale = np.exp(-np.maximum(mu, 0.0))
            scale[empty] = 0.0
            numer = c_b[None, None, :] * wb_eff[..., None] + scale[..., None] * self.num
            denom = wb_eff + scale * self.den
        degenerate = denom <= 0.0
        safe = np.where(degenerate, 1.0, denom)
        img = numer / safe[..., None]
        img[degenerate] = c_b
        return img, int(np.count_nonzero(degenerate))


class SumPixelBuffer:
    """Compensated plain summation for weight models without an exponent."""

    def __init__(self, height: int, width: int, dtype=np.float64) -> None:
        self.dtype = np.dtype(dtype)
        self.num = np.zeros((height, width, 3), dtype=self.dtype)
        self.den = np.zeros((height, width), dtype=self.dtype)
        self._cnum = np.zeros_like(self.num)
        self._cden = np.zeros_like(self.den)

    def add_region(self, ys: slice, xs: slice, a: np.ndarray, b: np.ndarray) -> None:
        for total, comp, term in (
            (self.num[ys, xs], self._cnum[ys, xs], a.astype(self.dtype, copy=False)),
            (self.den[ys, xs], self._cden[ys, xs], b.astype(self.dtype, copy=False)),
        ):
            y = term - comp
            t = total + y
            comp[...] = (t - total) - y
            total[...] = t

    def quotient(self, background_rgb: np.ndarray, background_w: float):
        c_b = np.asarray(background_rgb, dtype=self.dtype)
        numer = c_b[None, None, :] * background_w + self.num
        denom = background_w + self.den
        degenerate = denom <= 0.0
        safe = np.where(degenerate, 1.0, denom)
        img = numer / safe[..., None]
        img[degenerate] = c_b
        return img, int(np.count_nonzero(degenerate))

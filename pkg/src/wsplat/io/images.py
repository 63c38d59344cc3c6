"""8-bit RGB image IO: PNG (via Pillow) and raw PPM (P6)."""

from __future__ import annotations

import numpy as np
from PIL import Image as PILImage


def write_image(path: str, img: np.ndarray) -> None:
    """Write a [0, 1] float image as 8-bit RGB PNG or PPM.

    Quantization is round-half-away (v*255 + 0.5 floored), so exact
    black and white round-trip exactly.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got {img.shape}")
    data = np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    lower = path.lower()
    if lower.endswith(".png"):
        PILImage.fromarray(data, mode="RGB").save(path, format="PNG")
    elif lower.endswith(".ppm"):
        with open(path, "wb") as fh:
            fh.write(f"P6\n{data.shape[1]} {data.shape[0]}\n255\n".encode("ascii"))
            fh.write(data.tobytes())
    else:
        raise ValueError(f"unsupported image format for {path!r} (use .png or .ppm)")


def _read_ppm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"truncated PPM header in {path!r}")
        fields.append(data[start:pos])
    if fields[0] != b"P6":
        raise ValueError(f"not a binary PPM (P6) file: {path!r}")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError(f"only maxval 255 PPM supported, got {maxval}")
    pos += 1  # single whitespace after maxval
    body = data[pos : pos + width * height * 3]
    if len(body) < width * height * 3:
        raise ValueError(f"truncated PPM body in {path!r}")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width, 3)


def read_image(path: str) -> np.ndarray:
    """Read an 8-bit RGB PNG or PPM into a [0, 1] float image."""
    lower = path.lower()
    if lower.endswith(".png"):
        with PILImage.open(path) as im:
            data = np.asarray(im.convert("RGB"), dtype=np.uint8)
    elif lower.endswith(".ppm"):
        data = _read_ppm(path)
    else:
        raise ValueError(f"unsupported image format for {path!r} (use .png or .ppm)")
    return data.astype(np.float64) / 255.0

"""Parametric distortions: blur, compression proxy, resize, noise."""

import numpy as np

from ..errors import InvalidParameter
from ..imagecore import ImageF
from ..transforms import gaussian_blur, jpeg_proxy, resize_bilinear
from .specs import Blur, JpegProxy, Noise, Resize


def blur_attack(img, sigma):
    if sigma < 0:
        raise InvalidParameter("sigma must be >= 0")
    return gaussian_blur(img, sigma)


def jpeg_attack(img, quality):
    return jpeg_proxy(img, quality)


def resize_attack(img, factor):
    """Downscale by `factor`, then bilinear-upscale back to the original."""
    if not 0.0 < factor <= 1.0:
        raise InvalidParameter("factor must be in (0, 1]")
    h, w = img.data.shape[:2]
    small_h = max(1, round(h * factor))
    small_w = max(1, round(w * factor))
    small = resize_bilinear(img, small_h, small_w)
    return resize_bilinear(small, h, w)


def noise_attack(img, sigma, rng):
    if sigma < 0:
        raise InvalidParameter("sigma must be >= 0")
    if sigma == 0:
        return ImageF.from_array(img.data.copy())
    h, w, c = img.data.shape
    noise = rng.normal(h * w * c).reshape(h, w, c) * sigma
    return ImageF.from_array(img.data + noise)


def apply_distortion(img, spec, rng):
    """Dispatch one distortion variant; deterministic given the stream."""
    if isinstance(spec, Blur):
        return blur_attack(img, spec.sigma)
    if isinstance(spec, JpegProxy):
        return jpeg_attack(img, spec.quality)
    if isinstance(spec, Resize):
        return resize_attack(img, spec.factor)
    if isinstance(spec, Noise):
        return noise_attack(img, spec.sigma, rng)
    raise InvalidParameter(f"not a distortion spec: {spec!r}")

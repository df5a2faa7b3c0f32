"""Regeneration proxies: noise-then-denoise cycles.

Stand-ins for diffusion/VAE re-generation: each step adds Gaussian noise
and then denoises by soft-thresholding 8x8 block-DCT coefficients.  The
threshold scales with the injected noise, so higher strength both
perturbs more and smooths more, the monotone knob the rinse ladder
needs.
"""

import numpy as np

from ..errors import InvalidParameter
from ..imagecore import ImageF
from ..transforms import _block_dct, _block_idct


def _soft_threshold_plane(plane, threshold):
    h, w = plane.shape
    ph, pw = (-h) % 8, (-w) % 8
    padded = (
        np.pad(plane, ((0, ph), (0, pw)), mode="symmetric")
        if (ph or pw)
        else plane
    )
    coeffs = _block_dct(padded)
    # Shrinking the DC terms would darken every block; keep them.
    dc = coeffs[:, 0, :, 0].copy()
    coeffs = np.sign(coeffs) * np.maximum(np.abs(coeffs) - threshold, 0.0)
    coeffs[:, 0, :, 0] = dc
    return _block_idct(coeffs)[:h, :w]


def regen_proxy(img, strength, steps, rng):
    """`steps` rounds of add-noise / DCT-soft-threshold, per channel."""
    if strength < 0:
        raise InvalidParameter("strength must be >= 0")
    if steps < 1:
        raise InvalidParameter("steps must be >= 1")
    h, w, c = img.data.shape
    data = img.data.copy()
    for _ in range(steps):
        noise = rng.normal(h * w * c).reshape(h, w, c) * strength
        noisy = data + noise
        for ch in range(c):
            data[:, :, ch] = _soft_threshold_plane(noisy[:, :, ch], strength / 2.0)
        # Keep runaway values bounded without committing to [0,1] yet.
        data = np.clip(data, -0.1, 1.1)
    return ImageF.from_array(data)


def rinse(img, cycles, strength, steps, rng):
    """Sequential regen_proxy cycles sharing one stream."""
    if cycles < 1:
        raise InvalidParameter("cycles must be >= 1")
    out = img
    for _ in range(cycles):
        out = regen_proxy(out, strength, steps, rng)
    return out

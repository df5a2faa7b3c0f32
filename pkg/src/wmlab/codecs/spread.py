"""Spread-spectrum watermark: signed full-frame patterns on luminance."""

import numpy as np

from ..errors import DimensionMismatch
from ..imagecore import ImageF, add_luminance, luminance
from ..rng import RngStream
from ..transforms import blur_plane
from .messages import MESSAGE_BITS, BitMessage
from .outcomes import BitOutcome

# Blur scale whose residual isolates the pattern band at extraction.
_EXTRACT_SIGMA = 2.0


def spread_patterns(key):
    """32 seeded +/-1 patterns, shape (32, height, width).

    Random sign patterns of this size are near-orthogonal: normalized
    cross-correlations concentrate around 1/sqrt(H*W).
    """
    stream = RngStream(key.seed).child("spread-patterns")
    u = stream.uniform(MESSAGE_BITS * key.height * key.width)
    return np.where(u < 0.5, -1.0, 1.0).reshape(MESSAGE_BITS, key.height, key.width)


def _check_size(img, key):
    if img.height != key.height or img.width != key.width:
        raise DimensionMismatch(
            f"image {img.height}x{img.width} does not match key {key.height}x{key.width}"
        )


def spread_embed(img, key, message):
    """Add the signed pattern sum, scaled by alpha, to the luminance."""
    _check_size(img, key)
    if key.alpha == 0.0:
        return ImageF(img.data.copy())
    signs = np.array([1.0 if b else -1.0 for b in message.bits])
    offset = key.alpha * np.tensordot(signs, spread_patterns(key), axes=1)
    return add_luminance(img, offset)


def spread_extract(img, key):
    """Correlate the blur residual against each pattern; signs are bits."""
    _check_size(img, key)
    y = luminance(img)
    resid = y - blur_plane(y, _EXTRACT_SIGMA)
    corr = np.tensordot(spread_patterns(key), resid, axes=([1, 2], [0, 1]))
    bits = tuple(bool(c > 0) for c in corr)
    return BitOutcome(extracted=BitMessage(bits), bit_accuracy=None)

"""Coefficient-pair watermark in the DCT of the Haar LL band.

Each payload bit is written as the ordering of one seeded coefficient pair
in the mid-band of the LL plane's DCT: the pair difference is pushed to at
least +delta for a 1 and at most -delta for a 0 by moving both
coefficients symmetrically about their mean.  Extraction reads back the
difference signs, so it needs no reference image.
"""

import numpy as np

from ..errors import ImageTooSmall
from ..imagecore import ImageF, luminance
from ..rng import RngStream
from ..transforms import dct2, haar_dwt2, haar_idwt2, idct2
from .keys import MIDBAND_HIGH, MIDBAND_LOW
from .messages import MESSAGE_BITS, BitMessage
from .outcomes import BitOutcome

_LR, _LG, _LB = 0.299, 0.587, 0.114


def midband_pairs(key):
    """The key's 32 coefficient pairs, 64 distinct mid-band coordinates."""
    coords = [
        (i, s - i)
        for s in range(MIDBAND_LOW, MIDBAND_HIGH + 1)
        for i in range(s + 1)
    ]
    perm = RngStream(key.seed).child("dwtdct-pairs").permutation(len(coords))
    picked = [coords[int(p)] for p in perm[: 2 * MESSAGE_BITS]]
    return [(picked[2 * i], picked[2 * i + 1]) for i in range(MESSAGE_BITS)]


def _check_size(img):
    if img.height < 64 or img.width < 64:
        raise ImageTooSmall("need at least 64x64 for the mid-band")


def _rebuild_rgb(img, y_new):
    """Replace the luma plane, keeping opponent chroma unchanged."""
    y = luminance(img)
    r = y_new + (img.data[:, :, 0] - y)
    b = y_new + (img.data[:, :, 2] - y)
    g = (y_new - _LR * r - _LB * b) / _LG
    return ImageF(np.stack([r, g, b], axis=2))


def dwtdct_embed(img, key, message):
    """Write the message into the pair orderings; delta 0 is a no-op."""
    _check_size(img)
    if key.delta == 0.0:
        return ImageF(img.data.copy())
    pyr = haar_dwt2(luminance(img))
    coeffs = dct2(pyr.ll)
    half = key.delta / 2.0
    for ((i1, j1), (i2, j2)), bit in zip(midband_pairs(key), message.bits):
        c1, c2 = coeffs[i1, j1], coeffs[i2, j2]
        mean = (c1 + c2) / 2.0
        if bit and c1 - c2 < key.delta:
            coeffs[i1, j1], coeffs[i2, j2] = mean + half, mean - half
        elif not bit and c1 - c2 > -key.delta:
            coeffs[i1, j1], coeffs[i2, j2] = mean - half, mean + half
    from dataclasses import replace

    y_new = haar_idwt2(replace(pyr, ll=idct2(coeffs)))
    return _rebuild_rgb(img, y_new)


def dwtdct_extract(img, key):
    """Read pair-difference signs back into a message."""
    _check_size(img)
    coeffs = dct2(haar_dwt2(luminance(img)).ll)
    bits = tuple(
        bool(coeffs[i1, j1] - coeffs[i2, j2] > 0)
        for (i1, j1), (i2, j2) in midband_pairs(key)
    )
    return BitOutcome(extracted=BitMessage(bits), bit_accuracy=None)

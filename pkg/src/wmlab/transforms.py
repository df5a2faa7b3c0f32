"""Frequency transforms and resampling primitives.

Conventions: fft2 is the unnormalized forward DFT (DC bin equals the pixel
sum) and ifft2 carries the 1/(H*W) factor; dct2 is the orthonormal type-II
pair; the Haar step is one orthonormal level.  All operate on 2-D float
planes; image-wide helpers apply them per channel.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft
from scipy import ndimage

from .errors import DimensionMismatch, InvalidParameter
from .imagecore import ImageF, luminance

# Annex-K baseline luminance quantization table.
_QTABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.float64,
)

_LUMA_R, _LUMA_G, _LUMA_B = 0.299, 0.587, 0.114


def fft2(plane):
    """Unnormalized forward 2-D DFT of a real plane."""
    return np.fft.fft2(np.asarray(plane, dtype=np.float64))


def ifft2(spectrum):
    """Inverse 2-D DFT (1/(H*W) normalization), real part.

    Intended for spectra of real planes (Hermitian up to rounding); the
    vanishing imaginary residual is dropped.
    """
    return np.fft.ifft2(spectrum).real


def dct2(plane):
    """Orthonormal type-II 2-D DCT."""
    return scipy.fft.dctn(np.asarray(plane, dtype=np.float64), norm="ortho")


def idct2(coeffs):
    """Inverse of dct2."""
    return scipy.fft.idctn(np.asarray(coeffs, dtype=np.float64), norm="ortho")


# ---------------------------------------------------------------------------
# One-level orthonormal Haar transform.


@dataclass(frozen=True)
class DwtPyramid:
    """Subbands of one Haar level plus the pre-padding plane size."""

    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray
    height: int
    width: int


def haar_dwt2(plane):
    """One orthonormal Haar level; odd sizes are edge-padded first."""
    x = np.asarray(plane, dtype=np.float64)
    h, w = x.shape
    ph, pw = h % 2, w % 2
    if ph or pw:
        x = np.pad(x, ((0, ph), (0, pw)), mode="symmetric")
    a = x[0::2, 0::2]
    b = x[0::2, 1::2]
    c = x[1::2, 0::2]
    d = x[1::2, 1::2]
    return DwtPyramid(
        ll=(a + b + c + d) / 2.0,
        lh=(a - b + c - d) / 2.0,
        hl=(a + b - c - d) / 2.0,
        hh=(a - b - c + d) / 2.0,
        height=h,
        width=w,
    )


def haar_idwt2(pyr):
    """Invert haar_dwt2, cropping any padding row/column."""
    ll, lh, hl, hh = pyr.ll, pyr.lh, pyr.hl, pyr.hh
    if not (ll.shape == lh.shape == hl.shape == hh.shape):
        raise DimensionMismatch("subband shapes differ")
    sh, sw = ll.shape
    out = np.empty((2 * sh, 2 * sw))
    out[0::2, 0::2] = (ll + lh + hl + hh) / 2.0
    out[0::2, 1::2] = (ll - lh + hl - hh) / 2.0
    out[1::2, 0::2] = (ll + lh - hl - hh) / 2.0
    out[1::2, 1::2] = (ll - lh - hl + hh) / 2.0
    return out[: pyr.height, : pyr.width]


# ---------------------------------------------------------------------------
# Gaussian blur with an explicit truncated kernel.


def gaussian_kernel1d(sigma):
    """Normalized 1-D Gaussian taps with radius ceil(3*sigma)."""
    if sigma < 0:
        raise InvalidParameter("sigma must be >= 0")
    if sigma == 0:
        return np.array([1.0])
    radius = math.ceil(3.0 * sigma)
    j = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(j * j) / (2.0 * sigma * sigma))
    return k / k.sum()


def blur_plane(plane, sigma):
    """Separable Gaussian blur with half-sample symmetric borders.

    Symmetric reflection diagonalizes the (symmetric) kernel in the DCT-II
    basis with unit DC gain, so the plane mean is preserved exactly.
    """
    k = gaussian_kernel1d(sigma)
    if k.size == 1:
        return np.array(plane, dtype=np.float64)
    x = ndimage.correlate1d(np.asarray(plane, dtype=np.float64), k, axis=0, mode="reflect")
    return ndimage.correlate1d(x, k, axis=1, mode="reflect")


def gaussian_blur(img, sigma):
    """Per-channel Gaussian blur of an ImageF."""
    if sigma == 0:
        return ImageF(img.data.copy())
    out = np.empty_like(img.data)
    for ch in range(3):
        out[:, :, ch] = blur_plane(img.data[:, :, ch], sigma)
    return ImageF(out)


def gaussian_transfer1d(sigma, n):
    """DFT gain of the blur kernel at the n bin frequencies.

    Real-valued because the kernel is even.  Index k corresponds to the
    standard FFT ordering of an n-point axis.
    """
    kern = gaussian_kernel1d(sigma)
    radius = (kern.size - 1) // 2
    freqs = np.fft.fftfreq(n)
    gains = np.full(n, kern[radius])
    for j in range(1, radius + 1):
        gains = gains + 2.0 * kern[radius + j] * np.cos(2.0 * np.pi * freqs * j)
    return gains


# ---------------------------------------------------------------------------
# Bilinear resize with half-pixel centers.


def resize_bilinear(img, width, height):
    """Resize an ImageF; same-size calls return a bit-identical copy."""
    if width < 1 or height < 1:
        raise InvalidParameter("target size must be >= 1")
    h, w = img.height, img.width
    if (width, height) == (w, h):
        return ImageF(img.data.copy())
    src_x = (np.arange(width) + 0.5) * (w / width) - 0.5
    src_y = (np.arange(height) + 0.5) * (h / height) - 0.5
    x0 = np.clip(np.floor(src_x).astype(np.int64), 0, w - 1)
    y0 = np.clip(np.floor(src_y).astype(np.int64), 0, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = np.clip(src_x - x0, 0.0, 1.0)[None, :, None]
    fy = np.clip(src_y - y0, 0.0, 1.0)[:, None, None]
    d = img.data
    top = d[y0[:, None], x0[None, :], :] * (1 - fx) + d[y0[:, None], x1[None, :], :] * fx
    bot = d[y1[:, None], x0[None, :], :] * (1 - fx) + d[y1[:, None], x1[None, :], :] * fx
    return ImageF(top * (1 - fy) + bot * fy)


# ---------------------------------------------------------------------------
# JPEG-style luminance quantization proxy.


def jpeg_quant_table(quality):
    """Annex-K luminance table scaled by the 5000/q : 200-2q rule."""
    if not 1 <= quality <= 100:
        raise InvalidParameter("quality must be in [1, 100]")
    scale = 5000.0 / quality if quality < 50 else 200.0 - 2.0 * quality
    return np.clip(np.floor(_QTABLE * scale / 100.0 + 0.5), 1.0, 255.0)


def _block_dct(plane):
    h, w = plane.shape
    blocks = plane.reshape(h // 8, 8, w // 8, 8)
    return scipy.fft.dctn(blocks, axes=(1, 3), norm="ortho")


def _block_idct(coeffs):
    blocks = scipy.fft.idctn(coeffs, axes=(1, 3), norm="ortho")
    h8, _, w8, _ = blocks.shape
    return blocks.reshape(h8 * 8, w8 * 8)


def jpeg_proxy(img, quality):
    """Quantize the luma channel in 8x8 DCT blocks; chroma passes through.

    The luma plane is scaled to 0..255 and level-shifted so the Annex-K
    table applies at its native scale; opponent chroma (R-Y, B-Y) is
    reattached unchanged.
    """
    table = jpeg_quant_table(quality)
    y = luminance(img)
    h, w = y.shape
    ph, pw = (-h) % 8, (-w) % 8
    ypad = np.pad(y, ((0, ph), (0, pw)), mode="symmetric") if (ph or pw) else y
    coeffs = _block_dct(ypad * 255.0 - 128.0)
    quant = np.round(coeffs / table[None, :, None, :]) * table[None, :, None, :]
    y_new = (_block_idct(quant) + 128.0) / 255.0
    y_new = y_new[:h, :w]
    r, g, b = img.data[:, :, 0], img.data[:, :, 1], img.data[:, :, 2]
    cr, cb = r - y, b - y
    r_new = y_new + cr
    b_new = y_new + cb
    g_new = (y_new - _LUMA_R * r_new - _LUMA_B * b_new) / _LUMA_G
    return ImageF(np.stack([r_new, g_new, b_new], axis=2))

"""Spectral-residual saliency segmentation.

The rare part of a log-amplitude spectrum marks what pops out of a
scene; squaring the residual's inverse transform gives a saliency map,
and Otsu splits it into object candidates.
"""

import numpy as np
from scipy.ndimage import uniform_filter

from ..errors import ImageTooSmall
from ..imagecore import connected_components, dilate_mask, luminance
from ..transforms import blur_plane, fft2, ifft2

MIN_SIZE = 64
_SALIENCY_BLUR = 2.5


def otsu_threshold(values):
    """Otsu's threshold over a 256-bin histogram; None when degenerate."""
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi <= lo:
        return None
    hist, edges = np.histogram(values, bins=256, range=(lo, hi))
    total = values.size
    bin_mid = (edges[:-1] + edges[1:]) / 2.0
    weight_bg = np.cumsum(hist)
    weight_fg = total - weight_bg
    cum_sum = np.cumsum(hist * bin_mid)
    mean_bg = np.divide(cum_sum, weight_bg, out=np.zeros(256), where=weight_bg > 0)
    mean_fg = np.divide(
        cum_sum[-1] - cum_sum, weight_fg, out=np.zeros(256), where=weight_fg > 0
    )
    between = weight_bg * weight_fg * (mean_bg - mean_fg) ** 2
    if not np.any(between > 0):
        return None
    return float(bin_mid[int(np.argmax(between))])


def saliency_map(img):
    """Spectral-residual saliency of the luminance plane."""
    y = luminance(img)
    spectrum = fft2(y)
    amp = np.abs(spectrum)
    log_amp = np.log(amp + 1e-12)
    residual = log_amp - uniform_filter(log_amp, size=3, mode="wrap")
    phase = np.where(amp > 0, spectrum / np.maximum(amp, 1e-300), 0.0)
    sal = np.abs(ifft2(np.exp(residual) * phase)) ** 2
    return blur_plane(sal, _SALIENCY_BLUR)


def builtin_segment(img):
    """Ranked object-mask candidates, largest first, each dilated once."""
    h, w = img.data.shape[:2]
    if min(h, w) < MIN_SIZE:
        raise ImageTooSmall(f"segmentation needs at least {MIN_SIZE} pixels a side")
    sal = saliency_map(img)
    threshold = otsu_threshold(sal)
    if threshold is None:
        return []
    fg = sal > threshold
    if not fg.any():
        return []
    grown = [dilate_mask(c) for c in connected_components(fg)]
    # Dilation adds perimeter-proportional area, which can reorder the
    # ranking; re-sort (stably) so the output really is largest-first.
    grown.sort(key=lambda m: -int(m.sum()))
    return grown

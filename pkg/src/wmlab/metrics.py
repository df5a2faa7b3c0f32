"""Image-quality and removal-success metrics.

MSE and PSNR treat the image as a unit-range signal.  SSIM follows the
standard Wang configuration (11x11 Gaussian window, sigma 1.5, C1 =
0.01^2, C2 = 0.03^2) computed on luminance over valid window positions
only.  The masked variant multiplies both images by the mask and runs
the very same SSIM path on the products, so windows straddling the mask
border see zeros in both operands symmetrically.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DimensionMismatch, EmptyInput, EmptyMask, ImageTooSmall
from .imagecore import ImageF, luminance
from .transforms import gaussian_kernel1d

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
_C1 = 0.01**2
_C2 = 0.03**2

PSNR_IDENTICAL = math.inf


@dataclass(frozen=True)
class QualityReport:
    """Full-frame quality numbers for one before/after pair."""

    mse: float
    psnr: float
    ssim: float
    mssim: float | None = None


@dataclass(frozen=True)
class Aggregate:
    mean: float
    std: float
    count: int
    ci95_halfwidth: float


def _check_dims(a, b):
    if a.data.shape != b.data.shape:
        raise DimensionMismatch(
            f"image shapes differ: {a.data.shape} vs {b.data.shape}"
        )


def mse(a, b):
    """Mean squared error over all pixels and channels."""
    _check_dims(a, b)
    diff = a.data - b.data
    return float(np.mean(diff * diff))


def psnr(a, b):
    """Peak signal-to-noise ratio in dB against a unit peak.

    Identical images have no noise to measure; they map to the +inf
    sentinel rather than raising.
    """
    err = mse(a, b)
    if err == 0.0:
        return PSNR_IDENTICAL
    return -10.0 * math.log10(err)


def _window_mean(plane, kernel):
    full = correlate1d(plane, kernel, axis=0, mode="constant")
    full = correlate1d(full, kernel, axis=1, mode="constant")
    m = SSIM_WINDOW // 2
    # Constant-padded borders are junk; cropping the margin leaves
    # exactly the windows that fit entirely inside the plane.
    return full[m:-m, m:-m]


def _ssim_planes(x, y):
    if min(x.shape) < SSIM_WINDOW:
        raise ImageTooSmall(f"ssim needs both sides >= {SSIM_WINDOW}")
    # radius ceil(3 * 1.5) = 5, i.e. exactly the 11-tap window.
    k = gaussian_kernel1d(SSIM_SIGMA)
    mu_x = _window_mean(x, k)
    mu_y = _window_mean(y, k)
    var_x = _window_mean(x * x, k) - mu_x * mu_x
    var_y = _window_mean(y * y, k) - mu_y * mu_y
    cov = _window_mean(x * y, k) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + _C1) * (2.0 * cov + _C2)
    den = (mu_x * mu_x + mu_y * mu_y + _C1) * (var_x + var_y + _C2)
    return float(np.mean(num / den))


def ssim(a, b):
    """Structural similarity between the two images' luminance planes."""
    _check_dims(a, b)
    return _ssim_planes(luminance(a), luminance(b))


def mssim(a, b, mask):
    """SSIM between mask-multiplied images (true = kept, false = zeroed).

    Quantifies how well the preserved region survived: wherever the two
    images agree on the mask the products are identical and the score is
    exactly 1, no matter what happened outside.
    """
    _check_dims(a, b)
    if mask.shape != a.data.shape[:2]:
        raise DimensionMismatch(
            f"mask shape {mask.shape} does not match image {a.data.shape[:2]}"
        )
    if not mask.any():
        raise EmptyMask("mssim needs at least one true pixel")
    m = mask.astype(np.float64)
    return _ssim_planes(luminance(a) * m, luminance(b) * m)


def quality_report(before, after, mask=None):
    """Bundle mse/psnr/ssim (and mssim when a mask is given)."""
    return QualityReport(
        mse=mse(before, after),
        psnr=psnr(before, after),
        ssim=ssim(before, after),
        mssim=None if mask is None else mssim(before, after, mask),
    )


def masked_quality_report(before, after, mask):
    """mse/psnr/ssim of the mask-multiplied images.

    The ssim field of the result equals mssim(before, after, mask); the
    mse/psnr fields are its Eq.-style analogs for the other two metrics.
    """
    _check_dims(before, after)
    if not mask.any():
        raise EmptyMask("masked metrics need at least one true pixel")
    m = mask.astype(np.float64)[:, :, None]
    ma = ImageF.from_array(before.data * m)
    mb = ImageF.from_array(after.data * m)
    return QualityReport(
        mse=mse(ma, mb),
        psnr=psnr(ma, mb),
        ssim=mssim(before, after, mask),
    )


def aggregate(values):
    """Sample mean / std (n-1) / count / normal 95% CI half-width."""
    vals = [float(v) for v in values]
    if not vals:
        raise EmptyInput("aggregate needs at least one value")
    n = len(vals)
    mean = sum(vals) / n
    if n == 1:
        return Aggregate(mean=mean, std=0.0, count=1, ci95_halfwidth=0.0)
    var = sum((v - mean) ** 2 for v in vals) / (n - 1)
    std = math.sqrt(var)
    return Aggregate(
        mean=mean, std=std, count=n, ci95_halfwidth=1.96 * std / math.sqrt(n)
    )

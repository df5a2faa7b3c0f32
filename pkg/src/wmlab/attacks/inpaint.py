"""Harmonic-diffusion inpainting with matched noise overlay.

Region pixels relax toward the 4-neighbor average (Jacobi sweeps,
boundary pixels fixed) until updates fall below 1e-4 or 2,000 sweeps
pass.  The smooth fill then gets seeded value noise scaled to the
standard deviation of a 2-pixel band just outside the region, so the
patch keeps the surrounding texture's grain without reintroducing
structured mid-frequency content.
"""

import numba
import numpy as np

from ..errors import FullMask
from ..imagecore import ImageF, dilate_mask, luminance
from ..rng import RngStream
from ..scenegen import value_noise

_TOL = 1e-4
_MAX_SWEEPS = 2000
# Cell size trades texture realism against carrier re-injection: small
# cells put energy back into the detector band the fill just cleared.
_NOISE_CELL = 8
_NOISE_SEED = 0x1B5E0


@numba.njit(cache=True)
def _harmonic_fill(plane, region, tol, max_sweeps):
    h, w = plane.shape
    cur = plane.copy()
    nxt = plane.copy()
    for _ in range(max_sweeps):
        delta = 0.0
        for i in range(h):
            im = i - 1 if i > 0 else 0
            ip = i + 1 if i < h - 1 else h - 1
            for j in range(w):
                if region[i, j]:
                    jm = j - 1 if j > 0 else 0
                    jp = j + 1 if j < w - 1 else w - 1
                    v = 0.25 * (
                        cur[im, j] + cur[ip, j] + cur[i, jm] + cur[i, jp]
                    )
                    d = abs(v - cur[i, j])
                    if d > delta:
                        delta = d
                    nxt[i, j] = v
                else:
                    nxt[i, j] = cur[i, j]
        cur, nxt = nxt, cur
        if delta < tol:
            break
    return cur


def _border_band_std(img, region):
    band = dilate_mask(region, 2) & ~region
    if not band.any():
        return 0.0
    return float(np.std(luminance(img)[band]))


def builtin_inpaint(img, region, prompt):
    """Regenerate `region` (true = replace); other pixels bit-identical.

    `prompt` is recorded by callers but not consumed here: the built-in
    backend has no text conditioning.
    """
    del prompt
    h, w = img.data.shape[:2]
    if region.all():
        raise FullMask("inpainting needs at least one fixed pixel")
    if not region.any():
        return ImageF.from_array(img.data.copy())
    amp = _border_band_std(img, region)
    out = img.data.copy()
    for ch in range(3):
        out[:, :, ch] = _harmonic_fill(
            np.ascontiguousarray(out[:, :, ch]), region, _TOL, _MAX_SWEEPS
        )
    if amp > 0.0:
        stream = RngStream(_NOISE_SEED).child("inpaint-noise")
        grain = value_noise(max(h, w), _NOISE_CELL, stream)[:h, :w]
        scale = float(np.std(grain[region]))
        if scale > 0.0:
            out[region, :] += (amp / scale) * grain[region, None]
    return ImageF.from_array(out)

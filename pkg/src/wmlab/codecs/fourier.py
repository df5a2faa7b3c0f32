"""Fourier-annulus watermarks: ring keys and bit groups in a noise carrier.

Both families write complex key values into annulus bins of the spectrum of
a full-frame white-noise carrier, which is added to the image luminance.
Detection inverts the carrier estimate with a Gaussian-blur residual,
compensates the residual's known high-pass gain per bin, and reads the
annulus in the unitary-normalized spectrum where key values live.

Annulus bins are enumerated over a canonical half-plane only (one bin per
conjugate pair, self-conjugate bins excluded), so under the null they are
independent complex Gaussians and chi-squared bookkeeping is honest.
"""

import numpy as np

from ..errors import DegenerateVariance, DimensionMismatch, InvalidParameter
from ..imagecore import add_luminance, luminance
from ..rng import RngStream
from ..transforms import blur_plane, gaussian_transfer1d
from .chi2 import ncx2_cdf
from .messages import MESSAGE_BITS, BitMessage
from .outcomes import BitOutcome, PValueOutcome

# Width (in bins) of the two radial reference rings bracketing an annulus.
# Tight rings keep the log-log interpolation's lever arm short, which is
# what makes it track spectra with a slope knee without systematic bias.
_REF_WIDTH = 1.5
_MIN_GAIN = 1e-6


def half_plane_annulus_bins(n, r_inner, r_outer):
    """Canonical half-plane bins with r_inner <= radius < r_outer.

    Returns (us, vs, radii) sorted in row-major (u, v) order.  A bin is
    canonical when its index pair precedes its conjugate mirror, which
    drops DC and the self-conjugate Nyquist bins automatically.
    """
    u = np.arange(n)
    su = np.where(u <= n // 2, u, u - n)
    uu, vv = np.meshgrid(su, su, indexing="ij")
    radius = np.sqrt(uu.astype(np.float64) ** 2 + vv.astype(np.float64) ** 2)
    ui, vi = np.meshgrid(u, u, indexing="ij")
    mu, mv = (-ui) % n, (-vi) % n
    canonical = (ui < mu) | ((ui == mu) & (vi < mv))
    sel = canonical & (radius >= r_inner) & (radius < r_outer)
    us, vs = np.nonzero(sel)
    return us, vs, radius[us, vs]


def _complex_normals(stream, count, scale=1.0):
    """count complex Gaussians with per-component variance scale^2/2."""
    re = stream.normal(count)
    im = stream.normal(count)
    return (re + 1j * im) * (scale / np.sqrt(2.0))


def ring_key_values(key):
    """Per-bin complex key values for a RingKey, plus bin coordinates."""
    us, vs, radii = half_plane_annulus_bins(key.size, key.r_inner, key.r_outer)
    stream = RngStream(key.seed).child("ring-values")
    return us, vs, radii, _complex_normals(stream, us.shape[0])


def latentbit_groups(key):
    """Bin coordinates, radii, and key values for 32 disjoint groups.

    Returns (us, vs, radii, values) flattened with 8 consecutive entries
    per bit.
    """
    us, vs, radii = half_plane_annulus_bins(key.size, key.r_inner, key.r_outer)
    need = MESSAGE_BITS * key.group_size
    if us.shape[0] < need:
        raise InvalidParameter(
            f"annulus holds {us.shape[0]} bins, need {need} for {MESSAGE_BITS} groups"
        )
    stream = RngStream(key.seed).child("latentbit-layout")
    perm = stream.permutation(us.shape[0])[:need]
    values = _complex_normals(
        RngStream(key.seed).child("latentbit-values"), need, scale=key.value_scale
    )
    return us[perm], vs[perm], radii[perm], values


def _build_carrier(n, noise_seed, us, vs, values):
    """White-noise plane whose spectrum carries the key values.

    The annulus bins of the unitary spectrum are overwritten with the key
    values (conjugates at the mirrored bins keep the plane real).
    """
    stream = RngStream(noise_seed).child("carrier")
    z = stream.normal_plane(n, n)
    spectrum = np.fft.fft2(z)
    spectrum[us, vs] = values * n
    spectrum[(-us) % n, (-vs) % n] = np.conj(values) * n
    return np.fft.ifft2(spectrum).real


def _check_square_match(img, key):
    if img.height != key.size or img.width != key.size:
        raise DimensionMismatch(
            f"image {img.height}x{img.width} does not match key size {key.size}"
        )


def _inverted_spectrum(img, key):
    """Unitary spectrum of the carrier estimate, gain-compensated.

    The blur residual approximates the carrier high-passed by (1 - G);
    dividing each used bin by that known transfer makes the annulus read
    unbiased.  Returns a callable bins -> complex values.
    """
    n = key.size
    y = luminance(img)
    zhat = (y - blur_plane(y, key.inversion_sigma)) / key.gamma
    spectrum = np.fft.fft2(zhat) / n
    g1 = gaussian_transfer1d(key.inversion_sigma, n)
    def read(us, vs):
        gain = 1.0 - g1[us] * g1[vs]
        if np.any(np.abs(gain) < _MIN_GAIN):
            raise DegenerateVariance("inversion gain vanishes at a requested bin")
        return spectrum[us, vs] / gain
    return read


def _fitted_bin_variance(read, n, r_inner, r_outer, radii):
    """Null variance per annulus bin from a radial power-law fit.

    Mean spectral power is measured on two reference rings hugging the
    annulus and interpolated log-log to each annulus radius.  This tracks
    smoothly sloped scene spectra far better than a single pooled mean.
    """
    lo = max(2.0, r_inner - _REF_WIDTH)
    ref_lo = half_plane_annulus_bins(n, lo, r_inner)
    ref_hi = half_plane_annulus_bins(n, r_outer, r_outer + _REF_WIDTH)
    p_lo = float(np.mean(np.abs(read(ref_lo[0], ref_lo[1])) ** 2))
    p_hi = float(np.mean(np.abs(read(ref_hi[0], ref_hi[1])) ** 2))
    if p_lo < 1e-12 or p_hi < 1e-12:
        raise DegenerateVariance("reference annulus power is below the floor")
    lr_lo = float(np.mean(np.log(ref_lo[2])))
    lr_hi = float(np.mean(np.log(ref_hi[2])))
    slope = (np.log(p_hi) - np.log(p_lo)) / (lr_hi - lr_lo)
    var = np.exp(np.log(p_lo) + slope * (np.log(radii) - lr_lo))
    if np.any(var < 1e-12):
        raise DegenerateVariance("fitted bin variance is below the floor")
    return var


# ---------------------------------------------------------------------------
# Ring codec: zero-bit key, chi-squared p-value detection.


def ring_embed(img, key, noise_seed):
    """Add the keyed noise carrier to the image luminance."""
    _check_square_match(img, key)
    if key.gamma == 0.0:
        from ..imagecore import ImageF

        return ImageF(img.data.copy())
    us, vs, _, values = ring_key_values(key)
    carrier = _build_carrier(key.size, noise_seed, us, vs, values)
    return add_luminance(img, key.gamma * carrier)


def ring_detect(img, key):
    """Distance of the recovered annulus from the key, as a p-value.

    Under the null the score is non-central chi-squared with 2m degrees of
    freedom (m annulus bins) and noncentrality sum |k|^2 / (sigma^2/2);
    small p means the key is present.
    """
    _check_square_match(img, key)
    if key.gamma <= 0.0:
        raise InvalidParameter("detection requires gamma > 0")
    us, vs, radii, values = ring_key_values(key)
    read = _inverted_spectrum(img, key)
    var = _fitted_bin_variance(read, key.size, key.r_inner, key.r_outer, radii)
    recovered = read(us, vs)
    eta = float(np.sum(np.abs(recovered - values) ** 2 / (var / 2.0)))
    lam = float(np.sum(np.abs(values) ** 2 / (var / 2.0)))
    dof = 2 * us.shape[0]
    return PValueOutcome(eta=eta, p_value=ncx2_cdf(eta, dof, lam), dof=dof, noncentrality=lam)


# ---------------------------------------------------------------------------
# Latent-bit codec: 32 sign-modulated bin groups in the same carrier style.


def latentbit_embed(img, key, message, noise_seed):
    """Carrier embedding with per-bit sign-flipped group values."""
    _check_square_match(img, key)
    if key.gamma == 0.0:
        from ..imagecore import ImageF

        return ImageF(img.data.copy())
    us, vs, _, values = latentbit_groups(key)
    signs = np.repeat([1.0 if b else -1.0 for b in message.bits], key.group_size)
    carrier = _build_carrier(key.size, noise_seed, us, vs, values * signs)
    return add_luminance(img, key.gamma * carrier)


def latentbit_extract(img, key):
    """Per-group correlation signs read back through the inversion.

    The statistic only looks at correlation signs, which a positive gain
    rescale cannot change, so a zero-gain key still extracts; it then
    reads whatever the bare scene correlates to.
    """
    _check_square_match(img, key)
    if key.gamma < 0.0:
        raise InvalidParameter("extraction requires gamma >= 0")
    if key.gamma == 0.0:
        from dataclasses import replace

        key = replace(key, gamma=1.0)
    us, vs, _, values = latentbit_groups(key)
    read = _inverted_spectrum(img, key)
    recovered = read(us, vs)
    corr = np.real(recovered * np.conj(values)).reshape(MESSAGE_BITS, key.group_size)
    bits = tuple(bool(s > 0) for s in corr.sum(axis=1))
    return BitOutcome(extracted=BitMessage(bits), bit_accuracy=None)

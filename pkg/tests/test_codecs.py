"""Watermark codecs: round trips, nulls, geometry, and the chi-squared CDF.

The non-central chi-squared CDF gets two independent oracles: a Monte
Carlo simulation of squared shifted normals (built first, frozen seed)
and scipy's implementation on a parameter grid.
"""

import dataclasses
import math

import numpy as np
import pytest
import scipy.stats

import _util
from wmlab.codecs import (
    BitMessage,
    bit_accuracy,
    derive_dwtdct_key,
    derive_latentbit_key,
    derive_ring_key,
    derive_spread_key,
    dwtdct_embed,
    dwtdct_extract,
    half_plane_annulus_bins,
    latentbit_embed,
    latentbit_extract,
    latentbit_groups,
    midband_pairs,
    ncx2_cdf,
    parse_key,
    read_key,
    ring_detect,
    ring_embed,
    ring_key_values,
    serialize_key,
    spread_embed,
    spread_extract,
    spread_patterns,
    write_key,
)
from wmlab.errors import (
    DegenerateVariance,
    DimensionMismatch,
    ImageTooSmall,
    InvalidParameter,
    MalformedFile,
)
from wmlab.imagecore import ImageF, luminance
from wmlab.metrics import psnr
from wmlab.rng import RngStream


def _msg(seed):
    return BitMessage.random(RngStream(seed).child("msg"))


class TestNcx2:
    def test_central_case_matches_scipy_chi2(self):
        for dof in (2, 10, 100):
            for x in (0.5, dof / 2, dof, 2 * dof):
                assert ncx2_cdf(x, dof, 0.0) == pytest.approx(
                    scipy.stats.chi2.cdf(x, dof), rel=1e-10
                )
            # The median of a chi-squared sits near its mean.
            assert 0.3 < ncx2_cdf(dof, dof, 0.0) < 0.7

    def test_boundaries(self):
        assert ncx2_cdf(0.0, 4, 3.0) == 0.0
        assert ncx2_cdf(-1.0, 4, 3.0) == 0.0
        dof, lam = 6, 11.0
        far = dof + lam + 40.0 * math.sqrt(2 * dof + 4 * lam)
        assert ncx2_cdf(far, dof, lam) > 0.9999

    def test_monte_carlo_oracle(self):
        # Sum of 4 squared normals, one shifted by sqrt(3): ncx2(4, 3).
        rng = np.random.default_rng(20260825)
        z = rng.standard_normal((100_000, 4))
        z[:, 0] += math.sqrt(3.0)
        draws = np.sum(z * z, axis=1)
        for x in (2.0, 5.0, 8.0, 12.0, 20.0):
            empirical = float(np.mean(draws <= x))
            assert abs(ncx2_cdf(x, 4, 3.0) - empirical) < 0.01

    def test_matches_scipy_on_a_grid(self):
        for dof in (2, 8, 64, 300):
            for lam in (0.0, 1.0, 25.0, 400.0):
                mean = dof + lam
                for x in (0.5 * mean, mean, 1.5 * mean):
                    want = scipy.stats.ncx2.cdf(x, dof, lam) if lam else scipy.stats.chi2.cdf(x, dof)
                    assert ncx2_cdf(x, dof, lam) == pytest.approx(want, rel=1e-8, abs=1e-12)

    def test_monotone_in_x(self):
        xs = np.linspace(0.0, 40.0, 81)
        vals = [ncx2_cdf(float(x), 4, 3.0) for x in xs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_invalid_parameters(self):
        with pytest.raises(InvalidParameter):
            ncx2_cdf(1.0, 0, 1.0)
        with pytest.raises(InvalidParameter):
            ncx2_cdf(1.0, 4, -0.5)


class TestKeys:
    def test_keys_are_pure_functions_of_seed(self):
        assert derive_dwtdct_key(7) == derive_dwtdct_key(7)
        assert derive_spread_key(7) == derive_spread_key(7)
        assert derive_ring_key(7) == derive_ring_key(7)
        assert derive_latentbit_key(7) == derive_latentbit_key(7)
        assert derive_ring_key(7) != derive_ring_key(8)

    @pytest.mark.parametrize(
        "key",
        [
            derive_dwtdct_key(3),
            derive_spread_key(3, width=128, height=128),
            derive_ring_key(3),
            derive_latentbit_key(3),
        ],
        ids=["dwtdct", "spread", "ring", "latentbit"],
    )
    def test_serialization_round_trip(self, key, tmp_path):
        assert parse_key(serialize_key(key)) == key
        path = tmp_path / "key.txt"
        write_key(path, key)
        assert read_key(path) == key

    def test_parse_rejects_garbage(self):
        with pytest.raises(MalformedFile):
            parse_key("not a key file")

    def test_ring_geometry_validation(self):
        with pytest.raises(ImageTooSmall):
            derive_ring_key(1, size=32)
        with pytest.raises(InvalidParameter):
            derive_ring_key(1, size=100)
        with pytest.raises(InvalidParameter):
            derive_ring_key(1, r_inner=14, r_outer=10)

    def test_latentbit_needs_annulus_room(self):
        with pytest.raises(InvalidParameter):
            derive_latentbit_key(1, size=128)

    def test_midband_pairs_are_distinct_and_in_band(self):
        pairs = midband_pairs(derive_dwtdct_key(5))
        coords = [c for p in pairs for c in p]
        assert len(coords) == 64
        assert len(set(coords)) == 64
        assert all(6 <= i + j <= 24 for i, j in coords)

    def test_latentbit_groups_disjoint_from_ring_annulus(self):
        lus, lvs, lradii, _ = latentbit_groups(_util.latentbit_key())
        assert len(set(zip(lus.tolist(), lvs.tolist()))) == 32 * 8
        rk = _util.ring_key()
        assert lradii.min() >= rk.r_outer or lradii.max() < rk.r_inner


class TestAnnulusBins:
    def test_counts_match_brute_force(self):
        for n, lo, hi in [(32, 4.0, 7.0), (64, 10.0, 14.0), (256, 10.0, 14.0)]:
            us, vs, radii = half_plane_annulus_bins(n, lo, hi)
            count = 0
            for u in range(n):
                for v in range(n):
                    mu, mv = (-u) % n, (-v) % n
                    if not (u < mu or (u == mu and v < mv)):
                        continue
                    su = u if u <= n // 2 else u - n
                    sv = v if v <= n // 2 else v - n
                    r = math.hypot(su, sv)
                    if lo <= r < hi:
                        count += 1
            assert us.shape[0] == count
            assert (radii >= lo).all() and (radii < hi).all()

    def test_no_bin_is_its_own_conjugate(self):
        n = 64
        us, vs, _ = half_plane_annulus_bins(n, 2.0, 30.0)
        pairs = set(zip(us.tolist(), vs.tolist()))
        assert (0, 0) not in pairs
        for u, v in pairs:
            assert ((-u) % n, (-v) % n) not in pairs


class TestDwtDct:
    def test_round_trip_50_scenes_perfect(self):
        key = _util.dwtdct_key()
        for seed in range(50):
            s = _util.scene(seed)
            out = dwtdct_extract(dwtdct_embed(s.image, key, _msg(seed)), key)
            assert out.scored(_msg(seed)).bit_accuracy == 1.0, f"seed {seed}"

    def test_delta_zero_is_identity(self):
        key = derive_dwtdct_key(1, delta=0.0)
        img = _util.scene(0).image
        out = dwtdct_embed(img, key, _msg(0))
        assert np.abs(out.data - img.data).max() < 1e-6
        assert dwtdct_extract(out, key).extracted == dwtdct_extract(img, key).extracted

    def test_psnr_at_least_35db_on_20_seeds(self):
        key = _util.dwtdct_key()
        for seed in range(20):
            s = _util.scene(seed)
            val = psnr(s.image, dwtdct_embed(s.image, key, _msg(seed)))
            assert val >= 35.0, f"seed {seed}: {val:.2f} dB"

    def test_null_accuracy_centers_at_half(self):
        key = _util.dwtdct_key()
        accs = [
            dwtdct_extract(_util.scene(seed).image, key).scored(_msg(seed)).bit_accuracy
            for seed in range(200)
        ]
        assert abs(np.mean(accs) - 0.5) <= 0.06

    def test_24_of_32_scores_three_quarters(self):
        a = BitMessage.from_string("0" * 32)
        b = BitMessage.from_string("1" * 8 + "0" * 24)
        assert bit_accuracy(a, b) == 0.75

    def test_too_small_raises(self):
        img = ImageF.zeros(32, 32)
        with pytest.raises(ImageTooSmall):
            dwtdct_embed(img, _util.dwtdct_key(), _msg(0))


class TestSpread:
    def test_round_trip_50_scenes(self):
        key = _util.spread_key()
        accs = []
        for seed in range(50):
            s = _util.scene(seed)
            out = spread_extract(spread_embed(s.image, key, _msg(seed)), key)
            accs.append(out.scored(_msg(seed)).bit_accuracy)
        assert np.mean(accs) >= 0.99

    def test_alpha_zero_is_identity(self):
        key = derive_spread_key(1, alpha=0.0)
        img = _util.scene(1).image
        assert np.array_equal(spread_embed(img, key, _msg(1)).data, img.data)

    def test_null_accuracy_centers_at_half(self):
        key = _util.spread_key()
        accs = [
            spread_extract(_util.scene(seed).image, key).scored(_msg(seed)).bit_accuracy
            for seed in range(200)
        ]
        assert abs(np.mean(accs) - 0.5) <= 0.06

    def test_patterns_near_orthogonal(self):
        pats = spread_patterns(_util.spread_key())
        gram = np.tensordot(pats, pats, axes=([1, 2], [1, 2])) / (256 * 256)
        off = np.abs(gram - np.diag(np.diag(gram)))
        assert off.max() <= 0.05

    def test_size_mismatch(self):
        with pytest.raises(DimensionMismatch):
            spread_embed(ImageF.zeros(128, 128), _util.spread_key(), _msg(0))


class TestRing:
    def test_gamma_zero_is_identity(self):
        key = derive_ring_key(1, gamma=0.0)
        img = _util.scene(2).image
        assert np.array_equal(ring_embed(img, key, noise_seed=9).data, img.data)

    def test_embedded_annulus_recovers_key_values(self):
        key = _util.ring_key()
        scene = _util.scene(3)
        out = ring_embed(scene.image, key, noise_seed=11)
        carrier = (luminance(out) - luminance(scene.image)) / key.gamma
        spectrum = np.fft.fft2(carrier) / key.size
        us, vs, _, values = ring_key_values(key)
        assert np.abs(spectrum[us, vs] - values).max() < 1e-5

    def test_psnr_at_least_30db_on_20_seeds(self):
        key = _util.ring_key()
        for seed in range(20):
            s = _util.scene(seed)
            val = psnr(s.image, ring_embed(s.image, key, noise_seed=seed))
            assert val >= 30.0, f"seed {seed}: {val:.2f} dB"

    def test_watermarked_scenes_detect_strongly(self):
        key = _util.ring_key()
        for seed in range(10):
            s = _util.scene(seed)
            out = ring_detect(ring_embed(s.image, key, noise_seed=seed), key)
            assert out.p_value < 1e-4, f"seed {seed}: p {out.p_value}"
            assert 0.0 <= out.p_value <= 1.0

    def test_p_value_monotone_in_gamma(self):
        scene = _util.scene(3)
        ps = []
        for gamma in (0.02, 0.08, 0.2):
            key = derive_ring_key(1, gamma=gamma)
            ps.append(ring_detect(ring_embed(scene.image, key, noise_seed=7), key).p_value)
        assert ps[0] >= ps[1] >= ps[2]

    def test_eta_at_distribution_mean_is_interior(self):
        key = _util.ring_key()
        out = ring_detect(ring_embed(_util.scene(4).image, key, noise_seed=4), key)
        mean_eta = out.noncentrality + out.dof
        p_at_mean = ncx2_cdf(mean_eta, out.dof, out.noncentrality)
        assert 0.0 < p_at_mean < 1.0

    def test_detect_requires_positive_gamma(self):
        key = derive_ring_key(1, gamma=0.0)
        with pytest.raises(InvalidParameter):
            ring_detect(_util.scene(0).image, key)

    def test_constant_image_degenerate_variance(self):
        img = ImageF.from_array(np.full((256, 256, 3), 0.5))
        with pytest.raises(DegenerateVariance):
            ring_detect(img, _util.ring_key())

    def test_size_mismatch(self):
        with pytest.raises(DimensionMismatch):
            ring_detect(ImageF.zeros(128, 128), _util.ring_key())


class TestLatentBit:
    def test_round_trip_20_scenes(self):
        key = _util.latentbit_key()
        accs = []
        for seed in range(20):
            s = _util.scene(seed)
            marked = latentbit_embed(s.image, key, _msg(seed), noise_seed=seed)
            accs.append(latentbit_extract(marked, key).scored(_msg(seed)).bit_accuracy)
        assert np.mean(accs) >= 0.99

    def test_null_accuracy_centers_at_half(self):
        key = _util.latentbit_key()
        accs = [
            latentbit_extract(_util.scene(seed).image, key).scored(_msg(seed)).bit_accuracy
            for seed in range(200)
        ]
        assert abs(np.mean(accs) - 0.5) <= 0.06

    def test_gamma_zero_reads_pure_scene_correlation(self):
        key = dataclasses.replace(_util.latentbit_key(), gamma=0.0)
        img = _util.scene(5).image
        assert np.array_equal(latentbit_embed(img, key, _msg(5), noise_seed=5).data, img.data)
        accs = [
            latentbit_extract(_util.scene(seed).image, key).scored(_msg(seed)).bit_accuracy
            for seed in range(200)
        ]
        assert abs(np.mean(accs) - 0.5) <= 0.06


def test_message_round_trip_and_validation():
    msg = _msg(0)
    text = msg.to_string()
    assert len(text) == 32 and set(text) <= {"0", "1"}
    assert BitMessage.from_string(text) == msg
    with pytest.raises(InvalidParameter):
        BitMessage.from_string("01")
    with pytest.raises(InvalidParameter):
        BitMessage.from_string("x" * 32)

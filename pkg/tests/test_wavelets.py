import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigenwave.series import MultivariateSeries
from eigenwave.wavelets import (FilterPair, make_filter_bank,
                                pyramid_transform, valid_count)

SQRT2 = np.sqrt(2.0)


class TestFilterBank:
    def test_haar_values(self):
        # By hand from u_k = 2^{-1/2} integral phi(t/2) phi(t-k) dt with
        # phi the unit box: u = (1/sqrt2, 1/sqrt2), v = (1/sqrt2, -1/sqrt2).
        fp = make_filter_bank("haar")
        np.testing.assert_allclose(fp.low_pass, [1 / SQRT2, 1 / SQRT2], rtol=0, atol=1e-15)
        np.testing.assert_allclose(fp.high_pass, [1 / SQRT2, -1 / SQRT2], rtol=0, atol=1e-15)

    def test_haar_equals_daubechies_one(self):
        haar = make_filter_bank("haar")
        db1 = make_filter_bank("daubechies", 1)
        np.testing.assert_array_equal(haar.low_pass, db1.low_pass)
        np.testing.assert_array_equal(haar.high_pass, db1.high_pass)

    @pytest.mark.parametrize("n_vanishing", range(1, 11))
    def test_invariants(self, n_vanishing):
        fp = make_filter_bank("daubechies", n_vanishing)
        u = fp.low_pass
        L = u.size
        assert L == 2 * n_vanishing
        assert abs(u.sum() - SQRT2) < 1e-12
        for m in range(L // 2):
            target = 1.0 if m == 0 else 0.0
            assert abs(np.dot(u[: L - 2 * m], u[2 * m:]) - target) < 1e-12
        # moments on the support rescaled to [-1, 1]
        c = (L - 1) / 2
        x = (np.arange(L) - c) / max(c, 1.0)
        for p in range(n_vanishing):
            assert abs(np.dot(fp.high_pass, x ** p)) < 1e-10

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="1..10"):
            make_filter_bank("daubechies", 11)
        with pytest.raises(ValueError, match="1..10"):
            make_filter_bank("daubechies", 0)

    def test_unknown_family_rejected(self):
        with pytest.raises(ValueError, match="family"):
            make_filter_bank("meyer", 2)

    def test_corrupted_filter_fails_validation(self):
        fp = make_filter_bank("daubechies", 2)
        bad = FilterPair("daubechies", 2, fp.low_pass * 1.001, fp.high_pass)
        with pytest.raises(ValueError):
            bad.validate()


class TestValidCount:
    def test_examples(self):
        assert valid_count(1024, 1, 2) == 512  # floor((1024-2)/2)+1
        assert valid_count(4, 3, 2) == 0       # recursion hits 2, 1, then dies
        assert valid_count(2, 1, 2) == 1       # exactly one full window

    @given(n=st.integers(8, 5000), j=st.integers(1, 8), nv=st.integers(1, 4))
    @settings(max_examples=60, deadline=None)
    def test_matches_pyramid_lengths(self, n, j, nv):
        fp = make_filter_bank("daubechies", nv)
        if n < 2 * fp.length:
            return
        series = MultivariateSeries(np.arange(float(n))[None, :] ** 0.5)
        pyr = pyramid_transform(series, fp, j)
        for octave, details in pyr.octaves.items():
            assert details.shape[1] == valid_count(n, octave, fp.length)
        deepest = pyr.max_octave
        if deepest < j:
            assert pyr.truncated
            assert valid_count(n, deepest + 1, fp.length) == 0


class TestPyramid:
    def test_constant_annihilated(self):
        series = MultivariateSeries(np.full((2, 256), 3.7))
        for nv in (1, 2, 4):
            pyr = pyramid_transform(series, make_filter_bank("daubechies", nv), 4)
            for details in pyr.octaves.values():
                assert np.abs(details).max() < 1e-10

    def test_haar_four_points(self):
        # D(2,k) = (Y(2k) - Y(2k+1))/sqrt2 by direct convolution.
        series = MultivariateSeries(np.array([[1.0, 2.0, 3.0, 4.0]]))
        pyr = pyramid_transform(series, make_filter_bank("haar"), 1)
        np.testing.assert_allclose(pyr.detail(1), [[-1 / SQRT2, -1 / SQRT2]],
                                   rtol=0, atol=1e-15)

    def test_ramp_annihilated_by_two_moments(self):
        t = np.arange(2048.0)
        series = MultivariateSeries(t[None, :] / 2048.0)
        pyr = pyramid_transform(series, make_filter_bank("daubechies", 2), 5)
        for details in pyr.octaves.values():
            assert np.abs(details).max() < 1e-8

    def test_haar_energy_split(self):
        # For even n the octave-1 Haar transform is orthonormal:
        # sum A^2 + sum D^2 == sum Y^2 on the tiled interior.
        rng = np.random.default_rng(7)
        y = rng.standard_normal(512)
        series = MultivariateSeries(y[None, :])
        pyr = pyramid_transform(series, make_filter_bank("haar"), 1)
        d = pyr.detail(1)[0]
        a = (y[0::2] + y[1::2]) / SQRT2
        assert abs((a ** 2).sum() + (d ** 2).sum() - (y ** 2).sum()) < 1e-10

    @pytest.mark.parametrize("j", [1, 2, 3])
    def test_haar_direct_filter_form(self, j):
        # The composed Haar detail at octave j is the normalized difference
        # of the two half-block sums of 2^j consecutive samples.
        rng = np.random.default_rng(11)
        y = rng.standard_normal(300)
        series = MultivariateSeries(y[None, :])
        pyr = pyramid_transform(series, make_filter_bank("haar"), j)
        got = pyr.detail(j)[0]
        block, half = 2 ** j, 2 ** (j - 1)
        for k in range(got.size):
            start = block * k
            expect = (y[start:start + half].sum()
                      - y[start + half:start + block].sum()) / np.sqrt(block)
            assert abs(got[k] - expect) < 1e-10

    @pytest.mark.parametrize("nv,j", [(1, 1), (2, 2), (3, 3)])
    def test_shift_by_block_shifts_details_by_one(self, nv, j):
        rng = np.random.default_rng(13)
        y = rng.standard_normal(1024)
        fp = make_filter_bank("daubechies", nv)
        base = pyramid_transform(MultivariateSeries(y[None, :]), fp, j).detail(j)[0]
        shifted = pyramid_transform(
            MultivariateSeries(y[None, 2 ** j:]), fp, j).detail(j)[0]
        common = min(base.size - 1, shifted.size)
        np.testing.assert_array_equal(shifted[:common], base[1:common + 1])

    def test_linearity(self):
        rng = np.random.default_rng(17)
        y1 = rng.standard_normal((3, 500))
        y2 = rng.standard_normal((3, 500))
        fp = make_filter_bank("daubechies", 3)
        combo = pyramid_transform(MultivariateSeries(2.5 * y1 - 1.25 * y2), fp, 4)
        p1 = pyramid_transform(MultivariateSeries(y1), fp, 4)
        p2 = pyramid_transform(MultivariateSeries(y2), fp, 4)
        for j in combo.octaves:
            expect = 2.5 * p1.detail(j) - 1.25 * p2.detail(j)
            np.testing.assert_allclose(combo.detail(j), expect, rtol=1e-12, atol=1e-12)

    def test_no_border_influence_bit_exact(self):
        # Coefficients shared with a strictly longer series agree bit for
        # bit, so no retained coefficient sees padding of any kind.
        rng = np.random.default_rng(19)
        y = rng.standard_normal((2, 700))
        fp = make_filter_bank("daubechies", 4)
        short = pyramid_transform(MultivariateSeries(y[:, :512]), fp, 5)
        full = pyramid_transform(MultivariateSeries(y), fp, 5)
        for j in short.octaves:
            a, b = short.detail(j), full.detail(j)
            np.testing.assert_array_equal(a, b[:, : a.shape[1]])

    def test_truncation_flagged(self):
        series = MultivariateSeries(np.ones((1, 64)))
        pyr = pyramid_transform(series, make_filter_bank("haar"), 12)
        assert pyr.truncated
        assert pyr.max_octave < 12

    def test_too_short_rejected(self):
        fp = make_filter_bank("daubechies", 4)  # length 8
        with pytest.raises(ValueError, match="too short"):
            pyramid_transform(MultivariateSeries(np.ones((1, 15))), fp, 1)

    def test_row_independence(self):
        # Row-wise transform: each row equals its own univariate pyramid.
        rng = np.random.default_rng(23)
        y = rng.standard_normal((4, 256))
        fp = make_filter_bank("daubechies", 2)
        full = pyramid_transform(MultivariateSeries(y), fp, 3)
        for row in range(4):
            single = pyramid_transform(MultivariateSeries(y[row:row + 1]), fp, 3)
            for j in full.octaves:
                np.testing.assert_array_equal(full.detail(j)[row], single.detail(j)[0])

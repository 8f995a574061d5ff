import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigenwave.estimators import (COUNT_WEIGHTED, UNIFORM, OctaveRangeError,
                                  RegressionWeights, effective_dimension,
                                  estimate_series, hurst_exponents,
                                  kappa_sweep, regression_weights,
                                  scaling_diagnostic, scaling_exponents,
                                  write_result_csv, result_to_json)
from eigenwave.simulate import (OfBmSpec, cumulative_path,
                                synthesize_ofbm_increments)
from eigenwave.spectrum import LogEigenSpectrum
from eigenwave.wavelets import make_filter_bank


def spectrum_from_lambdas(lambdas, j1=1, floor=1e-10, counts=None):
    """LogEigenSpectrum directly from an (octaves, p) eigenvalue table."""
    lam = np.atleast_2d(np.asarray(lambdas, dtype=np.float64))
    m, p = lam.shape
    flags = lam < floor
    with np.errstate(divide="ignore"):
        log2 = np.where(flags, np.nan, np.log2(np.where(flags, 1.0, lam)))
    if counts is None:
        counts = tuple(64 for _ in range(m))
    return LogEigenSpectrum(j1=j1, j2=j1 + m - 1, counts=tuple(counts),
                            eigenvalues=lam, log2_eigenvalues=log2,
                            zero_flags=flags, floor=floor)


class TestRegressionWeights:
    def test_uniform_three_octaves(self):
        # solving the 2x2 normal equations by hand for j = 1, 2, 3
        wts = regression_weights(1, 3, scheme=UNIFORM)
        np.testing.assert_allclose(wts.w, [-0.5, 0.0, 0.5], atol=1e-15)
        np.testing.assert_allclose(wts.v, [-0.5, 0.0, 1.5], atol=1e-15)

    def test_single_octave(self):
        wts = regression_weights(5, 5, scheme=UNIFORM)
        np.testing.assert_array_equal(wts.w, [1.0])
        np.testing.assert_array_equal(wts.v, [1.0])

    def test_count_weighted_equals_uniform_for_equal_counts(self):
        for j1, j2 in [(1, 4), (3, 9), (2, 3)]:
            uni = regression_weights(j1, j2, scheme=UNIFORM)
            cnt = regression_weights(j1, j2, counts=[100] * (j2 - j1 + 1),
                                     scheme=COUNT_WEIGHTED)
            np.testing.assert_allclose(cnt.w, uni.w, atol=1e-12)
            np.testing.assert_allclose(cnt.v, uni.v, atol=1e-12)

    @given(j1=st.integers(1, 11), width=st.integers(1, 11),
           seed=st.integers(0, 2 ** 31))
    @settings(max_examples=80, deadline=None)
    def test_constraints_hold(self, j1, width, seed):
        j2 = j1 + width
        if j2 > 12:
            return
        js = np.arange(j1, j2 + 1)
        counts = np.random.default_rng(seed).integers(1, 10_000, size=js.size)
        for wts in (regression_weights(j1, j2, scheme=UNIFORM),
                    regression_weights(j1, j2, counts=counts, scheme=COUNT_WEIGHTED)):
            assert abs(wts.w.sum()) < 1e-12
            assert abs((js * wts.w).sum() - 1.0) < 1e-12
            assert abs(wts.v.sum() - 1.0) < 1e-12

    def test_count_scheme_requires_counts(self):
        with pytest.raises(ValueError, match="counts"):
            regression_weights(1, 3, scheme=COUNT_WEIGHTED)

    def test_invalid_weights_rejected(self):
        with pytest.raises(ValueError, match="constraints"):
            RegressionWeights(1, 2, w=np.array([0.3, 0.7]),
                              v=np.array([0.5, 0.5]), scheme=UNIFORM)


class TestScalingExponents:
    def test_exact_power_law_recovers_h(self):
        # lambda = 2^{j(2h+1)} xi: the offset cancels through sum w = 0 and
        # the slope is pinned by sum j w = 1, for any valid weights.
        h, xi = 0.35, 2.7
        js = np.arange(2, 7)
        lam = np.array([[xi * 2.0 ** (j * (2 * h + 1))] for j in js])
        spec = spectrum_from_lambdas(lam, j1=2)
        counts = (500, 250, 125, 60, 30)
        for scheme, kw in ((UNIFORM, {}), (COUNT_WEIGHTED, {"counts": counts})):
            wts = regression_weights(2, 6, scheme=scheme, **kw)
            ell = scaling_exponents(spectrum_from_lambdas(lam, j1=2, counts=counts), wts)
            assert abs(ell[0] - h) < 1e-12

    def test_single_octave_value(self):
        spec = spectrum_from_lambdas([[16.0]], j1=4)
        wts = regression_weights(4, 4)
        ell = scaling_exponents(spec, wts)
        assert ell[0] == pytest.approx(1.5, abs=1e-14)  # (log2 16 - 1)/2

    def test_flagged_index_undefined(self):
        spec = spectrum_from_lambdas([[1e-14, 4.0], [1e-14, 8.0]], j1=1)
        wts = regression_weights(1, 2, scheme=UNIFORM)
        ell = scaling_exponents(spec, wts)
        assert np.isnan(ell[0]) and not np.isnan(ell[1])

    def test_mixed_rank_index_undefined(self):
        # flagged at one octave only -> undefined, never extrapolated
        spec = spectrum_from_lambdas([[1e-14, 4.0], [2.0, 8.0]], j1=1)
        wts = regression_weights(1, 2, scheme=UNIFORM)
        assert np.isnan(scaling_exponents(spec, wts)[0])

    def test_scale_shift_equivariance(self):
        rng = np.random.default_rng(8)
        lam = rng.uniform(0.5, 4.0, size=(3, 5))
        wts = regression_weights(1, 3, scheme=UNIFORM)
        base = scaling_exponents(spectrum_from_lambdas(lam), wts)
        scaled = scaling_exponents(spectrum_from_lambdas(97.0 * lam), wts)
        np.testing.assert_allclose(scaled, base, atol=1e-12)

    def test_octave_mismatch_rejected(self):
        spec = spectrum_from_lambdas([[1.0], [2.0]], j1=1)
        wts = regression_weights(2, 3, scheme=UNIFORM)
        with pytest.raises(ValueError, match="octaves"):
            scaling_exponents(spec, wts)


class TestHurstExponents:
    def test_top_one(self):
        np.testing.assert_array_equal(
            hurst_exponents(np.array([0.1, 0.2, 0.7]), 1), [0.7])

    def test_full_vector(self):
        ell = np.array([0.1, 0.2, 0.7])
        np.testing.assert_array_equal(hurst_exponents(ell, 3), ell)

    def test_r_zero_empty(self):
        assert hurst_exponents(np.array([0.5]), 0).size == 0

    def test_undefined_top_rejected(self):
        ell = np.array([0.1, np.nan])
        with pytest.raises(ValueError, match="undefined"):
            hurst_exponents(ell, 1)

    def test_r_out_of_range(self):
        with pytest.raises(ValueError):
            hurst_exponents(np.array([0.5]), 2)


class TestScalingDiagnostic:
    def test_exact_power_law_gives_slope(self):
        h = 0.4
        js = np.arange(3, 7)
        lam = np.array([[2.0 ** (j * (2 * h + 1))] for j in js])
        spec = spectrum_from_lambdas(lam, j1=3)
        wts = regression_weights(3, 6, scheme=UNIFORM)
        d = scaling_diagnostic(spec, wts)
        assert abs(d[0] - (2 * h + 1)) < 1e-12

    def test_power_law_with_offset_still_exact_under_vjw(self):
        # v = j w makes the constant prefactor cancel exactly
        h, c = 0.25, 5.5
        js = np.arange(2, 6)
        lam = np.array([[c * 2.0 ** (j * (2 * h + 1))] for j in js])
        wts = regression_weights(2, 5, scheme=UNIFORM)
        d = scaling_diagnostic(spectrum_from_lambdas(lam, j1=2), wts)
        assert abs(d[0] - (2 * h + 1)) < 1e-12

    def test_flat_spectrum_is_zero(self):
        lam = np.ones((4, 3))
        wts = regression_weights(1, 4, scheme=UNIFORM)
        d = scaling_diagnostic(spectrum_from_lambdas(lam), wts)
        np.testing.assert_allclose(d, 0.0, atol=1e-12)

    def test_flagged_maps_to_minus_inf(self):
        spec = spectrum_from_lambdas([[1e-14, 2.0], [4.0, 4.0]], j1=1)
        wts = regression_weights(1, 2, scheme=UNIFORM)
        d = scaling_diagnostic(spec, wts)
        assert d[0] == -np.inf and np.isfinite(d[1])


class TestEffectiveDimension:
    def test_count(self):
        d = np.array([0.01, 0.02, 1.4, 2.1])
        assert effective_dimension(d, 0.5) == 2

    def test_kappa_above_max(self):
        assert effective_dimension(np.array([0.3, 0.4]), 2.0) == 0

    def test_minus_inf_never_counted(self):
        d = np.array([-np.inf, 3.0])
        assert effective_dimension(d, 1e-9) == 1

    def test_positive_kappa_required(self):
        with pytest.raises(ValueError, match="kappa"):
            effective_dimension(np.array([1.0]), 0.0)

    @given(seed=st.integers(0, 2 ** 31))
    @settings(max_examples=40, deadline=None)
    def test_monotone_in_kappa(self, seed):
        rng = np.random.default_rng(seed)
        d = rng.normal(1.0, 1.5, size=12)
        kappas = np.sort(rng.uniform(0.01, 4.0, size=8))
        counts = [effective_dimension(d, k) for k in kappas]
        assert all(a >= b for a, b in zip(counts, counts[1:]))


class TestKappaSweep:
    def test_single_replication(self):
        rows = kappa_sweep([[2.0]], [0.5, 1.5, 2.5])
        assert [row[1] for row in rows] == [1.0, 1.0, 0.0]

    def test_identical_replications_collapse(self):
        rows = kappa_sweep([[2.0, 0.1]] * 7, [0.5], true_r=1)
        kappa, mean, q05, q95, exact = rows[0]
        assert mean == q05 == q95 == 1.0
        assert exact is True

    def test_two_replication_mean(self):
        rows = kappa_sweep([[0.9], [1.1]], [1.0])
        assert rows[0][1] == pytest.approx(0.5)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            kappa_sweep(np.empty((0, 2)), [0.5])
        with pytest.raises(ValueError):
            kappa_sweep([[1.0]], [])


class TestEstimateSeries:
    def _series(self, h=0.7, n=4096, seed=0):
        spec = OfBmSpec(hurst=(h,), point_cov=np.eye(1))
        incr, _ = synthesize_ofbm_increments(spec, n, seed)
        return cumulative_path(incr)

    def test_univariate_log_eigenvalue_slope(self):
        # noiseless r = p = 1: the log2 eigenvalue slope over mid octaves
        # estimates 2h + 1 within 0.2 at n = 2^16
        h = 0.7
        series = self._series(h=h, n=2 ** 16, seed=160)
        fp = make_filter_bank("daubechies", 2)
        result = estimate_series(series, fp, 6, 10, r=1)
        slope = result.delta[0]  # with v = j w this is the weighted slope
        assert abs(slope - (2 * h + 1)) < 0.2

    def test_univariate_recovery(self):
        series = self._series(h=0.7, n=2 ** 14, seed=21)
        fp = make_filter_bank("daubechies", 2)
        result = estimate_series(series, fp, 5, 8, r=1)
        assert abs(result.h_hat[0] - 0.7) < 0.15
        assert result.octaves == (5, 8)

    def test_infeasible_octave_reports_last_feasible(self):
        series = self._series(n=256)
        fp = make_filter_bank("daubechies", 2)
        with pytest.raises(OctaveRangeError) as err:
            estimate_series(series, fp, 2, 12)
        assert 1 <= err.value.last_feasible < 12

    def test_r_override_vs_estimated(self):
        series = self._series(h=0.8, n=2 ** 13, seed=33)
        fp = make_filter_bank("daubechies", 2)
        auto = estimate_series(series, fp, 4, 7)
        fixed = estimate_series(series, fp, 4, 7, r=1)
        assert fixed.h_hat.size == 1
        assert auto.r_hat == auto.h_hat.size

    def test_exports(self, tmp_path):
        series = self._series(n=2048, seed=5)
        fp = make_filter_bank("haar")
        result = estimate_series(series, fp, 2, 5, r=1)
        csv_path = tmp_path / "result.csv"
        write_result_csv(result, csv_path)
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "i,ell_hat,delta,flagged"
        assert len(lines) == 1 + result.p
        doc = result_to_json(result)
        assert doc["octaves"] == [2, 5]
        assert len(doc["h_hat"]) == 1
        assert abs(sum(doc["weights"]["w"])) < 1e-12

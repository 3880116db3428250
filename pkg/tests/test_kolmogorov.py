import math
import time

import numpy as np
import pytest
from scipy import special

from arerrdist import kcdf, montecarlo
from arerrdist.arprocess import ArModel
from arerrdist.kolmogorov import (
    Band,
    SmallSampleWarning,
    build_band,
    covers,
    kolmogorov_cdf,
    kolmogorov_cdf_alternating,
    kolmogorov_cdf_theta,
    kolmogorov_quantile,
    write_band_csv,
)
from arerrdist.rng_dist import STANDARD_NORMAL


class TestCdf:
    def test_examples(self):
        assert kolmogorov_cdf(1.36) == pytest.approx(0.9505, abs=5e-5)
        assert kolmogorov_cdf(0.05) < 1e-6
        assert kolmogorov_cdf(3.0) > 1 - 1e-7

    def test_against_scipy(self):
        # scipy.special.kolmogorov is the survival function 1 - L(Q)
        for q in np.linspace(0.05, 4, 80):
            assert kolmogorov_cdf(q) == pytest.approx(1 - special.kolmogorov(q), abs=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            kolmogorov_cdf(0.0)
        with pytest.raises(ValueError):
            kolmogorov_cdf(-1.0)

    def test_dual_forms_agree(self):
        assert kolmogorov_cdf_theta(0.5) == pytest.approx(kolmogorov_cdf_alternating(0.5), abs=1e-10)
        for q in np.linspace(0.3, 2.0, 30):
            assert abs(kolmogorov_cdf_theta(q) - kolmogorov_cdf_alternating(q)) < 1e-10

    def test_strictly_increasing(self):
        v = [kolmogorov_cdf(q) for q in np.linspace(0.3, 3, 200)]
        assert np.all(np.diff(v) > 0)


class TestQuantile:
    @pytest.mark.parametrize("p,expected", [(0.99, 1.63), (0.95, 1.36), (0.90, 1.22), (0.80, 1.07)])
    def test_table_constants(self, p, expected):
        assert kolmogorov_quantile(p) == pytest.approx(expected, abs=0.005)
        assert round(kolmogorov_quantile(p), 2) == expected

    @pytest.mark.parametrize("p", [0.5, 0.8, 0.9, 0.95, 0.99])
    def test_inverse(self, p):
        assert kolmogorov_cdf(kolmogorov_quantile(p)) == pytest.approx(p, abs=1e-8)
        assert kolmogorov_quantile(p) == pytest.approx(special.kolmogi(1 - p), abs=1e-8)

    def test_fast(self):
        kolmogorov_quantile.cache_clear()
        t = time.perf_counter()
        kolmogorov_quantile(0.95)
        assert time.perf_counter() - t < 1e-3 * 5  # generous for loaded CI boxes


class TestBand:
    def test_table_arithmetic(self):
        b = build_band(lambda z: np.full(np.shape(z), 0.5), 100, 0.05)
        assert b.lower(0.0) == pytest.approx(0.364, abs=5e-4)
        assert b.upper(0.0) == pytest.approx(0.636, abs=5e-4)
        assert b.halfwidth == pytest.approx(1.36 / 10, abs=5e-4)
        assert b.level == pytest.approx(0.95)

    def test_halfwidth_grows_as_alpha_shrinks(self):
        F = kcdf.smooth_cdf([0.0, 1.0], 0.5)
        widths = [build_band(F, 100, a).halfwidth for a in (0.2, 0.05, 1e-3, 1e-8)]
        assert np.all(np.diff(widths) > 0)
        with pytest.warns(SmallSampleWarning):
            wide = build_band(F, 4, 1e-3)
        assert wide.lower(0.5) == 0.0 and wide.upper(0.5) == 1.0

    def test_clamping(self):
        F = kcdf.smooth_cdf([0.0], 1.0)
        b = build_band(F, 100, 0.05)
        z = np.linspace(-3, 3, 61)
        lo, c, hi = b.evaluate(z)
        assert np.all(lo[z <= -1] == 0) and np.all(hi[z >= 1] == 1)
        assert np.all((0 <= lo) & (lo <= c) & (c <= hi) & (hi <= 1))

    def test_small_n_warns(self):
        with pytest.warns(SmallSampleWarning):
            build_band(kcdf.smooth_cdf([0.0], 1.0), 20, 0.05)

    def test_csv(self, tmp_path):
        F = kcdf.smooth_cdf([0.0, 1.0], 0.5)
        write_band_csv(tmp_path / "b.csv", build_band(F, 64, 0.1), F.grid())
        lines = (tmp_path / "b.csv").read_text().splitlines()
        assert lines[2] == "z,lower,center,upper"
        rows = np.array([[float(v) for v in l.split(",")] for l in lines[3:]])
        assert np.all(rows[:, 1] <= rows[:, 2]) and np.all(rows[:, 2] <= rows[:, 3])


class TestCovers:
    def test_truth_is_center(self):
        F = kcdf.smooth_cdf([0.0, 0.3, 1.0], 0.5)
        assert covers(Band(F, 0.01, 0.9), F, F.grid())

    def test_zero_width_misses(self):
        F = kcdf.smooth_cdf([0.0], 1.0)
        assert not covers(Band(F, 0.0, 0.9), lambda z: np.asarray(F(z)) + 0.01, [0.0])

    def test_step_center_checked_at_left_limits(self):
        # one jump at 0: truth N(0,1) sits at 0.5, the step jumps 0 -> 1
        E = kcdf.step_cdf([0.0])
        truth = lambda z: special.ndtr(z)  # noqa: E731
        assert not covers(Band(E, 0.49, 0.9), truth, [5.0])
        assert covers(Band(E, 0.51, 0.9), truth, [5.0])

    def test_step_band_equivalent_to_ks_statistic(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            x = rng.standard_normal(80)
            E = kcdf.step_cdf(x)
            xs = np.sort(x)
            F = special.ndtr(xs)
            i = np.arange(1, 81)
            d = max(np.max(i / 80 - F), np.max(F - (i - 1) / 80))
            assert covers(Band(E, d * (1 + 1e-12), 0.9), special.ndtr, [0.0])
            assert not covers(Band(E, d * (1 - 1e-9), 0.9), special.ndtr, [0.0])

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            covers(Band(kcdf.step_cdf([0.0]), 0.1, 0.9), special.ndtr, [])


def test_smooth_band_coverage_ar1():
    cfg = montecarlo.ExperimentConfig(
        ArModel((0.2,)), STANDARD_NORMAL, (500,), 1000, alpha_list=(0.1,), seed=4242
    )
    recs = montecarlo.run_experiment(cfg)
    freq = np.mean([r.cover[0.1][0] for r in recs])
    print(f"smooth band coverage, AR(1) 0.2, n=500, alpha=0.1: {freq:.3f}")
    assert 0.94 <= freq <= 0.98

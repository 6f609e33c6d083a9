import math

import numpy as np
import pytest
import scipy.special
import scipy.stats

from memaudit.special import (
    kolmogorov_sf,
    regularized_incomplete_beta,
    student_t_cdf,
    student_t_two_sided_p,
)


class TestIncompleteBeta:
    def test_boundaries(self):
        assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            regularized_incomplete_beta(-1.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            regularized_incomplete_beta(1.0, 1.0, 1.5)

    def test_against_scipy_grid(self):
        shapes = [0.5, 1.0, 2.5, 10.0, 100.0, 999.5]
        xs = np.linspace(0.001, 0.999, 41)
        for a in shapes:
            for b in shapes:
                for x in xs:
                    ours = regularized_incomplete_beta(a, b, float(x))
                    ref = float(scipy.special.betainc(a, b, x))
                    assert ours == pytest.approx(ref, abs=1e-12), (a, b, x)

    def test_symmetry_identity(self, rng=np.random.default_rng(5)):
        for _ in range(200):
            a, b = rng.uniform(0.1, 50.0, size=2)
            x = float(rng.uniform(0.0, 1.0))
            lhs = regularized_incomplete_beta(a, b, x)
            rhs = 1.0 - regularized_incomplete_beta(b, a, 1.0 - x)
            assert lhs == pytest.approx(rhs, abs=1e-12)


class TestStudentT:
    def test_cdf_at_zero_is_half(self):
        for df in (1, 3, 100):
            assert student_t_cdf(0.0, df) == 0.5

    def test_two_sided_p_at_zero_is_exactly_one(self):
        for df in (1, 2, 99, 1999):
            assert student_t_two_sided_p(0.0, df) == 1.0

    def test_cdf_against_scipy(self):
        for df in (1, 2, 5, 10, 100, 1999, 4999):
            for t in np.linspace(-40.0, 40.0, 81):
                ours = student_t_cdf(float(t), df)
                ref = float(scipy.stats.t.cdf(t, df))
                assert ours == pytest.approx(ref, abs=1e-10), (t, df)

    def test_two_sided_p_matches_scipy_sf(self):
        for df in (3, 30, 300):
            for t in (-5.0, -1.0, -0.2, 0.4, 2.7, 12.0):
                ours = student_t_two_sided_p(t, df)
                ref = 2.0 * float(scipy.stats.t.sf(abs(t), df))
                assert ours == pytest.approx(ref, abs=1e-12)

    def test_symmetry(self):
        assert student_t_cdf(-2.5, 7) == pytest.approx(1.0 - student_t_cdf(2.5, 7), abs=1e-14)

    def test_infinite_t(self):
        assert student_t_two_sided_p(math.inf, 10) == 0.0


class TestKolmogorov:
    def test_at_and_below_zero(self):
        assert kolmogorov_sf(0.0) == 1.0
        assert kolmogorov_sf(-1.0) == 1.0

    def test_against_scipy(self):
        for x in np.concatenate([np.linspace(0.01, 4.0, 120), [6.0, 10.0, 50.0]]):
            ours = kolmogorov_sf(float(x))
            ref = float(scipy.special.kolmogorov(x))
            assert ours == pytest.approx(ref, abs=1e-12), x

    def test_monotone_decreasing(self):
        xs = np.linspace(0.0, 3.0, 200)
        values = [kolmogorov_sf(float(x)) for x in xs]
        assert all(a >= b - 1e-15 for a, b in zip(values, values[1:]))

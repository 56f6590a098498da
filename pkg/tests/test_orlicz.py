import math

import mpmath
import numpy as np
import pytest

from cauchyfourier.errors import PreconditionError
from cauchyfourier.orlicz import (
    YoungFunction,
    conjugate,
    conjugate_profile_check,
    conjugate_values,
    eval_young,
    legendre_conjugate,
    orlicz_norm,
    normalized_orlicz_norm,
    sequence_from_json,
    sequence_to_json,
    young_inequality_check,
)


def brute_conjugate(phi, x, y_max=16.0, n=100_000):
    y = np.linspace(0.0, y_max, n)
    fy = phi.values(y)
    return np.array([np.max(xi * y - fy) for xi in np.atleast_1d(x)])


class TestEval:
    def test_zero(self):
        assert eval_young(YoungFunction.power(2), 0.0) == 0.0

    def test_cube(self):
        assert eval_young(YoungFunction.power(3), 2.0) == pytest.approx(8.0, abs=1e-14)

    def test_power_log_high_precision(self):
        mpmath.mp.dps = 50
        x = mpmath.mpf("0.5")
        oracle = x**2 * mpmath.log(mpmath.e + 1 / x)
        got = eval_young(YoungFunction.power_log(2), 0.5)
        assert abs(got - float(oracle)) <= 1e-12

    def test_negative_rejected(self):
        with pytest.raises(Exception):
            eval_young(YoungFunction.power(2), -1.0)

    def test_json_round_trip(self):
        phi = YoungFunction.tabulated([0, 1, 2], [0, 1, 4])
        back = YoungFunction.from_json(phi.to_json())
        assert np.allclose(back.values([0.5, 1.5, 3.0]), phi.values([0.5, 1.5, 3.0]))


class TestConjugate:
    def test_square_at_one(self):
        phi = YoungFunction.power(2)
        assert conjugate_values(phi, 1.0)[0] == pytest.approx(0.25, abs=1e-10)
        assert brute_conjugate(phi, 1.0)[0] == pytest.approx(0.25, abs=1e-6)

    def test_linear_below_one(self):
        assert conjugate_values(YoungFunction.power(1), 0.5)[0] == pytest.approx(0.0, abs=1e-12)

    def test_cube_stationary_point(self):
        phi = YoungFunction.power(3)
        expected = 2 * (1 / 3) ** 1.5
        assert conjugate_values(phi, 1.0)[0] == pytest.approx(expected, abs=1e-10)
        assert brute_conjugate(phi, 1.0)[0] == pytest.approx(expected, abs=1e-6)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_closed_form_matches_numeric(self, p):
        phi = YoungFunction.power(p)
        x = np.linspace(0.01, 2, 50)
        assert np.max(np.abs(conjugate(phi).values(x) - conjugate_values(phi, x))) < 1e-9

    def test_tabulated_conjugate_and_biconjugate(self):
        phi = YoungFunction.power(2)
        grid = np.linspace(0.01, 4, 400)
        star = legendre_conjugate(phi, grid)
        back = conjugate_values(star, np.linspace(0.1, 1.5, 30))
        assert np.max(np.abs(back - np.linspace(0.1, 1.5, 30) ** 2)) < 1e-3

    def test_nonconvex_rejected(self):
        phi = YoungFunction.tabulated([0, 1, 2, 3], [0, 2, 2.5, 6])
        with pytest.raises(PreconditionError):
            conjugate_values(phi, [1.0])

    def test_bad_grid(self):
        with pytest.raises(PreconditionError):
            legendre_conjugate(YoungFunction.power(2), [1.0, 0.5])


class TestNorm:
    def test_zero(self):
        assert orlicz_norm(np.zeros(5), YoungFunction.power(3)) == 0.0

    def test_three_four_five(self):
        assert orlicz_norm([3, 4], YoungFunction.power(2)) == pytest.approx(5.0, rel=1e-9)

    def test_single_one(self):
        assert orlicz_norm([1.0], YoungFunction.power(2.5)) == pytest.approx(1.0, rel=1e-9)

    @pytest.mark.parametrize("p", [1.0, 1.3, 2.0, 3.0, 5.0])
    def test_lp_oracle(self, p):
        rng = np.random.default_rng(int(10 * p))
        phi = YoungFunction.power(p)
        for _ in range(20):
            n = int(rng.integers(1, 65))
            a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            expected = np.sum(np.abs(a) ** p) ** (1 / p)
            assert orlicz_norm(a, phi) == pytest.approx(expected, rel=1e-8)

    def test_homogeneous(self):
        phi = YoungFunction.power_log(2)
        a = np.array([0.3, -1.2, 2j, 0.01])
        assert orlicz_norm(2.5j * a, phi) == pytest.approx(2.5 * orlicz_norm(a, phi), rel=1e-9)

    def test_modular_at_norm(self):
        phi = YoungFunction.power_log(2)
        a = np.array([0.3, 1.2, 0.7])
        m = orlicz_norm(a, phi)
        s = float(np.sum(phi.values(np.abs(a) / m)))
        assert 1 - 1e-8 <= s <= 1 + 1e-12

    def test_normalized_unit_vector(self):
        phi = YoungFunction.power_log(2)
        assert normalized_orlicz_norm([1.0, 0, 0], phi) == pytest.approx(1.0, rel=1e-12)

    def test_sequence_json(self):
        a = np.array([1 + 2j, -0.5, 0])
        assert np.array_equal(sequence_from_json(sequence_to_json(a)), a)


class TestProfile:
    def test_power_log_decreasing(self):
        rep = conjugate_profile_check(YoungFunction.power_log(2), 20)
        assert rep.hypothesis_met and rep.nonincreasing
        assert np.all(np.diff(rep.ratios) < 0)

    def test_square_constant(self):
        rep = conjugate_profile_check(YoungFunction.power(2), 10)
        assert rep.nonincreasing
        assert np.allclose(rep.ratios, 0.25, atol=1e-10)

    def test_cube_hypothesis_fails(self):
        assert not conjugate_profile_check(YoungFunction.power(3), 10).hypothesis_met


class TestYoungInequality:
    def test_random_square(self):
        rng = np.random.default_rng(0)
        pairs = rng.uniform(0, 1, (10_000, 2))
        pairs[pairs == 0] = 1e-9
        assert young_inequality_check(YoungFunction.power(2), pairs) <= 1e-8

    def test_origin(self):
        assert young_inequality_check(YoungFunction.power_log(2), [(0.0, 0.0)]) == 0.0

    def test_grid_three_halves(self):
        g = np.linspace(0.02, 2, 100)
        pairs = np.array([(x, y) for x in g for y in g])
        phi = YoungFunction.power(1.5)
        assert young_inequality_check(phi, pairs, conjugate(phi)) <= 1e-8

    def test_equality_at_derivative(self):
        # x*y = phi(x) + phi*(y) when y = phi'(x)
        phi = YoungFunction.power(3)
        x = 0.7
        v = young_inequality_check(phi, [(x, 3 * x**2)])
        assert abs(v) < 1e-9 and math.isfinite(v)

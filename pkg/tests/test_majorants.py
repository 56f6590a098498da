import math
import warnings

import numpy as np
import pytest

from cauchyfourier.errors import PreconditionError
from cauchyfourier.majorants import (
    Majorant,
    construct_majorant,
    majorant_regularity_check,
    psi_node_series,
    square_dini_partial,
)
from cauchyfourier.orlicz import YoungFunction


@pytest.fixture(scope="module")
def a1_quartic():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return construct_majorant(YoungFunction.power(4), 50)


def test_majorant_rejects_decreasing_nodes():
    with pytest.raises(PreconditionError):
        Majorant([0.5, 1.0, 0.2])


def test_majorant_interpolates_nodes():
    w = Majorant.power(0.5, K=20)
    t = np.ldexp(1.0, -np.arange(21))
    assert np.allclose(w(t), np.sqrt(t), rtol=1e-14)
    assert w(2.0) == 1.0


def test_majorant_dict_round_trip():
    w = Majorant.power(0.25, K=12)
    assert np.array_equal(Majorant.from_dict(w.to_dict()).values, w.values)


class TestDini:
    def test_constant(self):
        S = square_dini_partial(Majorant.constant(0.3, K=50), 50).S
        assert S[-1] == pytest.approx(50 * 0.09, rel=1e-12)

    def test_sqrt_converges(self):
        tab = square_dini_partial(Majorant.power(0.5, K=20), 20)
        assert tab.S[-1] == pytest.approx(1 - 2.0**-20, rel=1e-12)
        assert tab.S[-1] < 1

    def test_harmonic_against_direct_sum(self):
        n = 10_000
        vals = 1.0 / np.sqrt(np.arange(1, n + 2, dtype=float))  # node k: 1/sqrt(k+1)
        tab = square_dini_partial(Majorant(vals), n)
        direct = np.cumsum(1.0 / np.arange(2, n + 2, dtype=float))
        assert np.allclose(tab.S, direct, rtol=1e-12)
        assert tab.diverges

    def test_squared_log_converges(self):
        n = 10_000
        vals = 1.0 / np.arange(1, n + 2, dtype=float)
        assert not square_dini_partial(Majorant(vals), n).diverges

    def test_too_many_terms(self):
        with pytest.raises(PreconditionError):
            square_dini_partial(Majorant.constant(1.0, K=10), 11)


class TestConstruction:
    def test_quartic_t_n(self, a1_quartic):
        _, trace = a1_quartic
        n = np.arange(1, 51, dtype=float)
        assert np.max(np.abs(trace.t[:50] - 1 / n**2)) <= 1e-10

    def test_cubic_t_n(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _, trace = construct_majorant(YoungFunction.power(3), 20)
        n = np.arange(1, 21, dtype=float)
        assert np.max(np.abs(trace.t[:20] - n**-4.0)) <= 1e-10

    def test_square_rejected(self):
        with pytest.raises(PreconditionError):
            construct_majorant(YoungFunction.power(2), 10)

    def test_ratio_after_interleave(self, a1_quartic):
        w, trace = a1_quartic
        seq = trace.sequence
        assert np.max(seq[:-1] / seq[1:]) <= 2 + 1e-12
        assert w.c_ratio <= 2

    def test_block_sums_bounded_below(self, a1_quartic):
        _, trace = a1_quartic
        assert trace.c_sum > 0

    def test_psi_series_converges(self, a1_quartic):
        w, _ = a1_quartic
        terms, _, n0 = psi_node_series(w, YoungFunction.power(4))
        assert n0 < w.K
        assert np.all(terms[n0:] < 1e-6)

    def test_square_dini_exceeds_ten(self, a1_quartic):
        w, _ = a1_quartic
        tab = square_dini_partial(w, min(w.K, 20_000))
        assert tab.S[-1] > 10


class TestRegularity:
    def test_sqrt(self):
        rep = majorant_regularity_check(Majorant.power(0.5))
        assert rep.c_ratio == pytest.approx(math.sqrt(2))
        for g in rep.gammas:
            if g <= 0.5:
                assert rep.ratio_nondecreasing[g]
            if g >= 0.5:
                assert rep.ratio_nonincreasing[g]

    def test_constant(self):
        rep = majorant_regularity_check(Majorant.constant(1.0))
        assert rep.c_ratio == 1.0
        assert all(rep.ratio_nonincreasing.values())
        assert rep.w_over_t_nonincreasing

    def test_a1_output(self, a1_quartic):
        assert majorant_regularity_check(a1_quartic[0]).c_ratio <= 2

import math
import warnings

import numpy as np
import pytest

from cauchyfourier.analytic import BoundaryMeasure, TaylorSeries
from cauchyfourier.bloch import (
    FOURIER_C,
    MonotoneTable,
    bloch_norm,
    cyclicity_diagnostic,
    embedding_report,
    fourier_bound_report,
)
from cauchyfourier.errors import PreconditionError
from cauchyfourier.innerouter import singular_inner
from cauchyfourier.majorants import Majorant, construct_majorant
from cauchyfourier.orlicz import YoungFunction

ONE = Majorant.constant(1.0)


def random_poly(rng, max_degree=256):
    d = int(rng.integers(1, max_degree + 1))
    return TaylorSeries(rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1))


def test_constant_function():
    assert bloch_norm(TaylorSeries([2 - 1j]), ONE).value == pytest.approx(math.sqrt(5))


def test_identity_function():
    n = bloch_norm(TaylorSeries.monomial(1), ONE)
    assert n.value == pytest.approx(1.0)
    assert n.argmax == 0


def test_singular_atom_grid_refinement():
    S = singular_inner(BoundaryMeasure.atoms([0.0], [1.0]), 4096)
    radii = 1 - np.geomspace(1, 2.0**-12, 64)
    dense_radii = 1 - np.geomspace(1, 2.0**-12, 256)
    coarse = bloch_norm(S, ONE, radii, 256).value
    dense = bloch_norm(S, ONE, dense_radii, 1024).value
    assert abs(coarse - dense) <= 0.01 * dense


def test_norm_axioms():
    rng = np.random.default_rng(5)
    w = Majorant.power(0.25)
    for _ in range(5):
        f, g = random_poly(rng, 40), random_poly(rng, 40)
        nf, ng = bloch_norm(f, w).value, bloch_norm(g, w).value
        assert bloch_norm(f * (-3j), w).value == pytest.approx(3 * nf, rel=1e-9)
        assert bloch_norm(f + g, w).value <= nf + ng + 1e-9


def test_bad_radii():
    with pytest.raises(PreconditionError):
        bloch_norm(TaylorSeries([1, 1]), ONE, radii=[0.5, 1.0])


class TestFourierBound:
    def test_monomials_bounded(self):
        ratios = [fourier_bound_report(TaylorSeries.monomial(n), ONE).max_coeff_ratio for n in (1, 4, 16, 64, 256)]
        assert max(ratios) <= FOURIER_C
        assert max(ratios) / min(ratios) < 4

    def test_constant_trivial(self):
        assert fourier_bound_report(TaylorSeries([3.0]), ONE).trivial

    @pytest.mark.parametrize("a", [0.0, 0.25, 0.5])
    def test_random_polynomials(self, a):
        w = ONE if a == 0 else Majorant.power(a)
        rng = np.random.default_rng(int(100 * a))
        for _ in range(15):
            rep = fourier_bound_report(random_poly(rng), w)
            assert rep.holds


class TestEmbedding:
    def test_zero_function(self):
        assert math.isnan(embedding_report(TaylorSeries([0.0]), ONE, YoungFunction.power(4)).ratio)

    def test_identity_baseline(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            w, _ = construct_majorant(YoungFunction.power(4), 50)
        rep = embedding_report(TaylorSeries.monomial(1), w, YoungFunction.power(4))
        assert 0 < rep.ratio < math.inf
        # single coefficient: Orlicz norm of (0, 1) with t^4 is 1
        assert rep.orlicz == pytest.approx(1.0, rel=1e-9)


class TestCyclicity:
    def test_constant_one(self):
        u = MonotoneTable([0, 1], [1, 1])
        v = MonotoneTable([0, 1], [0, 1])
        rep = cyclicity_diagnostic(TaylorSeries([1.0]), u, v, ONE, [0.5, 0.9])
        assert rep.c2 == 0
        assert all(val == 0 for _, val in rep.sweep)

    def test_affine(self):
        f = TaylorSeries([1.0, 0.5])
        u = MonotoneTable([0, 1], [1, 1])
        v = MonotoneTable([0, 1], [0, 1])
        rep = cyclicity_diagnostic(f, u, v, Majorant.power(0.5), [0.5, 0.9, 0.99, 0.999])
        assert rep.c1 >= 0.5 - 1e-9
        assert rep.c2 <= 0.5 + 1e-9
        sweep = [val for _, val in rep.sweep]
        assert all(b < a for a, b in zip(sweep, sweep[1:]))
        assert sweep[-1] < 1e-2

    def test_zero_at_origin_rejected(self):
        u = v = MonotoneTable([0, 1], [1, 1])
        with pytest.raises(PreconditionError):
            cyclicity_diagnostic(TaylorSeries([0.0, 1.0]), u, v, ONE, [0.5])

    def test_table_must_be_monotone(self):
        with pytest.raises(PreconditionError):
            MonotoneTable([0, 1, 2], [0, 2, 1])

import numpy as np
import pytest

from mswavelab.grid import Grid
from mswavelab.polynomials import PolynomialState, SpaceTimePolynomial, coordinate, monomial
from mswavelab.words import Generator, OperatorWord


class TestAlgebra:
    def test_addition_and_product(self):
        # (t + x1)^2 = t^2 + 2 t x1 + x1^2
        p = monomial(2, 1, (0, 0)) + monomial(2, 0, (1, 0))
        sq = p * p
        expect = {(2, 0, 0): 1.0, (1, 1, 0): 2.0, (0, 2, 0): 1.0}
        assert sq.coeffs == expect

    def test_zero_pruning(self):
        p = monomial(2, 1, (0, 0)) - monomial(2, 1, (0, 0))
        assert p.coeffs == {}
        assert p.is_zero()

    def test_partial_derivatives(self):
        p = monomial(2, 2, (3, 1))  # t^2 x1^3 x2
        assert p.partial(0).coeffs == {(1, 3, 1): 2.0}
        assert p.partial(1).coeffs == {(2, 2, 1): 3.0}
        assert p.partial(2).coeffs == {(2, 3, 0): 1.0}

    def test_dalembertian(self):
        # box_c (t^2 - x1^2 - x2^2) = 2 + 2 c^2 + 2 c^2... for c = 1: 2 + 4 = 6
        p = monomial(2, 2, (0, 0)) - monomial(2, 0, (2, 0)) - monomial(2, 0, (0, 2))
        out = p.dalembertian(1.0)
        assert out.coeffs == {(0, 0, 0): 6.0}


class TestGenerators:
    def test_rotation_formula(self):
        # O12 (x1 x2) = x1^2 - x2^2
        p = monomial(2, 0, (1, 1))
        out = p.apply(Generator.rotation(1, 2))
        assert out.coeffs == {(0, 2, 0): 1.0, (0, 0, 2): -1.0}

    def test_scaling_counts_total_degree(self):
        # S is the Euler operator in (t, x): S(t^a x^b) = (a + |b|) t^a x^b
        p = monomial(3, 2, (1, 0, 3))
        out = p.apply(Generator.scaling())
        assert out.coeffs == {(2, 1, 0, 3): 6.0}

    def test_lorentz_and_scaled_lorentz(self):
        p = monomial(2, 1, (1, 0))  # t x1
        lk = p.apply(Generator.lorentz(1))
        assert lk.coeffs == {(0, 2, 0): 1.0, (2, 0, 0): 1.0}
        lt = p.apply(Generator.scaled_lorentz(1, 2.0))
        assert lt.coeffs == {(0, 2, 0): 0.5, (2, 0, 0): 2.0}

    def test_word_application_order(self):
        # d1 S p applies S first
        p = monomial(2, 0, (2, 0))
        word = OperatorWord.from_text(2, "d1 S")
        out = p.apply_word(word)
        # S p = 2 x1^2, then d1 -> 4 x1
        assert out.coeffs == {(0, 1, 0): 4.0}


class TestEvaluation:
    def test_grid_evaluation_matches_direct(self):
        g = Grid(2, 1.5, 17)
        p = monomial(2, 1, (2, 1)) * 0.5 + coordinate(2, 0) * 2.0
        t = 0.3
        vals = p.evaluate(t, g)
        x1, x2 = g.coordinate(1), g.coordinate(2)
        expect = 0.5 * t * x1**2 * x2 + 2.0 * t
        assert np.allclose(vals, expect * np.ones(g.shape), atol=1e-14)

    def test_state_snapshot_jet(self):
        g = Grid(2, 1.0, 9)
        p = monomial(2, 2, (1, 0))
        state = PolynomialState([p])
        snap = state.snapshot(0.5, g)
        x1 = g.coordinate(1) * np.ones(g.shape)
        assert np.allclose(snap.u.values[0], 0.25 * x1, atol=1e-15)
        assert np.allclose(snap.v.values[0], 1.0 * x1, atol=1e-15)
        utt = state.second_time_derivative(0.5, g)
        assert np.allclose(utt.values[0], 2.0 * x1, atol=1e-15)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            monomial(2, 0, (1, 0)) + monomial(3, 0, (1, 0, 0))
        with pytest.raises(ValueError):
            SpaceTimePolynomial(2, {(1, 0): 1.0})  # wrong exponent length

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causalzf import CoeffSeries, DiscPoint, MalformedInputError, adjoint_coeff, eval_at, scale
from causalzf.errors import InvalidScaleError
from causalzf.tfun import eval_many

from conftest import random_fir


def direct_sum(coeffs, z):
    return sum(c * z**k for k, c in enumerate(coeffs))


class TestCoeffSeries:
    def test_shapes(self, row_1z):
        assert row_1z.shape == (1, 2)
        assert row_1z.degree == 1
        assert row_1z.coeffs.shape == (2, 1, 2)

    def test_read_only(self, row_1z):
        with pytest.raises(ValueError):
            row_1z.coeffs[0, 0, 0] = 5.0

    def test_coeff_beyond_degree_is_zero(self, row_1z):
        assert np.all(row_1z.coeff(7) == 0)
        assert row_1z.coeff(7).shape == (1, 2)

    def test_constant(self):
        H = CoeffSeries.constant([[2.0]])
        assert H.degree == 0 and H.coeff(0)[0, 0] == 2.0

    @pytest.mark.parametrize("bad", [[], [[[1.0], [2.0, 3.0]]], [[[float("nan")]]],
                                     [[[1.0]], [[1.0, 2.0]]]])
    def test_malformed(self, bad):
        with pytest.raises(MalformedInputError):
            CoeffSeries(bad)

    def test_add_pads(self, row_1z):
        K = CoeffSeries([[[1.0, 1.0]], [[0.0, 0.0]], [[2.0, 0.0]]])
        S = row_1z + K
        assert S.degree == 2
        np.testing.assert_allclose(S.coeffs[0], [[2.0, 1.0]])
        np.testing.assert_allclose(S.coeffs[2], [[2.0, 0.0]])

    def test_equality_and_hash(self, row_1z):
        other = CoeffSeries([[[1.0, 0.0]], [[0.0, 1.0]]])
        assert other == row_1z and hash(other) == hash(row_1z)


class TestEvaluation:
    def test_horner_matches_direct_sum(self, rng):
        H = random_fir(rng, 2, 3, 5)
        for z in [0.0, 0.3 - 0.2j, 1j, np.exp(0.7j)]:
            np.testing.assert_allclose(eval_at(H, z), direct_sum(H.coeffs, z), atol=1e-13)

    def test_eval_many_matches_pointwise(self, rng):
        H = random_fir(rng, 2, 4, 4)
        zs = 0.9 * np.exp(1j * np.linspace(0, 6, 7))
        vals = eval_many(H, zs)
        for z, v in zip(zs, vals):
            np.testing.assert_allclose(v, eval_at(H, z), atol=1e-14)

    def test_disc_point_validation(self):
        assert DiscPoint(0.5).interior
        assert DiscPoint.on_circle(1.0).boundary
        with pytest.raises(ValueError):
            DiscPoint(1.5)

    def test_outside_disc_rejected(self, row_1z):
        with pytest.raises(ValueError):
            eval_at(row_1z, 2.0)


class TestAdjointCoeff:
    def test_negative_index(self, rng):
        H = random_fir(rng, 2, 3, 3)
        np.testing.assert_array_equal(adjoint_coeff(H, -2), H.coeffs[2].conj().T)

    @pytest.mark.parametrize("k", [1, -3, -10])
    def test_outside_support_is_zero(self, rng, k):
        H = random_fir(rng, 2, 3, 3)
        out = adjoint_coeff(H, k)
        assert out.shape == (3, 2) and not out.any()


class TestScale:
    def test_scales_coefficients(self, row_mixed):
        np.testing.assert_allclose(scale(row_mixed, 2.5).coeffs, 2.5 * row_mixed.coeffs)

    @pytest.mark.parametrize("g", [0, -1.0, math.inf, math.nan, True, 1j, "2"])
    def test_invalid(self, row_1z, g):
        with pytest.raises(InvalidScaleError):
            scale(row_1z, g)


finite = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), finite, finite, st.complex_numbers(max_magnitude=1.0))
def test_evaluation_is_linear(seed, a, b, z):
    rng = np.random.default_rng(seed)
    H, K = random_fir(rng, 2, 3, 3), random_fir(rng, 2, 3, 3)
    lhs = eval_at(CoeffSeries(a * H.coeffs + b * K.coeffs), z)
    rhs = a * eval_at(H, z) + b * eval_at(K, z)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causalzf import (
    CoeffSeries,
    MonotonicityError,
    NotRightInvertibleError,
    StopReason,
    build_gamma_section,
    delta_c_grid,
    estimate_gamma_opt,
    estimate_hinf_norm,
    rho_of_section,
)
from causalzf.gammaopt import MONOTONE_SLACK, _check_monotone, boundary_sigma_extremes

from conftest import random_fir


def min_singular_by_eig(M):
    """Independent route to sigma_min: square root of the smallest eigenvalue of M M^*."""
    return math.sqrt(max(np.linalg.eigvalsh(M @ M.conj().T)[0], 0.0))


class TestSection:
    def test_block_layout(self):
        H = CoeffSeries([[[1.0, 2.0]], [[3.0, 4j]]])
        S = build_gamma_section(H, 2).data
        assert S.shape == (6, 3)
        # block (i, j) is H_{j-i}^*, zero below the diagonal
        np.testing.assert_array_equal(S[0:2, 0:1], [[1.0], [2.0]])
        np.testing.assert_array_equal(S[0:2, 1:2], [[3.0], [-4j]])
        np.testing.assert_array_equal(S[2:4, 0:1], [[0.0], [0.0]])
        np.testing.assert_array_equal(S[0:2, 2:3], [[0.0], [0.0]])

    def test_wide_channel_rejected(self):
        with pytest.raises(NotRightInvertibleError):
            build_gamma_section(CoeffSeries([[[1.0], [2.0]]]), 1)

    def test_negative_degree(self, row_1z):
        with pytest.raises(ValueError):
            build_gamma_section(row_1z, -1)

    def test_shift_sections_are_nilpotent(self, shift):
        for N in (1, 4, 16):
            assert rho_of_section(build_gamma_section(shift, N)) == 0.0


class TestEstimateGamma:
    def test_constant_channel(self, rng):
        H0 = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        rec = estimate_gamma_opt(CoeffSeries([H0]))
        assert rec.converged and rec.stop_reason is StopReason.TOLERANCE_MET
        assert rec.last_N == 1
        assert abs(rec.gamma_estimate - 1.0 / min_singular_by_eig(H0)) <= 1e-12

    def test_trivial_scalar(self):
        assert estimate_gamma_opt(CoeffSeries([[[2.0]]])).gamma_estimate == 0.5

    def test_scalar_oracle(self, scalar_half):
        # causally invertible scalar: gamma_opt = 1 / min |H| on the circle = 2
        rec = estimate_gamma_opt(scalar_half, abs_tol=1e-3)
        assert rec.converged
        assert abs(rec.gamma_estimate - 2.0) <= 1e-2

    def test_budget_gives_lower_bound(self, scalar_half):
        rec = estimate_gamma_opt(scalar_half, abs_tol=1e-12, N_max=16)
        assert rec.stop_reason is StopReason.N_BUDGET
        assert rec.gamma_is_lower_bound and rec.gamma_estimate < 2.0

    def test_shift_detected_zero(self, shift):
        rec = estimate_gamma_opt(shift)
        assert rec.stop_reason is StopReason.DETECTED_ZERO
        assert math.isinf(rec.gamma_estimate)
        assert all(rho == 0.0 for N, rho in rec.rho_seq if N >= 1)

    def test_row_1z(self, row_1z):
        rec = estimate_gamma_opt(row_1z)
        assert abs(rec.gamma_estimate - 1.0) < 1e-12

    def test_wide_channel_is_infinite(self):
        rec = estimate_gamma_opt(CoeffSeries([[[1.0], [2.0]]]))
        assert math.isinf(rec.gamma_estimate) and rec.stop_reason is StopReason.DETECTED_ZERO

    def test_sweep_levels(self, scalar_half):
        rec = estimate_gamma_opt(scalar_half, abs_tol=1e-12, N_max=64)
        assert [N for N, _ in rec.rho_seq] == [0, 1, 2, 4, 8, 16, 32, 64]

    def test_invalid_tolerance(self, row_1z):
        with pytest.raises(ValueError):
            estimate_gamma_opt(row_1z, abs_tol=0.0)

    def test_monotonicity_guard(self):
        _check_monotone(1.0, 1.0 + 0.5 * MONOTONE_SLACK, 2, "rho_N", increasing=False)
        with pytest.raises(MonotonicityError):
            _check_monotone(1.0, 1.0 + 1e-6, 2, "rho_N", increasing=False)


class TestNorms:
    def test_hinf_scalar(self, scalar_half):
        rec = estimate_hinf_norm(scalar_half, abs_tol=1e-4)
        assert abs(rec.hinf_grid - 1.5) < 1e-12
        assert abs(rec.hinf_estimate - 1.5) < 1e-3

    def test_hinf_wide(self):
        H = CoeffSeries([[[1.0], [2.0]]])
        rec = estimate_hinf_norm(H)
        assert abs(rec.hinf_estimate - math.sqrt(5.0)) < 1e-12
        assert math.isinf(rec.gamma_estimate)

    def test_boundary_extremes_row(self, row_1z):
        lo, hi = boundary_sigma_extremes(row_1z, 256)
        assert abs(lo - math.sqrt(2)) < 1e-12 and abs(hi - math.sqrt(2)) < 1e-12

    def test_delta_c(self, scalar_half, shift):
        assert abs(delta_c_grid(scalar_half) - 0.5) < 1e-3
        assert delta_c_grid(shift) == 0.0
        with pytest.raises(ValueError):
            delta_c_grid(shift, grid_size=4)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3), st.integers(1, 3))
def test_sections_are_monotone(seed, m_extra, length):
    rng = np.random.default_rng(seed)
    m = 1 + seed % 2
    H = random_fir(rng, m, m + m_extra, length)
    prev_rho, prev_smax = math.inf, 0.0
    for N in (0, 1, 2, 4, 8, 16):
        sv = np.linalg.svd(build_gamma_section(H, N).data, compute_uv=False)
        assert sv[-1] <= prev_rho + 1e-10
        assert sv[0] >= prev_smax - 1e-10
        prev_rho, prev_smax = sv[-1], sv[0]


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 10.0))
def test_rho_scales_linearly(seed, c):
    rng = np.random.default_rng(seed)
    H = random_fir(rng, 1, 3, 3)
    a = rho_of_section(build_gamma_section(H, 8))
    b = rho_of_section(build_gamma_section(CoeffSeries(c * H.coeffs), 8))
    assert abs(b - c * a) <= 1e-10 * max(1.0, c * a)

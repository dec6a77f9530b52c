import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causalzf import (
    CoeffSeries,
    DimensionMismatchError,
    VerificationGrid,
    VerificationReport,
    bezout_residual,
    build_gamma_section,
    brute_force_rho,
    peak_norm_certificate,
    precode,
    rho_of_section,
    verify_precoder,
)
from causalzf.verify import apply_section, peak_norm_section_bound

from conftest import random_fir


class TestGrid:
    def test_points(self):
        g = VerificationGrid(radii=(0.5, 1.0), n_angles=16)
        pts = g.points()
        assert pts.size == 32
        np.testing.assert_allclose(np.abs(pts[16:]), 1.0)

    def test_assert_fresh(self):
        g = VerificationGrid(n_angles=8)
        g.assert_fresh(np.array([0.3, 0.0]))
        with pytest.raises(ValueError):
            g.assert_fresh(g.points()[:1])


class TestResidual:
    def test_truncated_inverse_series(self, scalar_half):
        # (1 - z/2) sum_{k<8} (z/2)^k - 1 = -(z/2)^8, largest on the unit circle
        G = CoeffSeries([[[0.5**k]] for k in range(8)])
        assert abs(bezout_residual(scalar_half, G) - 0.5**8) < 1e-14

    def test_exact_inverse(self, row_1z):
        G = CoeffSeries([[[1.0], [0.0]]])
        assert bezout_residual(row_1z, G) == 0.0

    def test_shape_mismatch(self, row_1z):
        with pytest.raises(DimensionMismatchError):
            bezout_residual(row_1z, CoeffSeries([[[1.0]]]))


class TestPeakNorm:
    def test_scalar(self, scalar_half):
        assert abs(peak_norm_certificate(scalar_half, 64) - 1.5) < 1e-12

    def test_refinement_finds_off_grid_peak(self):
        # peak at theta = 0.1, not a grid point of a 64-grid
        H = CoeffSeries([[[1.0]], [[0.9 * np.exp(-0.1j)]]])
        coarse = peak_norm_certificate(H, 64, refine=False)
        fine = peak_norm_certificate(H, 64)
        assert coarse < fine and abs(fine - 1.9) < 1e-9

    def test_grid_too_small(self, scalar_half):
        with pytest.raises(ValueError):
            peak_norm_certificate(scalar_half, 8)

    def test_section_bound_below_peak(self, row_mixed):
        G = precode(row_mixed, 1.3).with_taylor(64)
        assert peak_norm_section_bound(G.taylor, 63) <= G.verification.gnorm_grid + 1e-9


class TestOracles:
    def test_apply_section_matches_matrix(self, rng):
        H = random_fir(rng, 2, 3, 3)
        N = 6
        u = rng.standard_normal((N + 1, 2)) + 1j * rng.standard_normal((N + 1, 2))
        S = build_gamma_section(H, N).data
        np.testing.assert_allclose(apply_section(H, u).reshape(-1), S @ u.reshape(-1),
                                   atol=1e-12)

    def test_brute_force_is_upper_bound(self, rng):
        H = random_fir(rng, 2, 4, 4)
        for N in (1, 4, 16):
            rho = rho_of_section(build_gamma_section(H, N))
            assert brute_force_rho(H, N, 1000, seed=N) >= rho - 1e-12

    def test_brute_force_deterministic(self, row_mixed):
        assert brute_force_rho(row_mixed, 4, 50, seed=3) == brute_force_rho(row_mixed, 4, 50, seed=3)

    def test_trials_positive(self, row_mixed):
        with pytest.raises(ValueError):
            brute_force_rho(row_mixed, 2, 0)


class TestReport:
    def test_verify_and_round_trip(self, row_1z):
        G = precode(row_1z, 1.05, verify=False)
        rep = verify_precoder(row_1z, G)
        assert rep.passed and rep.residual_max <= 1e-6
        assert rep.gnorm_grid <= 1.05 * (1 + 1e-6)
        again = VerificationReport.from_dict(rep.to_dict())
        assert again.to_dict() == rep.to_dict()

    def test_energy_and_robustness(self):
        rep = VerificationReport(1e-9, 2.0, 2.0, 1e-6, 1e-6, {}, 64)
        assert rep.worst_case_energy == 4.0
        assert rep.robustness_bound(0.1) == pytest.approx(0.2)
        with pytest.raises(ValueError):
            rep.robustness_bound(-1.0)

    def test_norm_failure(self):
        rep = VerificationReport(1e-9, 2.1, 2.0, 1e-6, 1e-6, {}, 64)
        assert rep.residual_ok and not rep.norm_ok and not rep.passed


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 12))
def test_oracle_ordering(seed, N):
    rng = np.random.default_rng(seed)
    H = random_fir(rng, 1, 2, 3)
    rho = rho_of_section(build_gamma_section(H, N))
    assert brute_force_rho(H, N, 200, seed=seed) >= rho - 1e-12

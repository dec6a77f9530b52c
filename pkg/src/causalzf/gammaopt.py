"""Optimal causal right-inverse norm from finite Toeplitz sections.

For a causal channel ``H`` (m x n, m <= n) the section ``Gamma_{H,N}`` is the
block upper-triangular Toeplitz matrix whose block ``(i, j)`` is ``H_{j-i}^*``.
Its smallest singular value ``rho_N`` decreases monotonically to
``1 / gamma_opt`` and its largest singular value increases to ``||H||_inf``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import MonotonicityError, NotRightInvertibleError, NumericalFailureError
from .tfun import CoeffSeries, eval_many

__all__ = [
    "ConvergenceRecord",
    "GammaSection",
    "MONOTONE_SLACK",
    "StopReason",
    "boundary_sigma_extremes",
    "build_gamma_section",
    "delta_c_grid",
    "estimate_gamma_opt",
    "estimate_hinf_norm",
    "rho_of_section",
    "section_matrix",
    "section_singular_values",
]

MONOTONE_SLACK = 1e-10
DELTA_C_RADII = (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0 - 1e-3)


class StopReason(str, enum.Enum):
    TOLERANCE_MET = "tolerance-met"
    N_BUDGET = "N-budget"
    DETECTED_ZERO = "detected-zero"


@dataclass(frozen=True)
class GammaSection:
    N: int
    data: np.ndarray

    @property
    def block_shape(self) -> tuple[int, int]:
        rows, cols = self.data.shape
        return rows // (self.N + 1), cols // (self.N + 1)


@dataclass
class ConvergenceRecord:
    """Outcome of an N-doubling sweep over finite sections.

    ``gamma_estimate`` is ``math.inf`` when a zero ``rho`` was detected. When
    the budget runs out it is ``1 / rho_N`` for the last ``N``, which is a
    lower bound on the optimal norm.
    """

    rho_seq: list[tuple[int, float]]
    sigma_max_seq: list[tuple[int, float]]
    gamma_estimate: float
    converged: bool
    stop_reason: StopReason
    hinf_grid: float | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def gamma_is_lower_bound(self) -> bool:
        return not self.converged and math.isfinite(self.gamma_estimate)

    @property
    def last_N(self) -> int | None:
        return self.rho_seq[-1][0] if self.rho_seq else None

    @property
    def hinf_estimate(self) -> float | None:
        return self.sigma_max_seq[-1][1] if self.sigma_max_seq else None

    def table(self) -> list[tuple[int, float, float]]:
        return [(N, rho, smax) for (N, rho), (_, smax) in zip(self.rho_seq, self.sigma_max_seq)]


def build_gamma_section(H: CoeffSeries, N: int) -> GammaSection:
    """Assemble ``Gamma_{H,N}`` of shape ``(n(N+1), m(N+1))``."""
    N = int(N)
    if N < 0:
        raise ValueError(f"section degree must be nonnegative, got {N}")
    m, n = H.shape
    if m > n:
        raise NotRightInvertibleError(
            f"channel is {m}x{n} with m > n; no right inverse exists")
    return GammaSection(N=N, data=section_matrix(H.coeffs, N))


def section_matrix(coeffs: np.ndarray, N: int) -> np.ndarray:
    """Block upper-triangular Toeplitz matrix with block ``(i, j) = coeffs[j-i]^*``.

    No shape restriction; `build_gamma_section` adds the ``m <= n`` check.
    """
    _, m, n = coeffs.shape
    data = np.zeros((n * (N + 1), m * (N + 1)), dtype=complex)
    adj = coeffs.conj().transpose(0, 2, 1)
    for d in range(min(coeffs.shape[0] - 1, N) + 1):
        for i in range(N + 1 - d):
            j = i + d
            data[i * n:(i + 1) * n, j * m:(j + 1) * m] = adj[d]
    return data


def section_singular_values(section: GammaSection) -> np.ndarray:
    """All singular values of a section, descending."""
    try:
        return np.linalg.svd(section.data, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(
            f"SVD failed for section N={section.N}: {exc}", N=section.N) from exc


def rho_of_section(section: GammaSection) -> float:
    """Smallest singular value of the section."""
    return float(section_singular_values(section)[-1])


def _sweep_levels(N_max: int) -> list[int]:
    if N_max < 1:
        raise ValueError(f"N_max must be at least 1, got {N_max}")
    levels = [0]
    N = 1
    while N <= N_max:
        levels.append(N)
        N *= 2
    return levels


def _check_monotone(prev, cur, N, what, increasing):
    if prev is None:
        return
    broken = cur < prev - MONOTONE_SLACK if increasing else cur > prev + MONOTONE_SLACK
    if broken:
        raise MonotonicityError(
            f"{what} not monotone at N={N}: {prev!r} -> {cur!r}")


def _wide_record() -> ConvergenceRecord:
    return ConvergenceRecord(
        rho_seq=[], sigma_max_seq=[], gamma_estimate=math.inf, converged=True,
        stop_reason=StopReason.DETECTED_ZERO,
        notes=["m > n: right inverse cannot exist"])


def estimate_gamma_opt(H: CoeffSeries, abs_tol: float = 1e-6, N_max: int = 512,
                       zero_threshold: float = 1e-8) -> ConvergenceRecord:
    """Drive ``rho_N`` over ``N = 0, 1, 2, 4, ...`` until it stagnates.

    Stops with ``detected-zero`` when ``rho_N < zero_threshold`` at two
    consecutive levels, with ``tolerance-met`` when successive values differ
    by less than ``abs_tol``, and with ``N-budget`` otherwise. Stagnation is
    not an error bound: the sequence may plateau before its limit.
    """
    if not abs_tol > 0:
        raise ValueError(f"abs_tol must be positive, got {abs_tol}")
    if H.m > H.n:
        return _wide_record()
    rho_seq: list[tuple[int, float]] = []
    smax_seq: list[tuple[int, float]] = []
    prev_rho = prev_smax = None
    for N in _sweep_levels(N_max):
        sv = section_singular_values(build_gamma_section(H, N))
        rho, smax = float(sv[-1]), float(sv[0])
        _check_monotone(prev_rho, rho, N, "rho_N", increasing=False)
        _check_monotone(prev_smax, smax, N, "sigma_max_N", increasing=True)
        rho_seq.append((N, rho))
        smax_seq.append((N, smax))
        if prev_rho is not None:
            if rho < zero_threshold and prev_rho < zero_threshold:
                return ConvergenceRecord(rho_seq, smax_seq, math.inf, True,
                                         StopReason.DETECTED_ZERO)
            if abs(rho - prev_rho) < abs_tol:
                gamma = 1.0 / rho if rho > 0 else math.inf
                return ConvergenceRecord(rho_seq, smax_seq, gamma, True,
                                         StopReason.TOLERANCE_MET)
        prev_rho, prev_smax = rho, smax
    last = rho_seq[-1][1]
    gamma = 1.0 / last if last > 0 else math.inf
    return ConvergenceRecord(rho_seq, smax_seq, gamma, False, StopReason.N_BUDGET,
                             notes=["budget exhausted; gamma_estimate is a lower bound"])


def boundary_sigma_extremes(H: CoeffSeries, grid_size: int = 4096,
                            refine: bool = True) -> tuple[float, float]:
    """Grid estimates of ``ess inf sigma_min(H)`` and ``ess sup sigma_max(H)`` on the circle.

    With ``refine`` the best grid cells are polished by bounded scalar search,
    so the sup estimate stays a lower bound on ``||H||_inf`` but tightens.
    """
    theta = 2.0 * np.pi * np.arange(grid_size) / grid_size
    vals = eval_many(H, np.exp(1j * theta))
    sv = np.linalg.svd(vals, compute_uv=False)
    k = min(H.m, H.n)
    smin = sv[:, k - 1] if H.m <= H.n else np.zeros(grid_size)
    smax = sv[:, 0]
    lo, hi = float(smin.min()), float(smax.max())
    if refine:
        step = 2.0 * np.pi / grid_size

        def sv_at(t):
            return np.linalg.svd(eval_many(H, [np.exp(1j * t)])[0], compute_uv=False)

        for idx in np.argsort(smax)[-3:]:
            t0 = theta[idx]
            res = optimize.minimize_scalar(lambda t: -sv_at(t)[0],
                                           bounds=(t0 - step, t0 + step), method="bounded",
                                           options={"xatol": 1e-12})
            hi = max(hi, -float(res.fun))
        if H.m <= H.n:
            for idx in np.argsort(smin)[:3]:
                t0 = theta[idx]
                res = optimize.minimize_scalar(lambda t: sv_at(t)[k - 1],
                                               bounds=(t0 - step, t0 + step), method="bounded",
                                               options={"xatol": 1e-12})
                lo = min(lo, float(res.fun))
    return lo, hi


def estimate_hinf_norm(H: CoeffSeries, abs_tol: float = 1e-6, N_max: int = 512,
                       grid_size: int = 4096) -> ConvergenceRecord:
    """Drive ``sigma_max(Gamma_{H,N})`` upward to ``||H||_inf``.

    The record also carries the unit-circle grid value in ``hinf_grid``; both
    routes converge to the same number.
    """
    if not abs_tol > 0:
        raise ValueError(f"abs_tol must be positive, got {abs_tol}")
    _, grid = boundary_sigma_extremes(H, grid_size)
    if H.m > H.n:
        # Gamma of H^T-shaped data has the same sigma_max; sweep the transpose.
        Ht = CoeffSeries(H.coeffs.transpose(0, 2, 1))
        rec = estimate_hinf_norm(Ht, abs_tol, N_max, grid_size)
        rec.gamma_estimate = math.inf
        rec.notes.append("m > n: swept the transpose; gamma_opt is infinite")
        return rec
    rho_seq: list[tuple[int, float]] = []
    smax_seq: list[tuple[int, float]] = []
    prev_rho = prev_smax = None
    for N in _sweep_levels(N_max):
        sv = section_singular_values(build_gamma_section(H, N))
        rho, smax = float(sv[-1]), float(sv[0])
        _check_monotone(prev_rho, rho, N, "rho_N", increasing=False)
        _check_monotone(prev_smax, smax, N, "sigma_max_N", increasing=True)
        rho_seq.append((N, rho))
        smax_seq.append((N, smax))
        if prev_smax is not None and abs(smax - prev_smax) < abs_tol:
            gamma = 1.0 / rho if rho > 0 else math.inf
            return ConvergenceRecord(rho_seq, smax_seq, gamma, True,
                                     StopReason.TOLERANCE_MET, hinf_grid=grid)
        prev_rho, prev_smax = rho, smax
    rho = rho_seq[-1][1]
    return ConvergenceRecord(rho_seq, smax_seq, 1.0 / rho if rho > 0 else math.inf, False,
                             StopReason.N_BUDGET, hinf_grid=grid,
                             notes=["budget exhausted; section value is a lower bound"])


def delta_c_grid(H: CoeffSeries, grid_size: int = 256) -> float:
    """Grid estimate of ``delta_c = inf_z sigma_min(H(z))`` over the disc.

    Uses rings of radius 0, 1/3, 2/3 and 0.999 with ``grid_size`` angles.
    Positivity of this number is equivalent to a finite optimal norm, but it
    does not equal ``1 / gamma_opt`` in general.
    """
    if grid_size < 8:
        raise ValueError(f"grid_size must be at least 8, got {grid_size}")
    if H.m > H.n:
        return 0.0
    theta = 2.0 * np.pi * np.arange(grid_size) / grid_size
    pts = np.concatenate([[0.0]] + [r * np.exp(1j * theta) for r in DELTA_C_RADII[1:]])
    vals = eval_many(H, pts)
    # sqrt(lambda_min(H H^*)) is the m-th singular value of H
    sv = np.linalg.svd(vals, compute_uv=False)
    return float(sv[:, H.m - 1].min())

"""Independent certification of a channel/precoder pair, plus test oracles.

Nothing here uses the construction path: residuals and norms come from
direct evaluation on grids, and `brute_force_rho` applies the Toeplitz
section by polynomial convolution instead of assembling it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import DimensionMismatchError
from .gammaopt import section_matrix
from .tfun import CoeffSeries, eval_many

__all__ = [
    "VerificationGrid",
    "VerificationReport",
    "apply_section",
    "bezout_residual",
    "brute_force_rho",
    "peak_norm_certificate",
    "peak_norm_section_bound",
    "verify_precoder",
]

NORM_RTOL = 1e-6


@dataclass(frozen=True)
class VerificationGrid:
    """Concentric rings plus the unit circle, rotated off the usual node angles.

    The angular phase is an irrational fraction of a step, so grid points do
    not coincide with equally spaced construction nodes.
    """

    radii: tuple[float, ...] = (0.5, 0.9, 0.99, 1.0)
    n_angles: int = 256
    phase: float = (math.sqrt(5.0) - 1.0) / 2.0

    def points(self) -> np.ndarray:
        step = 2.0 * np.pi / self.n_angles
        theta = step * (np.arange(self.n_angles) + self.phase)
        return np.concatenate([r * np.exp(1j * theta) for r in self.radii])

    def assert_fresh(self, nodes, min_dist: float = 1e-9):
        """Raise ``ValueError`` if a grid point sits on a construction node."""
        if nodes is None or len(nodes) == 0:
            return
        pts = self.points()
        d = np.abs(pts[:, None] - np.asarray(nodes)[None, :]).min()
        if d <= min_dist:
            raise ValueError(f"verification grid touches a construction node (distance {d:.2e})")

    def describe(self) -> dict:
        return {"radii": list(self.radii), "n_angles": self.n_angles, "phase": self.phase}


def _values(G, zs) -> np.ndarray:
    if isinstance(G, CoeffSeries):
        return eval_many(G, zs)
    return G.eval_many(zs)


def _shape(G) -> tuple[int, int]:
    return G.shape


def bezout_residual(H: CoeffSeries, G, grid: VerificationGrid | None = None) -> float:
    """``max_z sigma_max(H(z) G(z) - I)`` over the grid.

    ``G`` is a `Precoder` or a `CoeffSeries` of shape ``n x m``.
    """
    grid = grid or VerificationGrid()
    if _shape(G) != (H.n, H.m):
        raise DimensionMismatchError(
            f"channel is {H.m}x{H.n} but precoder is {_shape(G)[0]}x{_shape(G)[1]}")
    zs = grid.points()
    E = eval_many(H, zs) @ _values(G, zs) - np.eye(H.m)
    return float(np.linalg.svd(E, compute_uv=False)[:, 0].max())


def peak_norm_certificate(G, grid_size: int = 4096, refine: bool = True) -> float:
    """``max sigma_max(G(zeta))`` over a uniform unit-circle grid.

    This is a lower bound on ``||G||_inf``; ``refine`` polishes the best
    cells by bounded scalar search, which can only raise it.
    """
    if grid_size < 64:
        raise ValueError(f"grid_size must be at least 64, got {grid_size}")
    theta = 2.0 * np.pi * np.arange(grid_size) / grid_size
    smax = np.linalg.svd(_values(G, np.exp(1j * theta)), compute_uv=False)[:, 0]
    best = float(smax.max())
    if refine:
        step = 2.0 * np.pi / grid_size

        def neg(t):
            return -np.linalg.svd(_values(G, [np.exp(1j * t)])[0], compute_uv=False)[0]

        for idx in np.argsort(smax)[-3:]:
            res = optimize.minimize_scalar(neg, bounds=(theta[idx] - step, theta[idx] + step),
                                           method="bounded", options={"xatol": 1e-12})
            best = max(best, -float(res.fun))
    return best


def peak_norm_section_bound(taylor: np.ndarray, N: int) -> float:
    """``sigma_max`` of the degree-``N`` Toeplitz section of cached coefficients.

    Nondecreasing in ``N`` and bounded by ``||G||_inf`` only if the cached
    coefficients are exact; a cross-check for the grid certificate.
    """
    K = taylor.shape[0]
    N = min(N, K - 1)
    return float(np.linalg.svd(section_matrix(taylor[:N + 1], N), compute_uv=False)[0])


def apply_section(H: CoeffSeries, u: np.ndarray) -> np.ndarray:
    """Truncated ``P_N (H^* u)`` by explicit convolution.

    ``u`` has shape ``(N + 1, m)`` or ``(N + 1, m, trials)``; coefficient
    ``k`` of the result is ``sum_j H_j^* u_{k+j}``.
    """
    u = np.asarray(u, dtype=complex)
    squeeze = u.ndim == 2
    if squeeze:
        u = u[..., None]
    Np1 = u.shape[0]
    out = np.zeros((Np1, H.n, u.shape[2]), dtype=complex)
    for j in range(min(H.degree + 1, Np1)):
        Hj_adj = H.coeffs[j].conj().T
        out[: Np1 - j] += np.einsum("ab,kbt->kat", Hj_adj, u[j:])
    return out[..., 0] if squeeze else out


def brute_force_rho(H: CoeffSeries, N: int, trials: int = 1000, seed=0) -> float:
    """Minimum of ``||P_N T_{H^*} u||`` over random unit-norm degree-``N`` ``u``.

    An upper bound on ``rho_N``; deterministic for a given ``seed``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    shape = (N + 1, H.m, trials)
    u = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    u /= np.sqrt(np.sum(np.abs(u) ** 2, axis=(0, 1)))
    v = apply_section(H, u)
    return float(np.sqrt(np.sum(np.abs(v) ** 2, axis=(0, 1))).min())


@dataclass
class VerificationReport:
    """Residual and norm figures for one channel/precoder pair."""

    residual_max: float
    gnorm_grid: float
    gamma: float
    residual_tol: float
    norm_rtol: float
    grid: dict
    peak_grid_size: int
    section_bound: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def worst_case_energy(self) -> float:
        return self.gnorm_grid * self.gnorm_grid

    def robustness_bound(self, delta: float) -> float:
        """Worst-case error norm ``delta * ||G||`` for a perturbation of size ``delta``."""
        if delta < 0:
            raise ValueError("perturbation size must be nonnegative")
        return delta * self.gnorm_grid

    @property
    def residual_ok(self) -> bool:
        return self.residual_max <= self.residual_tol

    @property
    def norm_ok(self) -> bool:
        return self.gnorm_grid <= self.gamma * (1.0 + self.norm_rtol)

    @property
    def passed(self) -> bool:
        return self.residual_ok and self.norm_ok

    def to_dict(self) -> dict:
        return {
            "residual_max": self.residual_max,
            "gnorm_grid": self.gnorm_grid,
            "worst_case_energy": self.worst_case_energy,
            "gamma": self.gamma,
            "residual_tol": self.residual_tol,
            "norm_rtol": self.norm_rtol,
            "grid": self.grid,
            "peak_grid_size": self.peak_grid_size,
            "section_bound": self.section_bound,
            "residual_ok": self.residual_ok,
            "norm_ok": self.norm_ok,
            "passed": self.passed,
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        return cls(residual_max=d["residual_max"], gnorm_grid=d["gnorm_grid"], gamma=d["gamma"],
                   residual_tol=d["residual_tol"], norm_rtol=d["norm_rtol"], grid=d["grid"],
                   peak_grid_size=d["peak_grid_size"], section_bound=d.get("section_bound"),
                   extra=d.get("extra", {}))


def verify_precoder(H: CoeffSeries, G, grid: VerificationGrid | None = None,
                    residual_tol: float = 1e-6, norm_rtol: float = NORM_RTOL,
                    peak_grid_size: int = 4096) -> VerificationReport:
    grid = grid or VerificationGrid()
    res = bezout_residual(H, G, grid)
    gnorm = peak_norm_certificate(G, peak_grid_size)
    section = None
    taylor = getattr(G, "taylor", None)
    if taylor is not None and taylor.shape[0] > 1:
        section = peak_norm_section_bound(taylor, taylor.shape[0] - 1)
    return VerificationReport(residual_max=res, gnorm_grid=gnorm, gamma=float(G.gamma),
                              residual_tol=residual_tol, norm_rtol=norm_rtol,
                              grid=grid.describe(), peak_grid_size=peak_grid_size,
                              section_bound=section)

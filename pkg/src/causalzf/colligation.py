"""Causal right inverses with bounded peak norm by the lurking-isometry method.

For ``Hs = gamma * H`` with a Schur-class right inverse, the kernel

    K(z, w) = (Hs(z) Hs(w)^* - I) / (1 - z conj(w))

is positive. Factoring it as ``W(z) W(w)^*`` gives generator pairs

    [conj(w) W(w)^*; Hs(w)^*] e  ->  [W(w)^*; I] e

that define an isometry. Extending that isometry by zero gives a
contraction ``[[A, B], [C, D]]``, and

    G(z) = gamma * (D^* + B^* (I - z A^*)^{-1} z C^*)

is a causal right inverse of ``H`` with ``||G||_inf <= gamma``.

Two generator bases are supported:

``points``
    Kernel samples at finitely many interior nodes ``w_j``.
``taylor``
    Taylor coefficients at the origin up to a degree ``P``. Here the kernel
    section is ``Gamma_{Hs,P}^* Gamma_{Hs,P} - I``, and a generator family
    is closed under the isometry up to the truncation edge. The realised
    inverse converges geometrically in ``P`` on the closed disc.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy import linalg

from .errors import (
    ContractionViolationError,
    InconsistentIsometryError,
    InvalidScaleError,
    NotPositiveKernelError,
    NotRightInvertibleError,
    NumericalFailureError,
    RealizationError,
)
from .gammaopt import build_gamma_section
from .tfun import CoeffSeries, DiscPoint, eval_at, eval_many, scale

__all__ = [
    "Colligation",
    "IsometryData",
    "KernelSamples",
    "NodeSpec",
    "Precoder",
    "Tolerances",
    "build_isometry_data",
    "factor_kernel",
    "factor_kernel_taylor",
    "kernel_eval",
    "precode",
    "realize_precoder",
    "solve_colligation",
]


@dataclass(frozen=True)
class Tolerances:
    psd_tol: float = 1e-8
    fit_tol: float = 1e-7
    op_tol: float = 1e-8
    residual_tol: float = 1e-6
    rank_tol: float = 1e-10

    def __post_init__(self):
        for name in ("psd_tol", "fit_tol", "op_tol", "residual_tol", "rank_tol"):
            val = getattr(self, name)
            if not (val > 0 and math.isfinite(val)):
                raise ValueError(f"{name} must be positive and finite, got {val!r}")


_RINGS_RE = re.compile(r"^rings:([0-9.eE+\-,]+)x(\d+)$")
_TAYLOR_RE = re.compile(r"^taylor:(\d+)(?::(\d+))?$")


@dataclass(frozen=True)
class NodeSpec:
    """Where kernel generators are taken.

    ``kind="taylor"`` starts at ``degree`` and doubles up to ``max_degree``
    until the fresh-grid residual passes. ``kind="rings"`` uses ``count``
    equally spaced nodes on each radius in ``radii``.

    Text form: ``taylor:32``, ``taylor:32:512`` or ``rings:0.3,0.7x12``.
    """

    kind: str = "taylor"
    degree: int = 32
    max_degree: int = 512
    radii: tuple[float, ...] = (0.3, 0.7)
    count: int = 12

    def __post_init__(self):
        if self.kind not in ("taylor", "rings"):
            raise ValueError(f"unknown node kind {self.kind!r}")
        if self.kind == "taylor":
            if self.degree < 1 or self.max_degree < self.degree:
                raise ValueError("need 1 <= degree <= max_degree")
        else:
            if self.count < 1 or not self.radii:
                raise ValueError("rings need at least one radius and one node")
            if any(not 0.0 <= r < 1.0 for r in self.radii):
                raise ValueError(f"ring radii must lie in [0, 1), got {self.radii}")

    @classmethod
    def parse(cls, text: str) -> "NodeSpec":
        text = text.strip()
        mt = _TAYLOR_RE.match(text)
        if mt:
            deg = int(mt.group(1))
            top = int(mt.group(2)) if mt.group(2) else max(deg, cls.max_degree)
            return cls(kind="taylor", degree=deg, max_degree=top)
        mr = _RINGS_RE.match(text)
        if mr:
            radii = tuple(float(r) for r in mr.group(1).split(",") if r)
            return cls(kind="rings", radii=radii, count=int(mr.group(2)))
        raise ValueError(f"cannot parse node spec {text!r}; "
                         "expected 'taylor:P[:Pmax]' or 'rings:r1,r2xJ'")

    def __str__(self):
        if self.kind == "taylor":
            return f"taylor:{self.degree}:{self.max_degree}"
        return "rings:" + ",".join(repr(r) for r in self.radii) + f"x{self.count}"

    def nodes(self) -> np.ndarray:
        if self.kind != "rings":
            raise ValueError("only ring specs have point nodes")
        theta = 2.0 * np.pi * np.arange(self.count) / self.count
        pts = []
        for r in self.radii:
            pts.extend([0.0] if r == 0.0 else list(r * np.exp(1j * theta)))
        return np.asarray(pts, dtype=complex)


@dataclass(frozen=True, eq=False)
class KernelSamples:
    """Gram matrix of kernel generators and its factor.

    ``W_cols`` is ``r x (J*m)``; block column ``j`` stands for ``W(w_j)^*``
    (points) or for the ``j``-th Taylor coefficient of ``W(w)^*`` in
    ``conj(w)`` (taylor). ``W_cols^H W_cols`` reproduces ``gram``.
    """

    basis: str
    m: int
    gram: np.ndarray
    W_cols: np.ndarray
    eigenvalues: np.ndarray
    nodes: np.ndarray | None = None
    degree: int | None = None

    @property
    def rank(self) -> int:
        return self.W_cols.shape[0]

    @property
    def count(self) -> int:
        return self.gram.shape[0] // self.m

    def W_block(self, j: int) -> np.ndarray:
        return self.W_cols[:, j * self.m:(j + 1) * self.m]


@dataclass(frozen=True, eq=False)
class IsometryData:
    """Generator matrices for the isometry ``D0_gen -> R0_gen`` column by column."""

    D0_gen: np.ndarray
    R0_gen: np.ndarray
    state_dim: int

    @property
    def n(self) -> int:
        return self.D0_gen.shape[0] - self.state_dim

    @property
    def m(self) -> int:
        return self.R0_gen.shape[0] - self.state_dim

    def __iter__(self):
        yield self.D0_gen
        yield self.R0_gen


@dataclass(frozen=True, eq=False)
class Colligation:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        r = self.A.shape[0]
        m, n = self.D.shape
        if (self.A.shape != (r, r) or self.B.shape != (r, n) or self.C.shape != (m, r)):
            raise ValueError(
                f"inconsistent block shapes A{self.A.shape} B{self.B.shape} "
                f"C{self.C.shape} D{self.D.shape}")

    @property
    def state_dim(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.D.shape[0]

    @property
    def n(self) -> int:
        return self.D.shape[1]

    def operator(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])

    def op_norm(self) -> float:
        M = self.operator()
        if M.size == 0:
            return 0.0
        return float(np.linalg.norm(M, 2))


def kernel_eval(Hs: CoeffSeries, z, w) -> np.ndarray:
    """``(Hs(z) Hs(w)^* - I) / (1 - z conj(w))`` for interior ``z, w``."""
    z = z.z if isinstance(z, DiscPoint) else complex(z)
    w = w.z if isinstance(w, DiscPoint) else complex(w)
    if not (abs(z) < 1.0 and abs(w) < 1.0):
        raise ValueError("kernel is only defined on interior points")
    Hz, Hw = eval_at(Hs, z), eval_at(Hs, w)
    return (Hz @ Hw.conj().T - np.eye(Hs.m)) / (1.0 - z * np.conj(w))


def _factor_gram(gram, psd_tol, rank_tol):
    gram = 0.5 * (gram + gram.conj().T)
    try:
        lam, U = np.linalg.eigh(gram)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"kernel eigendecomposition failed: {exc}") from exc
    lam_min = float(lam[0]) if lam.size else 0.0
    if lam_min < -psd_tol:
        raise NotPositiveKernelError(
            f"kernel Gram matrix has eigenvalue {lam_min:.3e} < -{psd_tol:g}: "
            "gamma is below the optimal norm or numerically too close to it",
            min_eigenvalue=lam_min)
    lam = np.clip(lam, 0.0, None)
    top = float(lam[-1]) if lam.size else 0.0
    keep = lam > rank_tol * top if top > 0 else np.zeros(lam.shape, dtype=bool)
    W_cols = np.sqrt(lam[keep])[:, None] * U[:, keep].conj().T
    return gram, lam, W_cols


def factor_kernel(Hs: CoeffSeries, nodes, psd_tol: float = 1e-8,
                  rank_tol: float = 1e-10) -> KernelSamples:
    """Sample the kernel at interior ``nodes`` and factor its Gram matrix.

    Raises `NotPositiveKernelError` when an eigenvalue is below ``-psd_tol``.
    """
    pts = np.asarray([p.z if isinstance(p, DiscPoint) else complex(p) for p in nodes],
                     dtype=complex)
    if pts.size == 0:
        raise ValueError("need at least one node")
    if np.any(np.abs(pts) >= 1.0):
        raise ValueError("nodes must lie strictly inside the unit disc")
    if len(np.unique(np.round(pts, 14))) != pts.size:
        raise ValueError("nodes must be distinct")
    m = Hs.m
    vals = eval_many(Hs, pts)
    J = pts.size
    # block (i, j) = (H(w_i) H(w_j)^* - I) / (1 - w_i conj(w_j))
    outer = np.einsum("iab,jcb->iajc", vals, vals.conj()).reshape(J * m, J * m)
    eye = np.kron(np.ones((J, J)), np.eye(m))
    denom = np.kron(1.0 - np.outer(pts, pts.conj()), np.ones((m, m)))
    gram, lam, W_cols = _factor_gram((outer - eye) / denom, psd_tol, rank_tol)
    return KernelSamples("points", m, gram, W_cols, lam, nodes=pts)


def factor_kernel_taylor(Hs: CoeffSeries, degree: int, psd_tol: float = 1e-8,
                         rank_tol: float = 1e-10) -> KernelSamples:
    """Factor the Taylor-coefficient section of the kernel up to ``degree``.

    The kernel's coefficient block ``(p, q)`` (of ``z^p conj(w)^q``) equals
    block ``(p, q)`` of ``Gamma^* Gamma - I`` with ``Gamma = Gamma_{Hs,degree}``.
    Its smallest eigenvalue is ``rho_degree(Hs)^2 - 1``.
    """
    if Hs.m > Hs.n:
        raise NotRightInvertibleError(f"channel is {Hs.m}x{Hs.n} with m > n")
    G = build_gamma_section(Hs, degree).data
    gram = G.conj().T @ G - np.eye(G.shape[1])
    gram, lam, W_cols = _factor_gram(gram, psd_tol, rank_tol)
    return KernelSamples("taylor", Hs.m, gram, W_cols, lam, degree=int(degree))


def build_isometry_data(ks: KernelSamples, Hs: CoeffSeries) -> IsometryData:
    """Stack domain and range generators, one block column per node.

    points: ``[conj(w_j) W_j; Hs(w_j)^*] -> [W_j; I]``.
    taylor: ``[W_{p-1}; Hs_p^*] -> [W_p; delta_{p0} I]``, the same relation
    read coefficient-wise in ``conj(w)``.
    """
    m, n, r, J = Hs.m, Hs.n, ks.rank, ks.count
    if ks.m != m:
        raise ValueError(f"kernel samples are for m={ks.m}, channel has m={m}")
    D0 = np.zeros((r + n, J * m), dtype=complex)
    R0 = np.zeros((r + m, J * m), dtype=complex)
    R0[:r] = ks.W_cols
    if ks.basis == "points":
        vals = eval_many(Hs, ks.nodes)
        for j, w in enumerate(ks.nodes):
            cols = slice(j * m, (j + 1) * m)
            D0[:r, cols] = np.conj(w) * ks.W_cols[:, cols]
            D0[r:, cols] = vals[j].conj().T
            R0[r:, cols] = np.eye(m)
    elif ks.basis == "taylor":
        for p in range(J):
            cols = slice(p * m, (p + 1) * m)
            if p > 0:
                D0[:r, cols] = ks.W_cols[:, (p - 1) * m:p * m]
            D0[r:, cols] = Hs.coeff(p).conj().T
        R0[r:, :m] = np.eye(m)
    else:
        raise ValueError(f"unknown basis {ks.basis!r}")
    return IsometryData(D0, R0, r)


def solve_colligation(data: IsometryData, fit_tol: float = 1e-7,
                      op_tol: float = 1e-8) -> Colligation:
    """Extend the generator isometry by zero and split it into ``A, B, C, D``.

    The map is built on an orthonormal basis of the span of ``D0_gen``.
    Directions whose singular value is below the square root of the Gram
    mismatch carry no reliable information and are treated as outside the
    span; the remaining map is snapped to the nearest isometry.
    """
    D0, R0, r = data.D0_gen, data.R0_gen, data.state_dim
    n, m = data.n, data.m
    gram_d = D0.conj().T @ D0
    gram_r = R0.conj().T @ R0
    scale_g = 1.0 + (np.linalg.norm(gram_r, 2) if gram_r.size else 0.0)
    mismatch = float(np.abs(gram_d - gram_r).max()) if gram_d.size else 0.0
    if mismatch > fit_tol * scale_g:
        raise InconsistentIsometryError(
            f"generator Gram matrices differ by {mismatch:.3e} > "
            f"{fit_tol:g} * {scale_g:.3e}")

    try:
        Q, s, Vh = np.linalg.svd(D0, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"SVD of domain generators failed: {exc}") from exc
    eps = np.finfo(float).eps
    floor = math.sqrt(max(np.linalg.norm(gram_d - gram_r, 2) if gram_d.size else 0.0,
                          eps * scale_g))
    keep = s > floor
    Q, s, Vh = Q[:, keep], s[keep], Vh[keep]
    if s.size:
        M = (R0 @ Vh.conj().T) / s
        X, _, Yh = np.linalg.svd(M, full_matrices=False)
        V = (X @ Yh) @ Q.conj().T
    else:
        V = np.zeros((r + m, r + n), dtype=complex)

    col = Colligation(A=V[:r, :r], B=V[:r, r:], C=V[r:, :r], D=V[r:, r:])
    nrm = col.op_norm()
    if nrm > 1.0 + op_tol:
        raise ContractionViolationError(f"||V00|| = {nrm:.12g} exceeds 1 + {op_tol:g}")
    rel = V @ D0 - R0
    state_res = float(np.linalg.norm(rel[:r], axis=0).max()) if rel.size and r else 0.0
    out_res = float(np.linalg.norm(rel[r:], axis=0).max()) if rel.size else 0.0
    if max(state_res, out_res) > fit_tol:
        raise InconsistentIsometryError(
            f"node relations violated: state {state_res:.3e}, output {out_res:.3e} "
            f"> {fit_tol:g}")
    diag = {
        "gram_mismatch": mismatch,
        "gram_scale": float(scale_g),
        "state_relation_residual": state_res,
        "output_relation_residual": out_res,
        "op_norm": nrm,
        "span_rank": int(s.size),
        "span_floor": floor,
    }
    return replace(col, diagnostics=diag)


@dataclass(frozen=True, eq=False)
class Precoder:
    """Causal precoder ``G(z) = gamma (D^* + B^* (I - z A^*)^{-1} z C^*)``.

    ``G`` has ``n`` rows and ``m`` columns for an ``m x n`` channel.
    """

    gamma: float
    colligation: Colligation
    taylor: np.ndarray | None = None
    verification: object | None = field(default=None, compare=False)
    info: dict = field(default_factory=dict, compare=False)

    @property
    def m(self) -> int:
        return self.colligation.m

    @property
    def n(self) -> int:
        return self.colligation.n

    @property
    def shape(self) -> tuple[int, int]:
        return self.n, self.m

    @cached_property
    def _schur(self):
        col = self.colligation
        As = col.A.conj().T
        if As.size == 0:
            return None
        T, Z = linalg.schur(As, output="complex")
        left = col.B.conj().T @ Z          # n x r
        right = Z.conj().T @ col.C.conj().T  # r x m
        return T, left, right

    def eval(self, z) -> np.ndarray:
        z = z.z if isinstance(z, DiscPoint) else complex(z)
        return self.eval_many(np.array([z]))[0]

    __call__ = eval

    def eval_many(self, zs) -> np.ndarray:
        """Evaluate on an array of points; shape ``(len(zs), n, m)``."""
        zs = np.asarray(zs, dtype=complex).reshape(-1)
        col = self.colligation
        Ds = col.D.conj().T
        out = np.broadcast_to(Ds, (zs.size,) + Ds.shape).astype(complex)
        sch = self._schur
        if sch is not None:
            T, left, right = sch
            r = T.shape[0]
            eye = np.eye(r)
            for i, z in enumerate(zs):
                M = eye - z * T
                diag = np.abs(np.diag(M))
                if diag.min() <= 1e-13 * max(1.0, diag.max()):
                    raise RealizationError(f"I - z A^* is singular at z = {z}")
                X = linalg.solve_triangular(M, z * right, lower=False)
                out[i] += left @ X
        return self.gamma * out

    def taylor_coeffs(self, K: int) -> np.ndarray:
        """First ``K`` Taylor coefficients ``G_0 .. G_{K-1}``, shape ``(K, n, m)``."""
        if self.taylor is not None and self.taylor.shape[0] >= K:
            return self.taylor[:K]
        col = self.colligation
        As, Bs, Cs = col.A.conj().T, col.B.conj().T, col.C.conj().T
        out = np.zeros((K, col.n, col.m), dtype=complex)
        if K == 0:
            return out
        out[0] = self.gamma * col.D.conj().T
        X = Cs
        for k in range(1, K):
            out[k] = self.gamma * (Bs @ X)
            X = As @ X
        return out

    def with_taylor(self, K: int) -> "Precoder":
        return replace(self, taylor=self.taylor_coeffs(K))


def realize_precoder(col: Colligation, gamma: float, op_tol: float = 1e-8) -> Precoder:
    """Wrap a contractive colligation as the precoder ``gamma * G~``."""
    gamma = _check_gamma(gamma)
    nrm = col.op_norm()
    if nrm > 1.0 + op_tol:
        raise ContractionViolationError(f"||[[A,B],[C,D]]|| = {nrm:.12g} exceeds 1 + {op_tol:g}")
    return Precoder(gamma=gamma, colligation=col)


def _check_gamma(gamma) -> float:
    try:
        g = float(gamma)
    except (TypeError, ValueError):
        raise InvalidScaleError(f"gamma must be a positive real, got {gamma!r}")
    if not (g > 0 and math.isfinite(g)):
        raise InvalidScaleError(f"gamma must be positive and finite, got {gamma!r}")
    return g


def _build_once(Hs, spec: NodeSpec, degree, tols: Tolerances):
    if spec.kind == "taylor":
        ks = factor_kernel_taylor(Hs, degree, tols.psd_tol, tols.rank_tol)
    else:
        ks = factor_kernel(Hs, spec.nodes(), tols.psd_tol, tols.rank_tol)
    data = build_isometry_data(ks, Hs)
    return ks, solve_colligation(data, tols.fit_tol, tols.op_tol)


def _constant_precoder(H: CoeffSeries, gamma: float, tols: Tolerances) -> Precoder:
    """State-free realization ``G = H_0^+`` for a constant channel."""
    H0 = H.coeffs[0]
    smin = float(np.linalg.svd(H0, compute_uv=False)[-1])
    lam = (gamma * smin) ** 2 - 1.0
    if lam < -tols.psd_tol:
        raise NotPositiveKernelError(
            f"constant kernel coefficient {lam:.3e} < -{tols.psd_tol:g}: "
            "gamma is below the optimal norm", min_eigenvalue=lam)
    D = (np.linalg.pinv(H0) / gamma).conj().T
    r = 0
    col = Colligation(A=np.zeros((r, r), complex), B=np.zeros((r, H.n), complex),
                      C=np.zeros((H.m, r), complex), D=D)
    G = realize_precoder(col, gamma, tols.op_tol)
    return replace(G, info={"basis": "constant", "state_dim": 0, "op_norm": col.op_norm(),
                            "kernel_min_eigenvalue": lam})


def precode(H: CoeffSeries, gamma: float, nodes: NodeSpec | None = None,
            tols: Tolerances | None = None, grid=None, verify: bool = True) -> Precoder:
    """Build a causal right inverse ``G`` of ``H`` with ``||G||_inf <= gamma``.

    ``gamma`` should exceed the optimal norm by a margin (1.05x by default in
    the CLI). At the optimal norm itself the kernel is singular and the
    factorization is ill-conditioned.

    With Taylor generators the degree is doubled until the fresh-grid Bezout
    residual is below ``tols.residual_tol`` or ``nodes.max_degree`` is hit.
    The returned precoder carries a `VerificationReport` when ``verify``.
    """
    from .verify import VerificationGrid, verify_precoder

    gamma = _check_gamma(gamma)
    if H.m > H.n:
        raise NotRightInvertibleError(f"channel is {H.m}x{H.n} with m > n")
    nodes = nodes or NodeSpec()
    tols = tols or Tolerances()
    grid = grid or VerificationGrid()
    if H.degree == 0:
        G = _constant_precoder(H, gamma, tols)
        if verify:
            G = replace(G, verification=verify_precoder(H, G, grid,
                                                        residual_tol=tols.residual_tol))
        return G
    Hs = scale(H, gamma)

    degree = nodes.degree if nodes.kind == "taylor" else None
    while True:
        ks, col = _build_once(Hs, nodes, degree, tols)
        G = realize_precoder(col, gamma, tols.op_tol)
        info = {
            "basis": ks.basis,
            "degree": ks.degree,
            "node_count": ks.count,
            "kernel_rank": ks.rank,
            "kernel_min_eigenvalue": float(ks.eigenvalues[0]) if ks.eigenvalues.size else 0.0,
            "state_dim": col.state_dim,
            **col.diagnostics,
        }
        G = replace(G, info=info)
        if not verify:
            return G
        if nodes.kind == "rings":
            grid.assert_fresh(ks.nodes)
        report = verify_precoder(H, G, grid, residual_tol=tols.residual_tol)
        G = replace(G, verification=report)
        done = report.residual_max <= tols.residual_tol
        if nodes.kind != "taylor" or done or degree >= nodes.max_degree:
            return G
        degree = min(2 * degree, nodes.max_degree)

"""Matrix transfer functions given by finitely many Taylor coefficients.

A causal FIR channel ``H(z) = sum_k H_k z^k`` is stored as a dense complex
array of shape ``(L + 1, m, n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number

import numpy as np

from .errors import InvalidScaleError, MalformedInputError

__all__ = [
    "BOUNDARY_SLACK",
    "CoeffSeries",
    "DiscPoint",
    "adjoint_coeff",
    "eval_at",
    "scale",
]

BOUNDARY_SLACK = 1e-12


@dataclass(frozen=True)
class DiscPoint:
    """A point of the closed unit disc.

    ``boundary`` marks points used for unit-circle grids.
    """

    z: complex
    boundary: bool = False

    def __post_init__(self):
        z = complex(self.z)
        if not np.isfinite(z.real) or not np.isfinite(z.imag):
            raise MalformedInputError(f"non-finite disc point {z!r}", field="z")
        if abs(z) > 1.0 + BOUNDARY_SLACK:
            raise MalformedInputError(f"|z| = {abs(z):.17g} exceeds 1", field="z")
        object.__setattr__(self, "z", z)

    @classmethod
    def on_circle(cls, theta: float) -> "DiscPoint":
        return cls(complex(np.cos(theta), np.sin(theta)), boundary=True)

    @property
    def interior(self) -> bool:
        return abs(self.z) < 1.0


def _as_point(z) -> complex:
    if isinstance(z, DiscPoint):
        return z.z
    return DiscPoint(z).z


class CoeffSeries:
    """Causal matrix transfer function ``H(z) = sum_{k=0}^L H_k z^k``.

    Parameters
    ----------
    coeffs : array_like
        Sequence of ``L + 1`` complex ``m x n`` matrices, or an array of
        shape ``(L + 1, m, n)``.

    The stored array is read-only; all operations return new objects.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs):
        arr = _coerce_coeffs(coeffs)
        arr.setflags(write=False)
        self._c = arr

    @classmethod
    def constant(cls, matrix) -> "CoeffSeries":
        return cls([np.atleast_2d(np.asarray(matrix, dtype=complex))])

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def m(self) -> int:
        return self._c.shape[1]

    @property
    def n(self) -> int:
        return self._c.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        return self._c.shape[1:]

    @property
    def degree(self) -> int:
        return self._c.shape[0] - 1

    def coeff(self, k: int) -> np.ndarray:
        """Coefficient ``H_k``; zero outside ``0..L``."""
        if 0 <= k <= self.degree:
            return self._c[k]
        return np.zeros(self.shape, dtype=complex)

    def eval(self, z) -> np.ndarray:
        return eval_at(self, z)

    def __call__(self, z) -> np.ndarray:
        return eval_at(self, z)

    def __add__(self, other: "CoeffSeries") -> "CoeffSeries":
        if not isinstance(other, CoeffSeries):
            return NotImplemented
        if other.shape != self.shape:
            raise MalformedInputError(
                f"cannot add {self.shape} and {other.shape} series", field="coeffs")
        L = max(self.degree, other.degree)
        out = np.zeros((L + 1,) + self.shape, dtype=complex)
        out[: self.degree + 1] += self._c
        out[: other.degree + 1] += other._c
        return CoeffSeries(out)

    def __eq__(self, other):
        if not isinstance(other, CoeffSeries):
            return NotImplemented
        return self._c.shape == other._c.shape and bool(np.array_equal(self._c, other._c))

    def __hash__(self):
        return hash((self._c.shape, self._c.tobytes()))

    def __repr__(self):
        return f"CoeffSeries(m={self.m}, n={self.n}, degree={self.degree})"


def _coerce_coeffs(coeffs) -> np.ndarray:
    if isinstance(coeffs, CoeffSeries):
        return coeffs.coeffs.copy()
    if isinstance(coeffs, np.ndarray):
        arr = coeffs
    else:
        items = list(coeffs)
        if not items:
            raise MalformedInputError("coefficient list is empty", field="coeffs")
        try:
            mats = [np.atleast_2d(np.asarray(c, dtype=complex)) for c in items]
        except (TypeError, ValueError) as exc:
            raise MalformedInputError(f"ragged or non-numeric coefficients: {exc}",
                                      field="coeffs") from exc
        shapes = {mat.shape for mat in mats}
        if len(shapes) != 1 or mats[0].ndim != 2:
            raise MalformedInputError(
                f"coefficient matrices have differing shapes {sorted(shapes)}",
                field="coeffs")
        arr = np.stack(mats)
    try:
        arr = np.array(arr, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise MalformedInputError(f"coefficients are not numeric: {exc}", field="coeffs")
    if arr.ndim != 3 or arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
        raise MalformedInputError(
            f"expected coefficient array of shape (L+1, m, n), got {arr.shape}",
            field="coeffs")
    if not np.all(np.isfinite(arr)):
        raise MalformedInputError("coefficients contain non-finite values", field="coeffs")
    return arr


def eval_at(H: CoeffSeries, z) -> np.ndarray:
    """Evaluate ``H(z)`` by Horner's rule, for ``|z| <= 1``."""
    z = _as_point(z)
    c = H.coeffs
    out = c[-1].copy()
    for k in range(c.shape[0] - 2, -1, -1):
        out = out * z + c[k]
    return out


def eval_many(H: CoeffSeries, zs) -> np.ndarray:
    """Vectorised evaluation on an array of points; shape ``(len(zs), m, n)``.

    Points are not range-checked; callers build grids inside the disc.
    """
    zs = np.asarray(zs, dtype=complex).reshape(-1)
    c = H.coeffs
    out = np.broadcast_to(c[-1], (zs.size,) + H.shape).copy()
    for k in range(c.shape[0] - 2, -1, -1):
        out = out * zs[:, None, None] + c[k]
    return out


def adjoint_coeff(H: CoeffSeries, k: int) -> np.ndarray:
    """Fourier coefficient ``k`` of the pointwise adjoint ``H*`` on the circle.

    Equals ``H_{-k}^*``; nonzero only for ``-L <= k <= 0`` since ``H`` is causal.
    """
    k = int(k)
    if k > 0 or -k > H.degree:
        return np.zeros((H.n, H.m), dtype=complex)
    return H.coeffs[-k].conj().T


def scale(H: CoeffSeries, gamma) -> CoeffSeries:
    """Return ``gamma * H`` for a positive finite real ``gamma``."""
    if isinstance(gamma, bool) or not isinstance(gamma, Number) or isinstance(gamma, complex):
        raise InvalidScaleError(f"scale must be a real number, got {gamma!r}")
    gamma = float(gamma)
    if not np.isfinite(gamma) or gamma <= 0.0:
        raise InvalidScaleError(f"scale must be positive and finite, got {gamma!r}")
    return CoeffSeries(H.coeffs * gamma)

"""Polynomial evaluation in binomial and monomial bases, basis changes, and
lattice-point disambiguation.

A phase polynomial is represented by a :class:`CoefficientVector` over a
:class:`~ppsg.degrees.DegreeSet`, either in the binomial basis (coordinates
of the multivariate binomial coefficients C(n, m)) or the monomial basis
(coordinates of n^m / m!).  The two are related by an upper-unitriangular
change-of-basis matrix; because the observable signal only determines
coefficients up to integer shifts in the binomial basis, mapping between
bases goes through the nearest-lattice-point recursion rather than a plain
matrix solve.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .degrees import DegreeSet, MultiIndex, multi_binom

BINOMIAL = "binomial"
MONOMIAL = "monomial"


@dataclass(frozen=True)
class CoefficientVector:
    """Real coefficients indexed by degree-set position in a declared basis."""

    values: np.ndarray
    basis: str
    degree_set: DegreeSet

    def __post_init__(self) -> None:
        if self.basis not in (BINOMIAL, MONOMIAL):
            raise ValueError(f"unknown basis {self.basis!r}")
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.degree_set),):
            raise ValueError(
                f"expected {len(self.degree_set)} values, got shape {values.shape}"
            )
        object.__setattr__(self, "values", values)

    def __getitem__(self, m: Sequence[int]) -> float:
        return float(self.values[self.degree_set.position(m)])

    def to_json(self) -> dict:
        """JSON form with fields in the order: basis, degrees, values."""
        return {
            "basis": self.basis,
            "degrees": self.degree_set.to_json(),
            "values": [float(v) for v in self.values],
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data: dict) -> "CoefficientVector":
        degree_set = DegreeSet(tuple(tuple(m) for m in data["degrees"]))
        return cls(np.asarray(data["values"], dtype=float), data["basis"], degree_set)


@dataclass(frozen=True)
class ChangeOfBasis:
    """Upper-unitriangular matrix mapping binomial to monomial coordinates."""

    matrix: np.ndarray
    degree_set: DegreeSet

    def __post_init__(self) -> None:
        n = len(self.degree_set)
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.shape != (n, n):
            raise ValueError(f"expected {n}x{n} matrix, got {matrix.shape}")
        object.__setattr__(self, "matrix", matrix)
        if not np.allclose(np.diag(matrix), 1.0):
            raise ValueError("matrix is not unitriangular (diagonal != 1)")
        if np.any(np.tril(matrix, k=-1) != 0.0):
            raise ValueError("matrix has nonzeros below the diagonal")


def eval_binomial(b: CoefficientVector, n: Sequence[int]) -> float:
    """Evaluate sum_m b_m C(n, m) at a single multi-index."""
    if b.basis != BINOMIAL:
        raise ValueError(f"expected binomial basis, got {b.basis!r}")
    n = tuple(int(v) for v in n)
    return float(
        sum(bm * multi_binom(n, m) for bm, m in zip(b.values, b.degree_set))
    )


def eval_monomial(a: CoefficientVector, n: Sequence[int]) -> float:
    """Evaluate sum_m a_m n^m / m! at a single multi-index."""
    if a.basis != MONOMIAL:
        raise ValueError(f"expected monomial basis, got {a.basis!r}")
    n = tuple(int(v) for v in n)
    total = 0.0
    for am, m in zip(a.values, a.degree_set):
        term = 1.0
        for nd, md in zip(n, m):
            term *= nd**md / math.factorial(md)
        total += am * term
    return float(total)


# -- Gridded evaluation -------------------------------------------------------
#
# The estimator cancels exp(-j2*pi*c*basis_m(n)) over the full window at every
# step, so per-dimension basis samples are cached and combined by broadcasting.


@lru_cache(maxsize=64)
def _binomial_axis(n_count: int, m: int) -> np.ndarray:
    """C(n, m) for n in [n_count], float64, read-only."""
    out = np.ones(n_count)
    for i in range(m):
        out *= np.arange(n_count) - i
        out /= i + 1
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def _monomial_axis(n_count: int, m: int) -> np.ndarray:
    """n^m / m! for n in [n_count], float64, read-only."""
    out = np.arange(n_count, dtype=float) ** m / math.factorial(m)
    out.setflags(write=False)
    return out


def _tensor_axes(axes: Sequence[np.ndarray]) -> np.ndarray:
    dim = len(axes)
    out = axes[0].reshape(axes[0].shape + (1,) * (dim - 1))
    for d in range(1, dim):
        shape = (1,) * d + axes[d].shape + (1,) * (dim - 1 - d)
        out = out * axes[d].reshape(shape)
    return np.ascontiguousarray(out) if dim > 1 else out.copy()


# Fields bigger than this are rebuilt on demand instead of cached; the 1-D
# axis caches keep the rebuild cheap while bounding resident memory.
_FIELD_CACHE_LIMIT = 1 << 17


@lru_cache(maxsize=256)
def _binomial_field_cached(m: MultiIndex, N: MultiIndex) -> np.ndarray:
    out = _tensor_axes([_binomial_axis(Nd, md) for Nd, md in zip(N, m)])
    out.setflags(write=False)
    return out


def binomial_field(m: Sequence[int], N: Sequence[int]) -> np.ndarray:
    """C(n, m) sampled over the window [N]; shape N, treat as read-only."""
    m, N = tuple(int(v) for v in m), tuple(int(v) for v in N)
    if math.prod(N) > _FIELD_CACHE_LIMIT:
        return _tensor_axes([_binomial_axis(Nd, md) for Nd, md in zip(N, m)])
    return _binomial_field_cached(m, N)


@lru_cache(maxsize=256)
def _monomial_field_cached(m: MultiIndex, N: MultiIndex) -> np.ndarray:
    out = _tensor_axes([_monomial_axis(Nd, md) for Nd, md in zip(N, m)])
    out.setflags(write=False)
    return out


def monomial_field(m: Sequence[int], N: Sequence[int]) -> np.ndarray:
    """n^m / m! sampled over the window [N]; shape N, treat as read-only."""
    m, N = tuple(int(v) for v in m), tuple(int(v) for v in N)
    if math.prod(N) > _FIELD_CACHE_LIMIT:
        return _tensor_axes([_monomial_axis(Nd, md) for Nd, md in zip(N, m)])
    return _monomial_field_cached(m, N)


def phase_field(coeffs: CoefficientVector, N: Sequence[int]) -> np.ndarray:
    """Evaluate the phase polynomial over the full window [N]."""
    N = tuple(int(v) for v in N)
    sample = binomial_field if coeffs.basis == BINOMIAL else monomial_field
    out = np.zeros(N)
    for c, m in zip(coeffs.values, coeffs.degree_set):
        if c != 0.0:
            out += c * sample(m, N)
    return out


# -- Change of basis -----------------------------------------------------------


@lru_cache(maxsize=None)
def _falling_factorial_coords(m: int) -> tuple[Fraction, ...]:
    """Coordinates t_{l,m} of C(n, m) relative to the basis {n^l / l!}.

    Expands n(n-1)...(n-m+1)/m! exactly: multiply out the falling factorial
    with Fraction coefficients, then rescale the n^l coefficient by l!/m!.
    """
    poly = [Fraction(1)]  # coefficients of n^l, ascending
    for i in range(m):
        shifted = [Fraction(0)] + poly
        poly = [s - i * p for s, p in zip(shifted, poly + [Fraction(0)])]
    mfact = math.factorial(m)
    return tuple(
        c * math.factorial(ell) / mfact for ell, c in enumerate(poly)
    )


def binomial_to_monomial_matrix(M: DegreeSet) -> ChangeOfBasis:
    """Matrix T with a = T b mapping binomial to monomial coordinates.

    Entry (l, m) is the coordinate of C(n, m) on n^l / l!, a product of
    per-dimension falling-factorial expansions.  Exact rational arithmetic
    throughout; conversion to float happens once at the end.  Requires a
    downward-closed degree set so every needed row degree is present.
    """
    if not M.is_downward_closed():
        raise ValueError("degree set is not downward closed")
    size = len(M)
    matrix = np.zeros((size, size))
    for j, m in enumerate(M.degrees):
        coords = [_falling_factorial_coords(md) for md in m]
        for i, ell in enumerate(M.degrees):
            if all(ld <= md for ld, md in zip(ell, m)):
                entry = Fraction(1)
                for d, (ld, md) in enumerate(zip(ell, m)):
                    entry *= coords[d][ld]
                matrix[i, j] = float(entry)
    return ChangeOfBasis(matrix, M)


# -- Lattice disambiguation -----------------------------------------------------


def round_half_up(x: np.ndarray | float) -> np.ndarray | float:
    """Round to nearest integer with ties at .5 rounding up: floor(x + 1/2)."""
    return np.floor(np.asarray(x, dtype=float) + 0.5)


def wrap_to_cell(v: np.ndarray | float) -> np.ndarray:
    """Componentwise v - round(v), landing in [-1/2, 1/2).

    The addition inside floor(v + 1/2) can round up across the tie when v is
    within half an ulp of the cell edge, leaving a result just below -1/2;
    that escape is folded back so the half-open guarantee is unconditional.
    """
    v = np.asarray(v, dtype=float)
    out = v - round_half_up(v)
    return np.where(out < -0.5, out + 1.0, out)


def compute_lattice_point(a: np.ndarray, T: ChangeOfBasis) -> np.ndarray:
    """Integer z with a - T z in the cell [-1/2, 1/2)^|M|.

    Back-substitution in descending total order: because T is upper
    unitriangular, each entry is fixed by rounding once all later entries
    are known.
    """
    a = np.asarray(a, dtype=float)
    mat = T.matrix
    size = len(a)
    if mat.shape != (size, size):
        raise ValueError("coordinate/matrix size mismatch")
    z = np.zeros(size)
    for i in range(size - 1, -1, -1):
        z[i] = round_half_up(a[i] - mat[i, i + 1 :] @ z[i + 1 :])
    return z


def compute_new_coordinate(b: CoefficientVector, T: ChangeOfBasis) -> CoefficientVector:
    """Monomial coordinates in the cell, reconstruction-equivalent to b.

    Computes a = T(b - z) with z the lattice point of T b, so that
    a - T b lies in T Z^|M| and a itself lies in [-1/2, 1/2)^|M|.
    """
    if b.basis != BINOMIAL:
        raise ValueError(f"expected binomial basis, got {b.basis!r}")
    z = compute_lattice_point(T.matrix @ b.values, T)
    a = T.matrix @ (b.values - z)
    return CoefficientVector(a, MONOMIAL, b.degree_set)


def binomial_transform(x: np.ndarray, k: Sequence[int]) -> float:
    """Recover the binomial coefficient b_k of a polynomial field exactly.

    For a field x sampled over a window [N] with N >= k+1 that is polynomial
    with degrees in some valid degree set, returns
    sum_l (-1)^{|k+l|} C(k, l) x(l); the alternating weights vanish outside
    the box [k+1], so only that corner of the window is read.
    """
    x = np.asarray(x, dtype=float)
    k = tuple(int(v) for v in k)
    if len(k) != x.ndim:
        raise ValueError(f"index length {len(k)} does not match field dim {x.ndim}")
    if any(kd + 1 > Nd for kd, Nd in zip(k, x.shape)):
        raise ValueError(f"window {x.shape} too small for degree {k}")
    corner = x[tuple(slice(0, kd + 1) for kd in k)]
    total = 0.0
    for ell in np.ndindex(*corner.shape):
        sign = -1 if (sum(k) + sum(ell)) % 2 else 1
        total += sign * multi_binom(k, ell) * corner[ell]
    return float(total)


def binomial_coefficients_of_field(x: np.ndarray, M: DegreeSet) -> CoefficientVector:
    """Apply the inversion formula at every degree of M."""
    values = np.array([binomial_transform(x, m) for m in M.degrees])
    return CoefficientVector(values, BINOMIAL, M)

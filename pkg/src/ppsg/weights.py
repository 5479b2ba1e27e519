"""Optimal averaging weights for lagged phase differences.

The colored noise left by composing lagged differences has a banded integer
covariance kernel; the minimum-variance weights C^{-1}1 / (1^T C^{-1} 1)
admit a closed form as a product of two binomial coefficients per sample.
The closed form is what production code uses; the dense covariance build
and Cholesky solve are kept as a desk-scale correctness oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import gammaln

from .degrees import binom

# Above this per-dimension window length the closed form switches from exact
# integer products (which would overflow practical magnitudes around
# C(N+k, 2k+1) for N ~ 1e4) to log-space accumulation.
_EXACT_LIMIT = 64

_ORACLE_GUARD = 4096


@dataclass(frozen=True)
class WeightField:
    """Normalized nonnegative weights over the difference window N - tau*k."""

    window: tuple[int, ...]
    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=float)
        window = tuple(int(v) for v in self.window)
        if data.shape != window:
            raise ValueError(f"data shape {data.shape} != window {window}")
        if np.any(data < 0):
            raise ValueError("weights must be nonnegative")
        if abs(data.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {data.sum()}, expected 1")
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "data", data)


@dataclass(frozen=True)
class NoiseCovariance:
    """Integer-valued covariance kernel of the lagged difference of white noise.

    The physical covariance carries an extra scalar 1/(8 pi^2 SNR); it cancels
    in the weight normalization and is factored out so entries stay integers.
    """

    size: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.shape != (self.size, self.size):
            raise ValueError(f"expected {self.size}x{self.size}, got {matrix.shape}")
        if not np.array_equal(matrix, matrix.T):
            raise ValueError("covariance kernel must be symmetric")
        object.__setattr__(self, "matrix", matrix)


def _diff_window(k: Sequence[int], tau: Sequence[int], N: Sequence[int]) -> tuple[int, ...]:
    out = tuple(Nd - td * kd for Nd, td, kd in zip(N, tau, k))
    if any(v < 1 for v in out):
        raise ValueError(f"window {tuple(N)} too small for k={tuple(k)}, lag={tuple(tau)}")
    return out


def _weight_1d_exact(k: int, tau: int, N: int) -> np.ndarray:
    raw = [
        binom(n // tau + k, k) * binom(-((n - N) // tau) - 1, k)
        for n in range(N - tau * k)
    ]
    total = sum(raw)
    return np.array([r / total for r in raw])


def _weight_1d_log(k: int, tau: int, N: int) -> np.ndarray:
    n = np.arange(N - tau * k)
    left = n // tau + k
    right = -((n - N) // tau) - 1  # ceil((N - n)/tau) - 1
    log_w = _log_binom(left, k) + _log_binom(right, k)
    log_w -= log_w.max()
    w = np.exp(log_w)
    return w / w.sum()


def _log_binom(n: np.ndarray, k: int) -> np.ndarray:
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


@lru_cache(maxsize=None)
def _weight_axis(k: int, tau: int, N: int) -> np.ndarray:
    if k < 0 or tau < 1 or N <= tau * k:
        raise ValueError(f"invalid weight parameters k={k}, tau={tau}, N={N}")
    out = _weight_1d_exact(k, tau, N) if N <= _EXACT_LIMIT else _weight_1d_log(k, tau, N)
    out.setflags(write=False)
    return out


def weight_1d(k: int, tau: int, N: int) -> np.ndarray:
    """Closed-form weights over [N - tau*k], normalized to sum 1.

    u(n) is proportional to C(floor(n/tau) + k, k) * C(ceil((N-n)/tau) - 1, k);
    with tau = 1 this is the classic C(n+k, k) C(N-n-1, k) profile.
    """
    return np.array(_weight_axis(int(k), int(tau), int(N)))


def weight_multi(
    k: Sequence[int], tau: Sequence[int] | int, N: Sequence[int]
) -> WeightField:
    """Tensor product of per-dimension closed-form weights."""
    k = tuple(int(v) for v in k)
    N = tuple(int(v) for v in N)
    tau = _normalize_lag(tau, len(k))
    if len(N) != len(k):
        raise ValueError(f"window length {len(N)} does not match index {k}")
    window = _diff_window(k, tau, N)
    axes = [_weight_axis(kd, td, Nd) for kd, td, Nd in zip(k, tau, N)]
    data = axes[0]
    for ax in axes[1:]:
        data = np.multiply.outer(data, ax)
    data = data / data.sum()  # counter accumulated rounding in high dims
    return WeightField(window, data)


def _normalize_lag(tau: Sequence[int] | int, dim: int) -> tuple[int, ...]:
    if np.ndim(tau) == 0:
        return (int(tau),) * dim
    out = tuple(int(v) for v in tau)
    if len(out) != dim:
        raise ValueError(f"lag length {len(out)} does not match dim {dim}")
    return out


def covariance_axis(k: int, tau: int, N: int) -> np.ndarray:
    """1-D integer covariance kernel over [N - tau*k].

    Entry (n, n') vanishes unless n = n' (mod tau); on a congruence class it
    is (-1)^d C(2k, k + d) with d = (n - n')/tau, i.e. the lag-1 kernel of
    that class.
    """
    size = N - tau * k
    if size < 1:
        raise ValueError(f"window {N} too small for k={k}, tau={tau}")
    n = np.arange(size)
    delta = n[:, None] - n[None, :]
    out = np.zeros((size, size))
    on_class = delta % tau == 0
    d = delta[on_class] // tau
    vals = np.array([(-1 if dd % 2 else 1) * binom(2 * k, k + dd) for dd in d], dtype=float)
    out[on_class] = vals
    return out


def covariance_matrix(
    k: Sequence[int], tau: Sequence[int] | int, N: Sequence[int]
) -> NoiseCovariance:
    """Dense integer covariance kernel over the flattened window [N - tau*k].

    Built as a Kronecker product of per-dimension kernels, matching the
    row-major flattening of the window.
    """
    k = tuple(int(v) for v in k)
    N = tuple(int(v) for v in N)
    tau = _normalize_lag(tau, len(k))
    _diff_window(k, tau, N)
    matrix = np.ones((1, 1))
    for kd, td, Nd in zip(k, tau, N):
        matrix = np.kron(matrix, covariance_axis(kd, td, Nd))
    return NoiseCovariance(matrix.shape[0], matrix)


def weight_via_inversion(
    k: Sequence[int], tau: Sequence[int] | int, N: Sequence[int]
) -> WeightField:
    """Oracle weights from the dense solve C w = 1, normalized.

    Desk-scale only (guarded at 4096 unknowns); a Cholesky failure means the
    kernel construction is wrong, not a tolerance problem, so it propagates.
    """
    k = tuple(int(v) for v in k)
    N = tuple(int(v) for v in N)
    tau = _normalize_lag(tau, len(k))
    window = _diff_window(k, tau, N)
    size = int(np.prod(window))
    if size > _ORACLE_GUARD:
        raise ValueError(f"oracle limited to {_ORACLE_GUARD} unknowns, got {size}")
    cov = covariance_matrix(k, tau, N)
    solved = cho_solve(cho_factor(cov.matrix), np.ones(size))
    weights = solved / solved.sum()
    return WeightField(window, weights.reshape(window))

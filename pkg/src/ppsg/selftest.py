"""Exact-identity self-checks wired into the CLI.

Three groups: discrete orthogonality (integer-exact), the coefficient
inversion formula (exact recovery of random coefficients), and the weight
closed form against the covariance-inversion oracle, including the lagged
block pattern.
"""

from __future__ import annotations

import itertools

import numpy as np

from .analysis import orthogonal_poly_field
from .basis import BINOMIAL, CoefficientVector, binomial_transform, phase_field
from .degrees import binom, build_total_order
from .weights import covariance_matrix, weight_multi, weight_via_inversion


def _check_orthogonality() -> bool:
    for N in range(2, 13):
        fields = [orthogonal_poly_field((k,), (N,)) for k in range(N)]
        for k in range(N):
            for kp in range(N):
                expected = (
                    binom(N + k, 2 * k + 1) * binom(2 * k, k) if k == kp else 0
                )
                if int(np.sum(fields[k] * fields[kp])) != expected:
                    return False
    for N0, N1 in itertools.product(range(2, 7), repeat=2):
        ks = list(itertools.product(range(N0), range(N1)))
        fields = {k: orthogonal_poly_field(k, (N0, N1)) for k in ks}
        for k in ks:
            for kp in ks:
                expected = 0
                if k == kp:
                    expected = (
                        binom(N0 + k[0], 2 * k[0] + 1)
                        * binom(2 * k[0], k[0])
                        * binom(N1 + k[1], 2 * k[1] + 1)
                        * binom(2 * k[1], k[1])
                    )
                if int(np.sum(fields[k] * fields[kp])) != expected:
                    return False
    return True


def _check_inversion(seed: int) -> bool:
    rng = np.random.default_rng(seed)
    cases = [
        (build_total_order([(0,), (1,), (2,), (3,)]), (8,)),
        (build_total_order([(0, 0), (0, 1), (1, 0), (1, 1)]), (4, 5)),
    ]
    for M, N in cases:
        for _ in range(20):
            b = CoefficientVector(rng.uniform(-0.5, 0.5, len(M)), BINOMIAL, M)
            x = phase_field(b, N)
            for m in M.degrees:
                if abs(binomial_transform(x, m) - b[m]) > 1e-10:
                    return False
    return True


def _check_weight_oracle() -> bool:
    for k in range(4):
        for tau in range(1, 4):
            for N in range(tau * k + 2, 25):
                closed = weight_multi((k,), (tau,), (N,)).data
                oracle = weight_via_inversion((k,), (tau,), (N,)).data
                if np.max(np.abs(closed - oracle)) > 1e-10:
                    return False
    for k0, k1 in itertools.product(range(3), repeat=2):
        for N0, N1 in itertools.product(range(3, 9), repeat=2):
            if N0 <= k0 or N1 <= k1:
                continue
            closed = weight_multi((k0, k1), 1, (N0, N1)).data
            oracle = weight_via_inversion((k0, k1), 1, (N0, N1)).data
            if np.max(np.abs(closed - oracle)) > 1e-10:
                return False
    # Lagged kernel block pattern: diag 6, -4 at offset tau, 1 at offset 2*tau.
    kernel = covariance_matrix((2,), (3,), (16,)).matrix
    expected = np.zeros((10, 10))
    for i in range(10):
        for j in range(10):
            d = abs(i - j)
            if d == 0:
                expected[i, j] = 6
            elif d == 3:
                expected[i, j] = -4
            elif d == 6:
                expected[i, j] = 1
    return bool(np.array_equal(kernel, expected))


def run_selftest(seed: int = 0) -> list[tuple[str, bool]]:
    return [
        ("orthogonality", _check_orthogonality()),
        ("inversion formula", _check_inversion(seed)),
        ("weight oracle", _check_weight_oracle()),
    ]

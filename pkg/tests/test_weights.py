import itertools

import numpy as np
import pytest

from ppsg.weights import (
    _weight_1d_exact,
    _weight_1d_log,
    covariance_axis,
    covariance_matrix,
    weight_1d,
    weight_multi,
    weight_via_inversion,
)


def test_weight_uniform_for_degree_zero():
    assert weight_1d(0, 1, 5) == pytest.approx([0.2] * 5)


def test_weight_k1_closed_form():
    # (n+1)(3-n)/10 over the 3-sample difference window
    assert weight_1d(1, 1, 4) == pytest.approx([0.3, 0.4, 0.3])


def test_weight_lagged_congruence_classes():
    w = weight_1d(1, 2, 6)
    assert w == pytest.approx([0.25, 0.25, 0.25, 0.25])
    oracle = weight_via_inversion((1,), (2,), (6,)).data
    assert np.max(np.abs(w - oracle)) < 1e-12


def test_weight_window_guard():
    with pytest.raises(ValueError):
        weight_1d(2, 3, 6)


def test_weight_multi_uniform():
    field = weight_multi((0, 0), 1, (3, 4))
    assert field.window == (3, 4)
    assert np.allclose(field.data, 1.0 / 12)


def test_weight_multi_product_structure():
    field = weight_multi((1, 0), 1, (4, 2))
    expected = np.outer([0.3, 0.4, 0.3], [0.5, 0.5])
    assert np.allclose(field.data, expected)


@pytest.mark.parametrize(
    "k,tau,N",
    [((3,), (2,), (21,)), ((2, 1), (1, 1), (7, 5)), ((0,), (1,), (9,))],
)
def test_weight_multi_sums_to_one(k, tau, N):
    assert abs(weight_multi(k, tau, N).data.sum() - 1.0) < 1e-12


def test_weight_palindromic_symmetry():
    for k, tau, N in [(1, 1, 9), (2, 1, 12), (3, 1, 17), (1, 2, 9), (2, 3, 20)]:
        w = weight_1d(k, tau, N)
        assert np.allclose(w, w[::-1], atol=1e-14)


def test_covariance_first_difference():
    cov = covariance_matrix((1,), (1,), (4,))
    assert np.array_equal(
        cov.matrix, [[2, -1, 0], [-1, 2, -1], [0, -1, 2]]
    )


def test_covariance_degree_zero_identity():
    cov = covariance_matrix((0, 0), 1, (3, 3))
    assert np.array_equal(cov.matrix, np.eye(9))


def test_covariance_lagged_block_pattern():
    # 10x10 kernel for N=16, k=2, tau=3: 6 on the diagonal, -4 three off,
    # 1 six off, zero elsewhere (congruence classes mod 3).
    cov = covariance_matrix((2,), (3,), (16,))
    assert cov.size == 10
    expected = np.zeros((10, 10))
    for i, j in itertools.product(range(10), repeat=2):
        d = abs(i - j)
        expected[i, j] = {0: 6, 3: -4, 6: 1}.get(d, 0)
    assert np.array_equal(cov.matrix, expected)


def test_covariance_off_class_zeros():
    for k, tau, N in [(1, 2, 9), (2, 3, 14), (1, 4, 11)]:
        kernel = covariance_axis(k, tau, N)
        size = N - tau * k
        for i, j in itertools.product(range(size), repeat=2):
            if (i - j) % tau != 0:
                assert kernel[i, j] == 0


def test_weight_oracle_sweep_1d():
    for k in range(4):
        for tau in range(1, 4):
            for N in range(tau * k + 2, 25):
                closed = weight_multi((k,), (tau,), (N,)).data
                oracle = weight_via_inversion((k,), (tau,), (N,)).data
                assert np.max(np.abs(closed - oracle)) < 1e-10, (k, tau, N)


def test_weight_oracle_sweep_2d():
    for k0, k1 in itertools.product(range(3), repeat=2):
        for N0, N1 in itertools.product(range(3, 9), repeat=2):
            if N0 <= k0 or N1 <= k1:
                continue
            closed = weight_multi((k0, k1), 1, (N0, N1)).data
            oracle = weight_via_inversion((k0, k1), 1, (N0, N1)).data
            assert np.max(np.abs(closed - oracle)) < 1e-10, (k0, k1, N0, N1)


def test_weight_oracle_degree_zero():
    field = weight_via_inversion((0,), (1,), (6,))
    assert np.allclose(field.data, 1.0 / 6)


def test_weight_exact_log_continuity():
    # The integer and log-space paths must agree through the switchover.
    for N in (48, 63, 64, 65, 80, 128):
        for k in (1, 2, 3):
            for tau in (1, 2):
                if N <= tau * k:
                    continue
                exact = _weight_1d_exact(k, tau, N)
                logspace = _weight_1d_log(k, tau, N)
                assert np.max(np.abs(exact - logspace)) < 1e-12, (k, tau, N)


def test_weight_large_window_does_not_overflow():
    w = weight_1d(3, 1, 20_000)
    assert abs(w.sum() - 1.0) < 1e-9
    assert np.all(w >= 0)


def test_oracle_guard():
    with pytest.raises(ValueError):
        weight_via_inversion((1, 1), 1, (80, 80))

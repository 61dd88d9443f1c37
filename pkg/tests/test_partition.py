"""Partitions, block norms, weighted sampling, RNG streams."""

from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from rowsolve.errors import DataError, UsageError
from rowsolve.matrix import MatrixStore
from rowsolve.partition import (Partition, RngStream, attach_norms,
                                contiguous_partition, sample_block)


def blocks_as_lists(P):
    return [list(np.asarray(b)) for b in P.blocks]


def test_contiguous_remainder_absorbed():
    P = contiguous_partition(10, 3)
    assert blocks_as_lists(P) == [[0, 1, 2], [3, 4, 5], [6, 7, 8], [9]]
    P.validate()


def test_contiguous_single_block():
    P = contiguous_partition(4, 4)
    assert blocks_as_lists(P) == [[0, 1, 2, 3]]


def test_contiguous_five_by_two():
    assert blocks_as_lists(contiguous_partition(5, 2)) == [[0, 1], [2, 3], [4]]


def test_contiguous_rejects_bad_tau():
    with pytest.raises(UsageError):
        contiguous_partition(5, 0)
    with pytest.raises(UsageError):
        contiguous_partition(0, 1)
    with pytest.raises(UsageError):
        contiguous_partition(3, 4)


def test_validate_catches_overlap_and_gap():
    bad = Partition(universe_size=4,
                    blocks=(np.array([0, 1]), np.array([1, 2, 3])))
    with pytest.raises(UsageError):
        bad.validate()
    gappy = Partition(universe_size=4, blocks=(np.array([0, 1]), np.array([3])))
    with pytest.raises(UsageError):
        gappy.validate()


def test_attach_norms_identity_rows():
    P = attach_norms(contiguous_partition(2, 1), np.eye(2), "rows")
    assert np.allclose(P.block_norms_sq, [1.0, 1.0])
    assert np.allclose(P.cumulative, [1.0, 2.0])


def test_attach_norms_hand_oracle():
    A = np.array([[1.0, 2.0], [2.0, 0.0], [0.0, 3.0]])
    P = Partition(universe_size=3, blocks=(np.array([0, 1]), np.array([2])))
    P = attach_norms(P, A, "rows")
    assert np.allclose(P.block_norms_sq, [9.0, 9.0])


def test_attach_norms_cols():
    A = np.array([[1.0, 2.0], [2.0, 0.0], [0.0, 3.0]])
    P = attach_norms(contiguous_partition(2, 1), A, "cols")
    assert np.allclose(P.block_norms_sq, [5.0, 13.0])


def test_attach_norms_sum_matches_frobenius():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(17, 9))
    store = MatrixStore.from_dense(A)
    for axis, tau in (("rows", 4), ("cols", 2)):
        P = attach_norms(contiguous_partition(
            store.shape[0] if axis == "rows" else store.shape[1], tau),
            store, axis)
        assert np.sum(P.block_norms_sq) == pytest.approx(
            store.frobenius_norm_sq(), rel=1e-10)


def test_attach_norms_dimension_mismatch():
    with pytest.raises(UsageError):
        attach_norms(contiguous_partition(3, 1), np.eye(2), "rows")
    with pytest.raises(UsageError):
        attach_norms(contiguous_partition(2, 1), np.eye(2), "diag")


def test_zero_row_never_sampled():
    A = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 2.0]])
    P = attach_norms(contiguous_partition(3, 1), A, "rows")
    assert list(P.sampleable) == [0, 2]
    rng = RngStream(0)
    drawn = {sample_block(P, rng) for _ in range(500)}
    assert 1 not in drawn


def test_sample_requires_norms_and_weight():
    P = contiguous_partition(3, 1)
    with pytest.raises(UsageError):
        sample_block(P, RngStream(0))
    zero = attach_norms(P, np.zeros((3, 2)), "rows")
    with pytest.raises(DataError):
        sample_block(zero, RngStream(0))


def test_single_block_always_chosen():
    P = attach_norms(contiguous_partition(4, 4), np.eye(4), "rows")
    rng = RngStream(1)
    assert all(sample_block(P, rng) == 0 for _ in range(100))


def test_sample_frequency_one_three():
    A = np.array([[1.0], [np.sqrt(3.0)]])  # weights 1 and 3
    P = attach_norms(contiguous_partition(2, 1), A, "rows")
    rng = RngStream(42)
    draws = np.array([sample_block(P, rng) for _ in range(100_000)])
    freq = np.mean(draws == 1)
    assert abs(freq - 0.75) < 0.01


def test_sample_frequency_equal_weights():
    A = np.array([[1.0, 2.0], [2.0, 0.0], [0.0, 3.0]])
    P = Partition(universe_size=3, blocks=(np.array([0, 1]), np.array([2])))
    P = attach_norms(P, A, "rows")
    rng = RngStream(7)
    draws = np.array([sample_block(P, rng) for _ in range(100_000)])
    assert abs(np.mean(draws == 0) - 0.5) < 0.01


def test_sampler_chi_square_random_weights():
    # goodness of fit at 1e5 draws, significance 1e-6, up to 64 blocks
    rng_np = np.random.default_rng(13)
    for trial in range(5):
        k = int(rng_np.integers(2, 65))
        weights = rng_np.uniform(0.1, 1.0, size=k)
        A = np.sqrt(weights)[:, None]  # one column: row norms^2 = weights
        P = attach_norms(contiguous_partition(k, 1), A, "rows")
        rng = RngStream(100 + trial)
        draws = np.array([sample_block(P, rng) for _ in range(100_000)])
        observed = np.bincount(draws, minlength=k)
        expected = weights / weights.sum() * 100_000
        chi2 = float(np.sum((observed - expected) ** 2 / expected))
        cutoff = stats.chi2.isf(1e-6, df=k - 1)
        assert chi2 < cutoff


def test_rng_determinism():
    a = [RngStream(5).uniform() for _ in range(1)]
    b = [RngStream(5).uniform() for _ in range(1)]
    assert a == b
    s1 = RngStream(5, stream=1)
    s2 = RngStream(5, stream=2)
    assert s1.uniform() != s2.uniform()


def test_rng_spawn_matches_direct_construction():
    base = RngStream(9)
    assert base.spawn(3).uniform() == RngStream(9, 3).uniform()


def test_sampler_sequences_differ_across_streams():
    A = np.random.default_rng(0).normal(size=(40, 3))
    P = attach_norms(contiguous_partition(40, 2), A, "rows")
    seqs = []
    for t in range(4):
        rng = RngStream(11, stream=t)
        seqs.append(tuple(sample_block(P, rng) for _ in range(50)))
    assert len(set(seqs)) == 4

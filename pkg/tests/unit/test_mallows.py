"""Unit tests for the Mallows measure, the q-shuffle sampler and its helpers."""

# ================================== Imports ================================== #
# Standard Library
import itertools
import math

# Third-party
import numpy as np
import pytest
from pydantic import ValidationError

# Local Application
from src.models.mallows import MallowsParams, Permutation, SeedSpec
from src.services.fenwick import FenwickForest
from src.services.mallows import (
    height,
    heights,
    inversion_count,
    inversion_counts,
    log_normalization,
    mallows_log_prob,
    multi_height,
    q_exchangeability_residual,
    q_shuffle_batch,
    q_shuffle_sample,
    sample_permutations,
    sample_truncated_geometric,
    truncated_geometric_inverse,
)
from src.services.streams import PhiloxStreams
from src.utils.errors import DomainError
from src.workers.sampling_pool import SamplingPool


def naive_inversions(row) -> int:
    pairs = itertools.combinations(range(len(row)), 2)
    return sum(1 for i, j in pairs if row[i] > row[j])


# ================================== Test Classes ============================= #
class TestModels:
    """Test cases for the permutation and parameter models."""

    def test_permutation_must_be_bijection(self):
        """Test that repeated values are rejected."""
        with pytest.raises(ValidationError):
            Permutation(mapping=(1, 1, 2))

    def test_swapped(self):
        """Test composition with an adjacent transposition (1-based)."""
        assert Permutation(mapping=(1, 2, 3)).swapped(2).mapping == (1, 3, 2)

    def test_from_beta(self):
        """Test that q = 1 - beta/N is computed once and validated."""
        p = MallowsParams.from_beta(100, 2.0)
        assert p.q == 1.0 - 2.0 / 100
        assert p.beta == 2.0

    def test_beta_must_stay_below_N(self):
        """Test that q <= 0 is rejected in the scaling regime."""
        with pytest.raises(ValidationError):
            MallowsParams.from_beta(5, 5.0)

    def test_q_range(self):
        """Test that q = 1 is rejected."""
        with pytest.raises(ValidationError):
            MallowsParams.from_q(5, 1.0)

    def test_seed_shift(self):
        """Test that shifting keeps the root and moves the stream."""
        seed = SeedSpec(root_seed=3, stream_index=4).shifted(10)
        assert (seed.root_seed, seed.stream_index) == (3, 14)


class TestInversions:
    """Test cases for inversion counting."""

    @pytest.mark.parametrize(
        "mapping, expected",
        [((1, 2, 3, 4), 0), ((2, 1, 3), 1), ((3, 1, 2), 2), ((4, 3, 2, 1), 6)],
    )
    def test_inversion_count(self, mapping, expected):
        """Test a few permutations by hand."""
        assert inversion_count(Permutation(mapping=mapping)) == expected

    def test_batch_matches_naive_count(self, all_perms_4):
        """Test the Fenwick count over all of S_4."""
        expected = [naive_inversions(row) for row in all_perms_4.tolist()]
        np.testing.assert_array_equal(inversion_counts(all_perms_4), expected)

    def test_reversal_is_maximal(self):
        """Test inv(reversal) = N(N-1)/2."""
        assert inversion_count(Permutation.reversal(50)) == 50 * 49 // 2


class TestMeasure:
    """Test cases for the Mallows log-probabilities."""

    def test_probabilities_sum_to_one(self, small_params):
        """Test normalization over all of S_5."""
        total = math.fsum(
            math.exp(mallows_log_prob(Permutation(mapping=w), small_params))
            for w in itertools.permutations(range(1, 6))
        )
        assert total == pytest.approx(1.0, abs=1e-14)

    def test_normalization_is_the_inversion_generating_function(self, small_params):
        """Test Y_N^{-1} = sum_w q^{inv(w)}."""
        generating = math.fsum(
            small_params.q ** naive_inversions(w)
            for w in itertools.permutations(range(1, 6))
        )
        assert log_normalization(small_params) == pytest.approx(
            -math.log(generating), abs=1e-14
        )

    def test_q_zero_is_identity_mass(self):
        """Test that q = 0 puts all mass on the identity."""
        p = MallowsParams.from_q(4, 0.0)
        assert mallows_log_prob(Permutation.identity(4), p) == 0.0
        assert mallows_log_prob(Permutation(mapping=(2, 1, 3, 4)), p) == -math.inf

    def test_size_mismatch(self, small_params):
        """Test that a permutation of the wrong size is rejected."""
        with pytest.raises(DomainError):
            mallows_log_prob(Permutation.identity(4), small_params)

    @pytest.mark.parametrize("i", [1, 2, 3, 4])
    def test_q_exchangeability(self, small_params, i):
        """Test q M(w) = M(w s_i) for ascents and descents."""
        for mapping in [(1, 2, 3, 4, 5), (5, 3, 1, 4, 2), (2, 1, 5, 4, 3)]:
            w = Permutation(mapping=mapping)
            assert q_exchangeability_residual(w, i, small_params) < 1e-12

    def test_q_exchangeability_index_range(self, small_params):
        """Test that i = N is rejected."""
        with pytest.raises(DomainError):
            q_exchangeability_residual(Permutation.identity(5), 5, small_params)


class TestTruncatedGeometric:
    """Test cases for the truncated geometric inversion."""

    def test_endpoints(self):
        """Test u = 0 gives 1 and u near 1 gives n."""
        assert sample_truncated_geometric(5, 0.5, 0.0) == 1
        assert sample_truncated_geometric(5, 0.5, 1.0 - 1e-12) == 5

    def test_q_zero_and_singleton(self):
        """Test the degenerate laws."""
        assert sample_truncated_geometric(7, 0.0, 0.9) == 1
        assert sample_truncated_geometric(1, 0.5, 0.9) == 1

    @pytest.mark.parametrize("n, q, u", [(0, 0.5, 0.1), (3, 1.0, 0.1), (3, 0.5, 1.0)])
    def test_domain_errors(self, n, q, u):
        """Test that bad n, q or u are rejected."""
        with pytest.raises(DomainError):
            sample_truncated_geometric(n, q, u)

    def test_stratified_frequencies(self):
        """Test frequencies on a uniform grid against q^{i-1}(1-q)/(1-q^n)."""
        n, q, M = 6, 0.7, 100_000
        u = (np.arange(M) + 0.5) / M
        draws = truncated_geometric_inverse(n, q, u)
        freqs = np.bincount(draws, minlength=n + 1)[1:] / M
        expected = q ** np.arange(n) * (1 - q) / (1 - q**n)
        np.testing.assert_allclose(freqs, expected, atol=1e-4)


class TestFenwickForest:
    """Test cases for the batched Fenwick trees."""

    def test_select_skips_removed_positions(self):
        """Test order statistics after removals."""
        forest = FenwickForest(rows=2, n=5)
        np.testing.assert_array_equal(forest.select(np.array([2, 5])), [2, 5])
        forest.add(np.array([2, 1]), -1)
        np.testing.assert_array_equal(forest.select(np.array([2, 1])), [3, 2])

    def test_prefix_sum(self):
        """Test prefix counts in an initially empty forest."""
        forest = FenwickForest(rows=1, n=8, filled=False)
        for pos in (3, 5, 8):
            forest.add(np.array([pos]), 1)
        assert forest.prefix_sum(np.array([4]))[0] == 1
        assert forest.prefix_sum(np.array([8]))[0] == 3
        assert forest.prefix_sum(np.array([0]))[0] == 0


class TestStreams:
    """Test cases for the counter-based uniform streams."""

    def test_shape_and_range(self):
        """Test one row per stream with values in [0, 1)."""
        u = PhiloxStreams(1, 7).uniforms(0, 10)
        assert u.shape == (10, 7)
        assert np.all((u >= 0.0) & (u < 1.0))

    def test_chunks_read_the_same_words(self):
        """Test that a split batch equals the unsplit batch."""
        streams = PhiloxStreams(42, 9)
        whole = streams.uniforms(5, 8)
        parts = np.vstack([streams.uniforms(5, 3), streams.uniforms(8, 5)])
        np.testing.assert_array_equal(whole, parts)

    def test_roots_differ(self):
        """Test that different root seeds give different streams."""
        assert not np.array_equal(
            PhiloxStreams(1, 4).uniforms(0, 2), PhiloxStreams(2, 4).uniforms(0, 2)
        )


class TestQShuffle:
    """Test cases for the q-shuffle sampler."""

    def test_rows_are_permutations(self):
        """Test that every sampled row is a bijection of {1..N}."""
        params = MallowsParams.from_q(30, 0.8)
        perms = sample_permutations(params, SeedSpec(root_seed=1), 50)
        expected = np.tile(np.arange(1, 31), (50, 1))
        np.testing.assert_array_equal(np.sort(perms, axis=1), expected)

    def test_q_zero_gives_identity(self):
        """Test that q = 0 always returns the identity."""
        perms = q_shuffle_batch(6, 0.0, np.random.default_rng(0).random((4, 6)))
        np.testing.assert_array_equal(perms, np.tile(np.arange(1, 7), (4, 1)))

    def test_single_sample_matches_batch_row(self):
        """Test that row j of a batch is the sample of stream j."""
        p, seed = MallowsParams.from_q(12, 0.6), SeedSpec(root_seed=9)
        batch = sample_permutations(p, seed, 6)
        single = q_shuffle_sample(p, SeedSpec(root_seed=9, stream_index=4))
        assert single.mapping == tuple(batch[4].tolist())

    def test_deterministic(self):
        """Test that the same seed gives the same permutation."""
        p, seed = MallowsParams.from_beta(40, 3.0), SeedSpec(root_seed=5)
        assert q_shuffle_sample(p, seed) == q_shuffle_sample(p, seed)

    def test_mean_inversions(self, seed):
        """Test the sample mean of inv(w) against its exact value on S_5."""
        p = MallowsParams.from_q(5, 0.5)
        inv = inversion_counts(sample_permutations(p, seed, 20_000))
        weights = np.array(
            [p.q ** naive_inversions(w) for w in itertools.permutations(range(1, 6))]
        )
        values = np.array(
            [naive_inversions(w) for w in itertools.permutations(range(1, 6))]
        )
        probs = weights / weights.sum()
        mean = float(probs @ values)
        sd = math.sqrt(float(probs @ (values - mean) ** 2))
        assert abs(inv.mean() - mean) < 5 * sd / math.sqrt(len(inv))


class TestSamplingPool:
    """Test cases for the chunked sampling pool."""

    def test_chunk_plan(self):
        """Test fixed-size chunks covering the ensemble."""
        chunks = SamplingPool(threads=3, chunk_size=4).chunks(10)
        assert chunks == [(0, 4), (4, 4), (8, 2)]

    def test_thread_count_does_not_change_output(self, seed):
        """Test identical ensembles for one and several threads."""
        p = MallowsParams.from_q(8, 0.7)
        one = SamplingPool(threads=1, chunk_size=7).collect(p, seed, 50, lambda b: b)
        four = SamplingPool(threads=4, chunk_size=7).collect(p, seed, 50, lambda b: b)
        np.testing.assert_array_equal(one, four)
        np.testing.assert_array_equal(one, sample_permutations(p, seed, 50))

    def test_rejects_empty_chunks(self):
        """Test that chunk_size must be positive."""
        with pytest.raises(ValueError):
            SamplingPool(chunk_size=0)

    def test_from_cfg(self, test_config):
        """Test construction from the sampler config group."""
        pool = SamplingPool.from_cfg(test_config.sampler)
        assert (pool.threads, pool.chunk_size) == (2, 500)


class TestHeights:
    """Test cases for single- and multi-point height functions."""

    def test_identity_and_reversal(self):
        """Test H_{L,K} on the two extreme permutations."""
        assert height(Permutation.identity(5), 2, 3) == 2
        assert height(Permutation.reversal(5), 2, 3) == 0
        assert height(Permutation.reversal(5), 4, 3) == 2

    def test_multi_height_increments(self):
        """Test block counts along L_1 < L_2."""
        w = Permutation(mapping=(3, 5, 1, 2, 4))
        assert multi_height(w, [2, 4], 3) == [1, 2]

    def test_batch_heights(self, all_perms_4):
        """Test the batch height against a loop."""
        expected = [sum(v <= 2 for v in row[:3]) for row in all_perms_4.tolist()]
        np.testing.assert_array_equal(heights(all_perms_4, 3, 2), expected)

    @pytest.mark.parametrize("L, K", [(0, 2), (2, 6)])
    def test_level_range(self, L, K):
        """Test that levels outside 1..N are rejected."""
        with pytest.raises(DomainError):
            height(Permutation.identity(5), L, K)

    def test_decreasing_blocks(self):
        """Test that L_list must be nondecreasing."""
        with pytest.raises(DomainError):
            multi_height(Permutation.identity(5), [3, 2], 2)

"""The Mallows measure: inversions, log-probabilities, the q-shuffle sampler
and height functions of permutations."""

# ================================== Imports ================================== #
# Standard Library
import math
from typing import Sequence

# Third-party
import numpy as np
from loguru import logger

# Local Application
from src.models.mallows import MallowsParams, Permutation, SeedSpec
from src.services.fenwick import FenwickForest
from src.services.qnum import check_q, log_qpoch_finite
from src.services.streams import PhiloxStreams
from src.utils.errors import DomainError


# ================================== Inversions =============================== #
def inversion_counts(perms: np.ndarray) -> np.ndarray:
    """Inversion numbers of a batch of permutations (rows, 1-based values).

    Scans right to left and counts the smaller values already seen, with one
    Fenwick tree per row.
    """
    perms = np.atleast_2d(perms)
    rows, n = perms.shape
    seen = FenwickForest(rows, n, filled=False)
    total = np.zeros(rows, dtype=np.int64)
    for col in range(n - 1, -1, -1):
        values = perms[:, col]
        total += seen.prefix_sum(values - 1)
        seen.add(values, 1)
    return total


def inversion_count(w: Permutation) -> int:
    """#{(i, j) : i < j, w(i) > w(j)} in O(N log N)."""
    return int(inversion_counts(w.array[np.newaxis, :])[0])


# ================================== Measure ================================== #
def log_normalization(p: MallowsParams) -> float:
    """ln Y_N with Y_N = prod_{j=1..N} (1 - q)/(1 - q^j)."""
    return p.N * math.log1p(-p.q) - log_qpoch_finite(p.q, p.N)


def mallows_log_prob(w: Permutation, p: MallowsParams) -> float:
    """ln M_N^q(w) = inv(w) ln q + ln Y_N.

    Raises:
        DomainError: If the permutation size differs from p.N.
    """
    if w.size != p.N:
        raise DomainError(f"permutation has size {w.size}, expected N={p.N}")
    inversions = inversion_count(w)
    if p.q == 0.0:
        return 0.0 if inversions == 0 else -math.inf
    return inversions * p.log_q + log_normalization(p)


def _log_gap(lhs: float, rhs: float) -> float:
    if lhs == rhs:
        return 0.0
    return abs(lhs - rhs)


def q_exchangeability_residual(w: Permutation, i: int, p: MallowsParams) -> float:
    """Residual of q M(w) = M(w s_i) when w(i) < w(i+1) (else M(w) = q M(w s_i)).

    Args:
        w: Permutation of size p.N.
        i: Adjacent transposition index, 1 <= i <= N - 1.
        p: Measure parameters.

    Returns:
        The absolute difference of both sides in log space.
    """
    if not (1 <= i <= p.N - 1):
        raise DomainError(f"require 1 <= i <= N-1 (got i={i}, N={p.N})")
    log_w = mallows_log_prob(w, p)
    log_swapped = mallows_log_prob(w.swapped(i), p)
    if w.mapping[i - 1] < w.mapping[i]:
        return _log_gap(p.log_q + log_w, log_swapped)
    return _log_gap(log_w, p.log_q + log_swapped)


# ================================== Sampler ================================== #
def truncated_geometric_inverse(
    n: int, q: float, u: np.ndarray | float
) -> np.ndarray:
    """Inverse CDF of G_{n,q}(i) = q^{i-1}(1-q)/(1-q^n), i = 1..n, applied to u.

    Uses i = 1 + floor(ln(1 - u(1-q^n)) / ln q). When 1 - q^n is not
    representable the CDF is scanned directly.
    """
    u = np.asarray(u, dtype=float)
    if q == 0.0 or n == 1:
        return np.ones(u.shape, dtype=np.int64)
    log_q = math.log(q)
    mass = -math.expm1(n * log_q)
    if mass > 0.0 and math.isfinite(mass):
        raw = np.floor(np.log1p(-u * mass) / log_q)
        return np.clip(raw.astype(np.int64) + 1, 1, n)

    logger.warning("Truncated geometric fallback to CDF scan (n={}, q={})", n, q)
    weights = np.exp(np.arange(n) * log_q)
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right") + 1, n)


def sample_truncated_geometric(n: int, q: float, u: float) -> int:
    """One draw from G_{n,q} by inversion of the uniform u in [0, 1).

    Raises:
        DomainError: On n < 1, q outside [0, 1) or u outside [0, 1).
    """
    if n < 1:
        raise DomainError(f"n must be >= 1 (got n={n})")
    check_q(q)
    if not (0.0 <= u < 1.0):
        raise DomainError(f"u must lie in [0, 1) (got u={u!r})")
    return int(truncated_geometric_inverse(n, q, u))


def q_shuffle_batch(N: int, q: float, uniforms: np.ndarray) -> np.ndarray:
    """Run the q-shuffle on every row of a (rows, N) uniform array.

    Step k draws xi_k from G_{N-k+1,q} and takes the xi_k-th smallest value
    still unused; a Fenwick tree over presence flags does the selection and
    the removal in O(log N).

    Returns:
        int64 array of shape (rows, N) in one-line notation, values 1..N.
    """
    rows = uniforms.shape[0]
    if q == 0.0:
        return np.tile(np.arange(1, N + 1, dtype=np.int64), (rows, 1))
    remaining = FenwickForest(rows, N, filled=True)
    out = np.empty((rows, N), dtype=np.int64)
    for k in range(N):
        xi = truncated_geometric_inverse(N - k, q, uniforms[:, k])
        picked = remaining.select(xi)
        remaining.add(picked, -1)
        out[:, k] = picked
    return out


def sample_permutations(p: MallowsParams, seed: SeedSpec, count: int) -> np.ndarray:
    """Draw ``count`` permutations; row j uses stream seed.stream_index + j."""
    streams = PhiloxStreams(seed.root_seed, p.N)
    return q_shuffle_batch(p.N, p.q, streams.uniforms(seed.stream_index, count))


def q_shuffle_sample(p: MallowsParams, seed: SeedSpec) -> Permutation:
    """One permutation distributed as M_N^q, determined by (root_seed, stream_index)."""
    return Permutation.from_array(sample_permutations(p, seed, 1)[0])


# ================================== Heights ================================== #
def _check_level(name: str, value: int, N: int) -> None:
    if not (1 <= value <= N):
        raise DomainError(f"require 1 <= {name} <= N (got {name}={value}, N={N})")


def _check_blocks(L_list: Sequence[int], N: int) -> None:
    if not L_list:
        raise DomainError("L_list must not be empty")
    if any(b < a for a, b in zip(L_list, L_list[1:])):
        raise DomainError(f"L_list must be nondecreasing (got {list(L_list)})")
    _check_level("L_1", L_list[0], N)
    _check_level("L_r", L_list[-1], N)


def heights(perms: np.ndarray, L: int, K: int) -> np.ndarray:
    """H_{L,K} for each row of a permutation batch."""
    return np.count_nonzero(np.atleast_2d(perms)[:, :L] <= K, axis=1)


def multi_heights(perms: np.ndarray, L_list: Sequence[int], K: int) -> np.ndarray:
    """Block increments (rows, r) of the height function along L_list."""
    below = np.atleast_2d(perms) <= K
    cumulative = np.concatenate(
        [np.zeros((below.shape[0], 1), dtype=np.int64), np.cumsum(below, axis=1)],
        axis=1,
    )
    return np.diff(cumulative[:, [0, *L_list]], axis=1)


def height(w: Permutation, L: int, K: int) -> int:
    """#{i <= L : w(i) <= K}."""
    _check_level("L", L, w.size)
    _check_level("K", K, w.size)
    return int(heights(w.array, L, K)[0])


def multi_height(w: Permutation, L_list: Sequence[int], K: int) -> list[int]:
    """Counts of indices in (L_{i-1}, L_i] with value <= K, L_0 = 0."""
    _check_blocks(L_list, w.size)
    _check_level("K", K, w.size)
    return [int(v) for v in multi_heights(w.array, L_list, K)[0]]

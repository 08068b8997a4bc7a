"""Exact finite-N laws of the height function.

Single-point laws come from the q-Pochhammer product formula, multi-point
laws from the product of single-point laws over successive blocks of
positions. Both are cross-checked against enumeration of S_N.
"""

# ================================== Imports ================================== #
# Standard Library
import itertools
import math
from functools import lru_cache
from typing import Iterator

# Third-party
import numpy as np

# Local Application
from src.models.distribution import (
    HeightQuery,
    JointPMFTable,
    MultiPointQuery,
    PMFTable,
)
from src.models.mallows import MallowsParams
from src.models.numeric import NumericConfig, QArgument
from src.services.mallows import heights, inversion_counts, multi_heights
from src.services.qnum import check_q, log_qpoch_inf, log_qpoch_prefix
from src.utils.errors import DomainError, OracleLimitError

BRUTE_FORCE_MAX_N = 9
NEG_INF = -math.inf


# ================================== Support ================================== #
def support_bounds(N: int, L: int, K: int) -> tuple[int, int]:
    """Attainable heights max(L+K-N, 0) <= s <= min(L, K)."""
    return max(L + K - N, 0), min(L, K)


def _power_term(q: float, exponent: int) -> float:
    """exponent * ln q with q^0 = 1 at q = 0."""
    if q == 0.0:
        return 0.0 if exponent == 0 else NEG_INF
    return exponent * math.log(q)


def _log_pmf(q: float, N: int, L: int, K: int, s: int, table: np.ndarray) -> float:
    """Single-point log-probability on a block; L or K may be 0 here."""
    s_min, s_max = support_bounds(N, L, K)
    if s < s_min or s > s_max:
        return NEG_INF
    small, large = min(L, K), max(L, K)
    power = _power_term(q, (K - s) * (L - s))
    if power == NEG_INF:
        return NEG_INF
    return power + math.fsum(
        [
            table[small],
            table[large],
            table[N - small],
            table[N - large],
            -table[s],
            -table[small - s],
            -table[large - s],
            -table[N + s - K - L],
            -table[N],
        ]
    )


# ================================== Single point ============================= #
def log_pmf_height(query: HeightQuery, s: int) -> float:
    """ln P(H_{L,K} = s); -inf outside the support.

    Args:
        query: Size, q, and the levels L, K.
        s: Candidate height.

    Returns:
        (K-s)(L-s) ln q plus the finite q-Pochhammer ratio
        (q;q)_K (q;q)_L (q;q)_{N-K} (q;q)_{N-L} /
        ((q;q)_s (q;q)_{K-s} (q;q)_{L-s} (q;q)_{N+s-K-L} (q;q)_N), in log form.
    """
    p = query.params
    return _log_pmf(p.q, p.N, query.L, query.K, s, log_qpoch_prefix(p.q, p.N))


def log_pmf_height_qfactorial(query: HeightQuery, s: int) -> float:
    """The same law written with q-factorials [n]!_q = (q;q)_n / (1-q)^n."""
    p = query.params
    N, L, K = p.N, query.L, query.K
    s_min, s_max = support_bounds(N, L, K)
    if s < s_min or s > s_max:
        return NEG_INF
    table = log_qpoch_prefix(p.q, N)
    log_1mq = math.log1p(-p.q)

    def log_qfact(n: int) -> float:
        return float(table[n]) - n * log_1mq

    power = _power_term(p.q, (K - s) * (L - s))
    if power == NEG_INF:
        return NEG_INF
    return power + math.fsum(
        [
            log_qfact(K),
            log_qfact(L),
            log_qfact(N - K),
            log_qfact(N - L),
            -log_qfact(s),
            -log_qfact(K - s),
            -log_qfact(L - s),
            -log_qfact(N + s - K - L),
            -log_qfact(N),
        ]
    )


def log_pmf_height_qpoch_inf(
    query: HeightQuery, s: int, cfg: NumericConfig = NumericConfig()
) -> float:
    """The same law through infinite products (q^{n+1}; q)_inf.

    Uses (q;q)_n = (q;q)_inf / (q^{n+1};q)_inf for every finite factor.
    """
    p = query.params
    N, L, K = p.N, query.L, query.K
    s_min, s_max = support_bounds(N, L, K)
    if s < s_min or s > s_max:
        return NEG_INF
    power = _power_term(p.q, (K - s) * (L - s))
    if power == NEG_INF:
        return NEG_INF

    def tail(n: int) -> float:
        return log_qpoch_inf(QArgument(q=p.q, m=n + 1), cfg)

    return power + math.fsum(
        [
            tail(s),
            tail(K - s),
            tail(L - s),
            tail(N + s - K - L),
            tail(N),
            -tail(K),
            -tail(L),
            -tail(N - K),
            -tail(N - L),
            -log_qpoch_inf(QArgument(q=p.q, m=1), cfg),
        ]
    )


def pmf_table(query: HeightQuery) -> PMFTable:
    """Exact law of H_{L,K} over its whole support."""
    p = query.params
    s_min, s_max = support_bounds(p.N, query.L, query.K)
    table = log_qpoch_prefix(p.q, p.N)
    log_probs = [
        _log_pmf(p.q, p.N, query.L, query.K, s, table) for s in range(s_min, s_max + 1)
    ]
    return PMFTable(
        N=p.N,
        q=p.q,
        beta=p.beta,
        L=query.L,
        K=query.K,
        s_min=s_min,
        s_max=s_max,
        log_probs=log_probs,
    )


# ================================== Multi point ============================== #
def _block_terms(
    q: float, N: int, K: int, L_list: tuple[int, ...], s_list: tuple[int, ...],
    table: np.ndarray,
) -> Iterator[float]:
    used = 0
    previous = 0
    for L_i, s_i in zip(L_list, s_list):
        k_left = K - used
        if k_left < 0:
            yield NEG_INF
            return
        yield _log_pmf(q, N - previous, L_i - previous, k_left, s_i, table)
        used += s_i
        previous = L_i


def log_pmf_multi(query: MultiPointQuery) -> float:
    """ln P(block increments = s_list) for positions L_1 <= ... <= L_r.

    Block i is a single-point law with size N - L_{i-1}, level L_i - L_{i-1}
    and threshold K - s_1 - ... - s_{i-1}. A cumulative sum above K gives -inf.
    """
    if len(query.s_list) != query.r:
        raise DomainError("s_list must give one increment per block")
    p = query.params
    table = log_qpoch_prefix(p.q, p.N)
    total = 0.0
    for term in _block_terms(p.q, p.N, query.K, query.L_list, query.s_list, table):
        if term == NEG_INF:
            return NEG_INF
        total += term
    return total


def _joint_cells(
    q: float, N: int, K: int, L_list: tuple[int, ...], table: np.ndarray
) -> Iterator[tuple[tuple[int, ...], float]]:
    def extend(
        prefix: tuple[int, ...], used: int, previous: int, log_p: float
    ) -> Iterator[tuple[tuple[int, ...], float]]:
        depth = len(prefix)
        if depth == len(L_list):
            yield prefix, log_p
            return
        L_i = L_list[depth]
        s_min, s_max = support_bounds(N - previous, L_i - previous, K - used)
        for s in range(s_min, s_max + 1):
            term = _log_pmf(q, N - previous, L_i - previous, K - used, s, table)
            if term != NEG_INF:
                yield from extend(prefix + (s,), used + s, L_i, log_p + term)

    yield from extend((), 0, 0, 0.0)


def joint_pmf_table(
    params: MallowsParams, K: int, L_list: tuple[int, ...]
) -> JointPMFTable:
    """Joint law of all block increments, over the product support."""
    query = MultiPointQuery(params=params, K=K, L_list=tuple(L_list))
    table = log_qpoch_prefix(params.q, params.N)
    cells, log_probs = [], []
    for cell, log_p in _joint_cells(params.q, params.N, K, query.L_list, table):
        cells.append(cell)
        log_probs.append(log_p)
    return JointPMFTable(
        N=params.N,
        q=params.q,
        beta=params.beta,
        K=K,
        L_list=query.L_list,
        cells=cells,
        log_probs=log_probs,
    )


def cumulative_moments(table: JointPMFTable) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and covariance matrix of the cumulative heights H_{L_i, K}."""
    cumulative = np.cumsum(table.increments, axis=1).astype(float)
    probs = table.probs
    mean = probs @ cumulative
    centered = cumulative - mean
    cov = (centered * probs[:, np.newaxis]).T @ centered
    return mean, cov


# ================================== Enumeration oracle ======================= #
@lru_cache(maxsize=BRUTE_FORCE_MAX_N)
def _all_permutations(N: int) -> tuple[np.ndarray, np.ndarray]:
    perms = np.array(list(itertools.permutations(range(1, N + 1))), dtype=np.int64)
    perms.flags.writeable = False
    inversions = inversion_counts(perms)
    inversions.flags.writeable = False
    return perms, inversions


def enumerate_measure(params: MallowsParams) -> tuple[np.ndarray, np.ndarray]:
    """All of S_N with their probabilities q^{inv(w)} / Z (N <= 9).

    Raises:
        OracleLimitError: If N exceeds the enumeration limit.
    """
    if params.N > BRUTE_FORCE_MAX_N:
        raise OracleLimitError(
            f"brute force enumerates N! permutations; requires N <= "
            f"{BRUTE_FORCE_MAX_N} (got N={params.N})"
        )
    perms, inversions = _all_permutations(params.N)
    weights = np.power(params.q, inversions.astype(float))
    return perms, weights / math.fsum(weights)


def _safe_log(values: np.ndarray) -> list[float]:
    with np.errstate(divide="ignore"):
        return np.log(values).tolist()


def brute_force_pmf(query: HeightQuery | MultiPointQuery) -> PMFTable | JointPMFTable:
    """Exact law by enumeration of S_N, binned by height (or block increments)."""
    p = query.params
    perms, probs = enumerate_measure(p)
    if isinstance(query, HeightQuery):
        s_min, s_max = support_bounds(p.N, query.L, query.K)
        binned = np.bincount(
            heights(perms, query.L, query.K), weights=probs, minlength=s_max + 1
        )
        return PMFTable(
            N=p.N,
            q=p.q,
            beta=p.beta,
            L=query.L,
            K=query.K,
            s_min=s_min,
            s_max=s_max,
            log_probs=_safe_log(binned[s_min : s_max + 1]),
        )

    increments = multi_heights(perms, query.L_list, query.K)
    cells, inverse = np.unique(increments, axis=0, return_inverse=True)
    mass = np.bincount(inverse.ravel(), weights=probs, minlength=len(cells))
    keep = mass > 0.0
    return JointPMFTable(
        N=p.N,
        q=p.q,
        beta=p.beta,
        K=query.K,
        L_list=query.L_list,
        cells=[tuple(int(v) for v in row) for row in cells[keep]],
        log_probs=_safe_log(mass[keep]),
    )


def log_inversion_words(q: float, L: int, s: int) -> float:
    """ln sum of q^{inv(word)} over binary words with s ones and L - s zeros."""
    check_q(q)
    if not (0 <= s <= L):
        raise DomainError(f"require 0 <= s <= L (got s={s}, L={L})")
    terms = []
    for ones in itertools.combinations(range(L), s):
        # a one at position p precedes the zeros among positions p+1..L-1
        inversions = sum((L - 1 - pos) - (s - 1 - j) for j, pos in enumerate(ones))
        terms.append(q**inversions)
    return math.log(math.fsum(terms))

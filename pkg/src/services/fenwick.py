"""Batched Fenwick trees for order statistics over shrinking sets.

One tree per row, all rows updated in lock-step with numpy fancy indexing.
Positions are 1-based, as in the usual binary indexed tree layout.
"""

# ================================== Imports ================================== #
# Third-party
import numpy as np


# ================================== Fenwick Forest =========================== #
class FenwickForest:
    """``rows`` independent Fenwick trees over the positions 1..n.

    Examples
    --------
    >>> forest = FenwickForest(rows=1, n=5)
    >>> forest.select(np.array([2]))
    array([2])
    >>> forest.add(np.array([2]), -1)
    >>> forest.select(np.array([2]))
    array([3])
    """

    def __init__(self, rows: int, n: int, filled: bool = True) -> None:
        """Build the trees with every position present (or all empty)."""
        self.rows = rows
        self.n = n
        self._row_index = np.arange(rows)
        self._tree = np.zeros((rows, n + 1), dtype=np.int32)
        if filled:
            idx = np.arange(n + 1)
            # a full tree stores the length of the range each node covers
            self._tree[:, 1:] = (idx & -idx)[1:]
        self._top = 1 << (n.bit_length() - 1) if n > 0 else 0

    def add(self, positions: np.ndarray, delta: int) -> None:
        """Add ``delta`` at ``positions[r]`` in tree r, for every row."""
        i = positions.astype(np.int64, copy=True)
        active = i <= self.n
        while active.any():
            self._tree[self._row_index[active], i[active]] += delta
            i[active] += i[active] & -i[active]
            active = i <= self.n

    def prefix_sum(self, positions: np.ndarray) -> np.ndarray:
        """Sum of counts at 1..positions[r] in tree r (0 for position 0)."""
        i = positions.astype(np.int64, copy=True)
        total = np.zeros(self.rows, dtype=np.int64)
        active = i > 0
        while active.any():
            total[active] += self._tree[self._row_index[active], i[active]]
            i[active] &= i[active] - 1
            active = i > 0
        return total

    def select(self, ranks: np.ndarray) -> np.ndarray:
        """Position of the ranks[r]-th present element (1-based) in tree r."""
        pos = np.zeros(self.rows, dtype=np.int64)
        remaining = ranks.astype(np.int64, copy=True)
        step = self._top
        while step:
            nxt = pos + step
            inside = nxt <= self.n
            counts = self._tree[self._row_index, np.minimum(nxt, self.n)]
            take = inside & (counts < remaining)
            pos = np.where(take, nxt, pos)
            remaining = np.where(take, remaining - counts, remaining)
            step >>= 1
        return pos + 1

"""Thread pool that runs the q-shuffle sampler in chunks of substreams."""

# ================================== Imports ================================== #
# Standard Library
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, TypeVar

# Third-party
import numpy as np
from loguru import logger
from omegaconf import DictConfig

# Local Application
from src.models.mallows import MallowsParams, SeedSpec
from src.services.mallows import sample_permutations

T = TypeVar("T")


# ================================== Worker Pool ============================== #
class SamplingPool:
    """Split an ensemble into fixed chunks of consecutive substreams.

    Chunk boundaries depend only on ``chunk_size``, never on the number of
    threads, and results come back in chunk order; with one substream per
    sample the output is identical for every thread count.
    """

    def __init__(self, threads: Optional[int] = None, chunk_size: int = 2000) -> None:
        if chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        self.threads = threads or os.cpu_count() or 1
        self.chunk_size = chunk_size

    @classmethod
    def from_cfg(cls, cfg: DictConfig) -> "SamplingPool":
        """Build from the ``sampler`` group of a Hydra config."""
        return cls(threads=cfg.get("threads"), chunk_size=cfg.get("chunk_size", 2000))

    def chunks(self, n_samples: int) -> list[tuple[int, int]]:
        """(offset, count) pairs covering 0..n_samples-1."""
        return [
            (start, min(self.chunk_size, n_samples - start))
            for start in range(0, n_samples, self.chunk_size)
        ]

    def map_chunks(
        self,
        params: MallowsParams,
        seed: SeedSpec,
        n_samples: int,
        reducer: Callable[[np.ndarray], T],
    ) -> list[T]:
        """Sample ``n_samples`` permutations and apply ``reducer`` to each chunk.

        Args:
            params: Measure to sample from.
            seed: Root seed; sample j uses stream seed.stream_index + j.
            n_samples: Ensemble size.
            reducer: Maps a (count, N) permutation block to a partial result.

        Returns:
            Partial results in chunk order.
        """
        plan = self.chunks(n_samples)
        logger.debug(
            "Sampling {} permutations (N={}) in {} chunks on {} threads",
            n_samples,
            params.N,
            len(plan),
            self.threads,
        )

        def run(chunk: tuple[int, int]) -> T:
            offset, count = chunk
            return reducer(sample_permutations(params, seed.shifted(offset), count))

        if self.threads == 1 or len(plan) == 1:
            return [run(chunk) for chunk in plan]
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            return list(executor.map(run, plan))

    def collect(
        self,
        params: MallowsParams,
        seed: SeedSpec,
        n_samples: int,
        statistic: Callable[[np.ndarray], np.ndarray],
    ) -> np.ndarray:
        """Per-sample statistics of the whole ensemble, in sample order."""
        return np.concatenate(self.map_chunks(params, seed, n_samples, statistic))

"""Permutation, measure parameter and seeding models."""

# ================================== Imports ================================== #
# Standard Library
import math
from typing import Optional

# Third-party
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


# ================================== Data Models ============================= #
class Permutation(BaseModel):
    """A permutation of {1..N} in one-line notation (entry i holds w(i))."""

    model_config = ConfigDict(frozen=True)

    mapping: tuple[int, ...] = Field(..., min_length=1, description="w(1), ..., w(N)")

    @model_validator(mode="after")
    def _check_bijection(self) -> "Permutation":
        arr = np.asarray(self.mapping, dtype=np.int64)
        if not np.array_equal(np.sort(arr), np.arange(1, arr.size + 1)):
            raise ValueError("mapping must be a bijection of {1..N}")
        return self

    @property
    def size(self) -> int:
        return len(self.mapping)

    @property
    def array(self) -> np.ndarray:
        """The one-line notation as an int64 array (1-based values)."""
        return np.asarray(self.mapping, dtype=np.int64)

    @classmethod
    def from_array(cls, values: np.ndarray | list[int]) -> "Permutation":
        return cls(mapping=tuple(int(v) for v in np.asarray(values).ravel()))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(mapping=tuple(range(1, n + 1)))

    @classmethod
    def reversal(cls, n: int) -> "Permutation":
        return cls(mapping=tuple(range(n, 0, -1)))

    def swapped(self, i: int) -> "Permutation":
        """Return w composed with the adjacent transposition (i, i+1), 1-based."""
        values = list(self.mapping)
        values[i - 1], values[i] = values[i], values[i - 1]
        return Permutation(mapping=tuple(values))


class MallowsParams(BaseModel):
    """Size and deformation parameter of the Mallows measure M_N^q."""

    model_config = ConfigDict(frozen=True)

    N: int = Field(..., ge=1, description="Permutation size")
    q: float = Field(..., ge=0.0, lt=1.0, description="Deformation parameter")
    beta: Optional[float] = Field(
        None, gt=0.0, description="Scaling parameter with q = 1 - beta/N"
    )

    @model_validator(mode="after")
    def _check_beta(self) -> "MallowsParams":
        if self.beta is not None:
            if self.beta >= self.N:
                raise ValueError(f"beta must be < N (got beta={self.beta}, N={self.N})")
            if self.q != 1.0 - self.beta / self.N:
                raise ValueError("q must equal 1 - beta/N; use MallowsParams.from_beta")
        return self

    @classmethod
    def from_beta(cls, N: int, beta: float) -> "MallowsParams":
        """The scaling regime q = 1 - beta/N, computed here and nowhere else."""
        return cls(N=N, q=1.0 - beta / N, beta=beta)

    @classmethod
    def from_q(cls, N: int, q: float) -> "MallowsParams":
        return cls(N=N, q=q)

    @property
    def log_q(self) -> float:
        return math.log(self.q) if self.q > 0.0 else -math.inf


class SeedSpec(BaseModel):
    """Root seed plus the index of the pseudo-random substream."""

    model_config = ConfigDict(frozen=True)

    root_seed: int = Field(..., ge=0, lt=2**64, description="64-bit generator key")
    stream_index: int = Field(0, ge=0, description="Substream (sample slot) index")

    def shifted(self, offset: int) -> "SeedSpec":
        return SeedSpec(
            root_seed=self.root_seed, stream_index=self.stream_index + offset
        )

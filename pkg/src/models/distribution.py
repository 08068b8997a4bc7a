"""Height-function queries and exact probability tables."""

# ================================== Imports ================================== #
# Standard Library
import math
from typing import Optional

# Third-party
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

# Local Application
from src.models.mallows import MallowsParams

# structural guard; the 1e-10 normalization bound is a verification check
NORMALIZATION_TOL = 1e-8


# ================================== Queries ================================== #
class HeightQuery(BaseModel):
    """Law of H_{L,K}(w) = #{i <= L : w(i) <= K} under M_N^q."""

    model_config = ConfigDict(frozen=True)

    params: MallowsParams
    L: int = Field(..., ge=1, description="Number of leading positions")
    K: int = Field(..., ge=1, description="Value threshold")

    @model_validator(mode="after")
    def _check_range(self) -> "HeightQuery":
        if self.L > self.params.N or self.K > self.params.N:
            raise ValueError(
                f"require 1 <= L, K <= N "
                f"(got L={self.L}, K={self.K}, N={self.params.N})"
            )
        return self

    def transposed(self) -> "HeightQuery":
        return HeightQuery(params=self.params, L=self.K, K=self.L)


class MultiPointQuery(BaseModel):
    """Block increments of the height function along positions L_1 <= ... <= L_r."""

    model_config = ConfigDict(frozen=True)

    params: MallowsParams
    K: int = Field(..., ge=1)
    L_list: tuple[int, ...] = Field(..., min_length=1)
    s_list: tuple[int, ...] = Field(default=())

    @model_validator(mode="after")
    def _check_blocks(self) -> "MultiPointQuery":
        N = self.params.N
        if self.K > N:
            raise ValueError(f"require K <= N (got K={self.K}, N={N})")
        if self.L_list[0] < 1 or self.L_list[-1] > N:
            raise ValueError(f"require 1 <= L_1 and L_r <= N (got {self.L_list})")
        if any(b < a for a, b in zip(self.L_list, self.L_list[1:])):
            raise ValueError(f"L_list must be nondecreasing (got {self.L_list})")
        if self.s_list and len(self.s_list) != len(self.L_list):
            raise ValueError("s_list and L_list must have the same length")
        return self

    @property
    def r(self) -> int:
        return len(self.L_list)

    def with_increments(self, s_list: tuple[int, ...]) -> "MultiPointQuery":
        return MultiPointQuery(
            params=self.params, K=self.K, L_list=self.L_list, s_list=s_list
        )


# ================================== Tables =================================== #
class PMFTable(BaseModel):
    """Log-probabilities of a height-function law over its support."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    N: int
    q: float
    beta: Optional[float] = None
    L: int
    K: int
    s_min: int
    s_max: int
    log_probs: list[float] = Field(..., description="log P(H = s), s = s_min..s_max")

    @model_validator(mode="after")
    def _check_table(self) -> "PMFTable":
        if len(self.log_probs) != self.s_max - self.s_min + 1:
            raise ValueError("log_probs must cover s_min..s_max")
        total = math.fsum(math.exp(lp) for lp in self.log_probs)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"table is not normalized (sum = {total!r})")
        return self

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.s_min, self.s_max + 1)

    @property
    def probs(self) -> np.ndarray:
        return np.exp(np.asarray(self.log_probs))

    def log_prob(self, s: int) -> float:
        if s < self.s_min or s > self.s_max:
            return -math.inf
        return self.log_probs[s - self.s_min]

    def mean(self) -> float:
        return math.fsum(self.probs * self.support)

    def variance(self) -> float:
        centered = self.support - self.mean()
        return math.fsum(self.probs * centered * centered)


class JointPMFTable(BaseModel):
    """Joint law of the block increments (s_1..s_r) of a multi-point query."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    N: int
    q: float
    beta: Optional[float] = None
    K: int
    L_list: tuple[int, ...]
    cells: list[tuple[int, ...]] = Field(..., description="Support points (s_1..s_r)")
    log_probs: list[float]

    @model_validator(mode="after")
    def _check_table(self) -> "JointPMFTable":
        if len(self.cells) != len(self.log_probs):
            raise ValueError("cells and log_probs must have the same length")
        total = math.fsum(math.exp(lp) for lp in self.log_probs)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"joint table is not normalized (sum = {total!r})")
        return self

    @property
    def increments(self) -> np.ndarray:
        return np.asarray(self.cells, dtype=np.int64).reshape(len(self.cells), -1)

    @property
    def probs(self) -> np.ndarray:
        return np.exp(np.asarray(self.log_probs))

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return dict(zip(self.cells, self.probs.tolist()))

"""Validated command-line configuration."""

# ================================== Imports ================================== #
# Standard Library
from pathlib import Path
from typing import Literal, Optional

# Third-party
from pydantic import BaseModel, ConfigDict, Field, model_validator

OutputFormat = Literal["csv", "json"]


# ================================== Data Models ============================= #
class CliConfig(BaseModel):
    """One parsed invocation; recorded verbatim in every JSON envelope."""

    model_config = ConfigDict(frozen=True)

    command: str = Field(..., description="Subcommand name")
    N: Optional[int] = Field(None, ge=1)
    q: Optional[float] = Field(None, ge=0.0, lt=1.0)
    beta: Optional[float] = Field(None, gt=0.0)
    x: Optional[float] = Field(None, gt=0.0, lt=1.0)
    y: Optional[float] = Field(None, gt=0.0, lt=1.0)
    y_list: Optional[tuple[float, ...]] = None
    L: Optional[int] = Field(None, ge=1)
    K: Optional[int] = Field(None, ge=1)
    L_list: Optional[tuple[int, ...]] = None
    N_list: Optional[tuple[int, ...]] = None
    delta: Optional[float] = None
    gamma: Optional[float] = None
    alpha: Optional[float] = None
    window_A: Optional[float] = Field(None, gt=0.0)
    exact_N: Optional[int] = Field(None, ge=1)
    count: Optional[int] = Field(None, ge=1, description="Permutations to sample")
    n_samples: Optional[int] = Field(None, ge=1)
    seed: int = Field(..., ge=0, lt=2**64)
    threads: Optional[int] = Field(None, ge=1)
    format: OutputFormat = "csv"
    output: Optional[Path] = None

    @model_validator(mode="after")
    def _check_parametrization(self) -> "CliConfig":
        if self.q is not None and self.beta is not None:
            raise ValueError("give exactly one of --q and --beta, not both")
        # law only uses N for sigma_N and never builds q = 1 - beta/N
        if (
            self.command != "law"
            and self.beta is not None
            and self.N is not None
            and self.beta >= self.N
        ):
            raise ValueError(
                f"--beta must be < --N so that q = 1 - beta/N > 0 "
                f"(got beta={self.beta}, N={self.N})"
            )
        if self.L is not None and self.L_list is not None:
            raise ValueError("give either --L or --L-list, not both")
        return self

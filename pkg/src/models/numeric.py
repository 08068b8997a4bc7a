"""Numeric configuration and q-Pochhammer argument models."""

# ================================== Imports ================================== #
# Standard Library
from typing import Any, Mapping

# Third-party
from pydantic import BaseModel, ConfigDict, Field


# ================================== Data Models ============================= #
class NumericConfig(BaseModel):
    """Tolerances shared by the series and product evaluators."""

    model_config = ConfigDict(frozen=True)

    series_tol: float = Field(
        1e-15, gt=0, description="Relative tolerance for series truncation"
    )
    max_terms: int = Field(1_000_000, ge=1, description="Cap on series length")
    tail_tol: float = Field(
        1e-14, gt=0, description="Absolute tolerance for infinite-product truncation"
    )
    fd_step_first: float = Field(
        1e-5, gt=0, description="Finite-difference step for first derivatives"
    )
    fd_step_second: float = Field(
        1e-4, gt=0, description="Finite-difference step for second derivatives"
    )

    @classmethod
    def from_cfg(cls, cfg: Mapping[str, Any] | None) -> "NumericConfig":
        """Build from the ``numeric`` group of a Hydra config (or defaults)."""
        if cfg is None:
            return cls()
        return cls(**{k: cfg[k] for k in cls.model_fields if k in cfg})


class QArgument(BaseModel):
    """Argument of the infinite product (q^m; q)_inf."""

    model_config = ConfigDict(frozen=True)

    q: float = Field(..., ge=0.0, lt=1.0, description="Base q in [0, 1)")
    m: float = Field(..., ge=0.0, description="Shift exponent of q^m")

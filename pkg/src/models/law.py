"""Limit-law evaluation points and results."""

# ================================== Imports ================================== #
# Standard Library
from typing import Optional

# Third-party
from pydantic import BaseModel, ConfigDict, Field, model_validator


# ================================== Data Models ============================= #
class LawPoint(BaseModel):
    """A point (beta, x, y) of the open unit square with positive scaling."""

    model_config = ConfigDict(frozen=True)

    beta: float = Field(..., gt=0.0)
    x: float = Field(..., gt=0.0, lt=1.0)
    y: float = Field(..., gt=0.0, lt=1.0)

    def swapped(self) -> "LawPoint":
        return LawPoint(beta=self.beta, x=self.y, y=self.x)

    @property
    def support(self) -> tuple[float, float]:
        """Closed interval [max(x+y-1, 0), min(x, y)] of limit heights."""
        return max(self.x + self.y - 1.0, 0.0), min(self.x, self.y)


class LawValues(BaseModel):
    """All limit-law quantities at one point (and optional N, delta, gamma)."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    point: LawPoint
    h: float = Field(..., description="Limit height density h_beta(x, y)")
    d: float = Field(..., description="Log half-precision d_beta(x, y)")
    sigma: float = Field(..., gt=0.0, description="sigma_beta = sqrt(beta) e^d")
    sigma_N: Optional[float] = Field(None, description="sqrt(N)/sigma_beta")
    N: Optional[int] = None
    delta: Optional[float] = None
    a: Optional[float] = Field(None, description="Rate function at delta")
    u: float
    v: float
    gamma: Optional[float] = None
    mu: Optional[float] = Field(None, description="Gaussian shift of K + gamma sqrt(N)")
    starr: float = Field(..., description="Limit density of the permuton")


class CovarianceSpec(BaseModel):
    """Covariance of the multi-point Gaussian limit with its closed forms."""

    model_config = ConfigDict(frozen=True)

    beta: float
    x: float
    y_list: tuple[float, ...]
    C: list[list[float]]
    det: float
    inv: list[list[float]]
    omega: list[float] = Field(..., description="Diagonal scaling of C")
    z: list[float] = Field(..., description="Increasing min-kernel sequence")

    @model_validator(mode="after")
    def _check(self) -> "CovarianceSpec":
        r = len(self.y_list)
        if any(len(row) != r for row in self.C) or len(self.C) != r:
            raise ValueError("C must be r x r")
        if self.det <= 0.0:
            raise ValueError("C must be positive definite")
        return self

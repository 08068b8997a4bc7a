"""Experiment configuration, thresholds and comparison reports."""

# ================================== Imports ================================== #
# Standard Library
import math
from typing import Any, Mapping, Optional

# Third-party
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Local Application
from src.models.mallows import SeedSpec


# ================================== Configuration ============================ #
class Thresholds(BaseModel):
    """Statistical and numerical pass thresholds of the verification harness."""

    model_config = ConfigDict(frozen=True)

    z_max: float = Field(4.0, gt=0, description="Bound on |z| for mean checks")
    p_min: float = Field(1e-3, gt=0, lt=1, description="Minimum chi-square p-value")
    ks_tol: float = Field(0.02, gt=0, description="KS bound before lattice slack")
    cov_se_factor: float = Field(4.0, gt=0, description="Covariance bound in MC SEs")
    lclt_ratio_band: tuple[float, float] = Field(
        (1.0, 8.0), description="Accepted error ratio between consecutive N"
    )
    ldp_gap_max: float = Field(0.02, gt=0, description="Bound on the LDP gap at max N")
    order_factor: float = Field(
        4.0, ge=1, description="Allowed factor around the ideal expansion error ratio"
    )
    identity_tol: float = Field(1e-10, gt=0, description="Bound on identity residuals")
    oracle_tol: float = Field(1e-12, gt=0, description="Formula-vs-enumeration bound")
    normalization_tol: float = Field(1e-10, gt=0, description="Bound on |sum - 1|")
    peak_steps: int = Field(2, ge=0, description="Allowed argmax offset on the lattice")
    min_expected_count: float = Field(
        5.0, gt=0, description="Chi-square cells below this are flagged"
    )

    @classmethod
    def from_cfg(cls, cfg: Optional[Mapping[str, Any]]) -> "Thresholds":
        """Build from the ``verify`` group of a Hydra config (or defaults)."""
        if cfg is None:
            return cls()
        values = {k: cfg[k] for k in cls.model_fields if k in cfg}
        if "lclt_ratio_band" in values:
            values["lclt_ratio_band"] = tuple(values["lclt_ratio_band"])
        return cls(**values)


class ExperimentConfig(BaseModel):
    """Inputs of one verification experiment."""

    model_config = ConfigDict(frozen=True)

    beta: Optional[float] = Field(None, gt=0)
    q: Optional[float] = Field(None, ge=0, lt=1)
    x: float = Field(0.5, gt=0, lt=1)
    y: Optional[float] = Field(0.5, gt=0, lt=1)
    y_list: Optional[tuple[float, ...]] = None
    N_list: tuple[int, ...] = Field((100,), min_length=1)
    n_samples: int = Field(1, ge=1)
    seed: SeedSpec = Field(default_factory=lambda: SeedSpec(root_seed=0))
    window_A: float = Field(2.0, gt=0, description="A_N = window_A * N^window_exponent")
    window_exponent: float = Field(0.0, ge=0, lt=1.0 / 6.0)
    delta: Optional[float] = None
    gamma: float = 0.0
    alpha: float = 0.5

    @field_validator("N_list")
    @classmethod
    def _increasing(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if any(n < 1 for n in value) or any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError(
                f"N_list must be increasing positive integers (got {value})"
            )
        return value

    @model_validator(mode="after")
    def _one_parametrization(self) -> "ExperimentConfig":
        if (self.beta is None) == (self.q is None):
            raise ValueError("exactly one of beta and q must be given")
        return self

    def window(self, N: int) -> float:
        """Half-width sqrt(N) * A_N of the local-limit window."""
        return math.sqrt(N) * self.window_A * N**self.window_exponent


# ================================== Reports ================================== #
class ReportRow(BaseModel):
    """One row of a comparison (usually one N)."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    N: Optional[int] = None
    label: Optional[str] = None
    metrics: dict[str, float] = Field(default_factory=dict)


class LongRow(BaseModel):
    """Plot-ready exact-vs-predicted point."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    N: int
    k_or_delta: float
    exact: float
    predicted: float
    rel_error: float


class ComparisonReport(BaseModel):
    """Outcome of one experiment: rows, plot data and named pass/fail checks."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    experiment: str
    config: dict[str, Any] = Field(default_factory=dict)
    thresholds: dict[str, Any] = Field(default_factory=dict)
    rows: list[ReportRow] = Field(default_factory=list)
    long_rows: list[LongRow] = Field(default_factory=list)
    checks: dict[str, bool] = Field(default_factory=dict)
    notes: list[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def failed_checks(self) -> list[str]:
        return [name for name, ok in self.checks.items() if not ok]

"""Pytest configuration and fixtures."""

# ================================== Imports ================================== #
# Standard Library
import itertools

# Third-party
import numpy as np
import pytest
from omegaconf import DictConfig, OmegaConf

# Local Application
from src.models.experiment import Thresholds
from src.models.mallows import MallowsParams, SeedSpec
from src.models.numeric import NumericConfig
from src.workers.sampling_pool import SamplingPool


# ================================== Fixtures ================================= #
@pytest.fixture
def test_config() -> DictConfig:
    """Get test configuration with a reduced acceptance suite."""
    return OmegaConf.create(
        {
            "numeric": {
                "series_tol": 1e-15,
                "tail_tol": 1e-14,
                "max_terms": 1000000,
                "fd_step_first": 1e-5,
                "fd_step_second": 1e-4,
            },
            "sampler": {"chunk_size": 500, "threads": 2, "root_seed": 20240901},
            "verify": {
                "z_max": 4.0,
                "p_min": 1e-3,
                "ks_tol": 0.02,
                "cov_se_factor": 4.0,
                "min_expected_count": 5,
                "lclt_ratio_band": [1.0, 8.0],
                "peak_steps": 2,
                "ldp_gap_max": 0.02,
                "order_factor": 4.0,
                "identity_tol": 1e-10,
                "oracle_tol": 1e-12,
                "normalization_tol": 1e-10,
            },
            "logging": {"level": "DEBUG", "file": None, "rich": False, "json": False},
            "acceptance": {
                "oracle": {"N_max": 4, "qs": [0.5]},
                "multipoint_oracle": {"N_max": 4, "qs": [0.5], "r_values": [2]},
                "ldp": {
                    "beta": 1.0,
                    "x": 0.5,
                    "y": 0.5,
                    "delta": 0.4,
                    "N_list": [200, 2000],
                },
                "normalization": {"N": 200, "betas": [1.0]},
            },
        }
    )


@pytest.fixture
def numeric() -> NumericConfig:
    """Default numeric tolerances."""
    return NumericConfig()


@pytest.fixture
def thresholds() -> Thresholds:
    """Default verification thresholds."""
    return Thresholds()


@pytest.fixture
def seed() -> SeedSpec:
    """Fixed root seed for Monte Carlo tests."""
    return SeedSpec(root_seed=12345)


@pytest.fixture
def pool() -> SamplingPool:
    """Small multi-threaded sampling pool."""
    return SamplingPool(threads=2, chunk_size=500)


@pytest.fixture
def small_params() -> MallowsParams:
    """Mallows measure on S_5 with q = 0.5."""
    return MallowsParams.from_q(5, 0.5)


@pytest.fixture
def all_perms_4() -> np.ndarray:
    """All 24 permutations of {1..4}, one per row."""
    return np.array(list(itertools.permutations(range(1, 5))), dtype=np.int64)

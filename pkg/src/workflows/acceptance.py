"""Desk-scale acceptance suite: every verification experiment at its fixed setting."""

# ================================== Imports ================================== #
# Standard Library
from typing import Callable

# Third-party
from loguru import logger
from omegaconf import DictConfig

# Local Application
from src.models.experiment import ComparisonReport, ExperimentConfig, Thresholds
from src.models.mallows import SeedSpec
from src.models.numeric import NumericConfig
from src.utils.errors import AcceptanceFailure
from src.workers.sampling_pool import SamplingPool
from src.workflows import verify

Criterion = Callable[[], list[ComparisonReport]]


# ================================== Suite ==================================== #
def build_criteria(cfg: DictConfig) -> dict[str, Criterion]:
    """Named, lazily evaluated criteria from the composed configuration.

    Args:
        cfg: Root configuration with ``acceptance``, ``verify``, ``numeric``
            and ``sampler`` groups.

    Returns:
        Mapping from criterion name to a thunk producing its reports.
    """
    acc = cfg.acceptance
    thresholds = Thresholds.from_cfg(cfg.verify)
    numeric = NumericConfig.from_cfg(cfg.numeric)
    pool = SamplingPool.from_cfg(cfg.sampler)
    seed = SeedSpec(root_seed=cfg.sampler.root_seed)

    return {
        "oracle": lambda: [
            verify.oracle_check(
                acc.oracle.N_max, list(acc.oracle.qs), thresholds, numeric
            )
        ],
        "multipoint_oracle": lambda: [
            verify.multipoint_oracle_check(
                acc.multipoint_oracle.N_max,
                list(acc.multipoint_oracle.qs),
                list(acc.multipoint_oracle.r_values),
                thresholds,
            )
        ],
        "identities": lambda: [
            verify.identity_suite(thresholds=thresholds, cfg=numeric)
        ],
        "lclt": lambda: [
            verify.lclt_sweep(
                ExperimentConfig(
                    beta=acc.lclt.beta,
                    x=acc.lclt.x,
                    y=acc.lclt.y,
                    N_list=list(acc.lclt.N_list),
                    window_A=acc.lclt.window_A,
                ),
                thresholds,
            )
        ],
        "ldp": lambda: [
            verify.ldp_check(
                acc.ldp.beta,
                acc.ldp.x,
                acc.ldp.y,
                acc.ldp.delta,
                list(acc.ldp.N_list),
                thresholds,
                numeric,
            )
        ],
        "sampler": lambda: [
            verify.sampler_gof_check(
                acc.sampler.N,
                q,
                acc.sampler.n_samples,
                seed,
                pool=pool,
                thresholds=thresholds,
            )
            for q in acc.sampler.qs
        ],
        "clt": lambda: [
            verify.clt_ks_check(
                acc.clt.beta,
                acc.clt.x,
                acc.clt.y,
                acc.clt.N,
                acc.clt.n_samples,
                seed,
                pool=pool,
                thresholds=thresholds,
            )
        ],
        "cov": lambda: [
            verify.multipoint_cov_check(
                acc.cov.beta,
                acc.cov.x,
                list(acc.cov.y_list),
                acc.cov.N,
                acc.cov.n_samples,
                seed,
                pool=pool,
                thresholds=thresholds,
                exact_N=acc.cov.exact_N,
            )
        ],
        "asymptotics": lambda: [
            verify.asymptotic_order_check(
                acc.asymptotics.beta,
                acc.asymptotics.delta,
                acc.asymptotics.alpha,
                list(acc.asymptotics.N_list),
                thresholds,
                numeric,
            )
        ],
        "normalization": lambda: [
            verify.normalization_check(
                acc.normalization.N, list(acc.normalization.betas), thresholds
            )
        ],
    }


def run_acceptance(
    cfg: DictConfig, only: list[str] | None = None
) -> dict[str, list[ComparisonReport]]:
    """Run the selected criteria (all by default) and collect their reports.

    Raises:
        AcceptanceFailure: If any report fails; ``failed_checks`` lists
            entries of the form ``criterion/experiment/check``.
        KeyError: If ``only`` names an unknown criterion.
    """
    criteria = build_criteria(cfg)
    names = only or list(criteria)
    results: dict[str, list[ComparisonReport]] = {}
    failed: list[str] = []
    for name in names:
        logger.info("Acceptance criterion: {}", name)
        results[name] = criteria[name]()
        for report in results[name]:
            failed.extend(
                f"{name}/{report.experiment}/{check}"
                for check in report.failed_checks()
            )

    if failed:
        raise AcceptanceFailure(
            f"{len(failed)} acceptance check(s) failed: {', '.join(failed)}", failed
        )
    logger.success("All {} acceptance criteria passed", len(names))
    return results

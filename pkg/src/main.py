"""Command-line entry point: sampling, exact laws, limit laws and verification."""

# ================================== Imports ================================== #
# Standard Library
import argparse
import sys
from pathlib import Path
from typing import Any, Callable, NamedTuple, Optional, Sequence

# Third-party
from hydra import compose, initialize_config_dir
from loguru import logger
from omegaconf import DictConfig, OmegaConf
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape

# Local Application
from src.models.cli import CliConfig
from src.models.distribution import HeightQuery
from src.models.experiment import ComparisonReport, ExperimentConfig, Thresholds
from src.models.law import LawPoint
from src.models.mallows import MallowsParams, SeedSpec
from src.models.numeric import NumericConfig
from src.services.asymlaw import covariance_spec, law_values
from src.services.exactdist import joint_pmf_table, pmf_table
from src.utils import io
from src.utils.errors import MallowsError
from src.utils.logging import setup_logger
from src.workers.sampling_pool import SamplingPool
from src.workflows import verify

CONFIG_DIR = Path(__file__).resolve().parent.parent / "conf"

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CHECK_FAILED = 2


class UsageError(Exception):
    """Raised instead of argparse's exit(2): usage errors map to exit code 1."""


class Artifact(NamedTuple):
    """What a subcommand produced: JSON result, CSV table, optional report."""

    result: Any
    table: io.Table
    report: Optional[ComparisonReport] = None


class Context(NamedTuple):
    cli: CliConfig
    cfg: DictConfig
    numeric: NumericConfig
    thresholds: Thresholds
    pool: SamplingPool

    @property
    def seed(self) -> SeedSpec:
        return SeedSpec(root_seed=self.cli.seed)


# ================================== Parser =================================== #
class CliParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _delta(value: str) -> Optional[float]:
    """A float, or 'h' for the mode of the limit law."""
    if value == "h":
        return None
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected a float or 'h' (got {value!r})"
        ) from None


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=["csv", "json"], help="Output format")
    parser.add_argument("--output", type=Path, help="Output file (default: stdout)")
    parser.add_argument("--seed", type=int, help="Root seed of all random streams")
    parser.add_argument("--threads", type=int, help="Sampling threads")
    parser.add_argument("--log-level", help="Console log level")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Hydra override, e.g. verify.z_max=5 (repeatable)",
    )


def _add_measure(parser: argparse.ArgumentParser, required: bool = True) -> None:
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument("--q", type=float, help="Deformation parameter in [0, 1)")
    group.add_argument("--beta", type=float, help="Scaling parameter, q = 1 - beta/N")


def _add_point(parser: argparse.ArgumentParser, beta: bool = True) -> None:
    if beta:
        parser.add_argument("--beta", type=float, default=1.0)
    parser.add_argument("--x", type=float, default=0.5)
    parser.add_argument("--y", type=float, default=0.5)


def _add_ensemble(parser: argparse.ArgumentParser, N: int, n_samples: int) -> None:
    parser.add_argument("--N", type=int, default=N)
    parser.add_argument("--samples", dest="n_samples", type=int, default=n_samples)


def _add_N_list(parser: argparse.ArgumentParser, default: list[int]) -> None:
    parser.add_argument("--N-list", dest="N_list", type=int, nargs="+", default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        prog="mallows",
        description="Exact and asymptotic laws of the Mallows height function.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    p = sub.add_parser("sample", help="Sample permutations with the q-shuffle")
    p.add_argument("--N", type=int, required=True)
    _add_measure(p)
    p.add_argument("--count", type=int, default=1)

    p = sub.add_parser("pmf", help="Exact single- or multi-point height law")
    p.add_argument("--N", type=int, required=True)
    _add_measure(p)
    p.add_argument("--K", type=int, required=True)
    levels = p.add_mutually_exclusive_group(required=True)
    levels.add_argument("--L", type=int, help="Single-point level")
    levels.add_argument("--L-list", dest="L_list", type=int, nargs="+")

    p = sub.add_parser("law", help="Limit-law quantities at (beta, x, y)")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--y-list", dest="y_list", type=float, nargs="+")
    p.add_argument("--N", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--gamma", type=float)

    p = sub.add_parser("verify-lclt", help="Exact PMF vs local Gaussian limit")
    _add_point(p)
    _add_N_list(p, [100, 400, 1600])
    p.add_argument("--A", dest="window_A", type=float, default=2.0)
    p.add_argument("--gamma", type=float, default=0.0)

    p = sub.add_parser("verify-ldp", help="Exact PMF vs large-deviation rate")
    _add_point(p)
    p.add_argument("--delta", type=_delta, default=0.4, help="float, or 'h'")
    _add_N_list(p, [200, 2000])

    p = sub.add_parser("verify-lln", help="Sample mean of H/N vs h (beta 1 default)")
    _add_measure(p, required=False)
    _add_point(p, beta=False)
    _add_ensemble(p, N=500, n_samples=100_000)

    p = sub.add_parser("verify-clt", help="KS distance of the rescaled height")
    _add_point(p)
    _add_ensemble(p, N=500, n_samples=100_000)

    p = sub.add_parser("verify-cov", help="Multi-point covariance vs C")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--x", type=float, default=0.5)
    p.add_argument("--y-list", dest="y_list", type=float, nargs="+", default=[0.3, 0.7])
    _add_ensemble(p, N=500, n_samples=100_000)
    p.add_argument("--exact-N", dest="exact_N", type=int, default=7)

    p = sub.add_parser("verify-sampler", help="Chi-square over all of S_N")
    p.add_argument("--q", type=float, default=0.5)
    _add_ensemble(p, N=4, n_samples=1_000_000)

    sub.add_parser("verify-identities", help="Closed-form identity residuals")

    p = sub.add_parser("verify-asymptotics", help="q-Pochhammer expansion orders")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=0.5)
    _add_N_list(p, [100, 400, 1600])

    for action in sub.choices.values():
        _add_common(action)
    return parser


# ================================== Configuration ============================ #
def load_config(overrides: Sequence[str] = ()) -> DictConfig:
    """Compose conf/config.yaml with Hydra overrides."""
    with initialize_config_dir(config_dir=str(CONFIG_DIR), version_base=None):
        return compose(config_name="config", overrides=list(overrides))


def _overrides(args: argparse.Namespace) -> list[str]:
    flags = {
        "sampler.threads": args.threads,
        "sampler.root_seed": args.seed,
        "output.format": args.format,
        "logging.level": args.log_level,
    }
    return [f"{k}={v}" for k, v in flags.items() if v is not None] + args.overrides


def _cli_config(args: argparse.Namespace, cfg: DictConfig) -> CliConfig:
    skip = {"overrides", "log_level", "seed", "threads", "format"}
    values = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
    return CliConfig(
        **values,
        seed=cfg.sampler.root_seed,
        threads=cfg.sampler.threads,
        format=cfg.output.format,
    )


# ================================== Commands ================================= #
def _measure(cli: CliConfig) -> MallowsParams:
    if cli.beta is not None:
        return MallowsParams.from_beta(cli.N, cli.beta)
    return MallowsParams.from_q(cli.N, cli.q)


def cmd_sample(ctx: Context) -> Artifact:
    params = _measure(ctx.cli)
    perms = ctx.pool.collect(params, ctx.seed, ctx.cli.count, lambda block: block)
    result = {
        "N": params.N,
        "q": params.q,
        "beta": params.beta,
        "seed": ctx.cli.seed,
        "permutations": perms.tolist(),
    }
    return Artifact(result, io.permutation_table(perms))


def cmd_pmf(ctx: Context) -> Artifact:
    cli, params = ctx.cli, _measure(ctx.cli)
    if cli.L_list is not None:
        joint = joint_pmf_table(params, cli.K, cli.L_list)
        return Artifact(joint.model_dump(mode="json"), io.joint_rows(joint))
    table = pmf_table(HeightQuery(params=params, L=cli.L, K=cli.K))
    return Artifact(table.model_dump(mode="json"), io.pmf_rows(table))


def cmd_law(ctx: Context) -> Artifact:
    cli = ctx.cli
    point = LawPoint(beta=cli.beta, x=cli.x, y=cli.y)
    values = law_values(point, cli.N, cli.delta, cli.gamma, ctx.numeric)
    result = values.model_dump(mode="json")
    flat = {**result["point"], **{k: v for k, v in result.items() if k != "point"}}
    if cli.y_list is not None:
        spec = covariance_spec(cli.beta, cli.x, cli.y_list)
        result["covariance"] = spec.model_dump(mode="json")
    return Artifact(result, io.key_value_rows(flat))


def _report_artifact(report: ComparisonReport) -> Artifact:
    result = report.model_dump(mode="json")
    result["passed"] = report.passed
    return Artifact(result, io.report_rows(report), report)


def cmd_verify_lclt(ctx: Context) -> Artifact:
    cli = ctx.cli
    cfg = ExperimentConfig(
        beta=cli.beta,
        x=cli.x,
        y=cli.y,
        N_list=cli.N_list,
        window_A=cli.window_A,
        gamma=cli.gamma,
    )
    return _report_artifact(verify.lclt_sweep(cfg, ctx.thresholds))


def cmd_verify_ldp(ctx: Context) -> Artifact:
    cli = ctx.cli
    report = verify.ldp_check(
        cli.beta, cli.x, cli.y, cli.delta, cli.N_list, ctx.thresholds, ctx.numeric
    )
    return _report_artifact(report)


def cmd_verify_lln(ctx: Context) -> Artifact:
    cli = ctx.cli
    beta = 1.0 if cli.beta is None and cli.q is None else cli.beta
    report = verify.lln_mc_check(
        beta,
        cli.x,
        cli.y,
        cli.N,
        cli.n_samples,
        ctx.seed,
        q=cli.q,
        pool=ctx.pool,
        thresholds=ctx.thresholds,
    )
    return _report_artifact(report)


def cmd_verify_clt(ctx: Context) -> Artifact:
    cli = ctx.cli
    report = verify.clt_ks_check(
        cli.beta,
        cli.x,
        cli.y,
        cli.N,
        cli.n_samples,
        ctx.seed,
        pool=ctx.pool,
        thresholds=ctx.thresholds,
    )
    return _report_artifact(report)


def cmd_verify_cov(ctx: Context) -> Artifact:
    cli = ctx.cli
    report = verify.multipoint_cov_check(
        cli.beta,
        cli.x,
        cli.y_list,
        cli.N,
        cli.n_samples,
        ctx.seed,
        pool=ctx.pool,
        thresholds=ctx.thresholds,
        exact_N=cli.exact_N,
    )
    return _report_artifact(report)


def cmd_verify_sampler(ctx: Context) -> Artifact:
    cli = ctx.cli
    report = verify.sampler_gof_check(
        cli.N, cli.q, cli.n_samples, ctx.seed, pool=ctx.pool, thresholds=ctx.thresholds
    )
    return _report_artifact(report)


def cmd_verify_identities(ctx: Context) -> Artifact:
    report = verify.identity_suite(thresholds=ctx.thresholds, cfg=ctx.numeric)
    return _report_artifact(report)


def cmd_verify_asymptotics(ctx: Context) -> Artifact:
    cli = ctx.cli
    report = verify.asymptotic_order_check(
        cli.beta, cli.delta, cli.alpha, cli.N_list, ctx.thresholds, ctx.numeric
    )
    return _report_artifact(report)


COMMANDS: dict[str, Callable[[Context], Artifact]] = {
    "sample": cmd_sample,
    "pmf": cmd_pmf,
    "law": cmd_law,
    "verify-lclt": cmd_verify_lclt,
    "verify-ldp": cmd_verify_ldp,
    "verify-lln": cmd_verify_lln,
    "verify-clt": cmd_verify_clt,
    "verify-cov": cmd_verify_cov,
    "verify-sampler": cmd_verify_sampler,
    "verify-identities": cmd_verify_identities,
    "verify-asymptotics": cmd_verify_asymptotics,
}


# ================================== Entry point ============================== #
def _emit(ctx: Context, artifact: Artifact) -> None:
    cli = ctx.cli
    path = io.resolve_output(cli.output, ctx.cfg.output.dir, cli.command, cli.format)
    with io.open_output(path) as stream:
        if cli.format == "json":
            config = {
                **cli.model_dump(mode="json"),
                "numeric": ctx.numeric.model_dump(),
                "thresholds": ctx.thresholds.model_dump(mode="json"),
            }
            io.write_json(stream, io.envelope(cli.command, config, artifact.result))
        else:
            io.write_csv(stream, *artifact.table)
    if path is not None:
        logger.info("Wrote {}", path)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:]).

    Returns:
        0 on success, 1 on invalid input, 2 when a verification check fails.
    """
    console = Console(stderr=True)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        console.print(f"[bold red]{escape(str(e))}[/bold red]")
        return EXIT_INVALID
    except SystemExit as e:  # --help
        return int(e.code or 0)

    try:
        cfg = load_config(_overrides(args))
        setup_logger(
            Path(cfg.logging.file) if cfg.logging.file else None,
            cfg.logging.level,
            enable_rich=cfg.logging.rich,
            enable_json=cfg.logging.json,
        )
        logger.debug("Configuration:\n{}", OmegaConf.to_yaml(cfg))
        ctx = Context(
            cli=_cli_config(args, cfg),
            cfg=cfg,
            numeric=NumericConfig.from_cfg(cfg.numeric),
            thresholds=Thresholds.from_cfg(cfg.verify),
            pool=SamplingPool.from_cfg(cfg.sampler),
        )
        artifact = COMMANDS[args.command](ctx)
        _emit(ctx, artifact)
    except (ValidationError, MallowsError) as e:
        logger.debug("Invalid input: {}", e)
        console.print(f"[bold red]error:[/bold red] {escape(str(e))}")
        return EXIT_INVALID
    except Exception:
        logger.opt(exception=True).critical("Command failed.")
        console.print(
            "[bold red]A critical error occurred. Check the logs for details.[/bold red]"
        )
        raise

    if artifact.report is not None and not artifact.report.passed:
        failed = ", ".join(artifact.report.failed_checks())
        console.print(f"[bold yellow]checks failed:[/bold yellow] {failed}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

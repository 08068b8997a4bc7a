"""Run the desk-scale acceptance suite as a standalone process."""

# ================================== Imports ================================== #
# Standard Library
from pathlib import Path

# Third-party
import hydra
from loguru import logger
from omegaconf import DictConfig
from rich.console import Console
from rich.table import Table

# Local Application
from src.utils.errors import AcceptanceFailure
from src.utils.logging import setup_logger
from src.workflows.acceptance import run_acceptance


# ================================== Functions ================================ #
@hydra.main(config_path="../conf", config_name="config", version_base=None)
def main(cfg: DictConfig) -> None:
    """Run every acceptance criterion and print a summary table.

    Select a subset with ``+only=[lclt,ldp]``.

    Args:
        cfg: Hydra configuration object.
    """
    setup_logger(
        Path(cfg.logging.file) if cfg.logging.file else None,
        cfg.logging.level,
        enable_rich=cfg.logging.rich,
        enable_json=cfg.logging.json,
    )
    console = Console()

    only = list(cfg.only) if cfg.get("only") else None
    try:
        results = run_acceptance(cfg, only)
    except AcceptanceFailure as e:
        console.print(f"[bold red]{len(e.failed_checks)} check(s) failed[/bold red]")
        for check in e.failed_checks:
            console.print(f"  [red]x[/red] {check}")
        raise

    table = Table(title="Acceptance")
    table.add_column("Criterion")
    table.add_column("Experiment")
    table.add_column("Checks", justify="right")
    for name, reports in results.items():
        for report in reports:
            table.add_row(name, report.experiment, str(len(report.checks)))
    console.print(table)
    logger.info("Acceptance suite finished")


if __name__ == "__main__":
    main()

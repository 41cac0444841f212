import logging
from collections.abc import Sequence
from functools import wraps
from logging.handlers import RotatingFileHandler

import numpy as np
from rich.table import Table

import opsys.config as config
from opsys.errors import ConfigError, UnsupportedSystem

Seed = int | Sequence[int]


def setup_logger(name: str = "opsys", log_file: str = "opsys.log") -> logging.Logger:
    logger = logging.getLogger(name)
    logger.setLevel(logging.INFO)

    if not logger.handlers:
        handler = RotatingFileHandler(log_file, maxBytes=5 * 1024 * 1024, backupCount=3)
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    return logger


def supports(*kinds):
    """
    Ensures the first argument (an id, element or map) has one of ``kinds``.
    Usage: @supports(SystemKind.S, SystemKind.T)
    """

    def decorator(func):
        @wraps(func)
        def wrapper(target, *args, **kwargs):
            kind = target.kind if hasattr(target, "kind") else target.system.kind
            if kind not in kinds:
                allowed = ", ".join(str(k) for k in kinds)
                raise UnsupportedSystem(
                    f"{func.__name__} supports {allowed}; got {kind}"
                )

            return func(target, *args, **kwargs)

        return wrapper

    return decorator


def rng_stream(seed: Seed, *keys: int) -> np.random.Generator:
    """Independent generator for (seed, *keys); order of use does not matter."""
    base = [seed] if isinstance(seed, int) else list(seed)
    return np.random.default_rng([*base, *keys])


def parse_n_range(text: str, max_n: int = config.MAX_N) -> list[int]:
    """Parse "4" or the inclusive range "2..8" into a list of sizes."""
    text = text.strip()
    try:
        if ".." in text:
            lo_text, hi_text = text.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
        else:
            lo = hi = int(text)
    except ValueError as e:
        raise ConfigError(
            f"--n: expected an integer or a range like '2..8', got {text!r}"
        ) from e

    if lo > hi:
        raise ConfigError(f"--n: empty range {text!r} (start exceeds end)")
    if lo < 1 or hi > max_n:
        raise ConfigError(f"--n: sizes must lie in 1..{max_n}, got {text!r}")

    return list(range(lo, hi + 1))


def format_residual(value: float | None) -> str:
    if value is None:
        return "-"
    return f"{value:.3e}"


def create_summary_table(claims: list, title: str = "opsys verification") -> Table:
    status_styles = {
        "pass": "[green]pass[/green]",
        "fail": "[bold red]fail[/bold red]",
        "inconclusive": "[yellow]inconclusive[/yellow]",
    }

    table = Table(
        show_header=True,
        header_style="bold magenta",
        show_lines=False,
        title=title,
    )
    table.add_column("Claim", style="cyan")
    table.add_column("Anchor", style="dim")
    table.add_column("Status", justify="center")
    table.add_column("Residual", justify="right")
    table.add_column("Detail")

    for claim in claims:
        table.add_row(
            claim.id,
            claim.anchor,
            status_styles.get(claim.status, claim.status),
            format_residual(claim.residual),
            claim.detail or "",
        )

    return table

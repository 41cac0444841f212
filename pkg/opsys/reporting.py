import io
import logging
from pathlib import Path

import pandas as pd
from rich.console import Console

from opsys.datamodels import OutputFormat, Report
from opsys.utils import create_summary_table

logger = logging.getLogger("opsys")

CSV_COLUMNS = ["id", "anchor", "n", "status", "residual"]


def serialize_report(report: Report) -> str:
    return report.model_dump_json(indent=2)


def parse_report(text: str) -> Report:
    return Report.model_validate_json(text)


def claims_frame(report: Report) -> pd.DataFrame:
    """Scalar columns of the claims; witnesses are left out."""
    rows = [claim.model_dump(include=set(CSV_COLUMNS)) for claim in report.claims]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def render_csv(report: Report) -> str:
    return claims_frame(report).to_csv(index=False)


def render(report: Report, output: OutputFormat) -> str:
    if output is OutputFormat.JSON:
        return serialize_report(report)
    if output is OutputFormat.CSV:
        return render_csv(report)
    raise ValueError(f"No string rendering for {output}")


def print_report(report: Report, console: Console) -> None:
    """Rich table of claims followed by the pass/fail tally."""
    console.print(create_summary_table(report.claims))
    console.print(
        f"[green]{report.count('pass')} passed[/green], "
        f"[bold red]{report.count('fail')} failed[/bold red], "
        f"[yellow]{report.count('inconclusive')} inconclusive[/yellow] "
        f"in {report.duration_seconds:.2f}s"
    )


def write_report(report: Report, path: str | Path, output: OutputFormat) -> Path:
    path = Path(path)
    if output is OutputFormat.TEXT:
        buffer = io.StringIO()
        print_report(report, Console(file=buffer, width=120))
        text = buffer.getvalue()
    else:
        text = render(report, output)

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {output} report with {len(report.claims)} claims to {path}")
    return path

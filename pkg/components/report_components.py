"""
Console output for the CLI: summary tables on stdout, error JSON on stderr.
"""

import json

import click
import pandas as pd

from utils.errors import error_payload


def summary_frame(summary):
    """Two-column table (quantity, value) from a flat or one-level nested dict."""
    rows = []
    for key, value in summary.items():
        if isinstance(value, dict):
            rows.extend((f"{key}.{sub}", _cell(v)) for sub, v in value.items())
        else:
            rows.append((key, _cell(value)))
    return pd.DataFrame(rows, columns=["quantity", "value"])


def _cell(value):
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        return ", ".join(str(_cell(v)) for v in value)
    return str(value)


def echo_summary(title, summary):
    click.echo(title)
    frame = summary_frame(summary)
    if len(frame):
        click.echo(frame.to_string(index=False))


def echo_artifacts(paths):
    for path in paths:
        click.echo(f"wrote {path}")


def echo_error(exc):
    """One JSON object describing the failure, on stderr."""
    click.echo(json.dumps(error_payload(exc), sort_keys=True), err=True)

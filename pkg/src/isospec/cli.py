"""Command-line interface: ``isospec tabulate|verify|bounds|residual``.

Exit codes: 0 success, 1 verification failure, 2 bad arguments,
3 inadmissible gamma, 4 numerical failure.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import sys

import click
import numpy as np

from . import deformation as dfm
from .classical import Family
from .errors import InadmissibleGamma, IsospecError, NotApplicable, NumericalFailure
from .families import default_families, spec_for
from .grid import SPACINGS, GridSpec
from .verify import IDENTITIES, run_identity, run_suite, summarize

EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_GAMMA = 3
EXIT_NUMERIC = 4


class CliError(click.ClickException):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.exit_code = code


def _fail_on(exc: Exception):
    if isinstance(exc, InadmissibleGamma):
        raise CliError(str(exc), EXIT_GAMMA)
    if isinstance(exc, (NumericalFailure, ArithmeticError)):
        raise CliError(f"numerical failure: {exc}", EXIT_NUMERIC)
    raise CliError(str(exc), EXIT_USAGE)


_CONFIG_ALIASES = {"family": "family_name", "grid": "grid_text", "format": "fmt", "lambda": "lam"}


def _read_config(path: str) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    with open(path, encoding="utf-8") as fh:
        try:
            parser.read_string("[isospec]\n" + fh.read(), source=path)
        except configparser.Error as exc:
            raise click.BadParameter(str(exc), param_hint="--config")
    values = {}
    for key, value in parser["isospec"].items():
        key = key.lstrip("-").replace("-", "_")
        values[_CONFIG_ALIASES.get(key, key)] = value
    return values


def _format_number(v: float) -> str:
    return format(float(v), ".17g")


def _check_finite(columns: dict):
    for name, col in columns.items():
        arr = np.asarray(col, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise NumericalFailure(f"column {name!r} contains non-finite values")


def _emit(text: str, output: str | None):
    if output in (None, "-"):
        click.echo(text, nl=False)
    else:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _table_text(columns: dict, fmt: str) -> str:
    names = list(columns)
    rows = zip(*(np.asarray(columns[k], dtype=float) for k in names))
    if fmt == "json":
        data = [{k: float(v) for k, v in zip(names, row)} for row in rows]
        return json.dumps(data, allow_nan=False, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in rows:
        w.writerow([_format_number(v) for v in row])
    return buf.getvalue()


def _records_text(records: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(records, allow_nan=False, indent=1) + "\n"
    buf = io.StringIO()
    if records:
        w = csv.DictWriter(buf, fieldnames=list(records[0]), lineterminator="\n")
        w.writeheader()
        for rec in records:
            w.writerow({k: _cell(v) for k, v in rec.items()})
    return buf.getvalue()


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return _format_number(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, allow_nan=False, sort_keys=True)
    return v


def _family(name, alpha, beta, lam) -> Family:
    return Family.parse(name, alpha, beta, lam)


def _grid(text: str | None, spacing: str, spec) -> GridSpec:
    if text is None:
        g = spec.default_grid
        return GridSpec(g.lo, g.hi, g.count, spacing)
    return GridSpec.parse(text, spacing)


family_option = click.option("--family", "family_name", required=True, help="Family name, e.g. hermite, jacobi-polynomial.")
alpha_option = click.option("--alpha", type=float, default=None, help="alpha (Laguerre, Jacobi).")
beta_option = click.option("--beta", type=float, default=None, help="beta (Jacobi polynomials).")
lambda_option = click.option("--lambda", "lam", type=float, default=None, help="lambda (Jacobi functions).")
format_option = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
output_option = click.option("--output", type=click.Path(dir_okay=False, writable=True), default=None, help="Output file (default stdout).")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None, help="Flat key = value file supplying option defaults.")
@click.pass_context
def main(ctx: click.Context, config):
    """Isospectral deformations of classical special-function families."""
    if config:
        values = _read_config(config)
        ctx.default_map = {name: dict(values) for name in ("tabulate", "verify", "bounds", "residual")}


@main.command()
@family_option
@alpha_option
@beta_option
@lambda_option
@click.option("--n", type=click.IntRange(min=0), required=True)
@click.option("--gamma", type=float, default=None, help="Deformation parameter; omit for classical columns only.")
@click.option("--grid", "grid_text", default=None, help="lo:hi:count (default: the family's grid).")
@click.option("--spacing", type=click.Choice(SPACINGS), default="uniform", show_default=True)
@click.option("--derivatives/--no-derivatives", default=False, help="Include first/second derivative columns.")
@format_option
@output_option
def tabulate(family_name, alpha, beta, lam, n, gamma, grid_text, spacing, derivatives, fmt, output):
    """Tabulate psi_n, psi_{n+1} and, given --gamma, b and the deformed eigenfunction."""
    try:
        spec = spec_for(_family(family_name, alpha, beta, lam))
        grid = _grid(grid_text, spacing, spec)
        table = dfm.tabulate(spec, n, gamma, grid)
        cols = table.columns()
        order = ["x", "psi_n", "psi_np1", "b", "psi_tilde"]
        if derivatives:
            order += ["psi_n_d1", "psi_n_d2", "db", "psi_tilde_d1", "psi_tilde_d2"]
        columns = {k: cols[k] for k in order if k in cols}
        _check_finite(columns)
    except (IsospecError, ValueError, ArithmeticError) as exc:
        _fail_on(exc)
    _emit(_table_text(columns, fmt), output)


def _parse_families(text: str) -> list[Family]:
    text = text.strip()
    if not text:
        return []
    presets = {f.kind: f for f in default_families()}
    if text.lower() == "all":
        return list(presets.values())
    out = []
    for name in text.split(","):
        fam = Family.parse(name)
        out.append(presets.get(fam.kind, fam))
    return out


@main.command()
@click.option("--families", default="all", show_default=True, help="Comma-separated family names, 'all', or empty.")
@click.option("--n-max", type=click.IntRange(min=1), default=4, show_default=True)
@click.option("--gammas-per-family", type=click.IntRange(min=1, max=5), default=3, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json", show_default=True)
@output_option
def verify(families, n_max, gammas_per_family, seed, workers, fmt, output):
    """Run the identity suite; exit 0 iff every report passes."""
    try:
        fams = _parse_families(families)
        reports = run_suite(fams, n_max, gammas_per_family, seed, workers)
    except (IsospecError, ValueError) as exc:
        _fail_on(exc)
    _emit(_records_text([r.to_dict() for r in reports], fmt), output)
    s = summarize(reports)
    click.echo(
        f"{s['total']} reports: {s['passed']} passed, {s['failed']} failed "
        f"({s['not_applicable']} not applicable, {s['error']} errors)",
        err=True,
    )
    sys.exit(0 if s["failed"] == 0 else EXIT_FAILED)


@main.command()
@family_option
@alpha_option
@beta_option
@lambda_option
@click.option("--n-max", type=click.IntRange(min=0), default=6, show_default=True)
@format_option
@output_option
def bounds(family_name, alpha, beta, lam, n_max, fmt, output):
    """Admissible-gamma rule, boundary constant and its quadrature cross-check."""
    try:
        spec = spec_for(_family(family_name, alpha, beta, lam))
        rule = spec.gamma_rule
        records = []
        for n in range(n_max + 1):
            boundary = rule.boundary(n)
            quad = None if spec.family.kind == "bessel" else spec.full_integral(n)
            records.append(
                {
                    "n": n,
                    "kind": rule.kind,
                    "condition": rule.describe(n),
                    "threshold": rule.threshold(n),
                    "boundary": boundary,
                    "quadrature": quad,
                    "discrepancy": None if quad is None else abs(quad - boundary),
                }
            )
        for rec in records:
            for key in ("threshold", "boundary", "quadrature"):
                if rec[key] is not None and not math.isfinite(rec[key]):
                    raise NumericalFailure(f"{key} is not finite at n={rec['n']}")
    except (IsospecError, ValueError, ArithmeticError) as exc:
        _fail_on(exc)
    _emit(_records_text(records, fmt), output)


@main.command()
@click.option("--identity", type=click.Choice(IDENTITIES), required=True)
@family_option
@alpha_option
@beta_option
@lambda_option
@click.option("--n", type=click.IntRange(min=0), required=True)
@click.option("--gamma", type=float, default=None)
@click.option("--grid", "grid_text", default=None, help="lo:hi:count (default: the family's grid).")
@click.option("--spacing", type=click.Choice(SPACINGS), default="uniform", show_default=True)
@click.option("--tol", type=float, default=None, help="Tolerance (default: the identity's).")
@click.option("--method", type=click.Choice(["analytic", "fd"]), default="analytic", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json", show_default=True)
@output_option
def residual(identity, family_name, alpha, beta, lam, n, gamma, grid_text, spacing, tol, method, fmt, output):
    """Evaluate a single identity and print its residual report."""
    try:
        fam = _family(family_name, alpha, beta, lam)
        grid = None if grid_text is None else GridSpec.parse(grid_text, spacing)
        report = run_identity(identity, fam, n, gamma, grid, tol, method)
    except NotApplicable as exc:
        raise CliError(f"not applicable: {exc}", EXIT_USAGE)
    except (IsospecError, ValueError, ArithmeticError) as exc:
        _fail_on(exc)
    _emit(_records_text([report.to_dict()], fmt), output)
    sys.exit(0 if report.passed else EXIT_FAILED)


if __name__ == "__main__":  # pragma: no cover
    main()

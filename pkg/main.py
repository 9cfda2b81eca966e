"""Command line entry point for the fibration certifier."""
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import click
import yaml

from algebra.forms import (
    SymForm,
    characteristic_basis,
    diagonalize_mod_p,
    extend_to_basis,
    find_primitive_divisible,
)
from algebra.hilbert import quadratic_hilbert, verify_factorization
from core.config import config_manager
from core.exceptions import (
    CertificateError,
    ConstructionError,
    DataError,
    FibrationCertifierError,
    ProblemInputError,
    SearchExhaustedError,
)
from core.interfaces import SearchFamily, SeriesMode
from homotopy.expressions import parse
from homotopy.kernel import bounded_search
from homotopy.tables import default_loader, integral_table
from services.certificates import (
    construct,
    dump_certificate,
    load_problem,
    read_certificate,
    verify_certificate,
    write_certificate,
)
from services.regression import Status, SuiteItem, run_paper_examples, run_selftest
from util.logging_config import get_logger
from util.performance import performance_monitor

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_CONSTRUCTION = 2


def _fail(e: FibrationCertifierError) -> None:
    """Map a library error onto the exit-code convention."""
    if isinstance(e, (ConstructionError, SearchExhaustedError, DataError)):
        click.echo(f"no construction: {e}", err=True)
        for line in getattr(e, "transcript", []):
            click.echo(f"  {line}", err=True)
        sys.exit(EXIT_NO_CONSTRUCTION)
    if isinstance(e, ProblemInputError) and e.fields:
        click.echo(f"input error in {', '.join(e.fields)}: {e}", err=True)
    else:
        click.echo(f"error: {e}", err=True)
    sys.exit(EXIT_INPUT)


def _matrix(text: str) -> SymForm:
    try:
        rows = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ProblemInputError(f"cannot parse matrix {text!r}") from e
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ProblemInputError("matrix must look like [[1, 0], [0, -1]]", ["matrix"])
    if any(not isinstance(x, int) or isinstance(x, bool) for r in rows for x in r):
        raise ProblemInputError("matrix entries must be integers", ["matrix"])
    return SymForm.from_rows(rows)


def _print_items(items: List[SuiteItem]) -> None:
    for item in items:
        click.echo(item.line())
    counts = {s: sum(1 for i in items if i.status is s) for s in Status}
    click.echo(
        f"{counts[Status.PASS]} passed, {counts[Status.FAIL]} failed, {counts[Status.SKIP]} skipped, "
        f"{counts[Status.NOTE]} noted"
    )
    if counts[Status.FAIL]:
        sys.exit(EXIT_INPUT)


@click.group()
@click.option("--table-dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Directory holding the homotopy tables")
def cli(table_dir: Optional[Path]) -> None:
    """Certify fibrations over highly connected manifolds."""
    if table_dir is not None:
        tables = config_manager.config.tables
        config_manager.update_config(tables=replace(tables, table_dir=table_dir))


@cli.command("construct")
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False, path_type=Path),
              help="Problem file (YAML or JSON)")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Certificate file; stdout when omitted")
@click.option("--verify", is_flag=True, help="Read the certificate back and re-run every check")
def construct_command(input_path: Path, out_path: Optional[Path], verify: bool) -> None:
    """Build a certificate for one problem file."""
    try:
        problem = load_problem(input_path)
        certificate = construct(problem)
        if out_path is not None:
            write_certificate(certificate, out_path)
        else:
            click.echo(dump_certificate(certificate), nl=False)
        if verify:
            stored = read_certificate(out_path) if out_path is not None else certificate
            verify_certificate(stored)
            click.echo("certificate re-verified", err=True)
    except CertificateError as e:
        click.echo(f"verification failed: {e}", err=True)
        sys.exit(EXIT_INPUT)
    except FibrationCertifierError as e:
        _fail(e)
    if not certificate.ok:
        click.echo("certificate records a failed check", err=True)
        sys.exit(EXIT_NO_CONSTRUCTION)


@cli.command("hilbert")
@click.option("--n", "n", required=True, type=int, help="Cell dimension (even)")
@click.option("--k", "k", required=True, type=int, help="Rank of H_n")
@click.option("--order", default=12, show_default=True, type=int, help="Truncation order")
@click.option("--mode", type=click.Choice([m.value for m in SeriesMode]), default=SeriesMode.M.value,
              show_default=True, help="M: T(a)/(l); E: the connected-sum algebra")
def hilbert_command(n: int, k: int, order: int, mode: str) -> None:
    """Print a Hilbert series, the recovered Lie ranks and the rank comparison."""
    try:
        limit = config_manager.config.hilbert.max_order
        if order > limit:
            raise ProblemInputError(f"order {order} exceeds {limit}", ["order"])
        series = quadratic_hilbert(k, n, order, SeriesMode(mode))
        click.echo(f"series: {series}")
        if order == 0:
            return
        report = verify_factorization(k, n, order)
        click.echo(f"factorization exact: {report.factorization_exact}")
        click.echo("d  l_d  f_d")
        for d, l, f in report.rank_table():
            click.echo(f"{d}  {l}  {f}")
        click.echo(f"f_d = l_d - [d = {n - 1}]: {report.ranks_consistent}")
    except FibrationCertifierError as e:
        _fail(e)


@cli.command("paper-examples")
@click.option("--bound", default=None, type=int, help="Bound for the n = 8 searches (default from config)")
def paper_examples_command(bound: Optional[int]) -> None:
    """Re-run every worked example; nonzero exit on any FAIL."""
    limit = config_manager.config.search.max_search_bound
    if bound is not None and not 0 <= bound <= limit:
        _fail(ProblemInputError(f"bound must lie in 0..{limit}", ["bound"]))
    _print_items(run_paper_examples(bound))


@cli.command("search-n8")
@click.option("--bound", default=None, type=int, help="Coefficient bound (default from config)")
@click.option("--family", type=click.Choice([f.value for f in SearchFamily]), default=SearchFamily.FULL.value,
              show_default=True, help="sphere: delta from sphere classes; full: pair classes too")
def search_n8_command(bound: Optional[int], family: str) -> None:
    """Exhaustive bounded search for (mu_1, delta_1) with L = sigma1 - sigma2."""
    try:
        limit = config_manager.config.search.max_search_bound
        if bound is not None and not 0 <= bound <= limit:
            raise ProblemInputError(f"bound must lie in 0..{limit}", ["bound"])
        for variant in default_loader().variants("n8"):
            report = bounded_search(integral_table(8, variant), parse("sigma1 - sigma2"), bound, SearchFamily(family))
            click.echo(report.summary())
            for solution in report.solutions:
                click.echo(f"  [{report.family.value}] mu = {list(solution.mu)}, delta = {solution.delta_expression}")
            if report.empty:
                click.echo(
                    f"  no pair within bound {report.bound} (family {report.family.value}); "
                    "no claim is made beyond it"
                )
        duration = performance_monitor.last_duration("bounded_search")
        if duration is not None:
            click.echo(f"last search took {duration:.2f} s", err=True)
    except FibrationCertifierError as e:
        _fail(e)


@cli.group("form-tools")
def form_tools() -> None:
    """Operations on unimodular symmetric forms."""


@form_tools.command("primitive")
@click.option("--matrix", required=True, help="Form as [[a, b], [b, c]]")
@click.option("--modulus", type=click.Choice(["3", "8"]), default="3", show_default=True)
def primitive_command(matrix: str, modulus: str) -> None:
    """Primitive vector v with modulus | <v, v>."""
    try:
        found = find_primitive_divisible(_matrix(matrix), int(modulus))
        click.echo(f"vector: {list(found.vector)}  norm: {found.norm}  path: {found.path}")
    except FibrationCertifierError as e:
        _fail(e)


@form_tools.command("extend")
@click.option("--vector", required=True, help="Primitive vector as [a, b, ...]")
def extend_command(vector: str) -> None:
    """Unimodular matrix with the given last column."""
    try:
        v = yaml.safe_load(vector)
        if not isinstance(v, list) or any(not isinstance(x, int) for x in v):
            raise ProblemInputError("vector must look like [1, 2, 3]", ["vector"])
        click.echo(yaml.safe_dump({"basis": extend_to_basis(v).tolist()}, sort_keys=True), nl=False)
    except FibrationCertifierError as e:
        _fail(e)


@form_tools.command("diagonalize")
@click.option("--matrix", required=True, help="Form as [[a, b], [b, c]]")
@click.option("--prime", required=True, type=int)
def diagonalize_command(matrix: str, prime: int) -> None:
    """Congruence diagonalization over F_p."""
    try:
        result = diagonalize_mod_p(_matrix(matrix), prime)
        click.echo(yaml.safe_dump({"matrix": result.matrix.tolist(), "diagonal": list(result.diagonal)},
                                  sort_keys=True), nl=False)
    except FibrationCertifierError as e:
        _fail(e)


@form_tools.command("characteristic")
@click.option("--matrix", required=True, help="Form as [[a, b], [b, c]]")
def characteristic_command(matrix: str) -> None:
    """Characteristic vector mod 2 and a basis ending in it."""
    try:
        result = characteristic_basis(_matrix(matrix))
        click.echo(yaml.safe_dump({"vector": list(result.vector), "basis": result.change.tolist()},
                                  sort_keys=True), nl=False)
    except FibrationCertifierError as e:
        _fail(e)


@cli.command("selftest")
def selftest_command() -> None:
    """Fast smoke run of the tables, the tensor layer and every regime."""
    _print_items(run_selftest())


if __name__ == "__main__":
    cli()

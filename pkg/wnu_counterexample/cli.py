from __future__ import annotations

import logging
import os
from contextlib import contextmanager
from typing import Iterator, List, Optional, Tuple

import pandas as pd
import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from .api import run_example
from .catalog import load_example
from .claims import verify_all
from .consistency import ConsistencyState, enforce_23_consistency
from .deletion import build_family, classify_all_deletions, simulate_deletion, step4_candidates
from .digraph import enumerate_homomorphisms
from .errors import InputError, WnuError
from .export import write_lists
from .load import read_digraph, read_instance, read_operation, read_relations
from .structures import (
    check_block_maltsev,
    check_operation_properties,
    check_polymorphism,
    enumerate_endomorphisms,
    solve_instance,
)

app = typer.Typer(add_completion=False, help="Build and verify the WNU-polymorphism counterexamples.")
console = Console()
err_console = Console(stderr=True)

FORMATS = ("text", "tsv", "json")
VERBOSE = typer.Option(0, "--verbose", "-v", count=True, help="-v for INFO, -vv for DEBUG")


def _setup_logging(verbose: int) -> None:
    level = logging.WARNING if verbose <= 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


@contextmanager
def _input_errors() -> Iterator[None]:
    """Input problems exit 2, construction failures exit 1."""
    try:
        yield
    except InputError as exc:
        err_console.print(f"[red]Input error:[/red] {exc}")
        raise typer.Exit(code=2)
    except WnuError as exc:
        err_console.print(f"[red]Failed:[/red] {exc}")
        raise typer.Exit(code=1)


def _check_format(fmt: str) -> str:
    if fmt not in FORMATS:
        raise typer.BadParameter(f"--format must be one of {', '.join(FORMATS)}")
    return fmt


def _plural(n: int, word: str) -> str:
    return f"{n} {word}" if n == 1 else f"{n} {word}s"


def _parse_blocks(text: str) -> List[List[str]]:
    blocks = []
    for part in text.split("|"):
        items = part.split(",") if "," in part else list(part)
        items = [x.strip() for x in items if x.strip()]
        if not items:
            raise InputError(f"empty block in {text!r}")
        blocks.append(items)
    return blocks


def _emit_df(df: pd.DataFrame, fmt: str) -> None:
    if fmt == "tsv":
        typer.echo(df.to_csv(sep="\t", index=False, lineterminator="\n"), nl=False)
    else:
        typer.echo(df.to_json(orient="records", lines=True), nl=False)
        typer.echo("")


def _split_deletion(text: str, state: ConsistencyState) -> Tuple[str, str]:
    """VERTEX:VALUE where both labels may contain colons; the first split naming a live value wins."""
    known = set(state.vertices)
    vertex_seen = None
    for i, ch in enumerate(text):
        if ch != ":":
            continue
        v, a = text[:i], text[i + 1:]
        if v not in known:
            continue
        if a in state.unary(v):
            return v, a
        vertex_seen = vertex_seen or (v, a)
    if vertex_seen:
        v, a = vertex_seen
        raise InputError(f"{a!r} is not in L({v})")
    raise InputError(f"--delete expects VERTEX:VALUE with a vertex of G, got {text!r}")


@app.command()
def build(
    example: str = typer.Option(..., "--example", help="1|2|2x"),
    out: str = typer.Option("outputs/example", "--out", help="Output directory"),
    verbose: int = VERBOSE,
):
    """
    Write H, G, the templates, phi, the instance and the provenance table.
    """
    _setup_logging(verbose)
    with _input_errors():
        run = run_example(example, enforce=False)
        paths = run.export(out)

    tr = run.bundle.translation
    t = Table(title=f"{run.name} artifacts")
    t.add_column("File")
    t.add_column("Note")
    notes = {"H.dg": f"{len(tr.H)} vertices", "G.dg": f"{len(tr.G)} vertices"}
    for p in paths:
        name = p.replace("\\", "/").rsplit("/", 1)[-1]
        t.add_row(name, notes.get(name, ""))
    console.print(t)
    console.print(f"[green]Done.[/green] Outputs written to: {out}")


@app.command()
def check(
    relations: str = typer.Option(..., "--relations", help="Relation file"),
    operation: str = typer.Option(..., "--operation", help="Operation table file"),
    instance: Optional[str] = typer.Option(None, "--instance", help="CSP instance over the relations"),
    block: Optional[str] = typer.Option(None, "--block", help="Block partition, e.g. 01|2"),
    verbose: int = VERBOSE,
):
    """
    Polymorphism verdict, properties and endomorphisms of a template.
    """
    _setup_logging(verbose)
    with _input_errors():
        tmpl = read_relations(relations)
        op = read_operation(operation, carrier=tmpl.domain.elements)
        poly = check_polymorphism(op, tmpl)
        props = check_operation_properties(op)
        endos = enumerate_endomorphisms(tmpl)
        solutions = solve_instance(tmpl, read_instance(instance)) if instance else None
        blocks = check_block_maltsev(op, tmpl, _parse_blocks(block)) if block else None

    if poly.ok:
        console.print("polymorphism: [green]yes[/green]")
    else:
        console.print(
            f"polymorphism: [red]no[/red] (relation {poly.relation}: "
            f"{' '.join(''.join(r) for r in poly.inputs)} -> {''.join(poly.output or ())})"
        )
    console.print(f"idempotent: {props.idempotent}  cyclic: {props.cyclic}  wnu: {props.wnu}")
    pairs = ", ".join(f"({a},{b})" for a, b in sorted(props.maltsev_pairs)) or "none"
    console.print(f"maltsev violations (a,b): {pairs}")
    console.print(f"endomorphisms: {len(endos)}")
    if solutions is not None:
        console.print(f"instance: {_plural(len(solutions), 'solution')}")
        for s in solutions[:8]:
            console.print("  " + " ".join(f"{k}={v}" for k, v in sorted(s.items())))
    if blocks is not None:
        console.print(f"block Mal'tsev: {'yes' if blocks.ok else 'no'}" + (f" ({blocks.detail})" if blocks.detail else ""))
    if not poly.ok or (blocks is not None and not blocks.ok):
        raise typer.Exit(code=1)


@app.command()
def consistency(
    g: str = typer.Option(..., "--g", help="Instance digraph file"),
    h: str = typer.Option(..., "--h", help="Template digraph file"),
    out: Optional[str] = typer.Option(None, "--out", help="Write the lists file here"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Shuffle the through-vertex order"),
    verbose: int = VERBOSE,
):
    """
    Enforce (2,3)-consistency of G -> H and summarize the list sizes.
    """
    _setup_logging(verbose)
    with _input_errors():
        gd, hd = read_digraph(g), read_digraph(h)
        state = enforce_23_consistency(gd, hd, order_seed=seed)

    if out:
        path = write_lists(os.path.dirname(out) or ".", state, os.path.basename(out))
        console.print(f"lists written to: {path}")

    sizes = state.lists_df()["size"].value_counts().sort_index()
    t = Table(title="List sizes")
    t.add_column("Size", justify="right")
    t.add_column("Vertices", justify="right")
    for size, n in sizes.items():
        t.add_row(str(size), str(n))
    console.print(t)
    if not state.consistent:
        console.print(f"[red]Empty list at[/red] {', '.join(state.empty_vertices()[:5])}")
        raise typer.Exit(code=1)
    console.print(f"[green]Consistent.[/green] {state.size()} value(s) over {len(state.vertices)} vertices")


@app.command()
def homs(
    g: str = typer.Option(..., "--g", help="Instance digraph file"),
    h: str = typer.Option(..., "--h", help="Template digraph file"),
    limit: Optional[int] = typer.Option(None, "--limit", help="Stop after this many"),
    project: Optional[str] = typer.Option(None, "--project", help="Comma-separated vertices to project onto"),
    verbose: int = VERBOSE,
):
    """
    Count homomorphisms G -> H (or their distinct projections).
    """
    _setup_logging(verbose)
    with _input_errors():
        gd, hd = read_digraph(g), read_digraph(h)
        onto = [v.strip() for v in project.split(",") if v.strip()] if project else None
        if onto:
            unknown = [v for v in onto if v not in gd.index]
            if unknown:
                raise InputError(f"unknown vertex {unknown[0]!r}")
        found = enumerate_homomorphisms(gd, hd, limit=limit, project_onto=onto)
    typer.echo(_plural(len(found), "homomorphism") + (f" (projected onto {len(onto)} vertices)" if onto else ""))


@app.command()
def claims(
    name: str = typer.Argument(..., help="example1|example2|example2x"),
    as_json: bool = typer.Option(False, "--json", help="Same as --format json"),
    fmt: str = typer.Option("text", "--format", help="text|tsv|json"),
    census: bool = typer.Option(True, "--census/--no-census", help="Run the deletion census"),
    scope: Optional[str] = typer.Option(None, "--scope", help="all|anchors for the multi-sorted check"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Shuffle the through-vertex order"),
    verbose: int = VERBOSE,
):
    """
    Verify every claim about an example; exit 1 if any claim fails.
    """
    _setup_logging(verbose)
    fmt = "json" if as_json else _check_format(fmt)
    with _input_errors():
        report = verify_all(load_example(name), census=census, scope=scope, order_seed=seed)
    typer.echo(report.render(fmt), nl=False)
    if not report.ok:
        raise typer.Exit(code=1)


@app.command("fkr-step4")
def step4(
    example: str = typer.Option(..., "--example", help="1|2|2x"),
    delete: Optional[str] = typer.Option(None, "--delete", help="VERTEX:VALUE to delete"),
    classify_all: bool = typer.Option(False, "--classify-all", help="Verdict for every candidate"),
    method: str = typer.Option("census", "--method", help="census|simulate"),
    fmt: str = typer.Option("text", "--format", help="text|tsv|json"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Shuffle the through-vertex order"),
    verbose: int = VERBOSE,
):
    """
    Simulate the value-deletion step on an example after (2,3)-consistency.
    """
    _setup_logging(verbose)
    fmt = _check_format(fmt)
    with _input_errors():
        bundle = load_example(example)
        tr = bundle.translation
        state = enforce_23_consistency(tr.G, tr.H, order_seed=seed)
        if not state.consistent:
            raise WnuError(f"{bundle.name}: (2,3)-consistency emptied a list")
        family = build_family(tr, state, bundle.phi)

        if delete:
            vertex, value = _split_deletion(delete, state)
            census = None
            verdict = simulate_deletion(tr, state, vertex, value, order_seed=seed)
        elif classify_all:
            census = classify_all_deletions(tr, state, family, method=method, order_seed=seed)
            verdict = None
        else:
            cands = step4_candidates(family, state)
            typer.echo(f"{_plural(len(cands), 'candidate')} (vertex, a, b) on {len({c[0] for c in cands})} vertices")
            return

    if verdict is not None:
        df = pd.DataFrame(
            [
                {
                    "vertex": verdict.vertex,
                    "value": verdict.value,
                    "group": verdict.group,
                    "solutions_before": verdict.solutions_before,
                    "solutions_after": verdict.solutions_after,
                    "lists_emptied": verdict.lists_emptied,
                    "verdict": verdict.verdict,
                }
            ]
        )
        if fmt == "text":
            typer.echo(
                f"delete {verdict.value} at {verdict.vertex}: {verdict.verdict} "
                f"({verdict.solutions_before} -> {verdict.solutions_after} solutions)"
            )
        else:
            _emit_df(df, fmt)
        return

    assert census is not None
    if fmt != "text":
        _emit_df(census.census_df(), fmt)
        return
    t = Table(title=f"{bundle.name} deletion census ({census.method})")
    t.add_column("Group")
    t.add_column("Safe", justify="right")
    t.add_column("Fatal", justify="right")
    for group, counts in census.by_group().items():
        t.add_row(group, str(counts["safe"]), str(counts["fatal"]))
    console.print(t)
    variables = census.restricted_to(tr.var_vertices.values())
    for d in variables.verdicts:
        typer.echo(f"{d.vertex}\t{d.value}\t{d.verdict}\t{d.solutions_before}->{d.solutions_after}")
    typer.echo(f"{_plural(len(census.verdicts), 'candidate')}: {len(census.safe())} safe, {len(census.fatal())} fatal")


def main() -> None:
    app()


if __name__ == "__main__":
    main()

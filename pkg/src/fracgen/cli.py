"""Command-line interface: build systems, generate catalogs, walk fibers, verify and report.

Exit codes: 0 success, 1 verification failure, 2 work budget exhausted
(checkpoint written), 3 usage error.
"""

from __future__ import annotations

import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import analysis
from .constraints import (
    SUDOKU_GROUPS,
    ConstraintSystem,
    build_margin_system,
    build_strata_system,
    oa_constraints,
    sudoku_constraints,
    sudoku_spec,
    write_matrix,
)
from .design import DesignError, DesignSpec, regular_fraction
from .io import (
    content_digest,
    format_solutions,
    format_transcript,
    parse_bounds,
    parse_exponents,
    parse_levels,
    parse_words,
    read_solutions,
    write_rows,
)
from .lattice import BudgetExhausted, enumerate_bounded, hilbert_basis
from .moves import move_basis, walk

BUDGET_ENV = "FRACGEN_BUDGET"
EXIT_OK, EXIT_VERIFY, EXIT_BUDGET, EXIT_USAGE = 0, 1, 2, 3
ENCODINGS = ("auto", "strata-lambda", "cyclotomic", "margins")


def _system_options(f):
    opts = [
        click.option("--levels", help="Comma-separated factor levels, e.g. 2,2,2,2,2."),
        click.option("--oa", type=int, help="Orthogonal array of this strength."),
        click.option("--sudoku", type=int, help="Sudoku designs over a prime p (p^2 x p^2 grid)."),
        click.option("--custom", type=click.Path(exists=True, dir_okay=False), help="File with one exponent per line."),
        click.option("--encoding", type=click.Choice(ENCODINGS), default="auto", show_default=True),
        click.option("--dedup/--no-dedup", default=True, show_default=True, help="Drop exponents with identical strata."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def make_system(levels, oa, sudoku, custom, encoding, dedup) -> ConstraintSystem:
    chosen = [name for name, v in (("--oa", oa), ("--sudoku", sudoku), ("--custom", custom)) if v is not None]
    if len(chosen) != 1:
        raise click.UsageError("give exactly one of --oa, --sudoku, --custom")
    if sudoku is not None:
        spec = sudoku_spec(sudoku)
        if levels and parse_levels(levels) != spec.levels:
            raise click.UsageError(f"--levels conflicts with --sudoku {sudoku}")
    else:
        if not levels:
            raise click.UsageError("--levels is required")
        spec = DesignSpec(parse_levels(levels))
    if encoding == "margins":
        if sudoku is not None:
            return build_margin_system(spec, groups=[g for g in SUDOKU_GROUPS])
        if oa is None:
            raise click.UsageError("the margin encoding needs --oa or --sudoku")
        return build_margin_system(spec, t=oa)
    if sudoku is not None:
        alphas = sudoku_constraints(sudoku, dedup=dedup)
    elif oa is not None:
        alphas = oa_constraints(spec, oa, dedup=dedup)
    else:
        alphas = parse_exponents(Path(custom).read_text(), spec)
    enc = {"auto": "auto", "strata-lambda": "lambda", "cyclotomic": "cyclotomic"}[encoding]
    return build_strata_system(spec, alphas, enc)


def _budget(value: int | None) -> int | None:
    if value is not None:
        return value
    env = os.environ.get(BUDGET_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise click.UsageError(f"{BUDGET_ENV} must be an integer, got {env!r}") from None
    return None


def _emit(path: str | None, text: str) -> str:
    if path:
        Path(path).write_text(text)
    return content_digest(text)


def _load_config(ctx: click.Context, _param, value):
    if value is None:
        return None
    try:
        cfg = json.loads(Path(value).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.BadParameter(f"cannot read config: {exc}") from None
    if not isinstance(cfg, dict):
        raise click.BadParameter("config must be a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    for key in ("levels", "bounds"):
        if isinstance(cfg.get(key), list):
            cfg[key] = ",".join(str(v) for v in cfg[key])
    ctx.default_map = {name: cfg for name in ctx.command.commands}  # type: ignore[attr-defined]
    return value


@click.group()
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False),
    callback=_load_config,
    is_eager=True,
    expose_value=False,
    help="JSON file with option values; explicit flags win.",
)
def cli():
    """Generate fractional factorial designs from orthogonality constraints."""


@cli.command()
@_system_options
@click.option("--out", type=click.Path(dir_okay=False), help="Matrix file; row descriptors go to OUT.rows.")
def build(levels, oa, sudoku, custom, encoding, dedup, out):
    """Compile the constraint system and print its dimensions."""
    system = make_system(levels, oa, sudoku, custom, encoding, dedup)
    r, c = system.shape
    if out:
        write_matrix(system.matrix, out)
        write_rows(system.rows, f"{out}.rows")
    click.echo(f"{r} x {c}")
    click.echo(f"digest: {system.digest()}")


@cli.command()
@_system_options
@click.option("--mode", type=click.Choice(["hilbert", "bounded"]), default="hilbert", show_default=True)
@click.option("--bounds", help="Upper bounds: Y, Y:AUX or one value per column (bounded mode).")
@click.option("--minimal", is_flag=True, help="Bounded mode: keep only solutions not above another one.")
@click.option("--include-zero", is_flag=True, help="Bounded mode: report the zero solution too.")
@click.option("--budget", type=int, help=f"Work cap (pairs or nodes); default from ${BUDGET_ENV}.")
@click.option("--checkpoint", type=click.Path(dir_okay=False), help="Checkpoint file for hilbert mode.")
@click.option("--resume", type=click.Path(exists=True, dir_okay=False), help="Resume hilbert mode from a checkpoint.")
@click.option("--out", type=click.Path(dir_okay=False), help="Solution catalog file.")
def generate(levels, oa, sudoku, custom, encoding, dedup, mode, bounds, minimal, include_zero, budget, checkpoint, resume, out):
    """Compute the Hilbert basis or all bounded solutions."""
    system = make_system(levels, oa, sudoku, custom, encoding, dedup)
    budget = _budget(budget)
    t0 = time.perf_counter()
    if mode == "hilbert":
        if bounds or minimal or include_zero:
            raise click.UsageError("--bounds/--minimal/--include-zero apply to bounded mode")
        ckpt = checkpoint
        if ckpt is None and budget is not None:
            ckpt = f"{out}.ckpt.npz" if out else "fracgen.ckpt.npz"
        X = hilbert_basis(system.matrix, budget=budget, resume=resume, checkpoint_path=ckpt)
    else:
        if not bounds:
            raise click.UsageError("bounded mode needs --bounds")
        up = parse_bounds(bounds, system.n_points, system.aux is not None)
        X = enumerate_bounded(system.matrix, up, include_zero=include_zero, node_limit=budget, minimal=minimal)
    elapsed = time.perf_counter() - t0
    digest = _emit(out, format_solutions(X))
    click.echo(f"{X.shape[0]} solutions")
    click.echo(f"time: {elapsed:.2f} s")
    click.echo(f"digest: {digest}")


def _start_vector(system: ConstraintSystem, start: str | None, regular: str | None) -> np.ndarray:
    if (start is None) == (regular is None):
        raise click.UsageError("give exactly one of --start, --regular")
    if regular is not None:
        return regular_fraction(system.spec, parse_words(regular, system.spec))
    X = read_solutions(start)
    if X.shape[0] != 1:
        raise click.UsageError(f"start file must hold one solution, found {X.shape[0]}")
    y = X[0]
    return y[: system.n_points] if y.shape[0] == system.shape[1] else y


@cli.command("walk")
@_system_options
@click.option("--start", type=click.Path(exists=True, dir_okay=False), help="Solution file with the start point.")
@click.option("--regular", help="Start at the regular fraction X^alpha = omega_h, e.g. 11100:0,10011:0.")
@click.option("--steps", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--bounds", help="Upper bound on every point value (Y or one value per point).")
@click.option("--method", type=click.Choice(["auto", "graver", "fiber"]), default="auto", show_default=True)
@click.option("--budget", type=int, help=f"Work cap for the move computation; default from ${BUDGET_ENV}.")
@click.option("--out", type=click.Path(dir_okay=False), help="Walk transcript file.")
def walk_cmd(levels, oa, sudoku, custom, encoding, dedup, start, regular, steps, seed, bounds, method, budget, out):
    """Random walk over the fiber of a start fraction."""
    system = make_system(levels, oa, sudoku, custom, encoding, dedup)
    y0 = _start_vector(system, start, regular)
    up = parse_bounds(bounds, system.n_points, False) if bounds else None
    if method == "auto":
        method = "fiber" if system.encoding == "margins" else "graver"
    t0 = time.perf_counter()
    basis = move_basis(system, y0, up, method=method, budget=_budget(budget))
    state = walk(system, y0, basis, steps, seed, upper=up)
    elapsed = time.perf_counter() - t0
    meta = {
        "seed": seed,
        "steps": steps,
        "digest": system.digest(),
        "rng": state.rng_name,
        "moves": basis.shape[0],
        "method": method,
        "self_loops": state.self_loops,
    }
    digest = _emit(out, format_transcript(meta, state.visited_array()))
    click.echo(f"{basis.shape[0]} moves")
    click.echo(f"{state.distinct} distinct")
    click.echo(f"time: {elapsed:.2f} s")
    click.echo(f"digest: {digest}")


def _rows_of(system: ConstraintSystem, X: np.ndarray) -> np.ndarray:
    if X.shape[1] == system.shape[1]:
        return X
    if X.shape[1] == system.n_points:
        full = []
        for y in X:
            try:
                full.append(system.extend(y))
            except DesignError:
                full.append(np.append(y, -1) if system.aux else y)
        return np.array(full, dtype=np.int64).reshape(len(X), system.shape[1])
    raise click.UsageError(f"catalog has {X.shape[1]} columns, system has {system.shape[1]}")


def _class_check(system: ConstraintSystem, y: np.ndarray, oa: int | None, sudoku: int | None) -> bool:
    spec = system.spec
    if oa is not None:
        return analysis.oa_strength(y, spec) >= oa
    if sudoku is not None:
        return all(analysis.fully_projects(y, spec, g) for g in SUDOKU_GROUPS)
    return True


@cli.command()
@click.argument("catalog", type=click.Path(exists=True, dir_okay=False))
@_system_options
@click.option("--details", is_flag=True, help="One analysis line per solution (includes the wordlength pattern).")
def verify(catalog, levels, oa, sudoku, custom, encoding, dedup, details):
    """Check every catalog entry against the declared constraints."""
    system = make_system(levels, oa, sudoku, custom, encoding, dedup)
    try:
        X = _rows_of(system, read_solutions(catalog))
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    failures = 0
    sizes: dict[int, int] = {}
    n_indicator = 0
    for i, x in enumerate(X):
        y = x[: system.n_points]
        bad = np.flatnonzero(system.matrix @ x)
        ok = bool(np.all(x >= 0)) and bad.size == 0
        if ok and not _class_check(system, y, oa, sudoku):
            ok = False
        if not ok:
            failures += 1
            where = ", ".join(str(system.rows[j]) for j in bad[:5]) if system.rows else ", ".join(map(str, bad[:5]))
            click.echo(f"entry {i}: violated rows: {where or 'class check'}")
            continue
        size = int(y.sum())
        sizes[size] = sizes.get(size, 0) + 1
        ind = analysis.is_indicator(y, system.spec)
        n_indicator += ind
        if details:
            rep = analysis.report(y, system.spec)
            click.echo(f"entry {i}: " + "; ".join(analysis.format_report(rep).splitlines()))
    click.echo(f"entries: {len(X)}")
    click.echo(f"passed: {len(X) - failures}")
    click.echo(f"indicator: {n_indicator}")
    click.echo("sizes: " + " ".join(f"{k}x{v}" for k, v in sorted(sizes.items())))
    if failures:
        sys.exit(EXIT_VERIFY)


def _jsonable(v):
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return str(v)
    return v


@cli.command()
@click.argument("catalog", type=click.Path(exists=True, dir_okay=False))
@click.option("--levels", required=True, help="Comma-separated factor levels.")
@click.option("--index", type=int, help="Report only this entry.")
@click.option("--margins", "margin_sets", multiple=True, help="Also print the margin table on these factors, e.g. 0,1.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
def report(catalog, levels, index, margin_sets, fmt):
    """Print strength, size, wordlength pattern and regularity of catalog entries."""
    spec = DesignSpec(parse_levels(levels))
    X = read_solutions(catalog)
    if X.shape[1] not in (spec.size, spec.size + 1):
        raise click.UsageError(f"catalog has {X.shape[1]} columns, design has {spec.size} points")
    picks = range(X.shape[0]) if index is None else [index]
    out = []
    for i in picks:
        if not 0 <= i < X.shape[0]:
            raise click.UsageError(f"index {i} out of range")
        y = X[i, : spec.size]
        rep = analysis.report(y, spec)
        for m in margin_sets:
            fac = tuple(int(v) for v in m.split(","))
            rep[f"margins {m}"] = tuple(int(v) for v in analysis.margins(y, spec, fac).ravel(order="F"))
        out.append((i, rep))
    if fmt == "json":
        click.echo(json.dumps([{"entry": i, **{k: _jsonable(v) for k, v in r.items()}} for i, r in out], indent=2))
    else:
        for i, r in out:
            click.echo(f"[entry {i}]")
            click.echo(analysis.format_report(r))


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, prog_name="fracgen", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except BudgetExhausted as exc:
        click.echo(f"budget exhausted: {exc}", err=True)
        if exc.path is not None:
            click.echo(f"checkpoint: {exc.path}", err=True)
        return EXIT_BUDGET
    except (DesignError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Every verb takes a problem file (see :mod:`quasisl.problem_file`) and prints
either an aligned table (default) or JSON lines (``--format records``).
Exit status: 0 on success, 1 for invalid input or usage, 2 when a
computation fails.  ``QUASISL_TOL`` and ``QUASISL_RTOL`` override the
default eigenvalue (1e-8) and integration (1e-10) tolerances.
"""

from __future__ import annotations

import json
import math
import os
import sys

import click
import numpy as np

from .coefficients import classify_regularity
from .errors import NumericalError, SLError, ValidationError
from .functions import Bump, random_bumps
from .lower_bound import (
    convergence_order,
    energy_identity_check,
    greatest_lower_bound,
    integrand_consistency_check,
    jacobi_factorization_residual,
    q_recovery_residual,
)
from .problem_file import load_problem, parse_number
from .quasi_ode import SolutionTrajectory, solve as solve_ivp
from .solutions import (
    disconjugacy_check,
    generalized_boundary_values,
    positive_solution,
    working_problem,
)
from .spectral import BoundaryCondition, eigenvalue, monotonicity_experiment

DEFAULT_TOL = 1e-8
DEFAULT_RTOL = 1e-10


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        val = float(raw)
    except ValueError:
        raise click.UsageError(f"{name}={raw!r} is not a number")
    if not val > 0:
        raise click.UsageError(f"{name} must be positive")
    return val


class Number(click.ParamType):
    """Float or an arithmetic string such as pi/2."""

    name = "number"

    def convert(self, value, param, ctx):
        if isinstance(value, float):
            return value
        try:
            return parse_number(value)
        except ValidationError as exc:
            self.fail(str(exc), param, ctx)


NUMBER = Number()


def _emit(rows: list[dict], fmt: str, columns: list[str] | None = None) -> None:
    if fmt == "records":
        for row in rows:
            click.echo(json.dumps(row, allow_nan=True))
        return
    if not rows:
        return
    columns = columns or list(rows[0])
    cells = [[_fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
    click.echo("  ".join(c.rjust(w) for c, w in zip(columns, widths)))
    for row in cells:
        click.echo("  ".join(v.rjust(w) for v, w in zip(row, widths)))


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return "" if v is None else str(v)


def _kv(pairs: list[tuple[str, object]], fmt: str) -> None:
    if fmt == "records":
        click.echo(json.dumps(dict(pairs)))
        return
    width = max(len(k) for k, _ in pairs)
    for k, v in pairs:
        click.echo(f"{k.ljust(width)}  {_fmt(v)}")


_format_option = click.option(
    "--format", "fmt", type=click.Choice(["table", "records"]), default="table", show_default=True
)
_problem_arg = click.argument("problem", type=click.Path(exists=True, dir_okay=False))


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def cli():
    """Four-coefficient Sturm-Liouville problems: spectra and lower bounds."""


@cli.command()
@_problem_arg
@_format_option
def classify(problem, fmt):
    """Regularity and endpoint classification."""
    prob = load_problem(problem)
    rep = classify_regularity(prob)
    pairs = [
        ("regular", rep.regular),
        ("endpoint a", rep.endpoint_a),
        ("endpoint b", rep.endpoint_b),
    ]
    if fmt == "records":
        click.echo(
            json.dumps(
                {
                    "regular": rep.regular,
                    "endpoint_a": rep.endpoint_a,
                    "endpoint_b": rep.endpoint_b,
                    "integrability": [
                        {
                            "name": ev.name,
                            "endpoint": ev.endpoint,
                            "converges": ev.converges,
                            "partial_integrals": list(ev.partial_integrals),
                        }
                        for ev in rep.integrability
                    ],
                }
            )
        )
        return
    for k, v in pairs:
        click.echo(f"{k}: {str(v).lower() if isinstance(v, bool) else v}")
    for ev in rep.integrability:
        verdict = "converges" if ev.converges else "diverges"
        click.echo(f"  int |{ev.name}| toward {ev.endpoint}: {verdict} (last partial {ev.partial_integrals[-1]:.6g})")


@cli.command()
@_problem_arg
@click.option("--n-from", type=int, default=1, show_default=True)
@click.option("--n-to", type=int, default=1, show_default=True)
@click.option("--gamma", type=NUMBER, default=0.0, show_default=True)
@click.option("--delta", type=NUMBER, default=0.0, show_default=True)
@click.option("--tol", type=float, default=None, help="eigenvalue tolerance [default 1e-8]")
@click.option("--rtol", type=float, default=None, help="integration tolerance [default 1e-10]")
@_format_option
def solve(problem, n_from, n_to, gamma, delta, tol, rtol, fmt):
    """Eigenvalues n-from..n-to for separated boundary conditions."""
    if not 1 <= n_from <= n_to:
        raise click.UsageError("need 1 <= n-from <= n-to")
    tol = tol or _env_float("QUASISL_TOL", DEFAULT_TOL)
    rtol = rtol or _env_float("QUASISL_RTOL", DEFAULT_RTOL)
    prob = load_problem(problem)
    bc = BoundaryCondition(gamma, delta)
    rows = [eigenvalue(prob, n, bc, tol, rtol).record() for n in range(n_from, n_to + 1)]
    _emit(rows, fmt, ["index", "lambda", "residual", "zeros"])


def _parse_intervals(text: str) -> list[tuple[float, float]]:
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise click.UsageError(f"bad interval {chunk!r}; expected 'c,d'")
        out.append((parse_number(parts[0]), parse_number(parts[1])))
    return out


@cli.command()
@_problem_arg
@click.option("--intervals", required=True, help='nested intervals "c1,d1;c2,d2;..." (pi allowed)')
@click.option("--tol", type=float, default=None)
@_format_option
def monotonicity(problem, intervals, tol, fmt):
    """Principal Dirichlet eigenvalue on nested subintervals."""
    tol = tol or _env_float("QUASISL_TOL", DEFAULT_TOL)
    prob = load_problem(problem)
    res = monotonicity_experiment(prob, _parse_intervals(intervals), tol=tol)
    rows = [{"c": r.interval[0], "d": r.interval[1], "lambda1": r.lam} for r in res.rows]
    _emit(rows, fmt)
    verdict = "STRICT" if res.strict else "NOT STRICT"
    if fmt == "records":
        click.echo(json.dumps({"verdict": verdict, "margins": list(res.margins)}))
    else:
        click.echo(f"verdict: {verdict}")


@cli.command()
@_problem_arg
@click.option("--floor", "floor_", type=NUMBER, default=-1e3, show_default=True)
@click.option("--ceiling", type=NUMBER, default=1e3, show_default=True)
@click.option("--tol", type=float, default=None)
@_format_option
def lowerbound(problem, floor_, ceiling, tol, fmt):
    """Greatest lower bound via the disconjugacy threshold."""
    tol = tol or _env_float("QUASISL_TOL", DEFAULT_TOL)
    prob = load_problem(problem)
    res = greatest_lower_bound(prob, (floor_, ceiling), tol)
    rec = res.record()
    if fmt == "records":
        click.echo(json.dumps(rec))
        return
    _kv(
        [
            ("lambda0", res.lambda0),
            ("bracket", list(res.bracket)),
            ("violation zeros", list(res.witness_violation) if res.witness_violation else "none"),
            ("extrapolated", res.extrapolated),
        ],
        fmt,
    )
    if res.truncation_trace:
        _emit([{"c": iv[0], "d": iv[1], "threshold": lam} for iv, lam in res.truncation_trace], fmt)


@cli.command()
@_problem_arg
@click.option("--lambda", "lam", type=NUMBER, required=True)
@_format_option
def disconjugacy(problem, lam, fmt):
    """Disconjugacy test at one lambda with its witness."""
    prob = load_problem(problem)
    res = disconjugacy_check(prob, lam)
    pairs = [("lambda", lam), ("disconjugate", res.disconjugate), ("interval", list(res.interval))]
    if res.disconjugate:
        pos = res.positive
        pairs.append(("positive witness start", [pos.start.x, pos.start.u, pos.start.u1]))
    else:
        pairs.append(("zeros", list(res.zeros)))
    _kv(pairs, fmt)


def _two_sided(work, lam, x0, u0, u1) -> SolutionTrajectory:
    """Solution through (x0, u0, u1) on the whole of [a, b]."""
    if x0 == work.a or x0 == work.b:
        return solve_ivp(work, lam, x0, u0, u1, work.b if x0 == work.a else work.a)
    nodes = solve_ivp(work, lam, x0, u0, u1, work.a).nodes()
    nodes += solve_ivp(work, lam, x0, u0, u1, work.b).nodes()[1:]
    nodes.sort()
    xs = [n[0] for n in nodes]
    us = [n[1] * math.exp(n[3]) for n in nodes]
    vs = [n[2] * math.exp(n[3]) for n in nodes]
    return SolutionTrajectory.from_nodes(work, lam, xs, us, vs)


@cli.command()
@_problem_arg
@click.option("--lambda0", type=NUMBER, required=True)
@click.option(
    "--solution",
    default=None,
    help='g as a solution "x0,u0,u1[,lambda]" (default: data (0, 1) at a, lambda = lambda0)',
)
@_format_option
def boundaryvalues(problem, lambda0, solution, fmt):
    """Generalized boundary values of a solution."""
    prob = load_problem(problem)
    work = working_problem(prob)
    if solution is None:
        x0, u0, u1, lam = work.a, 0.0, 1.0, lambda0
    else:
        parts = [parse_number(t) for t in solution.split(",")]
        if len(parts) not in (3, 4):
            raise click.UsageError("--solution expects x0,u0,u1[,lambda]")
        x0, u0, u1 = parts[:3]
        lam = parts[3] if len(parts) == 4 else lambda0
    if not work.a <= x0 <= work.b:
        raise ValidationError(f"x0 = {x0} lies outside [{work.a}, {work.b}]")
    g = _two_sided(work, lam, x0, u0, u1)
    gbv = generalized_boundary_values(prob, g, lambda0)
    _kv(list(gbv.as_dict().items()), fmt)


@cli.command()
@_problem_arg
@click.option("--lambda0", type=NUMBER, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--samples", type=int, default=20, show_default=True)
@click.option("--h", "h0", type=float, default=None, help="coarsest difference step [default: 1/200 of the bump width]")
@_format_option
def identities(problem, lambda0, seed, samples, h0, fmt):
    """Residual report for the factorization identities around a positive solution u0."""
    prob = working_problem(load_problem(problem))
    u0 = positive_solution(prob, lambda0)
    if u0 is None:
        raise ValidationError(f"tau - {lambda0} is not disconjugate; no positive u0")
    a, b = prob.a, prob.b
    margin = 0.05 * (b - a)
    inner = np.linspace(a + margin, b - margin, 201)
    bumps = [f for f in random_bumps(a, b, samples + 1, seed, margin=margin)[1:]]
    f0 = Bump(a + 0.3 * (b - a), a + 0.6 * (b - a))
    h0 = h0 or (f0.hi - f0.lo) / 200
    jac = convergence_order(lambda h: jacobi_factorization_residual(prob, f0, u0, lambda0, h), h0)
    con = convergence_order(lambda h: integrand_consistency_check(prob, f0, u0, h), h0)
    checks = [energy_identity_check(prob, f, u0, lambda0) for f in bumps]
    rows = [
        {"check": "q_recovery", "value": q_recovery_residual(prob, u0, lambda0, inner), "order": None},
        {"check": "jacobi", "value": jac.residuals[-1], "order": jac.min_order},
        {"check": "integrand", "value": con.residuals[-1], "order": con.min_order},
        {"check": "energy_gap", "value": max(c.gap for c in checks), "order": None},
        {"check": "energy_margin_min", "value": min(c.inequality_margin / c.norm2 for c in checks), "order": None},
    ]
    _emit(rows, fmt, ["check", "value", "order"])


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="quasisl", standalone_mode=False)
    except click.exceptions.NoArgsIsHelpError as exc:
        click.echo(exc.ctx.get_help() if exc.ctx else str(exc), err=True)
        return 1
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except ValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 2
    except SLError as exc:  # pragma: no cover
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

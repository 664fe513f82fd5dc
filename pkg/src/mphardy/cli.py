"""Command-line interface: ``mphardy bounds | verify | quotient | optimize``.

Exit codes: 0 success, 1 a check failed, 2 invalid parameters. Reports go
to stdout (or ``--out``) as JSON or CSV; diagnostics go to stderr. The
default seed comes from ``MPHARDY_SEED`` when set.
"""

from __future__ import annotations

import logging
import math
import sys
import time
from pathlib import Path

import click

from . import bounds, functionals, optimize, trials, verify
from .exceptions import DomainError, HardyError
from .reports import RunReport

SEED_ENV = "MPHARDY_SEED"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("mphardy")


def parse_flux(text: str):
    """``p/q`` or an integer gives an exact :class:`RationalFlux`; a decimal gives a float."""
    text = text.strip()
    try:
        if "/" in text or text.lstrip("+-").isdigit():
            return bounds.RationalFlux.parse(text)
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise click.BadParameter(f"cannot parse flux {text!r}: {exc}") from None


def _usage_error(msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(EXIT_USAGE)


def _emit(report: RunReport, fmt: str, out: str | None):
    text = report.to_json() + "\n" if fmt == "json" else report.to_csv()
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _finish(report: RunReport, fmt: str, out: str | None, started: float) -> None:
    report.wall_time_ms = round(1000.0 * (time.perf_counter() - started), 3)
    _emit(report, fmt, out)
    if report.suite_pass is False:
        sys.exit(EXIT_FAIL)


format_option = click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
out_option = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report here.")
seed_option = click.option("--seed", type=int, envvar=SEED_ENV, default=0, show_default=True,
                           help=f"Random seed (default from ${SEED_ENV}).")


@click.group()
@click.version_option(package_name="artifact")
@click.option("-v", "--verbose", count=True, help="Log progress to stderr (-vv for debug).")
def main(verbose):
    """Constants, identity checks and Monte Carlo quotients for many-particle Hardy inequalities."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


@main.command("bounds")
@click.option("--d", "d", type=click.IntRange(min=1), required=True, help="Space dimension.")
@click.option("--N", "N", type=click.IntRange(min=2), required=True, help="Number of particles.")
@click.option("--alpha", default=None, help="Aharonov-Bohm flux: p/q (exact) or a decimal.")
@click.option("--K", "K", type=float, default=None, help="Value of the curvature ratio K.")
@format_option
@out_option
def cmd_bounds(d, N, alpha, K, fmt, out):
    """Table of constants for D-dimensional particles, N of them."""
    started = time.perf_counter()
    flux = parse_flux(alpha) if alpha is not None else None
    try:
        rows = bounds.bound_table(d, N, alpha=flux, K=K)
    except (HardyError, ValueError) as exc:
        _usage_error(str(exc))
    params = {"d": d, "N": N, "alpha": None if flux is None else str(flux), "K": K}
    report = RunReport("bounds", params, [r.to_dict() for r in rows], seed=None)
    _finish(report, fmt, out, started)


@main.command("verify")
@click.option("--suite", type=click.Choice(list(verify.SUITES) + ["all"]), default="all", show_default=True)
@seed_option
@click.option("--samples", type=click.IntRange(min=1), default=None,
              help="Budget per suite (samples, configurations or cases); suite default if omitted.")
@format_option
@out_option
def cmd_verify(suite, seed, samples, fmt, out):
    """Run property suites; exit 1 if any check fails."""
    started = time.perf_counter()
    names = verify.SUITES if suite == "all" else (suite,)
    results = []
    for name in names:
        log.info("running suite %s", name)
        for check in verify.run_suite(name, seed=seed, samples=samples):
            row = check.to_dict()
            row["suite"] = name
            results.append(row)
    failed = [r for r in results if not r["passed"]]
    for r in failed:
        click.echo(f"FAIL {r['suite']}/{r['name']}: value={r['value']} target={r['target']} {r['detail']}", err=True)
    report = RunReport("verify", {"suite": suite, "samples": samples}, results, seed=seed,
                       suite_pass=not failed)
    _finish(report, fmt, out, started)


def _mc_row(name, est, kind, params, samples):
    return {
        "name": name,
        "value": est.mean,
        "stderr": est.stderr,
        "kind": kind,
        "seed": est.seed,
        "samples": samples,
        "n_rejected": est.n_rejected,
        "params": params,
    }


def _exact_row(name, value, kind, params):
    return {"name": name, "value": float(value), "stderr": 0.0, "kind": kind, "params": params}


@main.command("quotient")
@click.option("--family", type=click.Choice(["gaussian", "sharpness1d", "slater", "odd", "abmode"]), required=True)
@click.option("--d", "d", type=int, default=3, show_default=True)
@click.option("--N", "N", type=int, default=3, show_default=True)
@click.option("--s", "s", type=float, default=1.0, show_default=True, help="Gaussian width.")
@click.option("--delta", type=float, default=0.1, show_default=True, help="sharpness1d: alpha = 1/4 + delta.")
@click.option("--spacing", type=float, default=2.0, show_default=True, help="slater: distance between centers.")
@click.option("--alpha", type=float, default=0.3, show_default=True, help="abmode: flux.")
@click.option("--m", "m", type=int, default=0, show_default=True, help="abmode: angular momentum.")
@click.option("--profile", type=click.Choice(["power", "plateau"]), default="power", show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True, help="power profile exponent.")
@click.option("--gamma", type=float, default=1.0, show_default=True, help="power profile decay rate.")
@click.option("--R", "R", type=float, default=1e3, show_default=True, help="plateau profile outer radius.")
@click.option("--width", type=float, default=1.0, show_default=True, help="plateau ramp width in log r.")
@click.option("--samples", type=click.IntRange(min=2), default=100_000, show_default=True)
@click.option("--chunk-size", type=click.IntRange(min=1), default=1 << 16, show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@seed_option
@format_option
@out_option
def cmd_quotient(family, d, N, s, delta, spacing, alpha, m, profile, beta, gamma, R, width,
                 samples, chunk_size, workers, seed, fmt, out):
    """Rayleigh quotient of one trial function, with its bound margin."""
    started = time.perf_counter()
    mc = {"n": samples, "seed": seed, "chunk_size": chunk_size, "workers": workers}
    try:
        if family == "gaussian":
            u = trials.gaussian_product(d, N, s)
        elif family == "sharpness1d":
            u = trials.sharpness_1d(N, delta)
        elif family == "slater":
            u = trials.slater_gaussian(d, N, verify.slater_centers(N, d, spacing))
        elif family == "odd":
            u = trials.odd_gaussian(d)
        else:
            prof = (trials.PowerExpProfile(beta, gamma) if profile == "power"
                    else trials.LogPlateauProfile(R, width))
            u = trials.ab_mode(m, prof)
        if family in ("gaussian", "slater") and N < 2:
            raise DomainError("the pair quotient needs N >= 2")
    except (HardyError, ValueError) as exc:
        _usage_error(str(exc))

    params = {"family": family, **u.params, "samples": samples, "chunk_size": chunk_size}
    results, ok = [], True
    try:
        if family in ("gaussian", "slater"):
            res = (functionals.fermi_quotient(u, **mc) if family == "slater"
                   else functionals.hardy_quotient(u, **mc))
            row = _mc_row("quotient", res.quotient, "upper", u.params, samples)
            row.update(bound=res.bound_name, bound_value=res.bound_value, margin_sigma=res.margin_sigma)
            results.append(row)
            results.append(_mc_row("T", res.T, "estimate", u.params, samples))
            results.append(_mc_row("X", res.X, "estimate", u.params, samples))
            exact = functionals.exact_quotient(u)
            if exact is not None:
                results.append(_exact_row("quotient_closed_form", exact.value, "exact", u.params))
            ok = res.passed
        elif family == "sharpness1d":
            row = optimize._sharpness_row(N, delta, samples, seed, chunk_size)
            results.append(_mc_row("quotient", row.quotient, "upper", u.params, samples))
            results.append(_mc_row("beta", row.beta, "estimate", u.params, samples))
            results.append(_mc_row("sandwich_upper", row.upper, "upper", u.params, samples))
            results.append(_exact_row("sandwich_lower", row.lower, "lower", u.params))
            if row.exact_quotient is not None:
                results.append(_exact_row("quotient_closed_form", row.exact_quotient, "exact", u.params))
            ok = row.passed
        elif family == "odd":
            q = functionals.odd_quotient(u)
            results.append(_exact_row("odd_quotient", q, "quadrature", u.params))
            results.append(_exact_row("odd_bound", d * d / 4.0, "lower", u.params))
            ok = q >= d * d / 4.0
        else:
            q = functionals.ab_mode_quotient(alpha, m, u.profile)
            floor = min((k - alpha) ** 2 for k in range(math.floor(alpha) - 1, math.ceil(alpha) + 2))
            prm = {**u.params, "alpha": alpha}
            results.append(_exact_row("ab_mode_quotient", q, "quadrature", prm))
            results.append(_exact_row("ab_mode_floor", floor, "lower", prm))
            ok = q >= floor - 1e-10
    except HardyError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(EXIT_FAIL)
    if not ok:
        click.echo("FAIL: bound violated beyond 3 sigma", err=True)
    report = RunReport("quotient", params, results, seed=seed, suite_pass=ok)
    _finish(report, fmt, out, started)


@main.command("optimize")
@click.option("--target", type=click.Choice(["K", "quotient"]), required=True)
@click.option("--d", "d", type=click.IntRange(min=1), default=2, show_default=True)
@click.option("--atoms", type=click.IntRange(min=3), default=3, show_default=True, help="K: number of atoms.")
@click.option("--iters", type=click.IntRange(min=0), default=optimize.K_ITERS, show_default=True)
@click.option("--restarts", type=click.IntRange(min=1), default=optimize.K_RESTARTS, show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--family", type=click.Choice(list(optimize.QUOTIENT_FAMILIES)), default="gaussian_shifted",
              show_default=True, help="quotient: trial family.")
@click.option("--N", "N", type=click.IntRange(min=2), default=3, show_default=True)
@click.option("--budget", type=click.IntRange(min=0), default=200, show_default=True,
              help="quotient: objective evaluations.")
@seed_option
@format_option
@out_option
def cmd_optimize(target, d, atoms, iters, restarts, workers, family, N, budget, seed, fmt, out):
    """Maximise K over atomic measures or minimise a family's exact quotient."""
    started = time.perf_counter()
    try:
        if target == "K":
            res = optimize.maximize_K(d, atoms, iters=iters, restarts=restarts, seed=seed, workers=workers)
            params = {"target": "K", "d": d, "atoms": atoms, "iters": iters, "restarts": restarts}
            row = {"name": "K_lower_bound", "value": res.value, "stderr": 0.0, "kind": "lower",
                   "params": {"d": d}, "seed": seed, **res.to_dict()}
            report = RunReport("optimize", params, [row], seed=seed)
        else:
            best, res = optimize.minimize_quotient(family, d, N, budget=budget, seed=seed)
            params = {"target": "quotient", "family": family, "d": d, "N": N, "budget": budget}
            row = {"name": "quotient_upper_bound", "value": res.value, "stderr": res.stderr, "kind": "upper",
                   "params": {"d": d, "N": N}, "seed": seed, "best_params": best, "result": res.to_dict()}
            rows = [row]
            if d >= 3:
                rows.append(_exact_row("gaussian_upper_bound", bounds.gaussian_upper_bound(d, N), "upper",
                                       {"d": d, "N": N}))
            report = RunReport("optimize", params, rows, seed=seed)
    except (HardyError, ValueError) as exc:
        _usage_error(str(exc))
    _finish(report, fmt, out, started)


if __name__ == "__main__":  # pragma: no cover
    main()

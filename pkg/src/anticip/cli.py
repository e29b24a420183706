"""Command-line surface: model tables, Monte Carlo runs, verification suites
and frequency-bound checks, with byte-stable CSV/JSON output."""
from __future__ import annotations

import io
import json
import sys

import click

from . import __version__
from . import bounds as fb
from . import rng as rng_mod
from .models import ModelSpec, closed_form_pn, make_model
from .sampling import (
    MonteCarloConfig,
    SamplingDistribution,
    near_zero_statistics,
    parse_distribution,
    run_monte_carlo,
)
from .spectral import (
    amplitudes_continuous,
    amplitudes_periodic,
    probabilities,
    tilde_index,
    truncation_window,
)
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
# click maps UsageError to exit code 2


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    text = str(value)
    if any(ch in text for ch in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def _emit(rows: list[dict], header: list[str], config: dict, fmt: str, out: str) -> None:
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for row in rows:
            buf.write(",".join(_fmt(row.get(col)) for col in header) + "\n")
        text = buf.getvalue()
    else:
        text = json.dumps({"config": config, "results": rows}, indent=2) + "\n"
    if out == "-":
        click.echo(text, nl=False)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _parse_list(text: str | None, kind=int) -> tuple:
    if not text:
        return ()
    try:
        return tuple(kind(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise click.UsageError(f"bad list {text!r}: {exc}") from exc


format_option = click.option(
    "--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
    show_default=True, help="Output format.",
)
out_option = click.option(
    "--out", default="-", show_default=True, help="Output path, or - for stdout."
)
seed_option = click.option(
    "--seed", type=int, default=0, show_default=True, help="Base RNG seed."
)


@click.group()
@click.version_option(version=__version__, prog_name="anticip")
def main():
    """Anticipation statistics of orthogonally evolving quantum states."""


@main.command()
@click.option("--kind", required=True,
              type=click.Choice(["const-periodic", "alt-periodic",
                                 "const-continuous", "alt-continuous"]))
@click.option("--period", type=int, default=None, help="Size for periodic kinds.")
@click.option("--cells", type=int, default=None, help="Size for continuous kinds.")
@click.option("--y", "amplitude", type=float, required=True, help="Difference amplitude in [-1, 1].")
@click.option("--n-min", type=int, default=None, help="First index (continuous kinds).")
@click.option("--n-max", type=int, default=None,
              help="Last index; defaults to the tail-bound window for continuous kinds.")
@format_option
@out_option
def model(kind, period, cells, amplitude, n_min, n_max, fmt, out):
    """Tabulate one model state against its closed form."""
    periodic = kind.endswith("-periodic")
    size = period if periodic else cells
    if size is None:
        # constant continuous differences are cell-count independent
        if kind == "const-continuous":
            size = 2
        else:
            raise click.UsageError(
                f"--{'period' if periodic else 'cells'} is required for {kind}"
            )
    try:
        spec = ModelSpec(kind, size, amplitude)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc

    sd = make_model(spec)
    if periodic:
        lo = 1 if n_min is None else n_min
        hi = size if n_max is None else n_max
        if lo > hi:
            raise click.UsageError("--n-min must not exceed --n-max")
        amps = amplitudes_periodic(sd)
        ns = range(lo, hi + 1)
        alpha = [amps.at(n) for n in ns]
        pn = [abs(a) ** 2 for a in alpha]
    else:
        hi = truncation_window(sd) if n_max is None else n_max
        lo = 1 if n_min is None else n_min
        if lo > hi:
            raise click.UsageError("--n-min must not exceed --n-max")
        amps = amplitudes_continuous(sd, lo, hi)
        series = probabilities(amps)
        ns = range(lo, hi + 1)
        alpha = [complex(v) for v in amps.values]
        pn = [float(v) for v in series.values]

    rows, worst = [], 0.0
    for n, a, prob in zip(ns, alpha, pn):
        closed = closed_form_pn(spec, n)
        err = abs(prob - closed)
        worst = max(worst, err)
        rows.append({
            "n": n,
            "tilde_n": tilde_index(n, size if periodic else None),
            "re_alpha": a.real,
            "im_alpha": a.imag,
            "p_n": prob,
            "closed_form_p_n": closed,
            "abs_err": err,
        })
    config = {"command": "model", "kind": kind, "size": size, "y": amplitude,
              "n_min": int(ns[0]), "n_max": int(ns[-1]), "max_abs_err": worst}
    header = ["n", "tilde_n", "re_alpha", "im_alpha", "p_n", "closed_form_p_n", "abs_err"]
    _emit(rows, header, config, fmt, out)
    sys.exit(EXIT_OK if worst <= 1e-10 else EXIT_CHECK_FAILED)


def _sample_rows(report, extra: dict | None = None) -> list[dict]:
    rows = []
    for r in report.rows:
        row = {
            "mode": report.mode,
            "size": report.size,
            "statistic": r.statistic,
            "index": None if r.index is None else r.index,
            "trials": r.acc.count,
            "seed": report.seed,
            "mean": r.acc.mean,
            "variance": r.acc.variance,
            "std_error": r.acc.std_error,
            "pred_mean": r.pred_mean,
            "z_mean": r.z_mean,
            "pred_var": r.pred_var,
            "z_var": r.z_var,
            "note": r.note,
        }
        if extra:
            row.update(extra)
        rows.append(row)
    return rows


SAMPLE_HEADER = ["mode", "size", "statistic", "index", "trials", "seed", "mean",
                 "variance", "std_error", "pred_mean", "z_mean", "pred_var",
                 "z_var", "note"]


def _near_zero_rows(rep) -> list[dict]:
    base = {"mode": "periodic", "size": rep.period, "trials": rep.trials,
            "seed": rep.seed, "note": f"epsilon={rep.epsilon:g} q={rep.q:.17g}"}
    count_row = dict(base, statistic="near_zero_count", index=rep.epsilon,
                     mean=rep.acc.mean, variance=rep.acc.variance,
                     std_error=rep.acc.std_error, pred_mean=rep.pred_mean,
                     z_mean=rep.z_mean, pred_var=rep.pred_var, z_var=rep.z_var)
    chi_row = dict(base, statistic="near_zero_chi_square", index=rep.epsilon,
                   mean=rep.chi_square, variance=None, std_error=None,
                   pred_mean=float(rep.chi_square_dof), z_mean=None,
                   pred_var=None, z_var=None,
                   note=base["note"] + f" dof={rep.chi_square_dof}")
    return [count_row, chi_row]


def _run_sample(period, cells, dist_text, trials, seed, ns, Ns, rs, epsilon, threads):
    if epsilon is not None and period is None:
        raise click.UsageError("near-zero counts need --period (periodic mode)")
    try:
        dist = parse_distribution(dist_text)
        cfg = MonteCarloConfig(
            dist=dist, trials=trials, seed=seed, period=period, cells=cells,
            n_list=_parse_list(ns), N_list=_parse_list(Ns),
            r_list=_parse_list(rs, float), epsilon=epsilon,
        )
    except (ValueError, OSError, KeyError) as exc:
        raise click.UsageError(str(exc)) from exc
    report = run_monte_carlo(cfg, threads=threads)
    rows = _sample_rows(report)
    if epsilon is not None and period is not None:
        nz = near_zero_statistics(dist, period, epsilon, trials, seed, threads=threads)
        rows.extend(_near_zero_rows(nz))
    config = {"command": "sample", "mode": report.mode, "size": report.size,
              "dist": dist.label, "trials": trials, "seed": seed,
              "n": list(cfg.n_list), "N": list(cfg.N_list), "r": list(cfg.r_list),
              "epsilon": epsilon}
    worst = report.max_abs_z()
    return rows, config, worst


@main.command()
@click.option("--period", type=int, default=None, help="Period p (periodic mode).")
@click.option("--cells", type=int, default=None, help="Cell count M (continuous mode).")
@click.option("--dist", "dist_text", default="uniform", show_default=True,
              help="uniform | two-point:<y0> | table:<json path>")
@click.option("--trials", type=int, default=10_000, show_default=True)
@seed_option
@click.option("--n", "ns", default=None, help="Comma-separated step indices.")
@click.option("--N", "Ns", default=None, help="Comma-separated tail cut-offs.")
@click.option("--r", "rs", default=None, help="Comma-separated moment orders.")
@click.option("--epsilon", type=float, default=None, help="Near-zero count threshold.")
@click.option("--threads", type=int, default=None,
              help="Worker threads; defaults to ANTICIP_THREADS or 1. Never changes results.")
@format_option
@out_option
def sample(period, cells, dist_text, trials, seed, ns, Ns, rs, epsilon, threads, fmt, out):
    """Monte Carlo estimates paired with closed-form predictions."""
    rows, config, worst = _run_sample(period, cells, dist_text, trials, seed,
                                      ns, Ns, rs, epsilon, threads)
    _emit(rows, SAMPLE_HEADER, config, fmt, out)
    sys.exit(EXIT_OK if worst <= 5.0 else EXIT_CHECK_FAILED)


@main.command()
@click.option("--periods", required=True, help="Comma-separated list of periods.")
@click.option("--dist", "dist_text", default="uniform", show_default=True)
@click.option("--trials", type=int, default=10_000, show_default=True)
@seed_option
@click.option("--n", "ns", default=None, help="Comma-separated step indices.")
@click.option("--N", "Ns", default=None, help="Comma-separated tail cut-offs.")
@click.option("--r", "rs", default=None, help="Comma-separated moment orders.")
@click.option("--threads", type=int, default=None)
@format_option
@out_option
def sweep(periods, dist_text, trials, seed, ns, Ns, rs, threads, fmt, out):
    """Repeat `sample` over several periods; one row per (period, statistic)."""
    rows, worst = [], 0.0
    plist = _parse_list(periods)
    if not plist:
        raise click.UsageError("--periods must name at least one period")
    for p in plist:
        prows, _, w = _run_sample(p, None, dist_text, trials, seed, ns, Ns, rs,
                                  None, threads)
        rows.extend(prows)
        worst = max(worst, w)
    config = {"command": "sweep", "periods": list(plist), "dist": dist_text,
              "trials": trials, "seed": seed}
    _emit(rows, SAMPLE_HEADER, config, fmt, out)
    sys.exit(EXIT_OK if worst <= 5.0 else EXIT_CHECK_FAILED)


@main.command()
@click.option("--suite", type=click.Choice(sorted(SUITES)), default="all",
              show_default=True)
@seed_option
@format_option
@out_option
def verify(suite, seed, fmt, out):
    """Run a verification suite; one PASS/FAIL row per criterion."""
    results = run_suite(suite, seed)
    rows = []
    for res in results:
        worst = res.worst()
        rows.append({
            "criterion": res.cid,
            "name": res.name,
            "seed": seed,
            "checks": len(res.lines),
            "status": "PASS" if res.passed else "FAIL",
            "detail": "" if worst is None else
                      f"{worst.label}: measured {worst.measured:.6g} "
                      f"expected {worst.expected:.6g} tol {worst.tolerance}",
        })
    config = {"command": "verify", "suite": suite, "seed": seed}
    _emit(rows, ["criterion", "name", "seed", "checks", "status", "detail"], config, fmt, out)
    sys.exit(EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED)


@main.command()
@click.option("--period", type=int, required=True, help="Orthogonal-evolution period.")
@click.option("--count", type=int, default=100, show_default=True,
              help="Number of random measures (plus the evenly-spread one).")
@seed_option
@format_option
@out_option
def bound(period, count, seed, fmt, out):
    """Frequency-bound checks over random orthogonal measures."""
    if period < 2:
        raise click.UsageError("--period must be at least 2")
    dist = SamplingDistribution.uniform()
    rows = []
    reports = []
    even = fb.build_orthogonal_measure(period, fb.point_shift_law(0),
                                       rng_mod.stream(seed, 0))
    gen = rng_mod.stream(seed, 1)
    measures = [("evenly-spread", even)]
    measures += [(f"random-{i}", fb.build_orthogonal_measure(period, fb.two_shift_law(dist), gen))
                 for i in range(count)]
    for label, meas in measures:
        rep = fb.check_bounds(meas, period)
        reports.append(rep)
        rows.append({
            "period": period,
            "measure": label,
            "seed": seed,
            "lambda0": rep.lambda0,
            "min_abs_moment": rep.min_abs_moment,
            "corollary2_slack": rep.corollary2_slack,
            "passage_slack": rep.passage_slack,
            "grid_slack_min": rep.autocorr_slack_min,
            "orthogonality_dev": rep.orthogonality_dev,
            "status": "PASS" if rep.ok else "FAIL",
        })
    config = {"command": "bound", "period": period, "count": count, "seed": seed,
              "t_max": fb.GRID_T_MAX, "t_step": fb.GRID_T_STEP}
    header = ["period", "measure", "seed", "lambda0", "min_abs_moment",
              "corollary2_slack", "passage_slack", "grid_slack_min",
              "orthogonality_dev", "status"]
    _emit(rows, header, config, fmt, out)
    sys.exit(EXIT_OK if all(r.ok for r in reports) else EXIT_CHECK_FAILED)


if __name__ == "__main__":
    main()

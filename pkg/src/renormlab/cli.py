"""Batch command-line front-end: file in, CSV + summary out.

Every run writes a manifest (config echo, versions, wall time) next to its
outputs; CSV content is a pure function of the configuration, so identical
configurations give byte-identical CSV files.  Exit codes: 0 ok, 2 input
error, 3 precision exhausted, 4 experiment invalid.
"""
import csv
import json
import os
import sys
import time

import click
import gmpy2
from gmpy2 import mpfr

from . import __version__, kernel
from .cfrac import ContinuedFraction
from .circlemap import (CircleMapSpec, load_mapspec, rotation_number,
                        save_mapspec, signature, spec_to_dict, tune)
from .conjugacy import build_conjugacy, derivative_diagnostics
from .cxbounds import default_anchor_level, growth_check, main_lemma_probe
from .errors import (PrecisionExhausted, RenormLabError, TargetUnattainable,
                     TooFewValidSamples, TooManyBranchFailures)
from .numerics import set_precision
from .partition import (build_partition, closest_returns, commensurability,
                        covering_defect, export_partition_csv, refinement_check)
from .renorm import (convergence_experiment, height, pair_at_level,
                     renorm_orbit)

EXIT_INPUT = 2
EXIT_PRECISION = 3
EXIT_INVALID = 4


def _resolve_bits(flag_value):
    if flag_value:
        return int(flag_value)
    env = os.environ.get("RENORMLAB_PRECISION_BITS")
    if env:
        return int(env)
    return None  # fall back to the mapspec file / default 53


def _load(path, bits):
    try:
        spec = load_mapspec(path, precision_bits=bits)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        click.echo("error: cannot read map spec %s: %s" % (path, exc), err=True)
        sys.exit(EXIT_INPUT)
    set_precision(spec.precision_bits)
    return spec


def _parse_target(text):
    if text == "golden":
        return ContinuedFraction((1,) * 40)
    if text == "silver":
        return ContinuedFraction((2,) * 40)
    try:
        quots = tuple(int(t) for t in text.split(","))
        return ContinuedFraction(quots)
    except ValueError as exc:
        click.echo("error: bad target %r: %s" % (text, exc), err=True)
        sys.exit(EXIT_INPUT)


def _parse_range(text):
    try:
        lo, hi = text.split(":")
        return range(int(lo), int(hi) + 1)
    except ValueError:
        click.echo("error: bad level range %r (want lo:hi)" % text, err=True)
        sys.exit(EXIT_INPUT)


def _outdir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _write_manifest(outdir, config, started):
    doc = {
        "config": config,
        "versions": {
            "renormlab": __version__,
            "gmpy2": gmpy2.version(),
            "mpfr": gmpy2.mpfr_version(),
            "kernel_backend": kernel.BACKEND,
        },
        "wall_time_s": time.monotonic() - started,
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(doc, fh, indent=2, default=str)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([x if isinstance(x, (int, str)) else str(x) for x in row])


def _guard(fn):
    try:
        return fn()
    except PrecisionExhausted as exc:
        click.echo("precision exhausted: %s" % exc, err=True)
        sys.exit(EXIT_PRECISION)
    except (TooManyBranchFailures, TooFewValidSamples, TargetUnattainable) as exc:
        click.echo("experiment invalid: %s" % exc, err=True)
        sys.exit(EXIT_INVALID)
    except RenormLabError as exc:
        click.echo("error: %s" % exc, err=True)
        sys.exit(EXIT_INPUT)


@click.group()
def main():
    """Numerical laboratory for multicritical circle maps."""


@main.command("rho")
@click.argument("mapspec", type=click.Path(exists=True))
@click.option("--depth", default=12, show_default=True)
@click.option("--precision-bits", type=int, default=None)
def cmd_rho(mapspec, depth, precision_bits):
    """Continued-fraction expansion of the rotation number."""
    spec = _load(mapspec, _resolve_bits(precision_bits))
    try:
        cf = rotation_number(spec, depth)
    except PrecisionExhausted as exc:
        if exc.partial is not None:
            click.echo("quotients (partial): %s" % list(exc.partial.quotients))
        click.echo("precision exhausted: %s" % exc, err=True)
        sys.exit(EXIT_PRECISION)
    click.echo("quotients: %s%s" % (list(cf.quotients),
                                    "  (rational)" if cf.terminated else ""))
    val = cf.value()
    digits = max(6, spec.precision_bits // 4)
    click.echo("value: %s" % str(mpfr(val.numerator) / val.denominator)[:digits])
    sys.exit(0)


@main.command("tune")
@click.argument("mapspec", type=click.Path(exists=True))
@click.argument("out", type=click.Path())
@click.option("--target", required=True, help="golden, silver, or a,b,c,...")
@click.option("--depth", default=12, show_default=True)
@click.option("--tol", default="1e-8", show_default=True)
@click.option("--precision-bits", type=int, default=None)
def cmd_tune(mapspec, out, target, depth, tol, precision_bits):
    """Bisect omega so the rotation number matches the target prefix."""
    started = time.monotonic()
    spec = _load(mapspec, _resolve_bits(precision_bits))
    cf = _parse_target(target)
    if len(cf.quotients) < depth:
        click.echo("error: target provides %d quotients < depth %d"
                   % (len(cf.quotients), depth), err=True)
        sys.exit(EXIT_INPUT)

    def run():
        family = lambda w: CircleMapSpec(
            w, spec.factors, precision_bits=spec.precision_bits,
            conjugacy_amp=spec.conjugacy_amp)
        tuned = tune(family, cf, depth, mpfr(tol))
        save_mapspec(tuned, out)
        click.echo("omega: %s" % tuned.omega)
        click.echo("certificate |rho - target| <= %s" % tuned.tune_certificate)
        outdir = _outdir(os.path.dirname(out) or ".")
        _write_manifest(outdir, {"command": "tune", "mapspec": mapspec,
                                 "target": target, "depth": depth, "tol": tol,
                                 "precision_bits": spec.precision_bits}, started)

    _guard(run)
    sys.exit(0)


@main.command("partition")
@click.argument("mapspec", type=click.Path(exists=True))
@click.option("--level", default=5, show_default=True)
@click.option("--output-dir", default="partition-out", show_default=True)
@click.option("--precision-bits", type=int, default=None)
def cmd_partition(mapspec, level, output_dir, precision_bits):
    """Dynamical partition CSV plus covering and refinement checks."""
    started = time.monotonic()
    spec = _load(mapspec, _resolve_bits(precision_bits))

    def run():
        outdir = _outdir(output_dir)
        part = build_partition(spec, 0, level)
        part_next = build_partition(spec, 0, level + 1)
        export_partition_csv(part, os.path.join(outdir, "partition.csv"))
        worst, total = covering_defect(part)
        rep = refinement_check(part, part_next)
        with open(os.path.join(outdir, "summary.txt"), "w") as fh:
            fh.write("level %d intervals %d\n"
                     % (level, len(part.long_intervals) + len(part.short_intervals)))
            fh.write("covering worst gap %s total defect %s\n" % (worst, total))
            fh.write("refinement ok %s pieces_per_long %d worst_mismatch %s\n"
                     % (rep.ok, rep.pieces_per_long, rep.worst_mismatch))
        click.echo("intervals: %d  covering gap: %s  refinement: %s"
                   % (len(part.long_intervals) + len(part.short_intervals),
                      worst, "ok" if rep.ok else "FAILED"))
        _write_manifest(outdir, {"command": "partition", "mapspec": mapspec,
                                 "level": level,
                                 "precision_bits": spec.precision_bits}, started)

    _guard(run)
    sys.exit(0)


@main.command("realbounds")
@click.argument("mapspec", type=click.Path(exists=True))
@click.option("--levels", default="1:10", show_default=True)
@click.option("--output-dir", default="realbounds-out", show_default=True)
@click.option("--precision-bits", type=int, default=None)
def cmd_realbounds(mapspec, levels, output_dir, precision_bits):
    """Adjacent-interval commensurability constants C(n) per level."""
    started = time.monotonic()
    spec = _load(mapspec, _resolve_bits(precision_bits))
    rng = _parse_range(levels)

    def run():
        outdir = _outdir(output_dir)
        rows = commensurability(spec, 0, rng)
        _write_csv(os.path.join(outdir, "realbounds.csv"),
                   ["level", "C", "pre_asymptotic"],
                   [(n, c, int(flag)) for n, c, flag in rows])
        for n, c, flag in rows:
            click.echo("C(%d) = %s%s" % (n, c, "  [pre-asymptotic]" if flag else ""))
        _write_manifest(outdir, {"command": "realbounds", "mapspec": mapspec,
                                 "levels": levels,
                                 "precision_bits": spec.precision_bits}, started)

    _guard(run)
    sys.exit(0)


@main.command("renorm")
@click.argument("mapspec", type=click.Path(exists=True))
@click.option("--depth", default=8, show_default=True)
@click.option("--output-dir", default="renorm-out", show_default=True)
@click.option("--precision-bits", type=int, default=None)
def cmd_renorm(mapspec, depth, output_dir, precision_bits):
    """Renormalization orbit: per-level pair data and heights."""
    started = time.monotonic()
    spec = _load(mapspec, _resolve_bits(precision_bits))

    def run():
        outdir = _outdir(output_dir)
        rows = []
        for n in range(1, depth + 1):
            pair = pair_at_level(spec, n)
            rows.append((n, pair.eta0, pair.xi0, height(pair), pair.parity,
                         pair.commutation_residual()))
        _write_csv(os.path.join(outdir, "renorm.csv"),
                   ["level", "eta0", "xi0", "height", "parity",
                    "commutation_residual"], rows)
        for r in rows:
            click.echo("level %d height %s parity %d residual %s"
                       % (r[0], r[3], r[4], r[5]))
        _write_manifest(outdir, {"command": "renorm", "mapspec": mapspec,
                                 "depth": depth,
                                 "precision_bits": spec.precision_bits}, started)

    _guard(run)
    sys.exit(0)


@main.command("converge")
@click.argument("mapspec_f", type=click.Path(exists=True))
@click.argument("mapspec_g", type=click.Path(exists=True))
@click.option("--depth", default=10, show_default=True)
@click.option("--grid", default=48, show_default=True)
@click.option("--output-dir", default="converge-out", show_default=True)
@click.option("--precision-bits", type=int, default=None)
def cmd_converge(mapspec_f, mapspec_g, depth, grid, output_dir, precision_bits):
    """Distance between the renormalization orbits of two maps, with decay fit."""
    started = time.monotonic()
    bits = _resolve_bits(precision_bits)
    f = _load(mapspec_f, bits)
    g = _load(mapspec_g, bits)

    def run():
        outdir = _outdir(output_dir)
        rep = convergence_experiment(f, g, depth, grid)
        _write_csv(os.path.join(outdir, "converge.csv"),
                   ["level", "c0", "c1"],
                   list(zip(rep.levels, rep.c0_dist, rep.c1_dist)))
        with open(os.path.join(outdir, "summary.txt"), "w") as fh:
            if rep.exact_equal:
                fh.write("exact-equality: distances identically zero\n")
            elif rep.lambda_hat is not None:
                fh.write("lambda_hat slope %s intercept %s r2 %s\n"
                         % (rep.lambda_hat.slope, rep.lambda_hat.intercept,
                            rep.lambda_hat.r_squared))
            fh.write("success %s window %s\n" % (rep.success, list(rep.fit_window)))
        if rep.exact_equal:
            click.echo("exact-equality short-circuit: all distances zero")
        elif rep.lambda_hat is not None:
            click.echo("slope %s r2 %s success %s"
                       % (rep.lambda_hat.slope, rep.lambda_hat.r_squared, rep.success))
        _write_manifest(outdir, {"command": "converge", "f": mapspec_f,
                                 "g": mapspec_g, "depth": depth, "grid": grid,
                                 "precision_bits": f.precision_bits}, started)

    _guard(run)
    sys.exit(0)


@main.command("probe")
@click.argument("mapspec", type=click.Path(exists=True))
@click.option("--level", "-n", "level", type=int, required=True)
@click.option("--anchor", "-m", type=int, default=None,
              help="anchor level M; defaults to first clean level + 2")
@click.option("--samples", default=32, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--growth-depth", default=8, show_default=True)
@click.option("--growth-radius", default="2", show_default=True)
@click.option("--output-dir", default="probe-out", show_default=True)
@click.option("--precision-bits", type=int, default=None)
def cmd_probe(mapspec, level, anchor, samples, seed, growth_depth,
              growth_radius, output_dir, precision_bits):
    """Inverse-branch envelope probe plus the root-like growth check."""
    started = time.monotonic()
    spec = _load(mapspec, _resolve_bits(precision_bits))

    def run():
        outdir = _outdir(output_dir)
        M = anchor if anchor is not None else default_anchor_level(spec)
        rep = main_lemma_probe(spec, level, M, samples, seed=seed)
        rows = []
        for idx, z, x_entry, x_fund, y, ang, fwd, status in rep.rows:
            rows.append((idx, +z.real, +z.imag, x_entry, x_fund,
                         "" if y is None else y,
                         "" if ang is None else ang,
                         "" if fwd is None else fwd, status))
        _write_csv(os.path.join(outdir, "probe.csv"),
                   ["sample", "re", "im", "input_ratio_entry",
                    "input_ratio_fundamental", "output_ratio", "min_angle",
                    "forward_error", "status"], rows)
        growth = None
        if spec.factors:
            pairs = renorm_orbit(spec, growth_depth)
            growth = growth_check(pairs[3:], mpfr(growth_radius),
                                  max(8, samples // 2), seed=seed)
        with open(os.path.join(outdir, "summary.txt"), "w") as fh:
            fh.write("n %d M %d B1 %s B2 %s violations %d failures %d\n"
                     % (level, M, rep.B1, rep.B2, rep.violations, rep.failures))
            if growth is not None:
                fh.write("growth c %s b %s\n" % (growth.slope, growth.intercept))
        click.echo("B1 %s  B2 %s  violations %d  failures %d/%d"
                   % (rep.B1, rep.B2, rep.violations, rep.failures, samples))
        if growth is not None:
            click.echo("growth: c %s b %s" % (growth.slope, growth.intercept))
        _write_manifest(outdir, {"command": "probe", "mapspec": mapspec,
                                 "level": level, "anchor": M, "samples": samples,
                                 "seed": seed, "growth_depth": growth_depth,
                                 "growth_radius": growth_radius,
                                 "precision_bits": spec.precision_bits}, started)

    _guard(run)
    sys.exit(0)


@main.command("conjugacy")
@click.argument("mapspec_f", type=click.Path(exists=True))
@click.argument("mapspec_g", type=click.Path(exists=True))
@click.option("--levels", default="3:8", show_default=True)
@click.option("--output-dir", default="conjugacy-out", show_default=True)
@click.option("--precision-bits", type=int, default=None)
def cmd_conjugacy(mapspec_f, mapspec_g, levels, output_dir, precision_bits):
    """Conjugacy tables and the derivative-oscillation smoothness diagnostic."""
    started = time.monotonic()
    bits = _resolve_bits(precision_bits)
    f = _load(mapspec_f, bits)
    g = _load(mapspec_g, bits)
    rng = _parse_range(levels)

    def run():
        outdir = _outdir(output_dir)
        tables = [build_conjugacy(f, g, n) for n in rng]
        rows = []
        for t in tables:
            for k, (x, y) in enumerate(t.knots):
                rows.append((t.level, k, x, y, t.ratios[k]))
        _write_csv(os.path.join(outdir, "conjugacy.csv"),
                   ["level", "knot", "x", "y", "ratio"], rows)
        rep = derivative_diagnostics(tables)
        with open(os.path.join(outdir, "summary.txt"), "w") as fh:
            fh.write("oscillations %s\n" % list(map(str, rep.oscillations)))
            if rep.trend is not None:
                fh.write("trend slope %s r2 %s\n"
                         % (rep.trend.slope, rep.trend.r_squared))
            fh.write("smooth %s\n" % rep.smooth)
            fh.write("second_point_residual %s\n"
                     % tables[-1].second_point_residual)
        click.echo("osc: %s" % ["%.4g" % float(o) for o in rep.oscillations])
        click.echo("smooth: %s" % rep.smooth)
        _write_manifest(outdir, {"command": "conjugacy", "f": mapspec_f,
                                 "g": mapspec_g, "levels": levels,
                                 "precision_bits": f.precision_bits}, started)

    _guard(run)
    sys.exit(0)


if __name__ == "__main__":
    main()

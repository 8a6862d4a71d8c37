"""Command-line experiment runner.

    star-isac run      --config PATH --seed N --out DIR
    star-isac baseline --config PATH --scheme NAME --seed N --out DIR
    star-isac sweep    --config PATH --param NAME --values LIST --seeds LIST --schemes LIST --out DIR

Exit codes: 0 success, 1 configuration error, 2 infeasible scenario,
3 numerical failure.
"""

import argparse
import csv
import logging
import math
import os
import sys
import time

import numpy as np

from .baselines import SCHEMES
from .errors import (ConfigError, InfeasibleScenario, InvalidInput, NumericalFailure,
                     RecoveryFailure)
from .scenario import SystemConfig, load_config, scenario

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 1, 2, 3

SWEEP_PARAMS = ("p_max_dbm", "gamma_db", "n_elements", "eta")
SUMMARY_COLUMNS = ["scheme", "seed", "p_max_dbm", "gamma_db", "eta", "n_elements",
                   "min_gain", "feasible", "iterations", "wall_ms"]

log = logging.getLogger("star_isac")


def _fmt(x):
    """Shortest round-trip text for numbers; stable across runs."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _load(path):
    return SystemConfig() if path is None else load_config(path)


# ---------------------------------------------------------------------------
# single runs


def convergence_rows(trace, timing=True):
    return [(r.index, r.r_after_p31, r.r_after_p51, r.wall_ms if timing else "") for r in trace.iterations]


def solution_rows(trace):
    """One row per complex entry: quantity, index, row, col, re, im.

    Rank-one beamformers are written as vectors (col empty); blocks that
    failed the rank-one test are written as full covariance matrices.
    """
    rows = []
    bf = trace.beamformers
    for name, vecs, covs in (("w", bf.w_comm, bf.w_cov), ("d", bf.d_sense, bf.d_cov)):
        for i, (v, c) in enumerate(zip(vecs, covs)):
            if v is not None:
                rows += [(name, i, r, "", z.real, z.imag) for r, z in enumerate(v)]
            else:
                rows += [(name.upper() + "_cov", i, r, col, c[r, col].real, c[r, col].imag)
                         for r in range(c.shape[0]) for col in range(c.shape[1])]
    for name, phi in (("phi_r", trace.star.phi_r), ("phi_t", trace.star.phi_t)):
        rows += [(name, 0, n, "", z.real, z.imag) for n, z in enumerate(phi)]
    return rows


def write_run_outputs(trace, channels, cfg, out, timing=True, plots=True):
    os.makedirs(out, exist_ok=True)
    _write_csv(os.path.join(out, "convergence.csv"), ["iter", "r_after_p31", "r_after_p51", "wall_ms"],
               convergence_rows(trace, timing))
    _write_csv(os.path.join(out, "solution.csv"), ["quantity", "index", "row", "col", "re", "im"],
               solution_rows(trace))
    _write_csv(os.path.join(out, "audit.csv"), ["quantity", "index", "value"], trace.report.as_rows())
    if plots:
        from . import plotting
        plotting.plot_convergence(trace, os.path.join(out, "convergence.png"))
        plotting.plot_amplitudes(trace.star, os.path.join(out, "amplitudes.png"))
        plotting.plot_beam_pattern(trace.beamformers, trace.star, channels, cfg,
                                   os.path.join(out, "beam_pattern.png"))


def run_scheme(cfg, scheme, seed):
    """Channels for ``seed`` followed by one scheme; returns (trace, channels)."""
    channels, rng = scenario(cfg, seed)
    return SCHEMES[scheme](channels, cfg, rng), channels


def run_single(config, seed, out, scheme="proposed", timing=True, plots=True):
    """Run one scheme and write its CSV and figure outputs; returns an exit code."""
    try:
        cfg = _load(config)
        if seed is not None:
            cfg = cfg.with_updates(seed=seed)
        trace, channels = run_scheme(cfg, scheme, cfg.seed)
    except (ConfigError, InvalidInput) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleScenario as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NumericalFailure, RecoveryFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_run_outputs(trace, channels, cfg, out, timing, plots)
    rep = trace.report
    print(f"{scheme}: seed {cfg.seed}, min gain {rep.min_gain:.6e} mW, "
          f"{len(trace.iterations)} iteration(s), status {trace.status}, feasible {rep.feasible}")
    if not rep.feasible:
        cid, margin = rep.worst()
        print(f"final design fails the audit: {cid} margin {margin:.3e}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweeps


def sweep_config(cfg, param, value):
    """Apply one sweep value; ``n_elements`` keeps nx and sets nz = N / nx."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"{param}: not a sweep parameter (choose from {', '.join(SWEEP_PARAMS)})", field=param)
    if param == "n_elements":
        n = int(value)
        if n != value or n % cfg.nx:
            raise ConfigError(f"n_elements: {value} is not a multiple of nx={cfg.nx}", field=param)
        return cfg.with_updates(nz=n // cfg.nx)
    return cfg.with_updates(**{param: float(value)})


def run_sweep(config, param, values, seeds, schemes, out, timing=True, plots=True):
    """Evaluate every (scheme, seed, value) cell; failed cells are kept as infeasible rows."""
    try:
        base = _load(config)
        if not values or not seeds:
            raise ConfigError("sweep needs at least one value and one seed")
        for s in schemes:
            if s not in SCHEMES:
                raise ConfigError(f"unknown scheme {s!r} (choose from {', '.join(SCHEMES)})", field="schemes")
        cfgs = [sweep_config(base, param, v) for v in values]
    except (ConfigError, InvalidInput) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    os.makedirs(out, exist_ok=True)
    rows = []
    for scheme in schemes:
        for seed in seeds:
            for value, cfg in zip(values, cfgs):
                cfg = cfg.with_updates(seed=seed)
                t0 = time.perf_counter()
                try:
                    trace, _ = run_scheme(cfg, scheme, seed)
                    gain, feasible, iters = trace.min_gain, trace.feasible, len(trace.iterations)
                except (InfeasibleScenario, NumericalFailure, RecoveryFailure, InvalidInput) as exc:
                    log.warning("%s seed %s %s=%s: %s", scheme, seed, param, value, exc)
                    gain, feasible, iters = math.nan, False, 0
                wall = (time.perf_counter() - t0) * 1e3
                rows.append([scheme, seed, cfg.p_max_dbm, cfg.gamma_db, cfg.eta, cfg.n_elements,
                             gain, feasible, iters, wall if timing else ""])
    _write_csv(os.path.join(out, "summary.csv"), SUMMARY_COLUMNS, rows)

    series = {}
    for scheme in schemes:
        means = []
        for value in values:
            g = [r[6] for r in rows if r[0] == scheme and r[7] and _cell_value(r, param) == _norm(param, value)]
            means.append(float(np.mean(g)) if g else math.nan)
        series[scheme] = (list(values), means)
        _write_csv(os.path.join(out, f"plot_{param}_{scheme}.csv"), [param, "mean_min_gain"], zip(values, means))
    if plots:
        from . import plotting
        plotting.plot_sweep(param, series, os.path.join(out, f"sweep_{param}.png"))
    n_bad = sum(1 for r in rows if not r[7])
    print(f"sweep {param}: {len(rows)} cells, {n_bad} infeasible or failed")
    return EXIT_OK


def _norm(param, value):
    return int(value) if param == "n_elements" else float(value)


def _cell_value(row, param):
    return row[2 + SUMMARY_COLUMNS[2:6].index(param)]


# ---------------------------------------------------------------------------
# argument parsing


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="star-isac", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML scenario file (defaults to the system-parameter table)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--no-timing", action="store_true", help="leave wall-clock columns empty")
        p.add_argument("--no-plots", action="store_true", help="skip PNG figures")

    p = sub.add_parser("run", help="proposed scheme, single seed")
    common(p)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("baseline", help="one comparison scheme, single seed")
    common(p)
    p.add_argument("--scheme", required=True, choices=sorted(SCHEMES))
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("sweep", help="parameter sweep over seeds and schemes")
    common(p)
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--values", required=True, type=_float_list)
    p.add_argument("--seeds", required=True, type=_int_list)
    p.add_argument("--schemes", type=_str_list, default=["proposed"])
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which would read as "infeasible"
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    timing, plots = not args.no_timing, not args.no_plots
    if args.command == "run":
        return run_single(args.config, args.seed, args.out, "proposed", timing, plots)
    if args.command == "baseline":
        return run_single(args.config, args.seed, args.out, args.scheme, timing, plots)
    return run_sweep(args.config, args.param, args.values, args.seeds, args.schemes, args.out, timing, plots)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``rfcw rate-curve | phase-scan | verify | fields``.

Exit status: 0 on success, 1 when a verification tolerance is violated,
2 on a configuration error.
"""
from __future__ import annotations

import argparse
import dataclasses
import io
import logging
import sys
from pathlib import Path

import numpy as np

from . import closed_forms
from .config import ConfigError, JobConfig, parse_config, require
from .field_models import (Constant, Dichotomous, FreeEnergy, Uniform, f_n, limit_f,
                           sample_fields)
from .gibbs_exact import ldp_convergence_report
from .legendre import INF, conjugate
from .phase_diagram import phase_scan, scan_to_csv, scan_to_json
from .rate_function import G_of, RateFunction, rate_I

log = logging.getLogger("rfcw")

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2
CURVE_HALF_WIDTH = 1.05
ORACLE_GRID = np.linspace(-0.99, 0.99, 201)
CLASSICAL_TOL = 1e-8
DICHOTOMOUS_TOL = 1e-6
UNIFORM_TOL = 1e-9


def fmt(v: float) -> str:
    return "inf" if v == INF else format(float(v), ".17g")


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Commands; each returns (output text, exit code)
# ---------------------------------------------------------------------------

def cmd_rate_curve(cfg: JobConfig) -> tuple[str, int]:
    require(cfg, "rate-curve", "model", "beta")
    rf = RateFunction(FreeEnergy(cfg.model, cfg.beta))
    xs = np.linspace(-CURVE_HALF_WIDTH, CURVE_HALF_WIDTH, cfg.x_points)
    rows = [(x, rate_I(rf, x), G_of(rf, x), conjugate(rf.conj, x)) for x in xs]
    return _csv(["x", "I", "G", "f_star"], rows), EXIT_OK


def cmd_phase_scan(cfg: JobConfig) -> tuple[str, int]:
    require(cfg, "phase-scan", "family", "beta_range", "h_range")
    betas = np.linspace(*cfg.beta_range, cfg.beta_points)
    hs = np.linspace(*cfg.h_range, cfg.h_points)
    cells = phase_scan(cfg.family, betas, hs, critical_line=cfg.critical_line)
    text = scan_to_json(cells) + "\n" if cfg.format == "json" else scan_to_csv(cells)
    return text, EXIT_OK


def oracle_agreement(model, beta: float) -> tuple[str, float, float] | None:
    """Largest gap between the numerical pipeline and the matching closed form."""
    rf = RateFunction(FreeEnergy(model, beta))
    if isinstance(model, Constant):
        gap = max(abs(rate_I(rf, x) - closed_forms.classical_rate(x, beta, model.h))
                  for x in ORACLE_GRID)
        return "classical_rate", gap, CLASSICAL_TOL
    if isinstance(model, Dichotomous) and model.alpha == 0.5:
        gap = max(abs(rate_I(rf, x) - closed_forms.dichotomous_rate(x, beta, model.h))
                  for x in ORACLE_GRID)
        return "dichotomous_rate", gap, DICHOTOMOUS_TOL
    if isinstance(model, Uniform):
        gap = max(abs(G_of(rf, x) - closed_forms.uniform_G(x, beta, model.h))
                  for x in np.linspace(-2.0, 2.0, 201))
        return "uniform_G", gap, UNIFORM_TOL
    return None


def cmd_verify(cfg: JobConfig) -> tuple[str, int]:
    if cfg.model is None:
        cfg = dataclasses.replace(cfg, model=Constant(0.0))
    if cfg.beta is None:
        cfg = dataclasses.replace(cfg, beta=0.5)
    report = ldp_convergence_report(cfg.model, cfg.beta, cfg.interval, cfg.n_list, cfg.seeds,
                                    theory_beta=cfg.theory_beta)
    status = EXIT_OK
    med = report.median_deviations()
    log.info("median deviation per n: %s", ", ".join(
        f"n={n}: {m:.3g}" for n, m in zip(cfg.n_list, med)))
    if med[-1] > cfg.budget:
        log.error("median deviation %.4g at n=%d exceeds budget %.4g", med[-1], cfg.n_list[-1],
                  cfg.budget)
        status = EXIT_VIOLATION
    if report.monotone() is False:
        log.error("median deviation is not non-increasing over the last three n")
        status = EXIT_VIOLATION
    oracle = oracle_agreement(cfg.model, cfg.theory_beta or cfg.beta)
    if oracle is not None:
        name, gap, tol = oracle
        ok = gap <= tol
        log.log(logging.INFO if ok else logging.ERROR, "oracle %s: max gap %.3g (tol %.0e) %s",
                name, gap, tol, "PASS" if ok else "FAIL")
        if not ok:
            status = EXIT_VIOLATION
    return report.to_csv(), status


def cmd_fields(cfg: JobConfig) -> tuple[str, int]:
    require(cfg, "fields", "model", "beta")
    fe = FreeEnergy(cfg.model, cfg.beta)
    limits = {x: limit_f(fe, x) for x in cfg.x_values}
    rows = []
    for n in cfg.n_list:
        for seed in cfg.seeds:
            real = sample_fields(cfg.model, n, seed)
            emp = f_n(real, np.array(cfg.x_values), cfg.beta)
            for x, v in zip(cfg.x_values, emp):
                rows.append((str(n), str(seed), x, v, limits[x], abs(v - limits[x])))
    return _csv(["n", "seed", "x", "f_n", "f_limit", "abs_deviation"], rows), EXIT_OK


COMMANDS = {
    "rate-curve": cmd_rate_curve,
    "phase-scan": cmd_phase_scan,
    "verify": cmd_verify,
    "fields": cmd_fields,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rfcw", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="JSON job configuration")
        s.add_argument("--beta", type=float, help="override beta")
        s.add_argument("--h", type=float, help="override the field strength h of the model")
        s.add_argument("--seed", type=int, help="run a single seed")
        s.add_argument("--out", help="output path (default: stdout)")
    return p


def load_config(args) -> JobConfig:
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"{args.config}: {exc.strerror}") from None
        cfg = parse_config(text, str(args.config))
    else:
        cfg = JobConfig()
    if args.beta is not None:
        if not args.beta > 0:
            raise ConfigError("--beta must be > 0")
        cfg.beta = args.beta
    if args.h is not None:
        if cfg.model is not None:
            try:
                cfg.model = dataclasses.replace(cfg.model, h=args.h)
            except TypeError:
                raise ConfigError(f"--h does not apply to a {cfg.model.variant} model") from None
            except ValueError as exc:
                raise ConfigError(f"--h: {exc}") from None
        if cfg.h_range is not None:
            cfg.h_range = (args.h, args.h)
    if args.seed is not None:
        cfg.seeds = [args.seed]
    if args.out is not None:
        cfg.out = args.out
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args)
        text, status = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())

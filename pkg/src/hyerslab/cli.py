"""Command-line entry point: ``hyerslab run | bound-table | split``."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import control
from .algebra import as_scalar
from .config import SUITES, ExperimentConfig
from .errors import ConfigError, Divergent, HyersLabError, InvalidRegime, PreconditionViolated, TailNotCertifiable
from .homstab import choose_M, unimodular_three_split
from .report import fmt_float, fmt_scalar, stability_csv

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("hyerslab")


def _parse_scalar(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _parse_rs(text: str) -> tuple[int, int]:
    try:
        r, s = text.split(":")
        return int(r), int(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected r:s, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyerslab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a verification suite from a JSON config")
    run.add_argument("--config", help="JSON config file (defaults are used when omitted)")
    run.add_argument("--suite", choices=SUITES)
    run.add_argument("--seed", type=int)
    run.add_argument("--samples", type=int)
    run.add_argument("--tol", type=float)
    run.add_argument("--out", help="output directory")

    bt = sub.add_parser("bound-table", help="closed-form vs series power-type bound")
    bt.add_argument("--rs", type=_parse_rs, nargs="+", default=[(2, 1), (3, 1), (3, 2), (5, 2), (4, 3), (2, 2)],
                    metavar="R:S")
    bt.add_argument("--p", type=float, nargs="+", default=[0.0, 0.25, 0.5, 0.75])
    bt.add_argument("--eps", type=float, default=1.0)
    bt.add_argument("--x-norm", type=float, default=1.0)
    bt.add_argument("--direction", choices=["forward", "backward"], default="forward")

    sp = sub.add_parser("split", help="write lambda as (M/3)(mu1 + mu2 + mu3) with |mu_i| = 1")
    sp.add_argument("lam", type=_parse_scalar, metavar="LAMBDA")
    sp.add_argument("--M", type=int, dest="M", help="defaults to ceil(4|lambda|) + 1")
    return parser


def cmd_run(args) -> int:
    from .suites import Experiment

    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        cfg = cfg.override(suite=args.suite, seed=args.seed, samples=args.samples, tol=args.tol,
                           output_dir=args.out)
        exp = Experiment(cfg)
        report = exp.run(cfg.suite)
    except (ConfigError, Divergent, TailNotCertifiable, InvalidRegime) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report.meta["config"] = cfg.to_dict()
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text(report.to_csv(), newline="")
        (out / "report.json").write_text(report.to_json(), newline="")
        (out / "summary.txt").write_text(report.summary(), newline="")
        if exp.stability_rows:
            (out / "stability.csv").write_text(stability_csv(exp.stability_rows), newline="")
    except OSError as exc:
        print(f"cannot write reports: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(report.summary())
    return EXIT_OK if report.passed else EXIT_FAIL


BOUND_COLUMNS = ["r", "s", "p", "eps", "x_norm", "closed_form", "series", "rel_gap", "status"]


def bound_rows(rs_grid, p_grid, eps: float, x_norm: float, direction: str = "forward"):
    """Rows of the bound table; invalid grid points carry ``status=invalid``."""
    rows = []
    for r, s in rs_grid:
        for p in p_grid:
            row = {"r": r, "s": s, "p": p, "eps": eps, "x_norm": x_norm,
                   "closed_form": None, "series": None, "rel_gap": None, "status": "ok"}
            try:
                closed = control.power_bound_closed_form(eps, p, r, s, x_norm, direction)
                phi = control.PowerType(eps, p)
                series = control.phi_tilde(phi, r, s, [x_norm, x_norm], tol=1e-15, direction=direction).value
            except (InvalidRegime, Divergent, TailNotCertifiable, ValueError):
                row["status"] = "invalid"
            else:
                gap = abs(closed - series) / abs(closed) if closed != 0 else abs(series)
                row.update(closed_form=closed, series=series, rel_gap=gap)
            rows.append(row)
    return rows


def cmd_bound_table(args) -> int:
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(BOUND_COLUMNS)
    for row in bound_rows(args.rs, args.p, args.eps, args.x_norm, args.direction):
        w.writerow([row["r"], row["s"], fmt_float(row["p"]), fmt_float(row["eps"]), fmt_float(row["x_norm"])]
                   + ["" if row[k] is None else fmt_float(row[k]) for k in ("closed_form", "series", "rel_gap")]
                   + [row["status"]])
    return EXIT_OK


def cmd_split(args) -> int:
    lam = as_scalar(args.lam)
    M = args.M if args.M is not None else choose_M(lam)
    try:
        trip = unimodular_three_split(lam, M)
    except PreconditionViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"lambda={fmt_scalar(lam)} M={M}")
    for i, mu in enumerate(trip, 1):
        print(f"mu{i}={fmt_scalar(mu)} |mu{i}|={fmt_float(abs(mu))}")
    print(f"residual={fmt_float(abs(trip.total - 3 * lam / M))}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": cmd_run, "bound-table": cmd_bound_table, "split": cmd_split}
    try:
        return handlers[args.command](args)
    except HyersLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Exit codes: 0 success, 2 configuration/validation error, 3 physics-domain
error (an OPO below threshold or with a fully depleted pump).
"""

import argparse
import sys

from . import runs
from .config import parse_config
from .covariance import CovMatrix
from .entanglement import certify
from .errors import ConfigError, PhysicsDomainError, ValidationError

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS = 0, 2, 3

PRESET_FOR = {"single": "tripartite", "chain": "pentapartite", "scan": "pump-scan", "grid": "threshold-grid"}


def _add_common(p):
    p.add_argument("--config", metavar="FILE", help="key = value configuration file")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                   dest="overrides", help="override one configuration key (repeatable)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out", metavar="PATH", help="output file ('-' for stdout)")
    p.add_argument("--jobs", type=int, help="worker processes for scan/grid")
    p.add_argument("--quiet", action="store_true", help="suppress the stderr summary")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="opocascade",
        description="Entanglement of the bright beams of cascaded above-threshold OPOs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("single", "report for one OPO (pump, signal, idler)"),
        ("chain", "report for a cascade of OPOs"),
        ("scan", "1-D scan of one parameter (CSV rows)"),
        ("grid", "2-D grid of the reduced-subsystem eigenvalues"),
    ):
        _add_common(sub.add_parser(name, help=text))
    cert = sub.add_parser("certify", help="analyse a serialized covariance matrix")
    _add_common(cert)
    cert.add_argument("--cov", metavar="FILE", required=True)
    for name in ("single", "chain"):
        sub.choices[name].add_argument("--save-cov", metavar="FILE",
                                       help="also write the covariance matrix to FILE")
    return parser


def _load_config(args):
    overrides = list(args.overrides)
    for key in ("format", "out", "jobs"):
        value = getattr(args, key)
        if value is not None:
            overrides.append(f"{key}={value}")
    preset = PRESET_FOR.get(args.command, "tripartite")
    return parse_config(args.config, overrides, preset=preset)


def _emit(text, config):
    if config.out in ("-", ""):
        sys.stdout.write(text)
    else:
        with open(config.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _log(args, msg):
    if not args.quiet:
        print(msg, file=sys.stderr)


def _report_output(config, doc, report):
    if config.format == "json":
        return runs.write_json(doc)
    return runs.write_csv(runs.REPORT_CSV_HEADER, runs.report_rows(report))


def cmd_single(args, config):
    if args.command == "single" and config.n_opos != 1:
        raise ConfigError("n_opos: 'single' needs n_opos = 1; use 'chain'")
    doc, report, V = runs.single_report(config)
    if args.save_cov:
        V.save(args.save_cov)
    _emit(_report_output(config, doc, report), config)
    _log(args, f"{report.verdict}; min PT eigenvalue "
               f"{min(r.nu_min for r in report.partitions):.4f}")
    return EXIT_OK


def cmd_scan(args, config):
    if config.scan is None:
        raise ConfigError("scan_param: a scan axis is required")
    cols, rows = runs.scan(config)
    status = cols.index("status")
    feasible = sum(1 for r in rows if r[status] == "ok")
    if feasible == 0:
        _log(args, "no feasible point in the scan range")
        return EXIT_PHYSICS
    if config.format == "json":
        _emit(runs.write_json(runs.rows_as_records(cols, rows)), config)
    else:
        _emit(runs.write_csv(cols, rows), config)
    _log(args, f"{feasible}/{len(rows)} feasible scan points")
    return EXIT_OK


def cmd_grid(args, config):
    if config.scan is None or config.grid is None:
        raise ConfigError("grid_param: both scan_* and grid_* axes are required")
    if config.n_opos < 2:
        raise ConfigError("n_opos: a grid needs at least two OPOs")
    cols, rows = runs.grid(config)
    feasible = sum(1 for r in rows if r[-1] == "ok")
    if feasible == 0:
        _log(args, "no feasible point in the grid")
        return EXIT_PHYSICS
    if config.format == "json":
        _emit(runs.write_json(runs.rows_as_records(cols, rows)), config)
    else:
        _emit(runs.write_csv(cols, rows), config)
    _log(args, f"{feasible}/{len(rows)} feasible grid points")
    return EXIT_OK


def cmd_certify(args, config):
    try:
        V = CovMatrix.load(args.cov)
    except OSError as exc:
        raise ConfigError(f"--cov: cannot read {args.cov}: {exc.strerror}") from None
    report = certify(V, tol=config.entangle_tol, purity_tol=config.purity_tol)
    doc = {"source": str(args.cov)}
    doc.update(report.to_dict())
    _emit(_report_output(config, doc, report), config)
    _log(args, report.verdict)
    return EXIT_OK


COMMANDS = {
    "single": cmd_single,
    "chain": cmd_single,
    "scan": cmd_scan,
    "grid": cmd_grid,
    "certify": cmd_certify,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        return COMMANDS[args.command](args, config)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except PhysicsDomainError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except ValidationError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

import argparse
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path

from src.arch_local import elliptic_log, neron_lambda_arch
from src.bounds import bounds_report
from src.config_manager import ConfigManager
from src.curve import O, parse_curve, parse_point, torsion_order
from src.errors import HeightDiscrepancyError, ParseError, VerificationFailed
from src.global_discrepancy import (ARCH, canonical_height, canonical_height_oracle,
                                    curve_lattice, global_discrepancy, place_breakdown,
                                    torsion_orbit_global)
from src.nonarch_local import neron_lambda_nonarch, reduction_type
from src.reports import (HeightReport, LocalHeightEntry, OracleSummary, ReportModel,
                         ReportStore, SweepReport, render)
from src.sweep_stats import row_from_report, sweep_statistics
from src.verification import SUITES, run_suite, write_junit

logger = logging.getLogger('hdisc')

# Oracle agreement: within twice the last doubling gap, or 4^-k_max scaled by this
ORACLE_SCALE = 8.0


def parse_arguments(argv=None):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--precision-bits', type=int, default=None,
                        help='Working precision in bits (default: 160)')
    common.add_argument('--tail-eps', type=float, default=None,
                        help='Bound for every discarded series tail (default: 1e-12)')
    common.add_argument('--seed', type=int, default=None, help='Seed for sampled grids')
    common.add_argument('--format', dest='output_format', choices=('json', 'csv'), default=None,
                        help='Report format on stdout (default: json)')
    common.add_argument('--config', default=None, help='Optional key=value configuration file')
    common.add_argument('--save-dir', default=None,
                        help='Archive JSON reports in this directory')
    common.add_argument('--verbose', action='store_true', help='Debug logging')

    parser = argparse.ArgumentParser(
        description="Neron local heights, point-set discrepancies and explicit height bounds "
                    "for elliptic curves over Q")
    commands = parser.add_subparsers(dest='command', required=True)

    height = commands.add_parser('height', parents=[common],
                                 help='Canonical height with its per-place breakdown')
    height.add_argument('curve', help="Coefficients 'a1,a2,a3,a4,a6'")
    height.add_argument('point', help="'x,y' or 'O'")

    local = commands.add_parser('local-height', parents=[common],
                                help='Local Neron function at one place')
    local.add_argument('curve')
    local.add_argument('point')
    local.add_argument('--place', default=ARCH, help="'inf' or a prime (default: inf)")

    discrepancy = commands.add_parser('discrepancy', parents=[common],
                                      help='Global discrepancy of a set of points')
    discrepancy.add_argument('curve')
    discrepancy.add_argument('points_file', help="One 'x,y' or 'O' per line; '#' starts a comment")

    sweep = commands.add_parser('torsion-sweep', parents=[common],
                                help='Discrepancy lower bounds for E[m]')
    sweep.add_argument('curve')
    sweep.add_argument('m', type=int, nargs='*', help='Torsion levels, each at least 2')

    bounds = commands.add_parser('bounds', parents=[common],
                                 help='Torsion and small-height bounds')
    bounds.add_argument('--regime', required=True, choices=('tr', 'cyc', 'padic', 'padic-ef'))
    bounds.add_argument('--h-j', required=True, help='Height of j, e.g. 0, 2 or 7/3')
    bounds.add_argument('--p', type=int, default=None, help='Odd prime (p-adic regimes)')
    bounds.add_argument('--nu', type=int, default=0, help='ord_p(j^-1) when positive, else 0')
    bounds.add_argument('--e', type=int, default=1, help='Ramification index (padic-ef)')
    bounds.add_argument('--f', type=int, default=1, help='Residue degree (padic-ef)')

    verify = commands.add_parser('verify', parents=[common], help='Run a verification suite')
    verify.add_argument('suite', choices=SUITES)
    verify.add_argument('--junit', default=None, help='Write a JUnit-style XML summary here')

    reports = commands.add_parser('reports', parents=[common],
                                  help='List the archived JSON reports')
    reports.add_argument('--kind', default=None,
                         help="Only reports of this kind, e.g. 'discrepancy' or 'torsion_sweep'")

    return parser.parse_args(argv)


def build_config(args):
    manager = ConfigManager(args.config)
    manager.update_config({
        'precision_bits': args.precision_bits,
        'tail_eps': args.tail_eps,
        'seed': args.seed,
        'output_format': args.output_format,
        'save_dir': Path(args.save_dir) if args.save_dir else None,
    })
    return manager.to_run_config()


def parse_height_value(text: str):
    """Rational when possible so the bounds stay exact"""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"❌ ERROR: Bad value for --h-j: {text!r}")


def load_points(path, curve):
    """Points of a file: one per line, blank lines and '#' comments ignored"""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"❌ ERROR: Points file not found: {path}")
    points = []
    for line in path.read_text().splitlines():
        line = line.split('#', 1)[0].strip()
        if line:
            points.append(parse_point(line, curve))
    logger.info("📁 Read %d points from %s", len(points), path)
    return points


def cmd_height(args, config) -> HeightReport:
    C = parse_curve(args.curve)
    P = parse_point(args.point, C)
    if P.is_identity:
        return HeightReport(curve=C.label, point=str(O), hhat=0.0, torsion_order=1)
    hhat = canonical_height(C, P, config.precision_bits)
    places = [LocalHeightEntry(**row) for row in place_breakdown(C, P, config.precision_bits)]
    oracle = canonical_height_oracle(C, P, config.oracle_kmax)
    tolerance = max(2 * oracle.gap, ORACLE_SCALE * 4.0 ** -oracle.k_max)
    summary = OracleSummary(value=oracle.value, gap=oracle.gap, k_max=oracle.k_max,
                            agrees=abs(oracle.value - hhat) <= tolerance)
    if not summary.agrees:
        logger.warning("⚠️ Doubling estimate %.8f is far from hhat %.8f", oracle.value, hhat)
    return HeightReport(curve=C.label, point=str(P), hhat=hhat,
                        torsion_order=torsion_order(C, P), places=places, oracle=summary)


def cmd_local_height(args, config) -> HeightReport:
    C = parse_curve(args.curve)
    P = parse_point(args.point, C)
    if P.is_identity:
        raise ParseError("❌ ERROR: Local heights are singular at O")
    if args.place == ARCH:
        L = curve_lattice(C, config.precision_bits)
        entry = LocalHeightEntry(place=ARCH,
                                 value=float(neron_lambda_arch(elliptic_log(C, L, P), L)))
    else:
        try:
            p = int(args.place)
        except ValueError:
            raise ParseError(f"❌ ERROR: Place must be 'inf' or a prime, got {args.place!r}")
        value = neron_lambda_nonarch(C, reduction_type(C, p), P)
        entry = LocalHeightEntry(place=str(p), value=value.to_real(), exact=value.as_json())
    return HeightReport(curve=C.label, point=str(P), hhat=canonical_height(C, P, config.precision_bits),
                        places=[entry])


def cmd_discrepancy(args, config):
    C = parse_curve(args.curve)
    Z = load_points(args.points_file, C)
    report = global_discrepancy(C, Z, config)
    status = "✅" if report.slack >= -report.error_budget else "❌"
    logger.info("%s Slack %.6g (D = %.6g, rhs = %.6g)", status, report.slack,
                report.D_global, report.rhs_main)
    return report


def cmd_torsion_sweep(args, config) -> SweepReport:
    C = parse_curve(args.curve)
    rows = []
    for m in sorted(set(args.m)):
        logger.info("🔍 E[%d]", m)
        rows.append(row_from_report(m, torsion_orbit_global(C, m, config)))
    statistics = sweep_statistics(rows)
    if not statistics['decreasing']:
        raise VerificationFailed(f"❌ ERROR: D_arch of E[m] does not decrease with m on {C.label}")
    if statistics['decay_exponent'] is not None:
        logger.info("✅ D_arch decays like m^%.3f", statistics['decay_exponent'])
    return SweepReport(curve=C.label, rows=rows, statistics=statistics)


def cmd_bounds(args, config):
    return bounds_report(args.regime, parse_height_value(args.h_j), args.p, args.nu,
                         args.e, args.f)


def cmd_verify(args, config):
    logger.info("🔍 Running %s checks", args.suite)
    result = run_suite(args.suite, config)
    if args.junit:
        write_junit(result, Path(args.junit))
    return result


def cmd_reports(args, config):
    return ReportStore(config.save_dir).listing(args.kind)


COMMANDS = {
    'height': cmd_height,
    'local-height': cmd_local_height,
    'discrepancy': cmd_discrepancy,
    'torsion-sweep': cmd_torsion_sweep,
    'bounds': cmd_bounds,
    'verify': cmd_verify,
    'reports': cmd_reports,
}


def main(argv=None) -> int:
    # Parse arguments
    args = parse_arguments(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(message)s', stream=sys.stderr)
    start = time.perf_counter()
    try:
        config = build_config(args)
        report = COMMANDS[args.command](args, config)

        if isinstance(report, ReportModel):
            print(render(report, config.output_format))
            if config.save_dir is not None:
                ReportStore(config.save_dir).save(args.command.replace('-', '_'), report)
        else:
            print(report.model_dump_json(indent=2))

        if args.command == 'verify':
            if not report.passed:
                logger.error("❌ %d of %d %s checks failed", report.failures,
                             len(report.checks), args.suite)
                return 1
            logger.info("✅ All %d %s checks passed", len(report.checks), args.suite)
        return 0
    except HeightDiscrepancyError as e:
        message = str(e)
        print(message if message.startswith("❌") else f"❌ ERROR: {message}", file=sys.stderr)
        return e.exit_code
    finally:
        logger.debug("Finished %s in %.2fs", args.command, time.perf_counter() - start)


if __name__ == "__main__":
    sys.exit(main())

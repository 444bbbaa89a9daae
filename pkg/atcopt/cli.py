"""cli.py -- command-line entry point `atc`

    atc study --config study.toml [--out DIR] [--kind convergence|continuum|norms]
    atc check [--config study.toml] [--seed N]
    atc mesh --config study.toml --dump FILE [--R-core R]

Exit codes: 0 success, 1 failed check or other error, 2 configuration
error, 3 solver failure.

- 06/11/26 (ams): Created.
- 07/10/26 (ams): Add check subcommand.
- 08/03/26 (ams): Log level from ATC_LOG_LEVEL.
"""

import argparse
import logging
import sys

from . import (
    checks,
    config,
    environ,
    exception,
    harness,
    linalg,
    mesh,
)

logger = logging.getLogger(__name__)

# default log level per subcommand
k_default_levels = {"study": "INFO", "check": "WARNING", "mesh": "WARNING"}


################################################################
# subcommands
################################################################

def run_study(args):
    cfg = config.load_config(args.config)
    driver = harness.study_drivers[args.kind]
    result = driver(cfg, environ.resolve_output_dir(args.out))
    if args.kind == "norms":
        return 0
    (rows, slopes) = result
    for (name, (slope, _, r2)) in slopes.items():
        print("slope {} {:.4f} R2 {:.4f}".format(name, slope, r2))
    failed = [row["R_core"] for row in rows if row["status"].value != "ok"]
    if failed:
        logger.warning("study: failed ladder entries %s", failed)
    return 0


def run_check(args):
    cfg = config.load_config(args.config) if args.config else config.StudyConfig()
    linalg.max_direct_dofs = cfg.solver.direct_limit
    results = checks.run_checks(cfg, seed=args.seed)
    for result in results:
        print(result.line())
    failed = [result.name for result in results if not result.passed]
    if failed:
        print("{:d} of {:d} checks failed".format(len(failed), len(results)))
        return 1
    print("all {:d} checks passed".format(len(results)))
    return 0


def run_mesh(args):
    cfg = config.load_config(args.config)
    R_core = args.R_core if args.R_core is not None else cfg.geometry.ladder[0]
    try:
        geom = cfg.domains(R_core)
    except exception.GeometryError as err:
        raise exception.ConfigError("--R-core {}: {}".format(R_core, err)) from err
    fe_mesh = mesh.build_mesh(geom, cfg.mesh.grading_exponent, cfg.mesh.min_angle)
    with open(args.dump, "w", encoding="utf-8") as stream:
        fe_mesh.dump(stream)
    print("{} nodes {:d} triangles {:d} reduction {:.2f} min angle {:.2f}".format(
        geom.descriptor(), len(fe_mesh.nodes), len(fe_mesh.triangles),
        mesh.reduction_ratio(fe_mesh), fe_mesh.min_angle,
    ))
    return 0


################################################################
# parser
################################################################

def build_parser():
    parser = argparse.ArgumentParser(
        prog="atc", description="Optimization-based atomistic-to-continuum coupling studies.",
    )
    parser.add_argument("--log-level", default=None, help="logging level name (default per command)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    study = subparsers.add_parser("study", help="run a convergence study")
    study.add_argument("--config", required=True, help="TOML study configuration")
    study.add_argument("--out", default=None, help="output directory")
    study.add_argument("--kind", choices=sorted(harness.study_drivers), default="convergence")
    study.set_defaults(handler=run_study)

    check = subparsers.add_parser("check", help="run invariant and finite-difference checks")
    check.add_argument("--config", default=None, help="TOML configuration for potential and solver")
    check.add_argument("--seed", type=int, default=0)
    check.set_defaults(handler=run_check)

    dump = subparsers.add_parser("mesh", help="build and dump the continuum mesh")
    dump.add_argument("--config", required=True, help="TOML study configuration")
    dump.add_argument("--dump", required=True, help="output listing file")
    dump.add_argument("--R-core", dest="R_core", type=int, default=None, help="ladder entry (default first)")
    dump.set_defaults(handler=run_mesh)
    return parser


def configure_logging(command, level=None):
    """Configure the root handler from --log-level, ATC_LOG_LEVEL or the command default."""
    name = (level or environ.log_level or k_default_levels[command]).upper()
    numeric = getattr(logging, name, None)
    if not isinstance(numeric, int):
        raise exception.ConfigError("unknown log level {!r}".format(name))
    logging.basicConfig(level=numeric, format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.command, args.log_level)
        return args.handler(args)
    except exception.AtcError as err:
        print("ERROR: {}".format(err), file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())

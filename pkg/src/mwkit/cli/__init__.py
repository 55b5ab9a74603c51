"""Command line entry point: ``mwkit <command> ...``.

Every command prints a JSON report on stdout.  Exit codes: 0 success or
pass, 1 refusal or failed verdict, 2 input error, 3 resource exhaustion.
"""

from __future__ import annotations

import argparse
import logging
import sys

from ..errors import (ConfigError, DimensionMismatch, GraphMismatch, InvalidPath,
                      MaxIterationsExceeded, MWError, PrefixTooShort, ValidationError)
from . import commands
from .formats import format_report, write_text


def _common(p, resolution=True):
    if resolution:
        p.add_argument("--resolution", help="grid cell side, e.g. 3^-6 (default: from config)")
    p.add_argument("--report", help="also write the report to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mwkit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a system description")
    p.add_argument("config")
    _common(p, resolution=False)
    p.set_defaults(fn=commands.cmd_validate)

    p = sub.add_parser("attractor", help="compute the invariant list as a box covering")
    p.add_argument("config")
    p.add_argument("--out", help="write the covering as a .boxes file")
    p.add_argument("--csv", help="write a chaos-game point cloud")
    p.add_argument("--points", type=int, default=10000)
    p.add_argument("--burn-in", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iterations", type=int, default=200)
    _common(p)
    p.set_defaults(fn=commands.cmd_attractor)

    p = sub.add_parser("render", help="rasterise the attractor to a binary PPM")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--mode", choices=("cover", "chaos"), default="cover")
    p.add_argument("--points", type=int, default=100000)
    p.add_argument("--burn-in", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    p.set_defaults(fn=commands.cmd_render)

    p = sub.add_parser("classify", help="test whether sibling images are disjoint")
    p.add_argument("config")
    p.add_argument("--max-refinements", type=int, default=2)
    _common(p)
    p.set_defaults(fn=commands.cmd_classify)

    p = sub.add_parser("code", help="evaluate the coding map on an eventually periodic path")
    p.add_argument("config")
    p.add_argument("--prefix", default="", help="edge ids, space separated")
    p.add_argument("--cycle", required=True, help="edge ids of the repeated cycle")
    p.add_argument("--depth", type=int, default=40)
    p.add_argument("--eps", type=float, default=None)
    _common(p)
    p.set_defaults(fn=commands.cmd_code)

    p = sub.add_parser("decide-iso", help="decide isomorphism for two systems on one graph")
    p.add_argument("config1")
    p.add_argument("config2")
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=6, help="anchor address depth")
    p.add_argument("--out", help="write the certificate here on success")
    _common(p)
    p.set_defaults(fn=commands.cmd_decide_iso)

    p = sub.add_parser("verify-cert", help="check a conjugacy certificate")
    p.add_argument("config1")
    p.add_argument("config2")
    p.add_argument("cert")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=6, help="anchor depth for address maps")
    _common(p)
    p.set_defaults(fn=commands.cmd_verify_cert)

    p = sub.add_parser("witness", help="build an aperiodicity witness")
    p.add_argument("config")
    p.add_argument("--n0", type=int, default=1)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--a0", default="1",
                   help="expression in x, y (or x0, x1, ...), or @file with one value per cell")
    _common(p)
    p.set_defaults(fn=commands.cmd_witness)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        code, report = commands.timed(args.fn, args)
    except MaxIterationsExceeded as err:
        code, report = commands.EXHAUSTED, {"command": args.command, "error": str(err)}
    except (ConfigError, ValidationError, GraphMismatch, InvalidPath, DimensionMismatch,
            PrefixTooShort, OSError, ValueError) as err:
        report = {"command": args.command, "error": str(err), "kind": type(err).__name__}
        if isinstance(err, ValidationError):
            report["issues"] = [{"kind": k, "subject": s} for k, s in err.issues]
        code = commands.INPUT_ERROR
    except MWError as err:
        report = {"command": args.command, "error": str(err), "kind": type(err).__name__}
        code = commands.FAIL
    text = format_report(report)
    sys.stdout.write(text)
    if getattr(args, "report", None):
        write_text(args.report, text)
    return code


def run() -> None:
    sys.exit(main())


__all__ = ["build_parser", "main", "run"]

"""Command line interface: ``graphmcf run | compare | render``.

Exit codes: 0 every check passed, 1 at least one check failed, 2 usage
error (bad arguments, unknown scenario, missing run directory), 3 the
configuration failed validation.  Failing checks are printed to stdout as
NDJSON records.  ``MCF_THREADS`` caps the number of sub-runs solved in
parallel.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import io
from .pipeline import (
    compare_runs,
    load_run,
    parse_checks,
    render_run,
    run_scenario,
    thread_budget,
    write_run,
)
from .scenarios import ConfigError, load_config

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CONFIG = 0, 1, 2, 3

log = logging.getLogger("graphmcf")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _times(text: str) -> list[float]:
    try:
        out = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated times, got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("no times given")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="graphmcf", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="solve a scenario and evaluate its checks")
    r.add_argument("--scenario", required=True, help="built-in name or path to a JSON configuration")
    r.add_argument("--h", type=float, help="graph grid spacing")
    r.add_argument("--T", type=float, help="final time")
    r.add_argument("--out", help="run directory to write (nothing is written without it)")
    r.add_argument("--checks", default=None,
                   help="'all', 'none' or a comma-separated list (default: the configuration's list)")

    c = sub.add_parser("compare", help="boundary distances between two run directories")
    c.add_argument("--runA", required=True)
    c.add_argument("--runB", required=True)

    s = sub.add_parser("render", help="SVG contour plots from a run directory")
    s.add_argument("--run", required=True)
    s.add_argument("--times", required=True, type=_times, help="comma-separated times, e.g. 0,0.1,0.2")
    s.add_argument("--out", help="output directory (default: <run>/svg)")
    return p


def _report(checks, stream=sys.stdout) -> int:
    failed = [c for c in checks if not c.passed]
    for c in failed:
        stream.write(json.dumps(io.check_record(c), sort_keys=True) + "\n")
    for c in checks:
        log.info("%s %s worst=%s threshold=%s", "PASS" if c.passed else "FAIL", c.name,
                 c.worst_value, c.threshold)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_run(args) -> int:
    try:
        threads = thread_budget()
    except ValueError as e:
        print(f"graphmcf: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.scenario, h=args.h, T=args.T)
    except KeyError as e:
        print(f"graphmcf: {e.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as e:
        print(f"graphmcf: invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        checks = parse_checks(args.checks if args.checks is not None else cfg.checks)
    except ValueError as e:
        print(f"graphmcf: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = run_scenario(cfg, list(checks) or "none", threads=threads)
    except ConfigError as e:
        print(f"graphmcf: invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        write_run(result, args.out)
        log.info("wrote %s", args.out)
    return _report(result.checks)


def cmd_compare(args) -> int:
    try:
        cfg_a, ta = load_run(args.runA)
        _, tb = load_run(args.runB)
    except (FileNotFoundError, ValueError) as e:
        print(f"graphmcf: {e}", file=sys.stderr)
        return EXIT_USAGE
    checks = compare_runs(ta, tb, cfg_a.get("name", ""))
    if not checks:
        print("graphmcf: the runs share no trajectories", file=sys.stderr)
        return EXIT_USAGE
    return _report(checks)


def cmd_render(args) -> int:
    try:
        cfg, trajs = load_run(args.run)
    except (FileNotFoundError, ValueError) as e:
        print(f"graphmcf: {e}", file=sys.stderr)
        return EXIT_USAGE
    out = args.out or f"{args.run}/svg"
    for p in render_run(trajs, out, args.times, cfg.get("L")):
        print(p)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return {"run": cmd_run, "compare": cmd_compare, "render": cmd_render}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())

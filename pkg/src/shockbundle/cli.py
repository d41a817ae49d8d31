"""``shockbundle <command> --scenario PATH [--out DIR] [--resolution N] [--times t1,t2,...]``."""

import argparse
import sys

from .commands import COMMANDS, EXIT_VALIDATION, run_command

__all__ = ["main", "build_parser"]


class _Parser(argparse.ArgumentParser):
    # usage errors are validation failures; exit status 2 is kept for numerical ones
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _times(text):
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad time list {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty time list")
    return vals


def build_parser():
    p = _Parser(prog="shockbundle", description="Shock formation and decay for scalar conservation laws.")
    p.add_argument("command", choices=list(COMMANDS))
    p.add_argument("--scenario", required=True, help="scenario YAML document")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--resolution", type=int, help="grid cells per axis, overrides the scenario")
    p.add_argument("--times", type=_times, help="comma-separated output times")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    status = run_command(args.command, args.scenario, args.out, args.resolution, args.times)
    with open(f"{args.out}/report.txt") as fh:
        head = [line for line in fh.read().splitlines() if line.startswith(("validation error", "numerical failure"))]
    for line in head:
        print(line, file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())

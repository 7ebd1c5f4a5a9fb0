"""Command line entry point ``quasiboot``.

Exit status: 0 on success, 2 on a configuration error, 3 when the budget
guard refuses a run (repeat with ``--force``).
"""
import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .harness import (
    DEFAULT_LEVELS,
    DEFAULT_MAX_WORK,
    KINDS,
    BudgetExceeded,
    ConfigError,
    emit,
    load_config,
    run,
)
from .tables import COVERAGE_COLUMNS, CdfDataset, CoverageTable

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3

_EPILOG = f"""\
config file defaults: n=50 p=5 R=7000 B=1000 N=15000 K=4 seed=0 threads=1
  levels={",".join(str(x) for x in DEFAULT_LEVELS)}
  scheme=bernmix(b=0.276) design=gaussian mode=oracle y_model=auto
  max_work={DEFAULT_MAX_WORK:g} (budget ceiling on R*B*n*p)
exit status: 0 ok, 2 config error, 3 budget guard
"""


def build_parser():
    ap = argparse.ArgumentParser(
        prog="quasiboot",
        description="Weighted bootstrap and quasi-Gaussian Monte Carlo experiments.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("command", choices=KINDS, help="experiment kind")
    ap.add_argument("--config", required=True, help="flat key = value experiment file")
    ap.add_argument("--seed", type=int, default=None, help="master seed (default: from config, else 0)")
    ap.add_argument("--threads", default=None, help="worker threads or 'auto' (default: from config, else 1)")
    ap.add_argument("--out", default=None, help="output path; .json selects JSON, anything else CSV (default: stdout)")
    ap.add_argument("--reps", type=int, default=None, help="Monte Carlo repetitions R (default: from config, else 7000)")
    ap.add_argument("--boot", type=int, default=None, help="bootstrap replicates B (default: from config, else 1000)")
    ap.add_argument("--force", action="store_true", help="run even above the budget ceiling (default: off)")
    return ap


def _format(path):
    return "json" if Path(path).suffix.lower() == ".json" else "csv"


def _to_stdout(result):
    if isinstance(result, CoverageTable):
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(COVERAGE_COLUMNS)
        for r in result.rows:
            w.writerow([getattr(r, c) for c in COVERAGE_COLUMNS])
        return buf.getvalue()
    if isinstance(result, CdfDataset):
        return json.dumps(result.summary(), indent=2) + "\n"
    return json.dumps(result, indent=2) + "\n"


def main(argv=None):
    args = build_parser().parse_args(argv)
    threads = args.threads
    if threads is not None and threads != "auto":
        try:
            threads = int(threads)
        except ValueError:
            print(f"error: --threads must be an integer or auto, got {threads!r}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        config = load_config(args.config, seed=args.seed, threads=threads, R=args.reps, B=args.boot, out=args.out)
        if config.kind != args.command:
            raise ConfigError(f"config describes kind={config.kind} but the command is {args.command}")
        result = run(config, force=args.force)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceeded as exc:
        print(f"budget guard: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    if config.out:
        emit(result, _format(config.out), config.out)
    else:
        sys.stdout.write(_to_stdout(result))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

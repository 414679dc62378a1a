"""Command line: ``python -m nmbloch {run,preset,validate}``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 complete-positivity violation when the scenario sets ``strict_cp``.
"""

import argparse
import sys

from .config import load
from .exceptions import ConfigError, NMBlochError
from .presets import PRESETS, figure_preset
from .runner import CellError, OUTPUT_ENV, run

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CP = 0, 1, 2, 3


def _parser():
    ap = argparse.ArgumentParser(prog="nmbloch", description="Non-Markovian optical Bloch equations.",
                                 epilog=f"${OUTPUT_ENV} overrides the output directory of a config.")
    sub = ap.add_subparsers(dest="verb", required=True)
    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("config")
    r.add_argument("--out", help="output directory")
    r.add_argument("--workers", type=int)
    p = sub.add_parser("preset", help="reproduce a figure")
    p.add_argument("name", choices=sorted(PRESETS))
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int)
    v = sub.add_parser("validate", help="check a scenario file without running it")
    v.add_argument("config")
    return ap


def _execute(cfg, out, workers):
    manifest = run(cfg, out, workers)
    for w in manifest.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {len(manifest.files)} files to {manifest.output_dir}")
    if cfg.strict_cp and manifest.cp_violations:
        for c in manifest.cp_violations:
            print(f"CP violation: {c['overrides'] or 'scenario'}: {c['cp_verdict']}", file=sys.stderr)
        return EXIT_CP
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.verb == "validate":
            cfg = load(args.config)
            print(f"{args.config}: ok ({len(cfg.cells())} cell(s))")
            return EXIT_OK
        cfg = load(args.config) if args.verb == "run" else figure_preset(args.name)
        return _execute(cfg, args.out, args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CellError as exc:
        code = EXIT_CONFIG if isinstance(exc.cause, ConfigError) else EXIT_NUMERIC
        print(f"error: {exc}", file=sys.stderr)
        return code
    except NMBlochError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point: ``ewspec <command> ...``."""
from __future__ import annotations

import argparse
import sys

from .config import load_config
from .errors import ConfigError, CutoffError, SamplingError, SingularConfigurationError, DeformationError

ENGINE_ERRORS = (ConfigError, CutoffError, SamplingError, SingularConfigurationError, DeformationError,
                 ValueError, OSError)


def _parser():
    p = argparse.ArgumentParser(prog="ewspec", description="Time-dependent spectra of JC/Rabi-type models.")
    p.add_argument("--out", help="output directory (overrides EWSPEC_OUT and the config)")
    p.add_argument("--threads", type=int, default=None, help="worker threads")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("spectrum", "filtered spectrum of a scenario"),
                       ("eigensweep", "lowest eigenvalues over a coupling sweep"),
                       ("correlation", "two-time correlation on a square grid")):
        s = sub.add_parser(name, help=text)
        s.add_argument("config", help="INI configuration file (or JSON sidecar)")
    f = sub.add_parser("figure", help="reproduce figure datasets")
    f.add_argument("ids", nargs="+", help="fig1a..fig7, fig1, fig2, fig3 or all")
    v = sub.add_parser("validate", help="run the acceptance battery")
    v.add_argument("--only", type=int, nargs="+", help="criterion numbers to run")
    v.add_argument("--mutate", action="store_true",
                   help="feed a perturbed deformed-model formula to the oracle check")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    from . import runner

    try:
        if args.command == "validate":
            from .validation import format_report, run_all

            results = run_all(args.only, mutate=args.mutate, threads=args.threads)
            print(format_report(results))
            return 0 if all(r.passed for r in results) else 1
        if args.command == "figure":
            from .figures import reproduce_figures

            out = runner.output_directory(args.out)
            for fig_id, paths in reproduce_figures(args.ids, out, args.threads).items():
                for path in paths:
                    print(f"{fig_id}: {path}")
            return 0
        cfg = load_config(args.config)
        if args.command == "spectrum":
            paths = runner.run_scenario(cfg, args.out)
        elif args.command == "eigensweep":
            paths = runner.run_eigensweep(cfg, args.out, args.threads)
        else:
            paths = runner.run_correlation(cfg, args.out)
        print("\n".join(paths))
        return 0
    except ENGINE_ERRORS as exc:
        context = f"{args.command} {getattr(args, 'config', '')}".strip()
        print(f"ewspec: error in {context}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

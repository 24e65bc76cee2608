"""Command-line front end: ``cqwave <command> [--config PATH] [overrides]``.

Exit codes: 0 on success, 2 on configuration errors, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import experiments
from .config import ConfigError, Experiment, ExperimentConfig, load_config
from .genfun import InfeasibleDesignError
from .stepper import NumericalFailure

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_CONFIG", "EXIT_NUMERICAL"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

_RUNNERS = {
    Experiment.CONVERGENCE_DISK: experiments.run_convergence_disk,
    Experiment.LSHAPE_FOCUS: experiments.run_lshape_focus,
    Experiment.CQ_SELFTEST: experiments.run_cq_selftest,
    Experiment.DESIGN_TTR: experiments.run_design_ttr,
    Experiment.STABILITY_REGION: experiments.run_stability_region,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cqwave", description="Coupled FEM/BEM wave experiments.")
    p.add_argument("command", choices=[e.value for e in Experiment])
    p.add_argument("--config", help="INI-style configuration file")
    p.add_argument("--method", help="bdf2, tr or ttr")
    p.add_argument("--levels", help="comma separated refinement levels")
    p.add_argument("--T", type=float, dest="T", help="final time")
    p.add_argument("--out", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _resolve(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    cfg.experiment = Experiment(args.command)
    if args.method is not None:
        cfg.method = args.method
    if args.levels is not None:
        try:
            cfg.levels = [int(x) for x in args.levels.replace(",", " ").split()]
        except ValueError:
            raise ConfigError(f"--levels: not an integer list: {args.levels!r}") from None
    if args.T is not None:
        if cfg.experiment is Experiment.LSHAPE_FOCUS:
            cfg.lshape_T = args.T
        else:
            cfg.T = args.T
    if args.out is not None:
        cfg.output_dir = args.out
    return cfg.validate()


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        cfg = _resolve(args)
        if cfg.experiment is Experiment.CONVERGENCE_DISK and len(cfg.levels) < 2:
            raise ConfigError("convergence-disk needs at least two levels")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if cfg.experiment is Experiment.CQ_SELFTEST:
            rows = experiments.run_cq_selftest(cfg, echo=True)
            return EXIT_OK if all(r[-1] for r in rows) else EXIT_NUMERICAL
        _RUNNERS[cfg.experiment](cfg)
    except (NumericalFailure, ArithmeticError, FloatingPointError, InfeasibleDesignError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

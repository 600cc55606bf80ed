"""
Command Line Interface
======================

    python -m pra_radar optimize    --config configs/paper_sec6.json --out results
    python -m pra_radar beampattern --config ... [--design results/design.csv]
    python -m pra_radar sweep-snr   --config ...
    python -m pra_radar compare     --config ...
    python -m pra_radar verify      [--config configs/verify_small.json]

Exit codes: 0 success, 1 a verification check failed, 2 invalid input.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from . import config
from .artifacts import (
    BEAMPATTERN_FILE,
    COMPARE_FILE,
    DESIGN_FILE,
    SWEEP_FILE,
    TRACE_FILE,
    VERIFY_FILE,
    read_design,
    write_design,
    write_records,
)
from .benchmarks import BenchmarkSuite
from .experiments import (
    PreparedExperiment,
    apply_overrides,
    beampattern_rows,
    compare_rows,
    prepare,
    sweep_rows,
    trace_rows,
)
from .numerics import ConvergenceError
from .optimizer import run_ao
from .runner import runner_instance
from .schemas import ExperimentConfig
from .verification import run_verification

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2
# reported like a failed check; the contract only has 0/1/2
EXIT_NUMERICAL_FAILURE = EXIT_CHECK_FAILED


def cmd_optimize(prepared: PreparedExperiment, out_dir: Path) -> int:
    result = run_ao(prepared.scene, prepared.config, prepared.experiment.ao)
    write_records(out_dir / TRACE_FILE, trace_rows(prepared, result))
    write_design(out_dir / DESIGN_FILE, result.design)
    return EXIT_OK


def cmd_beampattern(prepared: PreparedExperiment, out_dir: Path, design_path: Optional[Path] = None) -> int:
    """Pattern of a stored design, or of a fresh AO design when none is given"""
    if design_path is not None:
        design = read_design(design_path)
        if design.n_tx != prepared.config.n_tx or design.n_rx != prepared.config.n_rx:
            raise ValueError(
                f"design is {design.n_rx}x{design.n_tx} (rx x tx), config is {prepared.config.n_rx}x{prepared.config.n_tx}"
            )
        design.check_power(prepared.config.power_w)
    else:
        design = run_ao(prepared.scene, prepared.config, prepared.experiment.ao).design
    write_records(out_dir / BEAMPATTERN_FILE, beampattern_rows(prepared, design.r_x, design.xi))
    return EXIT_OK


def _solve_schemes(prepared: PreparedExperiment):
    experiment = prepared.experiment
    suite = BenchmarkSuite(prepared.scene, prepared.config, experiment.ao, experiment.benchmarks)
    return runner_instance.run_schemes(suite, experiment.schemes)


def cmd_sweep_snr(prepared: PreparedExperiment, out_dir: Path) -> int:
    # designs do not depend on σ_s²: optimize once, evaluate per SNR point
    results = _solve_schemes(prepared)
    write_records(out_dir / SWEEP_FILE, sweep_rows(prepared, results, prepared.experiment.schemes))
    return EXIT_OK


def cmd_compare(prepared: PreparedExperiment, out_dir: Path) -> int:
    results = _solve_schemes(prepared)
    write_records(out_dir / COMPARE_FILE, compare_rows(results, prepared.experiment.schemes))
    return EXIT_OK


def cmd_verify(prepared: PreparedExperiment, out_dir: Path, corrupt_a1: float = 1.0) -> int:
    checks = run_verification(prepared, corrupt_a1=corrupt_a1)
    write_records(out_dir / VERIFY_FILE, checks)

    width = max(len(c.check) for c in checks)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status}  {c.check:<{width}}  measured={c.measured:.6g}  expected={c.expected:.6g}  tol={c.tolerance:.3g}")
    failed = [c.check for c in checks if not c.passed]
    if failed:
        print(f"{len(failed)} of {len(checks)} check(s) failed: {', '.join(failed)}")
        return EXIT_CHECK_FAILED
    print(f"all {len(checks)} checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pra_radar",
        description="Bayesian CRB and transceiver optimization for PRA-based MIMO radar",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--config", type=Path, default=None, help="experiment config (JSON)")
        sub.add_argument("--seed", type=int, default=None, help="override ao.rng_seed")
        sub.add_argument("--out", type=Path, default=None, help="output directory for CSV files")
        sub.add_argument("--restarts", type=int, default=None, help="override ao.n_restarts")

    add_common(subparsers.add_parser("optimize", help="run the AO and write trace.csv and design.csv"))
    beam = subparsers.add_parser("beampattern", help="write beampattern.csv")
    add_common(beam)
    beam.add_argument("--design", type=Path, default=None, help="design.csv from a previous optimize run")
    add_common(subparsers.add_parser("sweep-snr", help="write bcrb_vs_snr.csv for all schemes"))
    add_common(subparsers.add_parser("compare", help="write compare.csv at the configured noise power"))
    add_common(subparsers.add_parser("verify", help="run the oracle cross-checks"))
    return parser


def _load(args: argparse.Namespace) -> ExperimentConfig:
    default = config.VERIFY_CONFIG if args.command == "verify" else config.DEFAULT_CONFIG
    path = args.config if args.config is not None else default
    experiment = ExperimentConfig.from_file(path)
    return apply_overrides(experiment, seed=args.seed, restarts=args.restarts, output_dir=args.out)


def main(argv: Optional[List[str]] = None, corrupt_a1: float = 1.0) -> int:
    logging.basicConfig(level=config.LOG_LEVEL, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)

    try:
        experiment = _load(args)
        out_dir = experiment.output_dir or config.OUTPUT_DIR
        prepared = prepare(experiment)

        if args.command == "optimize":
            return cmd_optimize(prepared, out_dir)
        if args.command == "beampattern":
            return cmd_beampattern(prepared, out_dir, args.design)
        if args.command == "sweep-snr":
            return cmd_sweep_snr(prepared, out_dir)
        if args.command == "compare":
            return cmd_compare(prepared, out_dir)
        return cmd_verify(prepared, out_dir, corrupt_a1=corrupt_a1)

    except ValidationError as e:
        for error in e.errors():
            location = ".".join(str(part) for part in error["loc"])
            logger.error(f"invalid config field {location}: {error['msg']}")
        return EXIT_BAD_INPUT
    except json.JSONDecodeError as e:
        logger.error(f"config is not valid JSON: {e}")
        return EXIT_BAD_INPUT
    except (ValueError, OSError) as e:
        logger.error(str(e))
        return EXIT_BAD_INPUT
    except ConvergenceError as e:
        logger.error(f"numerical kernel failed: {e}")
        return EXIT_NUMERICAL_FAILURE


if __name__ == "__main__":
    sys.exit(main())

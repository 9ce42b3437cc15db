"""
Command-line entry point: qbm-sim <experiment> --config <file> [--seed N] [--out DIR] [--preset desk|paper]
"""
import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from src import __version__
from src.config import get_settings
from src.errors import ConfigError, NumericalError, QbmSimError, UnitError
from src.models.experiment import EXPERIMENTS, load_config
from src.services.cache_service import CacheService
from src.services.experiment_runner import ExperimentRunner

logger = logging.getLogger("qbm_sim")

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbm-sim",
        description="Simulate Kerr parametric oscillator and OPO networks and write figure data",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS, help="Experiment to run")
    parser.add_argument("--config", help="Flat key = value configuration file")
    parser.add_argument("--seed", type=int, help="Master seed (overrides the config file)")
    parser.add_argument("--out", help="Output directory (overrides the config file)")
    parser.add_argument("--preset", choices=("desk", "paper"), default="desk", help="Parameter preset")
    parser.add_argument("--log-level", help="Logging level (default from QBM_LOG_LEVEL)")
    parser.add_argument("--workers", type=int, help="Worker threads for trajectories and instances")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    updates = {}
    if args.log_level:
        updates["log_level"] = args.log_level.upper()
    if args.workers:
        updates["max_workers"] = args.workers
    if updates:
        settings = settings.model_copy(update=updates)

    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logging.captureWarnings(True)

    try:
        config = load_config(
            args.experiment,
            args.config,
            args.preset,
            overrides={"seed": args.seed, "output_dir": args.out},
            defaults={"seed": settings.master_seed, "output_dir": settings.output_dir},
        )
    except (ConfigError, ValidationError) as exc:
        logger.error("configuration error: %s", exc)
        print(f"qbm-sim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    logger.info("=" * 60)
    logger.info("qbm-sim %s", __version__)
    logger.info("Experiment: %s (preset %s)", config.experiment, config.preset)
    logger.info("Seed: %d", config.seed)
    logger.info("Output: %s/%s", config.output_dir, config.experiment)
    logger.info("Solvers: qutip %s, solve_ivp %s, rtol=%.0e atol=%.0e, workers=%d",
                settings.quantum_method, settings.integrator, settings.rtol, settings.atol, settings.max_workers)
    logger.info("=" * 60)

    runner = ExperimentRunner(settings, CacheService())
    try:
        runner.run(config)
    except NumericalError as exc:
        print(f"qbm-sim: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, UnitError, ValueError) as exc:
        print(f"qbm-sim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QbmSimError as exc:
        print(f"qbm-sim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    finally:
        runner.cache.clear()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

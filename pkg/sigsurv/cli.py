import argparse
import logging
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

from sigsurv import __version__
from sigsurv.common.config.run_config import RunConfig, load_run_config
from sigsurv.common.config.settings import settings
from sigsurv.common.exceptions import ConfigError, SigSurvError, StageError
from sigsurv.common.utils.load_yaml import load_yaml
from sigsurv.pipelines.orchestration import stages
from sigsurv.pipelines.orchestration.pipeline import run_baseline, run_pipeline
from sigsurv.pipelines.synthetic.generator import SynthConfig, generate_cohort, oracle_cindex
from sigsurv.pipelines.synthetic.load import write_synthetic

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, default=None, help="YAML run configuration.")
    parent.add_argument("--seed", type=int, default=None, help="Master seed; overrides the configuration.")
    parent.add_argument("--out-dir", type=Path, default=None, help="Run directory; overrides the configuration.")
    parent.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        default=None,
        help="Overrides SIGSURV_LOG_LEVEL.",
    )
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigsurv",
        description="Survival prediction from timestamped report embeddings with path signatures and Cox-LASSO.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _common_options()
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", parents=[common], help="Write a synthetic cohort with known hazards.")
    simulate.add_argument("--n-patients", type=int, default=None)
    simulate.add_argument("--p", type=int, default=None, help="Embedding dimension.")
    simulate.add_argument("--trend-strength", type=float, default=None)
    simulate.add_argument("--censoring-rate", type=float, default=None)
    simulate.add_argument("--event-distribution", choices=["exponential", "weibull"], default=None)

    sub.add_parser("ingest", parents=[common], help="Load, mask and split the input cohort.")
    sub.add_parser("embed", parents=[common], help="SIF-embed token-mode reports.")
    sub.add_parser("compress", parents=[common], help="Fit the PCA map on the training split.")

    signify = sub.add_parser("signify", parents=[common], help="Extract truncated signature features.")
    signify.add_argument("--level", type=int, default=None, help="Signature truncation level.")
    signify.add_argument("--time-scale", choices=["unit_interval", "days"], default=None)
    signify.add_argument("--drop-time-words", action="store_true", default=None)

    sub.add_parser("fit", parents=[common], help="Cross-validate lambda and fit the Cox-LASSO model.")

    predict = sub.add_parser("predict", parents=[common], help="Write risk scores of every patient.")
    predict.add_argument("--horizons", type=float, nargs="*", default=(), help="Survival horizons in days.")

    sub.add_parser("evaluate", parents=[common], help="Score the held-out test folds.")
    sub.add_parser("run", parents=[common], help="Run every stage end to end.")

    baseline = sub.add_parser("baseline", parents=[common], help="Run a static-feature baseline.")
    baseline.add_argument("--kind", choices=["last", "mean"], required=True)
    return parser


def _configure_logging(level: str | None) -> None:
    logging.basicConfig(
        level=level or settings.logging.level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _config_path(args: argparse.Namespace) -> Path | None:
    if args.config is not None and not args.config.is_file():
        raise ConfigError(f"config file not found: {args.config}")
    return args.config


def _run_config(args: argparse.Namespace) -> RunConfig:
    overrides: dict[str, Any] = {"seed": args.seed, "out_dir": args.out_dir}
    if args.command == "signify":
        overrides.update(signature_level=args.level, time_scale=args.time_scale, drop_time_words=args.drop_time_words)
    return load_run_config(_config_path(args), **overrides)


def _simulate(args: argparse.Namespace) -> None:
    config_path = _config_path(args)
    data = load_yaml(config_path) if config_path is not None else {}
    overrides = {
        "seed": args.seed,
        "n_patients": args.n_patients,
        "p": args.p,
        "trend_strength": args.trend_strength,
        "censoring_rate": args.censoring_rate,
        "event_distribution": args.event_distribution,
    }
    try:
        cfg = SynthConfig.model_validate({**data, **{k: v for k, v in overrides.items() if v is not None}})
    except ValueError as err:
        raise ConfigError(f"invalid synthetic configuration: {err}") from err

    out_dir = args.out_dir or settings.runtime.out_dir
    cohort, truth = generate_cohort(cfg)
    paths = write_synthetic(cohort, truth, out_dir)
    logger.info(f"Oracle C-index of the true hazards: {oracle_cindex(truth, cohort.durations, cohort.events):.4f}")
    print(f"wrote {', '.join(str(p) for p in paths.values())}")


def _stage_command(stage: Callable[[stages.RunContext], Any]) -> Callable[[argparse.Namespace], None]:
    def command(args: argparse.Namespace) -> None:
        stage(stages.RunContext.open(_run_config(args)))

    return command


def _predict(args: argparse.Namespace) -> None:
    ctx = stages.RunContext.open(_run_config(args))
    stages.predict(ctx, tuple(args.horizons))


def _evaluate(args: argparse.Namespace) -> None:
    report = stages.evaluate(stages.RunContext.open(_run_config(args)))
    print(report.to_table())


def _run(args: argparse.Namespace) -> None:
    print(run_pipeline(_run_config(args)).to_table())


def _baseline(args: argparse.Namespace) -> None:
    print(run_baseline(_run_config(args), args.kind).to_table())


COMMANDS: dict[str, Callable[[argparse.Namespace], None]] = {
    "simulate": _simulate,
    "ingest": _stage_command(stages.ingest),
    "embed": _stage_command(stages.embed),
    "compress": _stage_command(stages.compress),
    "signify": _stage_command(stages.signify),
    "fit": _stage_command(stages.fit),
    "predict": _predict,
    "evaluate": _evaluate,
    "run": _run,
    "baseline": _baseline,
}


def main(argv: Sequence[str] | None = None) -> int:
    """
    Entry point of the ``sigsurv`` command.

    Returns:
        int: 0 on success, 2 on configuration errors, 3 when a stage fails.
    """
    args = build_parser().parse_args(argv)
    _configure_logging(args.log_level)

    try:
        COMMANDS[args.command](args)
    except ConfigError as err:
        logger.error(f"Configuration error: {err}")
        print(f"[config] {err}")
        return EXIT_CONFIG
    except StageError as err:
        print(str(err))
        return EXIT_CONFIG if isinstance(err.cause, ConfigError) else EXIT_STAGE
    except (SigSurvError, FileNotFoundError) as err:
        logger.critical(f"{args.command} failed: {err}")
        print(f"[{args.command}] {type(err).__name__}: {err}")
        return EXIT_STAGE
    return EXIT_OK

"""Command line entry point: ``spryfed {run,partition,cost,validate}``."""
import argparse
import csv
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

from ..ExperimentConfig import ExperimentConfig
from ..accounting.costs import cost_sweep, costs_csv_text
from ..baselines.methods import profile_for
from ..data.bias import bias_coefficients, default_concentration
from ..data.partitioning import dirichlet_partition
from ..data.synthetic import split_holdout
from ..exceptions import ArgumentError, ConfigValidationError, ProtocolError, SpryFedError
from ..fedcore.Federation import Federation
from ..fedcore.RateLimitingAsyncExecutor import RateLimitingAsyncExecutor
from ..utils.logger import get_logger, set_level
from ..validation.suites import SUITES, run_suite

logger = get_logger()

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_PROTOCOL = 3

BIAS_SCHEMA = "spryfed-bias v1"


def resolve_threads(flag: Optional[int]) -> int:
    """``--threads``, else ``SPRYFED_THREADS``, else the hardware count."""
    if flag is not None:
        threads = flag
    elif os.getenv("SPRYFED_THREADS"):
        try:
            threads = int(os.environ["SPRYFED_THREADS"])
        except ValueError:
            raise ArgumentError(f"SPRYFED_THREADS must be an integer, got {os.environ['SPRYFED_THREADS']!r}")
    else:
        threads = os.cpu_count() or 1
    if threads < 1:
        raise ArgumentError(f"threads must be at least 1, got {threads}")
    return threads


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    config = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.out is not None:
        config = config.with_output_dir(args.out)
    return config


def _output_dir(config: ExperimentConfig) -> Path:
    directory = Path(config.output.dir)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args)
    config_hash = config.config_hash()
    executor = RateLimitingAsyncExecutor(max_batch_size=resolve_threads(args.threads))
    federation = Federation(config, profile_for(config.method, config.local), executor)
    try:
        trace = federation.run()
    finally:
        federation.close()

    out = _output_dir(config)
    trace.write_csv(out / config.output.metrics_file, config_hash, config.seed)
    federation.store.save(out / config.output.checkpoint_file)
    summary = trace.summary(config_hash, config.seed)
    summary["checkpoint_fingerprint"] = federation.store.fingerprint()
    (out / config.output.summary_file).write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    logger.info("Wrote %d rounds of %s metrics to %s", len(trace), trace.method, out)
    return EXIT_OK


def cmd_partition(args: argparse.Namespace) -> int:
    config = load_config(args)
    config_hash = config.config_hash()
    train_set, _ = split_holdout(config.dataset.load(), config.dataset.test_fraction, config.seed)
    partition = dirichlet_partition(train_set, config.partition.num_clients, config.partition.alpha,
                                    config.partition.seed)
    bias = bias_coefficients(partition, default_concentration(partition))

    out = _output_dir(config)
    dump = {"config_hash": config_hash, "master_seed": config.seed, **partition.to_json_dict()}
    (out / config.output.partition_file).write_text(json.dumps(dump, sort_keys=True, indent=2) + "\n")
    with open(out / config.output.bias_file, "w", newline="") as handle:
        handle.write(f"# {BIAS_SCHEMA} config_hash={config_hash} seed={config.seed}\n")
        csv.writer(handle, lineterminator="\n").writerows(bias.to_csv_rows())
    logger.info("Partitioned %d samples over %d clients (alpha=%s, penalty=%.6g)",
                len(train_set), partition.num_clients, partition.dirichlet_alpha, bias.penalty())
    return EXIT_OK


def cmd_cost(args: argparse.Namespace) -> int:
    config = load_config(args)
    text = costs_csv_text(cost_sweep(config.cost), config.config_hash(), config.seed)
    (_output_dir(config) / config.output.costs_file).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    if args.config is not None:
        config = load_config(args)
        seed, out, report_file = config.seed, config.output.dir, config.output.report_file
    else:
        seed = args.seed if args.seed is not None else 0
        out, report_file = args.out or "out", "report.json"
    result = run_suite(args.suite, seed)
    text = json.dumps(result.to_json_dict(), sort_keys=True, indent=2) + "\n"
    directory = Path(out)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / report_file).write_text(text)
    sys.stdout.write(text)
    if not result.passed:
        failed = [a.name for r in result.reports for a in r.assertions if not a.passed]
        logger.warning("Validation suite %s failed assertions: %s", args.suite, failed)
    return EXIT_OK if result.passed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spryfed", description="Federated forward-gradient finetuning simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, config_required: bool = True) -> None:
        p.add_argument("--config", required=config_required, help="Experiment config (JSON)")
        p.add_argument("--seed", type=int, default=None, help="Master seed, overrides the config")
        p.add_argument("--out", default=None, help="Output directory, overrides the config")
        p.add_argument("--threads", type=int, default=None,
                       help="Client worker threads (default: SPRYFED_THREADS or CPU count)")
        p.add_argument("--log-level", default=None, help="Logging level, overrides SPRYFED_LOG_LEVEL")

    run = sub.add_parser("run", help="Run a federation and write metrics, summary and checkpoint")
    common(run)
    run.set_defaults(handler=cmd_run)

    partition = sub.add_parser("partition", help="Write the client partition and its bias coefficients")
    common(partition)
    partition.set_defaults(handler=cmd_partition)

    cost = sub.add_parser("cost", help="Write the analytic cost sweep as CSV")
    common(cost)
    cost.set_defaults(handler=cmd_cost)

    validate = sub.add_parser("validate", help="Run a validation suite and write its report")
    common(validate, config_required=False)
    validate.add_argument("--suite", required=True, help=f"One of {', '.join(list(SUITES) + ['all'])}")
    validate.set_defaults(handler=cmd_validate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_level(args.log_level)
    try:
        return args.handler(args)
    except ConfigValidationError as e:
        for error in e.errors:
            print(f"config error: {error}", file=sys.stderr)
        return EXIT_INVALID
    except ArgumentError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ProtocolError as e:
        print(f"protocol error {e.code}: {e.message}", file=sys.stderr)
        return EXIT_PROTOCOL
    except SpryFedError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``python -m src.cli <command> ...``.

Exit codes: 0 success, 1 usage, 2 I/O or parse error, 3 numerical failure,
4 acceptance failure (selftest, bench, ablate).
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from src.config import LOG_FORMAT, LOG_LEVEL
from src.errors import InvalidArgumentError, NumericalFailureError, ParseError
from src.evaluation.metrics import clear_metrics
from src.evaluation.report import format_key_values, format_table
from src.mot_io.mot_files import format_results, parse_gt
from src.services.diagnostics import bench, selftest
from src.services.experiment_service import BASELINE, FAC, ExperimentService
from src.services.tracking_service import TrackingService
from src.synth.generator import generate, write_sequence
from src.synth.suite import scenario_suite
from src.tracker.tracker_config import TrackerConfig, load_tracker_config
from src.validators.schema_validator import load_scenario_file

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3
EXIT_ACCEPTANCE = 4


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_tracker_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("tracker", "override values from --config")
    group.add_argument("--config", type=Path, help="tracker config file (key = value lines)")
    for name, info in TrackerConfig.model_fields.items():
        flag = "--" + name.replace("_", "-")
        if info.annotation is bool:
            group.add_argument(flag, dest=name, action=argparse.BooleanOptionalAction, default=None)
        elif name == "memory_length":
            group.add_argument(flag, dest=name, default=None, metavar="L|all")
        else:
            group.add_argument(flag, dest=name, type=info.annotation, default=None)
    group.add_argument("--no-fac", action="store_true", help="baseline tracker without the FAC learner")


def _tracker_config(args: argparse.Namespace) -> TrackerConfig:
    overrides: Dict[str, Any] = {name: getattr(args, name) for name in TrackerConfig.model_fields}
    if args.no_fac:
        overrides["use_fac"] = False
    return load_tracker_config(args.config, overrides)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="fact", description="Online multi-object tracking with a continually learned appearance model")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    track = commands.add_parser("track", help="track one sequence")
    track.add_argument("--dets", type=Path, required=True, help="MOT detection file")
    track.add_argument("--embs", type=Path, required=True, help="binary embedding sidecar")
    track.add_argument("--cmc", type=Path, help="per-frame camera motion file")
    track.add_argument("--out", type=Path, help="result file (default: stdout)")
    track.add_argument("--gt", type=Path, help="ground truth; prints metrics when given")
    track.add_argument("--interpolate", action="store_true", help="fill short gaps inside tracks")
    track.add_argument("--checkpoint", type=Path, help="write the final learner snapshot here")
    _add_tracker_flags(track)

    evaluate = commands.add_parser("eval", help="score a result file")
    evaluate.add_argument("--results", type=Path, required=True)
    evaluate.add_argument("--gt", type=Path, required=True)

    synth = commands.add_parser("synth", help="write synthetic scenarios")
    source = synth.add_mutually_exclusive_group(required=True)
    source.add_argument("--suite-seed", type=int, help="write the 20-scenario suite")
    source.add_argument("--config", type=Path, help="scenario JSON file")
    synth.add_argument("--out-dir", type=Path, required=True)

    check = commands.add_parser("selftest", help="recursive learner against the batch solution")
    check.add_argument("--seed", type=int, default=0)

    timing = commands.add_parser("bench", help="update cost against the number of stored tracks")
    timing.add_argument("--tracks-max", type=int, default=1000)
    timing.add_argument("--step", type=int, default=50)
    timing.add_argument("--d-et", type=int, default=256)
    timing.add_argument("--n-dets", type=int, default=10)
    timing.add_argument("--repeats", type=int, default=5)
    timing.add_argument("--seed", type=int, default=0)

    ablate = commands.add_parser("ablate", help="FAC, memory-length and component ablations over the suite")
    ablate.add_argument("--suite-seed", type=int, default=0)
    ablate.add_argument("--jobs", type=int, default=1, help="worker processes")
    _add_tracker_flags(ablate)
    return parser


def cmd_track(args: argparse.Namespace) -> int:
    service = TrackingService(_tracker_config(args))
    result = service.track_files(
        args.dets,
        args.embs,
        out_path=args.out,
        cmc_path=args.cmc,
        gt_path=args.gt,
        interpolate_gaps=args.interpolate,
        checkpoint_path=args.checkpoint,
    )
    if args.out is None:
        sys.stdout.write(format_results(result.rows))
    if result.metrics is not None:
        sys.stdout.write(format_key_values(result.metrics))
        sys.stdout.write(format_table({"results": result.metrics}))
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    report = clear_metrics(parse_gt(args.results), parse_gt(args.gt))
    sys.stdout.write(format_key_values(report))
    sys.stdout.write(format_table({"results": report}))
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    if args.config is not None:
        write_sequence(generate(load_scenario_file(args.config)), args.out_dir)
        return EXIT_OK
    for i, scenario in enumerate(scenario_suite(args.suite_seed)):
        write_sequence(generate(scenario), args.out_dir / f"scenario_{i:02d}")
    return EXIT_OK


def cmd_selftest(args: argparse.Namespace) -> int:
    report = selftest(seed=args.seed)
    sys.stdout.write(f"oracle_max_relative_error = {report.max_oracle_error:.3e}\n")
    sys.stdout.write(f"woodbury_max_abs_error = {report.max_woodbury_error:.3e}\n")
    sys.stdout.write(f"elapsed_seconds = {report.elapsed:.3f}\n")
    return EXIT_OK if report.passed else EXIT_ACCEPTANCE


def cmd_bench(args: argparse.Namespace) -> int:
    report = bench(
        tracks_max=args.tracks_max,
        step=args.step,
        d_et=args.d_et,
        n_dets=args.n_dets,
        repeats=args.repeats,
        seed=args.seed,
    )
    for d_t, seconds in report.points:
        sys.stdout.write(f"{d_t:6d}  {seconds * 1e3:10.4f} ms\n")
    sys.stdout.write(f"slope = {report.slope:.4e}\nintercept = {report.intercept:.4e}\n")
    sys.stdout.write(f"r_squared = {report.r_squared:.4f}\nquadratic_p_value = {report.p_value:.4f}\n")
    return EXIT_OK if report.passed else EXIT_ACCEPTANCE


def cmd_ablate(args: argparse.Namespace) -> int:
    if args.jobs < 1:
        raise InvalidArgumentError(f"--jobs must be >= 1, got {args.jobs}")
    result = ExperimentService(_tracker_config(args), jobs=args.jobs).run(scenario_suite(args.suite_seed))
    sys.stdout.write(format_table(result.summary))
    fac_ok = result.fac_beats_baseline()
    memory_ok = result.memory_is_monotone()
    sys.stdout.write(
        f"idsw {BASELINE} = {result.total_idsw(BASELINE)}, idsw {FAC} = {result.total_idsw(FAC)}\n"
        f"fac_beats_baseline = {str(fac_ok).lower()}\n"
        f"memory_monotone = {str(memory_ok).lower()}\n"
    )
    return EXIT_OK if fac_ok and memory_ok else EXIT_ACCEPTANCE


COMMANDS = {
    "track": cmd_track,
    "eval": cmd_eval,
    "synth": cmd_synth,
    "selftest": cmd_selftest,
    "bench": cmd_bench,
    "ablate": cmd_ablate,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run the command and return its exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else LOG_LEVEL,
        format=LOG_FORMAT,
    )
    try:
        return COMMANDS[args.command](args)
    except ParseError as e:
        logger.error(f"Parse error: {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_IO
    except InvalidArgumentError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    except NumericalFailureError as e:
        logger.error(f"Numerical failure: {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_NUMERICAL
    except OSError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_IO


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

"""
plandiv command line
Validate plans, score plan sets with similarity metrics, select diverse
subsets and print subgoal traces
"""

import argparse
import glob
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd
from pydantic import ValidationError

from plandiv import __version__
from plandiv.config import OutputFormat, RunConfig, get_settings
from plandiv.planning.errors import PlanningError, PlanSetError, SelectionError
from plandiv.planning.metrics import MetricId
from plandiv.planning.selection import DiversityMode
from plandiv.services.diversity import DECIMALS, ScoreReport, DiversityService
from plandiv.utils.logger import get_logger, setup_logging

logger = get_logger(__name__)

FLOAT_FORMAT = f"%.{DECIMALS}f"
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


def expand_plan_paths(entries: Sequence[str]) -> List[Path]:
    """Files, directories (their files) and glob patterns, sorted and de-duplicated"""
    paths = set()
    for entry in entries:
        path = Path(entry)
        if path.is_dir():
            paths.update(child for child in path.iterdir() if child.is_file() and not child.name.startswith("."))
        elif glob.has_magic(entry):
            paths.update(Path(match) for match in glob.glob(entry) if Path(match).is_file())
        else:
            paths.add(path)
    return sorted(paths, key=str)


def parse_weights(entries: Optional[Sequence[str]]) -> Optional[Dict[str, float]]:
    """`m=w` items, space- or comma-separated"""
    if not entries:
        return None
    weights: Dict[str, float] = {}
    for entry in entries:
        for item in entry.split(","):
            if not item.strip():
                continue
            name, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"weight '{item}' is not of the form metric=weight")
            try:
                weights[name.strip()] = float(value)
            except ValueError:
                raise ValueError(f"weight '{item}' is not a number") from None
    return weights


def parse_metrics(entries: Optional[Sequence[str]]) -> Optional[List[str]]:
    if not entries:
        return None
    return [item.strip() for entry in entries for item in entry.split(",") if item.strip()]


# -- rendering ------------------------------------------------------------

def _json(report: Dict[str, Any]) -> str:
    return json.dumps(report, indent=2) + "\n"


def _csv(frame: pd.DataFrame, index_label: str = "plan") -> str:
    return frame.to_csv(float_format=FLOAT_FORMAT, index_label=index_label, lineterminator="\n")


def render_score(report: ScoreReport, config: RunConfig) -> str:
    if config.output_format is OutputFormat.JSON:
        return _json(report.to_dict(timing=config.timing))
    sections = []
    for name, matrix in report.matrices.items():
        sections.append(f"# metric: {name}\n" + _csv(matrix.to_frame()))
        if config.timing:
            sections.append(f"# timings_ms: {name}\n" + _csv(matrix.timings_frame()))
    for mode, value in report.diversity.items():
        sections.append(f"# diversity: {mode}\n{value:.{DECIMALS}f}\n")
    if report.selection is not None:
        selection = report.selection
        header = f"# selection: {selection.metric} k={selection.k} {selection.mode.value}={selection.score:.{DECIMALS}f}\n"
        sections.append(header + "\n".join(selection.selected) + "\n")
    return "\n".join(sections)


def render_rows(report: Dict[str, Any], rows: Any, index_label: str, config: RunConfig) -> str:
    if config.output_format is OutputFormat.JSON:
        return _json(report)
    return _csv(pd.DataFrame.from_dict(rows, orient="index"), index_label)


# -- commands -------------------------------------------------------------

def _load(config: RunConfig, service: DiversityService):
    task = service.load_task_files(config.domain, config.problem)
    plans = service.load_plan_files(config.plans, task)
    return task, plans


def cmd_score(config: RunConfig, service: Optional[DiversityService] = None) -> Tuple[int, str]:
    """Pairwise matrices for every requested metric, optionally with a selection"""
    service = service or DiversityService(config.workers)
    task, plans = _load(config, service)
    report = service.score(plans, task, config.metrics, config.weights, config.select_k, config.diversity_mode)
    return EXIT_OK, render_score(report, config)


def cmd_select(config: RunConfig, service: Optional[DiversityService] = None) -> Tuple[int, str]:
    if config.select_k is None:
        raise SelectionError("select needs --select-k")
    service = service or DiversityService(config.workers)
    task, plans = _load(config, service)
    report = service.select(plans, task, config.selection_spec, config.select_k, config.diversity_mode)
    return EXIT_OK, render_score(report, config)


def cmd_trace(config: RunConfig, service: Optional[DiversityService] = None) -> Tuple[int, str]:
    service = service or DiversityService(config.workers)
    task, plans = _load(config, service)
    report = service.trace(plans, task)
    if config.output_format is OutputFormat.JSON:
        return EXIT_OK, _json(report)
    alphabet = "".join(f"# {symbol} = {atom}\n" for symbol, atom in report["alphabet"].items())
    frame = pd.DataFrame({"trace": list(report["traces"].values())}, index=list(report["traces"]))
    return EXIT_OK, alphabet + _csv(frame)


def cmd_validate(config: RunConfig, service: Optional[DiversityService] = None) -> Tuple[int, str]:
    """Validation report per plan; exit 1 when any plan is invalid"""
    service = service or DiversityService(config.workers)
    task, plans = _load(config, service)
    reports = service.validate(plans, task)
    valid = all(report["valid"] for report in reports.values())
    body = {"schema": 1, "valid": valid, "plans": reports}
    if config.output_format is OutputFormat.CSV:
        rows = {label: {**report, "missing_goals": " ".join(report["missing_goals"])}
                for label, report in reports.items()}
        text = render_rows(body, rows, "plan", config)
    else:
        text = _json(body)
    for label, report in reports.items():
        if not report["valid"]:
            step = f"step {report['failing_step']}: " if report["failing_step"] is not None else ""
            print(f"error: {label}: {step}{report['reason']}", file=sys.stderr)
    return (EXIT_OK if valid else EXIT_ERROR), text


def cmd_compare(config: RunConfig, service: Optional[DiversityService] = None,
                metrics: Optional[Sequence[MetricId]] = None) -> Tuple[int, str]:
    """Similarity and time of each metric for exactly two plans, most similar first"""
    if len(config.plans) != 2:
        raise SelectionError(f"compare needs exactly 2 plans, got {len(config.plans)}")
    service = service or DiversityService(config.workers)
    task, (pa, pb) = _load(config, service)
    report = service.compare(pa, pb, task, metrics)
    if config.output_format is OutputFormat.JSON:
        return EXIT_OK, _json(report)
    rows = {row["metric"]: {key: value for key, value in row.items() if key != "metric"} for row in report["rows"]}
    return EXIT_OK, render_rows(report, rows, "metric", config)


COMMANDS = {
    "score": cmd_score,
    "select": cmd_select,
    "trace": cmd_trace,
    "validate": cmd_validate,
    "compare": cmd_compare,
}


# -- argument parsing -----------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plandiv", description="Plan diversity metrics for PDDL plans")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--domain", required=True, help="Domain PDDL file")
    common.add_argument("--problem", required=True, help="Problem PDDL file")
    common.add_argument("--plans", nargs="+", required=True, help="Plan files, directories or globs")
    common.add_argument("--format", dest="output_format", default="json", choices=["json", "csv"])
    common.add_argument("--output", default=None, help="Output path (default: stdout)")
    common.add_argument("--workers", type=int, default=None, help="Threads for matrix cells")
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")

    scoring = argparse.ArgumentParser(add_help=False)
    scoring.add_argument("--metrics", nargs="+", default=None,
                         help=f"Metric ids ({', '.join(m.value for m in MetricId)}), space- or comma-separated")
    scoring.add_argument("--weights", nargs="+", default=None, help="Aggregate weights, e.g. sgo=0.5 flex=0.5")
    scoring.add_argument("--diversity-mode", default="average", choices=[m.value for m in DiversityMode])
    scoring.add_argument("--timing", action="store_true", help="Include per-pair times in ms")

    subparsers = parser.add_subparsers(dest="command", required=True)
    score = subparsers.add_parser("score", parents=[common, scoring], help="Pairwise similarity matrices")
    score.add_argument("--select-k", type=int, default=None, help="Also select k diverse plans")
    select = subparsers.add_parser("select", parents=[common, scoring], help="Select k maximally diverse plans")
    select.add_argument("--select-k", "-k", type=int, required=True)
    subparsers.add_parser("trace", parents=[common], help="Subgoal traces")
    subparsers.add_parser("validate", parents=[common], help="Validate plans by simulation")
    compare = subparsers.add_parser("compare", parents=[common], help="Every metric for two plans")
    compare.add_argument("--metrics", nargs="+", default=None, help="Metric ids (default: all)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    settings = get_settings()
    values: Dict[str, Any] = {
        "domain": args.domain,
        "problem": args.problem,
        "plans": expand_plan_paths(args.plans),
        "output_format": args.output_format,
        "output": args.output if args.output not in (None, "-", "stdout") else None,
        "workers": args.workers if args.workers is not None else settings.workers,
        "select_k": getattr(args, "select_k", None),
        "diversity_mode": getattr(args, "diversity_mode", "average"),
        "timing": getattr(args, "timing", False),
    }
    metrics = parse_metrics(getattr(args, "metrics", None))
    if metrics:
        values["metrics"] = metrics
    if args.command == "select" and metrics and len(metrics) > 1 and not getattr(args, "weights", None):
        raise ValueError("select ranks plans by one metric; combine several with --weights")
    weights = parse_weights(getattr(args, "weights", None))
    if weights is not None:
        values["weights"] = weights
        if not metrics:
            # weights alone request their metrics
            values["metrics"] = list(weights)
    return RunConfig(**values)


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_text(text)
        logger.info(f"Report written to {output}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    setup_logging(args.log_level or settings.log_level, settings.log_dir)

    try:
        config = config_from_args(args)
    except (ValidationError, ValueError) as e:
        errors = e.errors() if isinstance(e, ValidationError) else [{"msg": str(e)}]
        for error in errors:
            print(f"error: {error['msg']}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.command == "compare":
            status, text = cmd_compare(config, metrics=config.metrics if args.metrics else None)
        else:
            status, text = COMMANDS[args.command](config)
    except PlanSetError as e:
        for line in e.diagnostics():
            print(f"error: {line}", file=sys.stderr)
        return EXIT_ERROR
    except PlanningError as e:
        print(f"error: {e.diagnostic()}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        print(f"error: {e.filename or ''}: {e.strerror}", file=sys.stderr)
        return EXIT_ERROR

    _emit(text, config.output)
    return status


if __name__ == "__main__":
    sys.exit(main())

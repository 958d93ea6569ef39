"""
Diversity Service
Loads tasks and plan sets and builds the validation, score, selection, trace
and comparison reports used by both the CLI and the HTTP API
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

from plandiv.planning.errors import PlanningError, PlanSetError, SelectionError
from plandiv.planning.ground_sim import validate as validate_plan
from plandiv.planning.metrics import MetricId, MetricSpec, PlanProfile, compute
from plandiv.planning.pddl_core import Plan, PlanningTask, TextInput, load_task, load_task_files, parse_plan
from plandiv.planning.selection import (
    DiversityMode,
    SimilarityMatrix,
    matrix_diversity,
    matrix_of_profiles,
    select_from_matrix,
)
from plandiv.planning.subgoal_trace import subgoal_alphabet, trace_of
from plandiv.utils.logger import get_logger, get_structured_logger
from .base_service import BaseService

logger = get_logger(__name__)
structured_logger = get_structured_logger()

SCHEMA_VERSION = 1
DECIMALS = 6


def _rounded(matrix, scale: float = 1.0) -> List[List[float]]:
    return [[round(float(value) * scale, DECIMALS) for value in row] for row in matrix]


@dataclass
class SelectionReport:
    metric: str
    k: int
    mode: DiversityMode
    selected: List[str]
    score: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "metric": self.metric,
            "k": self.k,
            "mode": self.mode.value,
            "selected": list(self.selected),
            "score": round(self.score, DECIMALS),
        }


@dataclass
class ScoreReport:
    labels: List[str]
    matrices: Dict[str, SimilarityMatrix]
    weights: Optional[Dict[str, float]] = None
    selection: Optional[SelectionReport] = None
    diversity: Dict[str, float] = field(default_factory=dict)

    def to_dict(self, timing: bool = False) -> Dict[str, Any]:
        metrics: Dict[str, Any] = {}
        for name, matrix in self.matrices.items():
            entry: Dict[str, Any] = {"matrix": _rounded(matrix.values)}
            if name == "aggregate" and self.weights:
                entry["weights"] = dict(self.weights)
            if timing:
                entry["timings_ms"] = _rounded(matrix.timings, 1000.0)
            metrics[name] = entry
        report: Dict[str, Any] = {"schema": SCHEMA_VERSION, "plans": list(self.labels), "metrics": metrics}
        if self.diversity:
            report["diversity"] = {name: round(value, DECIMALS) for name, value in self.diversity.items()}
        if self.selection is not None:
            report["selection"] = self.selection.to_dict()
        return report


class DiversityService(BaseService):
    """Plan-set operations over one planning task"""

    def __init__(self, workers: int = 1):
        super().__init__()
        self.workers = workers

    # -- loading ----------------------------------------------------------

    def load_task(self, domain_text: TextInput, problem_text: TextInput,
                  domain_source: Optional[str] = None, problem_source: Optional[str] = None) -> PlanningTask:
        with self.track("load_task"):
            task = load_task(domain_text, problem_text, domain_source, problem_source)
        logger.info(f"Loaded task {task.problem.name} ({len(task.domain.schemas)} schemas, "
                    f"{len(task.problem.goal)} goals)")
        return task

    def load_task_files(self, domain: Union[str, Path], problem: Union[str, Path]) -> PlanningTask:
        with self.track("load_task"):
            return load_task_files(domain, problem)

    def load_plans(self, plans: Mapping[str, TextInput], task: PlanningTask) -> List[Plan]:
        """Parse labelled plan texts; every failing plan is reported"""
        parsed: List[Plan] = []
        errors: List[PlanningError] = []
        with self.track("load_plans"):
            for label, text in plans.items():
                try:
                    parsed.append(parse_plan(text, task.domain, task.problem, source=label, name=label))
                except PlanningError as e:
                    errors.append(e)
        if errors:
            raise PlanSetError(errors)
        return parsed

    def load_plan_files(self, paths: Sequence[Union[str, Path]], task: PlanningTask) -> List[Plan]:
        parsed: List[Plan] = []
        errors: List[PlanningError] = []
        with self.track("load_plans"):
            for path in paths:
                path = Path(path)
                try:
                    parsed.append(parse_plan(path.read_bytes(), task.domain, task.problem, source=str(path)))
                except PlanningError as e:
                    errors.append(e)
        if errors:
            raise PlanSetError(errors)
        return parsed

    def profiles(self, plans: Sequence[Plan], task: PlanningTask) -> List[PlanProfile]:
        """Validate every plan; all invalid plans are reported together"""
        labels = [plan.label for plan in plans]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise SelectionError(f"duplicate plan labels: {', '.join(duplicates)}")
        profiles: List[PlanProfile] = []
        errors: List[PlanningError] = []
        for plan in plans:
            try:
                profiles.append(PlanProfile.build(plan, task))
            except PlanningError as e:
                errors.append(e)
        if errors:
            raise PlanSetError(errors)
        return profiles

    # -- operations -------------------------------------------------------

    def validate(self, plans: Sequence[Plan], task: PlanningTask) -> Dict[str, Dict[str, Any]]:
        reports: Dict[str, Dict[str, Any]] = {}
        with self.track("validate"):
            for plan in plans:
                report = validate_plan(plan, task.domain, task.problem)
                structured_logger.log_validation(plan.label, report.valid, report.failing_step, report.reason)
                reports[plan.label] = report.to_dict()
        return reports

    def score(self, plans: Sequence[Plan], task: PlanningTask, metrics: Sequence[Union[MetricId, str]],
              weights: Optional[Mapping[Union[MetricId, str], float]] = None,
              select_k: Optional[int] = None,
              mode: Union[DiversityMode, str] = DiversityMode.AVERAGE) -> ScoreReport:
        """
        Pairwise matrices for each metric, plus the weighted aggregate when
        weights are given

        Selection, when requested, runs on the aggregate if there is one and on
        the first metric otherwise.
        """
        mode = DiversityMode(mode)
        metric_ids = [MetricId.parse(metric) for metric in metrics]
        if not metric_ids:
            raise SelectionError("at least one metric is required")
        with self.track("score"):
            profiles = self.profiles(plans, task)
            matrices: Dict[str, SimilarityMatrix] = {}
            for metric in metric_ids:
                matrices[metric.value] = matrix_of_profiles(profiles, MetricSpec.single(metric), self.workers)

            aggregate_spec = MetricSpec.weighted(weights) if weights else None
            if aggregate_spec is not None:
                matrices["aggregate"] = matrix_of_profiles(profiles, aggregate_spec, self.workers)

            selection_matrix = matrices["aggregate" if aggregate_spec else metric_ids[0].value]
            diversity: Dict[str, float] = {}
            if len(profiles) >= 2:
                diversity[mode.value] = matrix_diversity(selection_matrix, mode)

            selection = None
            if select_k is not None:
                selection = self._select(selection_matrix, select_k, mode)

        return ScoreReport(
            labels=[profile.label for profile in profiles],
            matrices=matrices,
            weights={metric.value: weight for metric, weight in aggregate_spec.weights} if aggregate_spec else None,
            selection=selection,
            diversity=diversity,
        )

    def _select(self, matrix: SimilarityMatrix, k: int, mode: DiversityMode) -> SelectionReport:
        chosen = list(select_from_matrix(matrix, k))
        score = matrix_diversity(matrix, mode, chosen) if k > 1 else 0.0
        structured_logger.log_selection(matrix.metric, k, chosen, score, mode.value)
        return SelectionReport(matrix.metric, k, mode, chosen, score)

    def select(self, plans: Sequence[Plan], task: PlanningTask, spec: MetricSpec, k: int,
               mode: Union[DiversityMode, str] = DiversityMode.AVERAGE) -> ScoreReport:
        """Matrix under `spec` and the greedy selection of k plans on it"""
        mode = DiversityMode(mode)
        with self.track("select"):
            profiles = self.profiles(plans, task)
            if not 1 <= k <= len(profiles):
                raise SelectionError(f"k must be between 1 and {len(profiles)}, got {k}")
            matrix = matrix_of_profiles(profiles, spec, self.workers)
            selection = self._select(matrix, k, mode)
        weights = {metric.value: weight for metric, weight in spec.weights} if spec.is_aggregate else None
        return ScoreReport([p.label for p in profiles], {matrix.metric: matrix}, weights, selection)

    def trace(self, plans: Sequence[Plan], task: PlanningTask) -> Dict[str, Any]:
        with self.track("trace"):
            profiles = self.profiles(plans, task)
        alphabet = subgoal_alphabet(task.problem)
        return {
            "schema": SCHEMA_VERSION,
            "alphabet": alphabet.as_dict(),
            "traces": {profile.label: trace_of(profile.trajectory, alphabet).render() for profile in profiles},
        }

    def compare(self, pa: Plan, pb: Plan, task: PlanningTask,
                metrics: Optional[Sequence[Union[MetricId, str]]] = None) -> Dict[str, Any]:
        """
        Similarity and computation time of every metric for one plan pair,
        sorted by decreasing similarity
        """
        metric_ids = [MetricId.parse(metric) for metric in metrics] if metrics else list(MetricId)
        with self.track("compare"):
            self.profiles([pa, pb], task)
            rows = []
            for metric in metric_ids:
                value = compute(metric, pa, pb, task)
                rows.append({
                    "metric": metric.value,
                    "similarity": round(float(value.value), DECIMALS),
                    "exact": str(value.value),
                    "time_ms": round(value.compute_ms, 3),
                })
        rows.sort(key=lambda row: -row["similarity"])
        return {"schema": SCHEMA_VERSION, "plans": [pa.label, pb.label], "rows": rows}

    async def health_check(self) -> Dict[str, Any]:
        info = self.get_service_info()
        return {
            "status": "healthy",
            "service": "diversity",
            "workers": self.workers,
            "uptime": info["uptime"],
            "calls": info["calls"],
        }

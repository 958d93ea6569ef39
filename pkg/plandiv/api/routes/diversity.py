"""
Diversity Routes
API endpoints for plan validation, similarity scoring, selection and traces
"""

from typing import Any, Dict, List, Optional

from fastapi import APIRouter, Depends, HTTPException, Request
from pydantic import BaseModel, Field

from plandiv.api.rate_limit import limiter, scoring_limit
from plandiv.config import Settings, get_settings
from plandiv.planning.metrics import MetricId, MetricSpec
from plandiv.planning.pddl_core import PlanningTask
from plandiv.planning.selection import DiversityMode
from plandiv.services.diversity import DiversityService

router = APIRouter()


class TaskRequest(BaseModel):
    """Planning task given inline as PDDL text"""
    domain: str = Field(..., min_length=1, description="Domain PDDL text")
    problem: str = Field(..., min_length=1, description="Problem PDDL text")


class PlanSetRequest(TaskRequest):
    plans: Dict[str, str] = Field(..., description="IPC plan texts keyed by label")


class ScoreRequest(PlanSetRequest):
    metrics: List[str] = Field(default=["actions"], min_length=1, description="Metric ids")
    weights: Optional[Dict[str, float]] = Field(None, description="Aggregate weights per requested metric")
    select_k: Optional[int] = Field(None, ge=1)
    diversity_mode: DiversityMode = DiversityMode.AVERAGE
    timing: bool = False


class SelectRequest(PlanSetRequest):
    k: int = Field(..., ge=1)
    metric: str = Field(default="actions", description="Metric id, or weights such as 'sgo=0.5,flex=0.5'")
    diversity_mode: DiversityMode = DiversityMode.AVERAGE
    timing: bool = False


class CompareRequest(TaskRequest):
    plan_a: str
    plan_b: str
    label_a: str = "a"
    label_b: str = "b"
    metrics: Optional[List[str]] = None


def get_diversity_service(request: Request) -> DiversityService:
    """Dependency to get diversity service"""
    return request.app.state.diversity_service


def _check_size(texts: List[str], settings: Settings) -> None:
    total = sum(len(text.encode("utf-8")) for text in texts)
    if total > settings.max_plan_bytes:
        raise HTTPException(status_code=413, detail=f"request carries {total} bytes of PDDL, limit is {settings.max_plan_bytes}")


def _task_and_plans(body: PlanSetRequest, service: DiversityService, settings: Settings):
    _check_size([body.domain, body.problem, *body.plans.values()], settings)
    task: PlanningTask = service.load_task(body.domain, body.problem, "domain", "problem")
    return task, service.load_plans(body.plans, task)


@router.get("/metrics")
async def list_metrics():
    return {"metrics": [{"id": metric.value, "symmetric": metric.symmetric} for metric in MetricId]}


@router.post("/validate")
@limiter.limit(scoring_limit)
def validate_plans(
    request: Request,
    body: PlanSetRequest,
    service: DiversityService = Depends(get_diversity_service),
    settings: Settings = Depends(get_settings)
):
    task, plans = _task_and_plans(body, service, settings)
    reports = service.validate(plans, task)
    return {"schema": 1, "valid": all(r["valid"] for r in reports.values()), "plans": reports}


@router.post("/score")
@limiter.limit(scoring_limit)
def score_plans(
    request: Request,
    body: ScoreRequest,
    service: DiversityService = Depends(get_diversity_service),
    settings: Settings = Depends(get_settings)
):
    """Pairwise similarity matrices for every requested metric"""
    metrics = [MetricId.parse(metric) for metric in body.metrics]
    weights = None
    if body.weights is not None:
        weights = {MetricId.parse(metric): weight for metric, weight in body.weights.items()}
        extra = [metric.value for metric in weights if metric not in metrics]
        if extra:
            raise HTTPException(status_code=422, detail=f"weights reference metrics that were not requested: {', '.join(extra)}")
    task, plans = _task_and_plans(body, service, settings)
    report = service.score(plans, task, metrics, weights, body.select_k, body.diversity_mode)
    return report.to_dict(timing=body.timing)


@router.post("/select")
@limiter.limit(scoring_limit)
def select_plans(
    request: Request,
    body: SelectRequest,
    service: DiversityService = Depends(get_diversity_service),
    settings: Settings = Depends(get_settings)
):
    """Greedy max-min selection of k plans"""
    spec = MetricSpec.parse(body.metric)
    task, plans = _task_and_plans(body, service, settings)
    return service.select(plans, task, spec, body.k, body.diversity_mode).to_dict(timing=body.timing)


@router.post("/trace")
@limiter.limit(scoring_limit)
def trace_plans(
    request: Request,
    body: PlanSetRequest,
    service: DiversityService = Depends(get_diversity_service),
    settings: Settings = Depends(get_settings)
) -> Dict[str, Any]:
    task, plans = _task_and_plans(body, service, settings)
    return service.trace(plans, task)


@router.post("/compare")
@limiter.limit(scoring_limit)
def compare_plans(
    request: Request,
    body: CompareRequest,
    service: DiversityService = Depends(get_diversity_service),
    settings: Settings = Depends(get_settings)
):
    """Every metric for one plan pair, most similar first"""
    if body.label_a == body.label_b:
        raise HTTPException(status_code=422, detail="plan labels must differ")
    _check_size([body.domain, body.problem, body.plan_a, body.plan_b], settings)
    task = service.load_task(body.domain, body.problem, "domain", "problem")
    pa, pb = service.load_plans({body.label_a: body.plan_a, body.label_b: body.plan_b}, task)
    return service.compare(pa, pb, task, body.metrics)

"""
Plan Similarity Metrics
Six pairwise similarity metrics in [0, 1] (1 = identical), dissimilarity and
weighted aggregation
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Iterable, Mapping, Optional, Tuple, Union

from plandiv.planning.errors import AggregationError, UnknownMetricError
from plandiv.planning.ground_sim import CausalLink, GroundedAction, State, Trajectory, links_of, require_valid
from plandiv.planning.pddl_core import Plan, PlanningTask
from plandiv.planning.pop_extract import PartialOrderPlan, pop_of
from plandiv.planning.subgoal_trace import SubgoalTrace, hamming, subgoal_alphabet, trace_of
from plandiv.utils.logger import get_structured_logger

metrics_logger = get_structured_logger("metrics")

Number = Union[Fraction, float, int]


class MetricId(str, Enum):
    ACTIONS = "actions"
    STATES = "states"
    CAUSAL = "causal"
    UNIQUENESS = "uniqueness"
    FLEX = "flex"
    SGO = "sgo"

    @classmethod
    def parse(cls, text: Union[str, "MetricId"]) -> "MetricId":
        if isinstance(text, MetricId):
            return text
        key = text.strip().lower()
        key = _ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            valid = ", ".join(metric.value for metric in cls)
            raise UnknownMetricError(f"unknown metric '{text}' (expected one of: {valid})") from None

    @property
    def symmetric(self) -> bool:
        return self is not MetricId.UNIQUENESS

    def __str__(self) -> str:
        return self.value


_ALIASES = {"a": "actions", "stability": "actions", "s": "states", "c": "causal", "u": "uniqueness"}


@dataclass(frozen=True)
class MetricValue:
    value: Fraction
    compute_time: float = 0.0  # seconds

    @property
    def compute_ms(self) -> float:
        return self.compute_time * 1000.0

    def __float__(self) -> float:
        return float(self.value)


def jaccard(a: Iterable, b: Iterable) -> Fraction:
    """|A ∩ B| / |A ∪ B|, and 1 when both sets are empty"""
    a, b = frozenset(a), frozenset(b)
    union = a | b
    if not union:
        return Fraction(1)
    return Fraction(len(a & b), len(union))


def uniqueness(a: FrozenSet, b: FrozenSet) -> Fraction:
    """Case formula: 1 if A∖B = ∅, 1 if A ⊂ B, else 0 (not symmetric)"""
    if not a - b:
        return Fraction(1)
    if a < b:
        return Fraction(1)
    return Fraction(0)


def sgo_similarity(ta: SubgoalTrace, tb: SubgoalTrace) -> Fraction:
    """1 - hamming / longest trace length; 1 for two empty traces"""
    longest = max(len(ta), len(tb))
    if longest == 0:
        return Fraction(1)
    return 1 - Fraction(hamming(ta, tb), longest)


@dataclass(frozen=True)
class PlanProfile:
    """A validated plan with the features the metrics read, computed on demand"""

    plan: Plan
    task: PlanningTask
    actions: Tuple[GroundedAction, ...]
    trajectory: Trajectory

    @classmethod
    def build(cls, plan: Plan, task: PlanningTask) -> "PlanProfile":
        actions, trajectory = require_valid(plan, task.domain, task.problem)
        return cls(plan, task, tuple(actions), trajectory)

    @property
    def label(self) -> str:
        return self.plan.label

    @cached_property
    def signatures(self) -> FrozenSet[str]:
        return frozenset(action.signature for action in self.actions)

    @cached_property
    def states(self) -> FrozenSet[State]:
        return frozenset(self.trajectory.post_states)

    @cached_property
    def links(self) -> FrozenSet[CausalLink]:
        return links_of(self.actions, self.task.problem)

    @cached_property
    def pop(self) -> PartialOrderPlan:
        return pop_of(self.actions)

    @cached_property
    def trace(self) -> SubgoalTrace:
        return trace_of(self.trajectory, subgoal_alphabet(self.task.problem))

    def warm(self, metrics: Iterable[MetricId]) -> "PlanProfile":
        """Compute the features used by `metrics` ahead of parallel comparison"""
        for metric in metrics:
            getattr(self, _FEATURES[metric])
        return self


_FEATURES: Dict[MetricId, str] = {
    MetricId.ACTIONS: "signatures",
    MetricId.STATES: "states",
    MetricId.CAUSAL: "links",
    MetricId.UNIQUENESS: "signatures",
    MetricId.FLEX: "pop",
    MetricId.SGO: "trace",
}

_COMPARATORS: Dict[MetricId, Callable[[PlanProfile, PlanProfile], Fraction]] = {
    MetricId.ACTIONS: lambda a, b: jaccard(a.signatures, b.signatures),
    MetricId.STATES: lambda a, b: jaccard(a.states, b.states),
    MetricId.CAUSAL: lambda a, b: jaccard(a.links, b.links),
    MetricId.UNIQUENESS: lambda a, b: uniqueness(a.signatures, b.signatures),
    MetricId.FLEX: lambda a, b: jaccard(a.pop.blocks, b.pop.blocks),
    MetricId.SGO: lambda a, b: sgo_similarity(a.trace, b.trace),
}


def compare_profiles(metric: Union[MetricId, str], a: PlanProfile, b: PlanProfile) -> Fraction:
    return _COMPARATORS[MetricId.parse(metric)](a, b)


def compute(metric: Union[MetricId, str], pa: Plan, pb: Plan, task: PlanningTask) -> MetricValue:
    """Validate both plans and evaluate one metric, timing the whole call"""
    metric = MetricId.parse(metric)
    start = time.perf_counter()
    a = PlanProfile.build(pa, task)
    b = a if pb is pa else PlanProfile.build(pb, task)
    value = compare_profiles(metric, a, b)
    result = MetricValue(value, time.perf_counter() - start)
    metrics_logger.log_metric(metric.value, pa.label, pb.label, float(value), result.compute_time)
    return result


def _signature_metric(metric: MetricId, pa: Plan, pb: Plan, task: Optional[PlanningTask]) -> MetricValue:
    if task is not None:
        return compute(metric, pa, pb, task)
    start = time.perf_counter()
    if metric is MetricId.ACTIONS:
        value = jaccard(pa.signatures, pb.signatures)
    else:
        value = uniqueness(pa.signatures, pb.signatures)
    return MetricValue(value, time.perf_counter() - start)


def delta_actions(pa: Plan, pb: Plan, task: Optional[PlanningTask] = None) -> MetricValue:
    """Jaccard over grounded-action signatures; plans are validated when a task is given"""
    return _signature_metric(MetricId.ACTIONS, pa, pb, task)


def delta_uniqueness(pa: Plan, pb: Plan, task: Optional[PlanningTask] = None) -> MetricValue:
    return _signature_metric(MetricId.UNIQUENESS, pa, pb, task)


def delta_states(pa: Plan, pb: Plan, task: PlanningTask) -> MetricValue:
    """Jaccard over the sets of post-action states (initial state excluded)"""
    return compute(MetricId.STATES, pa, pb, task)


def delta_causal(pa: Plan, pb: Plan, task: PlanningTask) -> MetricValue:
    return compute(MetricId.CAUSAL, pa, pb, task)


def delta_flex(pa: Plan, pb: Plan, task: PlanningTask) -> MetricValue:
    """Jaccard over the block sets of the extracted partial-order plans"""
    return compute(MetricId.FLEX, pa, pb, task)


def delta_sgo(pa: Plan, pb: Plan, task: PlanningTask) -> MetricValue:
    return compute(MetricId.SGO, pa, pb, task)


def dissimilarity(m: Union[MetricId, str], pa: Plan, pb: Plan, task: PlanningTask) -> Fraction:
    """D = 1 - δ"""
    return 1 - compute(m, pa, pb, task).value


def aggregate(values: Iterable[Tuple[Union[MetricValue, Number], float]]) -> float:
    """Weighted arithmetic mean of metric values"""
    total = 0.0
    weight_sum = 0.0
    for value, weight in values:
        if not math.isfinite(weight):
            raise AggregationError(f"weight {weight} is not finite")
        if weight < 0:
            raise AggregationError(f"negative weight {weight}")
        total += float(value) * weight
        weight_sum += weight
    if weight_sum <= 0:
        raise AggregationError("weights must not all be zero")
    return min(1.0, max(0.0, total / weight_sum))


@dataclass(frozen=True)
class MetricSpec:
    """A single metric or a weighted aggregate of several"""

    weights: Tuple[Tuple[MetricId, float], ...]
    is_aggregate: bool = False

    @classmethod
    def single(cls, metric: Union[MetricId, str]) -> "MetricSpec":
        return cls(((MetricId.parse(metric), 1.0),))

    @classmethod
    def weighted(cls, weights: Mapping[Union[MetricId, str], float]) -> "MetricSpec":
        pairs = tuple((MetricId.parse(metric), float(weight)) for metric, weight in weights.items())
        if not pairs:
            raise AggregationError("aggregate needs at least one metric")
        if not all(math.isfinite(weight) for _, weight in pairs):
            raise AggregationError("weights must be finite")
        if any(weight < 0 for _, weight in pairs):
            raise AggregationError("weights must be non-negative")
        if sum(weight for _, weight in pairs) <= 0:
            raise AggregationError("weights must not all be zero")
        return cls(pairs, True)

    @classmethod
    def parse(cls, text: str) -> "MetricSpec":
        """`flex` or `sgo=0.5,actions=0.5`"""
        if "=" not in text:
            return cls.single(text)
        weights: Dict[MetricId, float] = {}
        for part in text.split(","):
            name, _, weight = part.partition("=")
            try:
                weights[MetricId.parse(name)] = float(weight)
            except UnknownMetricError:
                raise
            except ValueError as e:
                raise AggregationError(f"invalid weight '{part.strip()}': {e}") from None
        return cls.weighted(weights)

    @property
    def name(self) -> str:
        return "aggregate" if self.is_aggregate else self.weights[0][0].value

    @property
    def metrics(self) -> Tuple[MetricId, ...]:
        return tuple(metric for metric, _ in self.weights)

    @property
    def symmetric(self) -> bool:
        return all(metric.symmetric for metric in self.metrics)

    def evaluate(self, a: PlanProfile, b: PlanProfile) -> float:
        if not self.is_aggregate:
            return float(compare_profiles(self.weights[0][0], a, b))
        return aggregate((compare_profiles(metric, a, b), weight) for metric, weight in self.weights)

"""
Plan Set Selection
Pairwise similarity matrices, set diversity scores and greedy selection of
k mutually distant plans
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from plandiv.planning.errors import SelectionError
from plandiv.planning.metrics import MetricId, MetricSpec, PlanProfile
from plandiv.planning.pddl_core import Plan, PlanningTask
from plandiv.utils.logger import get_logger, get_structured_logger

logger = get_logger(__name__)
structured_logger = get_structured_logger()

SpecLike = Union[MetricSpec, MetricId, str]


class DiversityMode(str, Enum):
    AVERAGE = "average"
    MINIMUM = "minimum"


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """
    Pairwise similarities between labelled plans

    `values[i][j]` is δ(plan i, plan j) and `timings[i][j]` the seconds spent
    on that cell, including the features both plans needed for it.
    """

    labels: Tuple[str, ...]
    metric: str
    values: np.ndarray
    timings: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def value(self, a: str, b: str) -> float:
        return float(self.values[self.index(a), self.index(b)])

    def pair_distance(self, i: int, j: int) -> float:
        """D for the unordered pair {i, j}; the lower input index is the first argument"""
        if i > j:
            i, j = j, i
        return 1.0 - float(self.values[i, j])

    @property
    def dissimilarity(self) -> np.ndarray:
        return 1.0 - self.values

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=list(self.labels), columns=list(self.labels))

    def timings_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.timings * 1000.0, index=list(self.labels), columns=list(self.labels))


def _as_spec(spec: SpecLike) -> MetricSpec:
    if isinstance(spec, MetricSpec):
        return spec
    return MetricSpec.parse(spec) if isinstance(spec, str) else MetricSpec.single(spec)


def _feature_cost(profile: PlanProfile, metrics: Sequence[MetricId]) -> float:
    start = time.perf_counter()
    profile.warm(metrics)
    return time.perf_counter() - start


def build_profiles(plans: Sequence[Plan], task: PlanningTask) -> List[PlanProfile]:
    """Validate every plan, in input order; the first invalid one aborts"""
    labels = [plan.label for plan in plans]
    duplicates = sorted({label for label in labels if labels.count(label) > 1})
    if duplicates:
        raise SelectionError(f"duplicate plan labels: {', '.join(duplicates)}")
    return [PlanProfile.build(plan, task) for plan in plans]


def matrix_of_profiles(profiles: Sequence[PlanProfile], spec: SpecLike, workers: int = 1) -> SimilarityMatrix:
    spec = _as_spec(spec)
    n = len(profiles)
    # features are built once per plan before any worker reads them
    costs = [_feature_cost(profile, spec.metrics) for profile in profiles]

    if spec.symmetric:
        cells = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        cells = [(i, j) for i in range(n) for j in range(n) if i != j]

    def evaluate(cell: Tuple[int, int]) -> Tuple[float, float]:
        i, j = cell
        start = time.perf_counter()
        value = spec.evaluate(profiles[i], profiles[j])
        return value, time.perf_counter() - start + costs[i] + costs[j]

    if workers > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, cells))
    else:
        results = [evaluate(cell) for cell in cells]

    values = np.eye(n, dtype=float)
    timings = np.zeros((n, n), dtype=float)
    for (i, j), (value, elapsed) in zip(cells, results):
        values[i, j] = value
        timings[i, j] = elapsed
        if spec.symmetric:
            values[j, i] = value
            timings[j, i] = elapsed

    labels = tuple(profile.label for profile in profiles)
    logger.debug(f"{spec.name}: {n}x{n} matrix over {len(cells)} cells with {workers} worker(s)")
    return SimilarityMatrix(labels, spec.name, values, timings)


def pairwise_matrix(plans: Sequence[Plan], task: PlanningTask, spec: SpecLike, workers: int = 1) -> SimilarityMatrix:
    """Full similarity matrix; cells are independent so the result does not depend on `workers`"""
    if workers < 1:
        raise SelectionError(f"workers must be positive, got {workers}")
    return matrix_of_profiles(build_profiles(plans, task), spec, workers)


def _pair_distances(matrix: SimilarityMatrix, indices: Sequence[int]) -> List[float]:
    return [matrix.pair_distance(i, j) for i, j in combinations(sorted(indices), 2)]


def matrix_diversity(matrix: SimilarityMatrix, mode: Union[DiversityMode, str] = DiversityMode.AVERAGE,
                     labels: Sequence[str] = ()) -> float:
    """Average or minimum D over the unordered pairs of `labels` (all plans by default)"""
    mode = DiversityMode(mode)
    indices = [matrix.index(label) for label in labels] if labels else list(range(len(matrix)))
    if len(indices) < 2:
        raise SelectionError("diversity needs at least 2 plans")
    distances = _pair_distances(matrix, indices)
    if mode is DiversityMode.MINIMUM:
        return min(distances)
    return float(np.mean(distances))


def diversity_score(plans: Sequence[Plan], task: PlanningTask, spec: SpecLike,
                    mode: Union[DiversityMode, str] = DiversityMode.AVERAGE, workers: int = 1) -> float:
    if len(plans) < 2:
        raise SelectionError("diversity needs at least 2 plans")
    return matrix_diversity(pairwise_matrix(plans, task, spec, workers), mode)


def select_from_matrix(matrix: SimilarityMatrix, k: int) -> Tuple[str, ...]:
    """
    Greedy max-min selection of k labels

    Seeds with the most distant pair (ties to the smallest label pair), then
    repeatedly adds the plan whose minimum distance to the selection is
    largest (ties to the smallest label).
    """
    n = len(matrix)
    if not 1 <= k <= n:
        raise SelectionError(f"k must be between 1 and {n}, got {k}")
    labels = matrix.labels
    if k == 1:
        return (min(labels),)

    def pair_key(pair: Tuple[int, int]):
        i, j = pair
        return (-matrix.pair_distance(i, j), tuple(sorted((labels[i], labels[j]))))

    seed = min(combinations(range(n), 2), key=pair_key)
    selected = sorted(seed, key=lambda index: labels[index])
    remaining = [index for index in range(n) if index not in selected]

    while len(selected) < k:
        def candidate_key(index: int):
            nearest = min(matrix.pair_distance(index, chosen) for chosen in selected)
            return (-nearest, labels[index])

        best = min(remaining, key=candidate_key)
        selected.append(best)
        remaining.remove(best)

    return tuple(labels[index] for index in selected)


def select_diverse(plans: Sequence[Plan], task: PlanningTask, spec: SpecLike, k: int,
                   workers: int = 1) -> List[str]:
    """Labels of k plans chosen greedily to be mutually distant under `spec`"""
    if not 1 <= k <= len(plans):
        raise SelectionError(f"k must be between 1 and {len(plans)}, got {k}")
    matrix = pairwise_matrix(plans, task, spec, workers)
    chosen = select_from_matrix(matrix, k)
    score = matrix_diversity(matrix, DiversityMode.MINIMUM, chosen) if k > 1 else 0.0
    structured_logger.log_selection(matrix.metric, k, list(chosen), score, DiversityMode.MINIMUM.value)
    return list(chosen)


def summarize(matrix: SimilarityMatrix, labels: Sequence[str]) -> Dict[str, float]:
    """Average and minimum D of a selection"""
    if len(labels) < 2:
        return {"average": 0.0, "minimum": 0.0}
    return {mode.value: matrix_diversity(matrix, mode, labels) for mode in DiversityMode}

"""Tests for selection.py."""

import random
from itertools import combinations

import numpy as np
import pytest

from plandiv.planning.errors import InvalidPlanError, SelectionError
from plandiv.planning.ground_sim import all_groundings, random_walk
from plandiv.planning.metrics import MetricId, MetricSpec, delta_sgo, delta_uniqueness
from plandiv.planning.pddl_core import Plan
from plandiv.planning.selection import (
    DiversityMode,
    SimilarityMatrix,
    diversity_score,
    matrix_diversity,
    pairwise_matrix,
    select_diverse,
    select_from_matrix,
    summarize,
)

from tests.conftest import plan_of


def _matrix(labels, distances):
    """Symmetric similarity matrix from unordered-pair distances"""
    n = len(labels)
    values = np.eye(n)
    for (i, j), distance in distances.items():
        values[i, j] = values[j, i] = 1.0 - distance
    return SimilarityMatrix(tuple(labels), "test", values, np.zeros((n, n)))


def _random_plans(task, count, seed):
    rng = random.Random(seed)
    groundings = all_groundings(task.domain, task.problem)
    plans = {}
    while len(plans) < count:
        plan = random_walk(task.domain, task.problem, rng, 12, groundings=groundings)
        if plan is not None and plan.signatures not in {p.signatures for p in plans.values()}:
            label = f"walk-{len(plans)}"
            plans[label] = Plan(plan.steps, name=label)
    return list(plans.values())


def test_single_plan_matrix(rover_task, rover_plans):
    matrix = pairwise_matrix(rover_plans[:1], rover_task, "sgo")
    assert matrix.values.tolist() == [[1.0]]
    assert matrix.labels == ("rover-a",)


def test_identical_plans_matrix(depots_task):
    plan = plan_of(depots_task, "depots", "plans", "truck1-tour.plan")
    twin = Plan(plan.steps, name="twin")
    matrix = pairwise_matrix([plan, twin], depots_task, "actions")
    assert matrix.values.tolist() == [[1.0, 1.0], [1.0, 1.0]]
    assert diversity_score([plan, twin], depots_task, "actions") == 0.0


def test_matrix_matches_pairwise_calls(symmetric_task, symmetric_plans):
    plans = list(symmetric_plans.values())
    matrix = pairwise_matrix(plans, symmetric_task, MetricId.SGO)
    for i, pa in enumerate(plans):
        for j, pb in enumerate(plans):
            assert matrix.values[i, j] == pytest.approx(float(delta_sgo(pa, pb, symmetric_task).value))
    assert matrix.value("truck-a", "p1-first") == pytest.approx(2 / 3)
    assert matrix.metric == "sgo"
    assert (matrix.timings >= 0).all()


def test_uniqueness_cells_follow_argument_order(symmetric_task, symmetric_plans):
    plans = list(symmetric_plans.values())
    matrix = pairwise_matrix(plans, symmetric_task, "uniqueness")
    for i, pa in enumerate(plans):
        for j, pb in enumerate(plans):
            assert matrix.values[i, j] == float(delta_uniqueness(pa, pb, symmetric_task).value)


def test_diversity_modes():
    matrix = _matrix(["a", "b", "c"], {(0, 1): 0.2, (0, 2): 0.4, (1, 2): 0.6})
    assert matrix_diversity(matrix, DiversityMode.AVERAGE) == pytest.approx(0.4)
    assert matrix_diversity(matrix, "minimum") == pytest.approx(0.2)
    assert matrix_diversity(matrix, "minimum", ["b", "c"]) == pytest.approx(0.6)
    assert summarize(matrix, ["a"]) == {"average": 0.0, "minimum": 0.0}
    with pytest.raises(SelectionError):
        matrix_diversity(matrix, "average", ["a"])


def test_maximally_different_plans(symmetric_task, symmetric_plans):
    plans = [symmetric_plans["truck-a"], symmetric_plans["truck-b"]]
    assert diversity_score(plans, symmetric_task, "flex") == pytest.approx(1.0)
    with pytest.raises(SelectionError):
        diversity_score(plans[:1], symmetric_task, "flex")


def test_select_prefers_outlier():
    matrix = _matrix(["p", "q", "r"], {(0, 1): 0.0, (0, 2): 1.0, (1, 2): 1.0})
    assert select_from_matrix(matrix, 2) == ("p", "r")


def test_select_ties_and_edges():
    matrix = _matrix(["c", "a", "b"], {(0, 1): 0.5, (0, 2): 0.5, (1, 2): 0.5})
    assert select_from_matrix(matrix, 1) == ("a",)
    assert select_from_matrix(matrix, 2) == ("a", "b")
    assert set(select_from_matrix(matrix, 3)) == {"a", "b", "c"}
    with pytest.raises(SelectionError):
        select_from_matrix(matrix, 0)
    with pytest.raises(SelectionError):
        select_from_matrix(matrix, 4)


def test_select_symmetric_fixture(symmetric_task, symmetric_plans):
    """The odd plan out is chosen over the symmetric pair."""
    chosen = select_diverse(list(symmetric_plans.values()), symmetric_task, "sgo", 2)
    assert chosen == ["p1-first", "truck-a"]
    assert select_diverse(list(symmetric_plans.values()), symmetric_task, "sgo", 3) == [
        "p1-first", "truck-a", "truck-b"]


def test_greedy_against_exhaustive(blocks_task):
    plans = _random_plans(blocks_task, 7, seed=3)
    spec = MetricSpec.parse("actions=1,sgo=1")
    matrix = pairwise_matrix(plans, blocks_task, spec)
    for k in (2, 3, 4):
        chosen = select_from_matrix(matrix, k)
        assert len(set(chosen)) == k
        greedy = matrix_diversity(matrix, "minimum", chosen)
        best = max(matrix_diversity(matrix, "minimum", subset) for subset in combinations(matrix.labels, k))
        assert greedy <= best + 1e-12
        if k == 2:
            assert greedy == pytest.approx(best)
        # replacing the last pick never improves the minimum distance
        for other in set(matrix.labels) - set(chosen):
            swapped = list(chosen[:-1]) + [other]
            assert greedy >= matrix_diversity(matrix, "minimum", swapped) - 1e-12


def test_deterministic_across_workers(blocks_task):
    plans = _random_plans(blocks_task, 6, seed=11)
    for metric in MetricId:
        sequential = pairwise_matrix(plans, blocks_task, metric, workers=1)
        parallel = pairwise_matrix(plans, blocks_task, metric, workers=4)
        assert np.array_equal(sequential.values, parallel.values)
    spec = MetricSpec.parse("flex=1,states=2")
    assert select_diverse(plans, blocks_task, spec, 3, workers=1) == select_diverse(plans, blocks_task, spec, 3, workers=4)


def test_errors(depots_task, symmetric_task, symmetric_plans):
    plans = list(symmetric_plans.values())
    with pytest.raises(SelectionError):
        pairwise_matrix(plans, symmetric_task, "sgo", workers=0)
    with pytest.raises(SelectionError):
        pairwise_matrix(plans + plans[:1], symmetric_task, "sgo")
    with pytest.raises(SelectionError):
        select_diverse(plans, symmetric_task, "sgo", 4)
    broken = plan_of(depots_task, "depots", "plans", "broken.plan")
    good = plan_of(depots_task, "depots", "plans", "truck1-tour.plan")
    with pytest.raises(InvalidPlanError) as info:
        pairwise_matrix([good, broken], depots_task, "actions")
    assert "broken.plan" in str(info.value)


def test_frames(symmetric_task, symmetric_plans):
    matrix = pairwise_matrix(list(symmetric_plans.values()), symmetric_task, "actions")
    frame = matrix.to_frame()
    assert list(frame.columns) == ["truck-a", "truck-b", "p1-first"]
    assert frame.loc["truck-a", "truck-b"] == pytest.approx(1 / 3)
    assert matrix.timings_frame().shape == (3, 3)
    assert matrix.dissimilarity[0, 1] == pytest.approx(2 / 3)

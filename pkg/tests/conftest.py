"""Shared fixtures: PDDL tasks and plans under tests/fixtures."""

from pathlib import Path

import pytest

from plandiv.planning.pddl_core import PlanningTask, load_plan_file, load_task_files

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_path(*parts: str) -> Path:
    return FIXTURES.joinpath(*parts)


def plan_of(task: PlanningTask, *parts: str):
    return load_plan_file(fixture_path(*parts), task)


@pytest.fixture(scope="session")
def depots_task() -> PlanningTask:
    return load_task_files(fixture_path("depots", "domain.pddl"), fixture_path("depots", "pfile1.pddl"))


@pytest.fixture(scope="session")
def crates6_task() -> PlanningTask:
    return load_task_files(fixture_path("depots", "domain.pddl"), fixture_path("depots", "crates6.pddl"))


@pytest.fixture(scope="session")
def rover_task() -> PlanningTask:
    return load_task_files(fixture_path("rover", "domain.pddl"), fixture_path("rover", "problem.pddl"))


@pytest.fixture(scope="session")
def symmetric_task() -> PlanningTask:
    return load_task_files(fixture_path("logistics", "domain.pddl"), fixture_path("logistics", "symmetric.pddl"))


@pytest.fixture(scope="session")
def reorder_task() -> PlanningTask:
    return load_task_files(fixture_path("logistics", "domain.pddl"), fixture_path("logistics", "reorder.pddl"))


@pytest.fixture(scope="session")
def switches_task() -> PlanningTask:
    return load_task_files(fixture_path("switches", "domain.pddl"), fixture_path("switches", "problem.pddl"))


@pytest.fixture(scope="session")
def blocks_task() -> PlanningTask:
    return load_task_files(fixture_path("blocksworld", "domain.pddl"), fixture_path("blocksworld", "problem.pddl"))


@pytest.fixture(scope="session")
def satellite_task() -> PlanningTask:
    return load_task_files(fixture_path("satellite", "domain.pddl"), fixture_path("satellite", "problem.pddl"))


@pytest.fixture(scope="session")
def zenotravel_task() -> PlanningTask:
    return load_task_files(fixture_path("zenotravel", "domain.pddl"), fixture_path("zenotravel", "problem.pddl"))


@pytest.fixture
def rover_plans(rover_task):
    return plan_of(rover_task, "rover", "plans", "rover-a.plan"), plan_of(rover_task, "rover", "plans", "rover-b.plan")


@pytest.fixture
def symmetric_plans(symmetric_task):
    return {
        name: plan_of(symmetric_task, "logistics", "plans", f"{name}.plan")
        for name in ("truck-a", "truck-b", "p1-first")
    }


@pytest.fixture
def reorder_plans(reorder_task):
    return (
        plan_of(reorder_task, "logistics", "reorder-plans", "p1-then-p2.plan"),
        plan_of(reorder_task, "logistics", "reorder-plans", "p2-then-p1.plan"),
    )


@pytest.fixture
def satellite_plans(satellite_task):
    return {
        name: plan_of(satellite_task, "satellite", "plans", f"{name}.plan")
        for name in ("sat0-first", "sat1-first", "spare-instrument")
    }


@pytest.fixture
def zenotravel_plans(zenotravel_task):
    return {
        name: plan_of(zenotravel_task, "zenotravel", "plans", f"{name}.plan")
        for name in ("one-plane", "one-plane-swapped", "two-planes")
    }

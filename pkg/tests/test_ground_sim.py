"""Tests for ground_sim.py."""

import random
from dataclasses import replace

import pytest

from plandiv.planning.errors import GroundingError, InvalidPlanError, PreconditionError
from plandiv.planning.ground_sim import (
    GOAL,
    INIT,
    CausalLink,
    State,
    all_groundings,
    applicable_actions,
    apply,
    causal_links,
    ground,
    ground_action,
    initial_state,
    random_walk,
    require_valid,
    simulate,
    validate,
)
from plandiv.planning.pddl_core import Atom, Plan, parse_plan

from tests.conftest import plan_of


def test_valid_depots_plans(depots_task):
    for name in ("truck1-tour.plan", "two-trucks.plan"):
        plan = plan_of(depots_task, "depots", "plans", name)
        report = validate(plan, depots_task.domain, depots_task.problem)
        assert report.valid, report.reason
        assert report.failing_step is None
        assert report.missing_goals == ()


def test_broken_plan_reports_step_and_precondition(depots_task):
    """Steps are 0-based; the first unsatisfied precondition is named."""
    plan = plan_of(depots_task, "depots", "plans", "broken.plan")
    report = validate(plan, depots_task.domain, depots_task.problem)
    assert not report.valid
    assert report.failing_step == 2
    assert report.reason == "load(hoist0,crate1,truck1,depot0): precondition (at truck1 depot0) unsatisfied"
    assert report.to_dict()["failing_step"] == 2


def test_simulate_raises_with_step(depots_task):
    plan = plan_of(depots_task, "depots", "plans", "broken.plan")
    with pytest.raises(PreconditionError) as info:
        simulate(plan, depots_task.domain, depots_task.problem)
    assert info.value.step == 2
    assert info.value.literal.atom == Atom("at", ("truck1", "depot0"))
    assert "broken.plan" in info.value.diagnostic()


def test_simulate_prefixes(depots_task):
    """A prefix replays to a prefix of the trajectory; a failing step keeps the states before it."""
    dom, prob = depots_task.domain, depots_task.problem
    plan = plan_of(depots_task, "depots", "plans", "truck1-tour.plan")
    full = simulate(plan, dom, prob)
    for length in range(len(plan) + 1):
        part = simulate(plan.prefix(length), dom, prob)
        assert part.initial == full.initial
        assert part.post_states == full.post_states[:length]

    broken = plan_of(depots_task, "depots", "plans", "broken.plan")
    before = simulate(broken.prefix(2), dom, prob)
    assert len(before) == 2
    with pytest.raises(PreconditionError) as info:
        simulate(broken, dom, prob)
    assert info.value.step == len(before)
    # the failing step is inapplicable in the last state reached
    with pytest.raises(PreconditionError):
        apply(before.final, ground(broken, dom, prob)[2])


def test_missing_goals(depots_task):
    full = plan_of(depots_task, "depots", "plans", "truck1-tour.plan")
    report = validate(full.prefix(8), depots_task.domain, depots_task.problem)
    assert not report.valid
    assert report.failing_step is None
    assert report.missing_goals == (Atom("on", ("crate0", "pallet2")),)
    assert report.reason.startswith("goal not achieved")


def test_require_valid_raises(depots_task):
    full = plan_of(depots_task, "depots", "plans", "truck1-tour.plan")
    with pytest.raises(InvalidPlanError) as info:
        require_valid(full.prefix(3), depots_task.domain, depots_task.problem)
    assert info.value.report.missing_goals


def test_trajectory_lengths(depots_task):
    plan = plan_of(depots_task, "depots", "plans", "two-trucks.plan")
    trajectory = simulate(plan, depots_task.domain, depots_task.problem)
    assert len(trajectory) == len(plan) == 11
    assert trajectory.initial == initial_state(depots_task.problem)
    assert Atom("on", ("crate1", "pallet1")) in trajectory.final


def test_empty_plan(switches_task):
    plan = Plan()
    trajectory = simulate(plan, switches_task.domain, switches_task.problem)
    assert trajectory.final == trajectory.initial
    report = validate(plan, switches_task.domain, switches_task.problem)
    assert not report.valid
    assert report.missing_goals == (Atom("on", ("s1",)), Atom("on", ("s3",)))


def test_type_mismatch_is_grounding_error(depots_task):
    plan = parse_plan("(drive hoist0 depot0 distributor0)", depots_task.domain, depots_task.problem)
    with pytest.raises(GroundingError) as info:
        ground(plan, depots_task.domain, depots_task.problem)
    assert info.value.step == 0
    assert "type mismatch" in info.value.message
    report = validate(plan, depots_task.domain, depots_task.problem)
    assert report.failing_step == 0


def test_static_equality(symmetric_task):
    dom, prob = symmetric_task.domain, symmetric_task.problem
    with pytest.raises(GroundingError) as info:
        ground_action(dom.schema("drive"), ("ta", "l0", "l0"), dom, prob)
    assert "static equality violated" in info.value.message
    drive = ground_action(dom.schema("drive"), ("ta", "l0", "l1"), dom, prob)
    assert all(literal.atom.predicate != "=" for literal in drive.pre)


def test_negative_precondition(symmetric_task):
    dom, prob = symmetric_task.domain, symmetric_task.problem
    plan = parse_plan("(load p1 ta l0)\n(load p1 ta l0)", dom, prob)
    report = validate(plan, dom, prob)
    assert report.failing_step == 1
    assert report.reason == "load(p1,ta,l0): precondition (not (in p1 ta)) unsatisfied"


def test_delete_then_add(switches_task):
    """An atom in both add and delete lists is true afterwards."""
    dom, prob = switches_task.domain, switches_task.problem
    action = ground_action(dom.schema("turn-on"), ("s1",), dom, prob)
    weird = replace(action, pre=frozenset(), delete=action.add)
    state = apply(State.of([]), weird)
    assert Atom("on", ("s1",)) in state


def test_apply_checks_preconditions(switches_task):
    dom, prob = switches_task.domain, switches_task.problem
    turn_on = ground_action(dom.schema("turn-on"), ("s2",), dom, prob)
    with pytest.raises(PreconditionError):
        apply(initial_state(prob), turn_on)


def test_causal_links_include_init_and_goal(symmetric_task, symmetric_plans):
    links = causal_links(symmetric_plans["p1-first"], symmetric_task.domain, symmetric_task.problem)
    assert CausalLink(INIT, Atom("at", ("ta", "l0")), "load(p1,ta,l0)") in links
    assert CausalLink("load(p1,ta,l0)", Atom("in", ("p1", "ta")), "unload(p1,ta,l1)") in links
    assert CausalLink("drive(ta,l0,l1)", Atom("at", ("ta", "l1")), "unload(p1,ta,l1)") in links
    assert CausalLink("unload(p1,ta,l1)", Atom("pkg-at", ("p1", "l1")), GOAL) in links
    assert CausalLink("unload(p2,tc,l2)", Atom("pkg-at", ("p2", "l2")), GOAL) in links
    assert len(links) == 12


def test_goal_true_initially_links_to_init(switches_task):
    plan = parse_plan("(turn-on s1)\n(turn-on s3)", switches_task.domain, switches_task.problem)
    links = causal_links(plan, switches_task.domain, switches_task.problem)
    assert CausalLink(INIT, Atom("on", ("s2",)), GOAL) in links
    assert CausalLink("turn-on(s1)", Atom("on", ("s1",)), GOAL) in links
    # negative preconditions produce no links
    assert len(links) == 3


def test_causal_links_require_valid_plan(depots_task):
    plan = plan_of(depots_task, "depots", "plans", "broken.plan")
    with pytest.raises(InvalidPlanError):
        causal_links(plan, depots_task.domain, depots_task.problem)


def test_all_groundings_sorted_and_typed(symmetric_task):
    groundings = all_groundings(symmetric_task.domain, symmetric_task.problem)
    signatures = [action.signature for action in groundings]
    assert signatures == sorted(signatures)
    # load/unload: 2 packages x 3 trucks x 3 locations; drive: 3 trucks x 6 ordered location pairs
    assert len(groundings) == 18 + 18 + 18
    assert "drive(ta,l0,l0)" not in signatures


def test_applicable_actions(switches_task):
    dom, prob = switches_task.domain, switches_task.problem
    applicable = [action.signature for action in applicable_actions(initial_state(prob), dom, prob)]
    assert applicable == ["turn-off(s2)", "turn-on(s1)", "turn-on(s3)"]
    assert [a.signature for a in applicable_actions([], dom, prob)] == [
        "turn-on(s1)", "turn-on(s2)", "turn-on(s3)"]


def test_random_walk_is_seeded_and_valid(blocks_task):
    dom, prob = blocks_task.domain, blocks_task.problem
    groundings = all_groundings(dom, prob)
    first = random_walk(dom, prob, random.Random(7), max_steps=200, groundings=groundings)
    second = random_walk(dom, prob, random.Random(7), max_steps=200, groundings=groundings)
    assert first == second
    if first is not None:
        assert validate(first, dom, prob).valid


def test_random_walk_budget(blocks_task):
    assert random_walk(blocks_task.domain, blocks_task.problem, random.Random(0), max_steps=0) is None

"""
Grounding and Simulation
Ground plan steps, replay them from the initial state, validate plans and
extract causal links
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from plandiv.planning.errors import GroundingError, InvalidPlanError, PlanningError, PreconditionError
from plandiv.planning.pddl_core import (
    EQUALITY,
    ActionSchema,
    Atom,
    DomainModel,
    Literal,
    Plan,
    PlanStep,
    ProblemModel,
)
from plandiv.utils.logger import get_logger

logger = get_logger(__name__)

INIT = "INIT"
GOAL = "GOAL"


@dataclass(frozen=True)
class GroundedAction:
    """Schema instance; `signature` is its identity across plans"""

    signature: str
    name: str
    args: Tuple[str, ...]
    pre: FrozenSet[Literal]
    add: FrozenSet[Atom]
    delete: FrozenSet[Atom]

    @property
    def pre_pos(self) -> FrozenSet[Atom]:
        return frozenset(literal.atom for literal in self.pre if literal.positive)

    @property
    def pre_neg(self) -> FrozenSet[Atom]:
        return frozenset(literal.atom for literal in self.pre if not literal.positive)

    def __str__(self) -> str:
        return self.signature


@dataclass(frozen=True)
class State:
    atoms: FrozenSet[Atom] = frozenset()

    @classmethod
    def of(cls, atoms: Iterable[Atom]) -> "State":
        return cls(frozenset(atoms))

    @property
    def sorted_atoms(self) -> Tuple[Atom, ...]:
        return tuple(sorted(self.atoms))

    def satisfies(self, literal: Literal) -> bool:
        return (literal.atom in self.atoms) == literal.positive

    def __contains__(self, atom: Atom) -> bool:
        return atom in self.atoms

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.sorted_atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def __str__(self) -> str:
        return "{" + ", ".join(str(atom) for atom in self.sorted_atoms) + "}"


@dataclass(frozen=True)
class Trajectory:
    initial: State
    post_states: Tuple[State, ...] = ()

    @property
    def final(self) -> State:
        return self.post_states[-1] if self.post_states else self.initial

    def __len__(self) -> int:
        return len(self.post_states)


@dataclass(frozen=True, order=True)
class CausalLink:
    producer: str
    atom: Atom
    consumer: str

    def __str__(self) -> str:
        return f"{self.producer} --{self.atom}--> {self.consumer}"


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of `validate`; failures are data, never exceptions"""

    valid: bool
    failing_step: Optional[int] = None
    reason: Optional[str] = None
    missing_goals: Tuple[Atom, ...] = ()
    source: Optional[str] = field(default=None, compare=False)

    def to_dict(self) -> Dict[str, object]:
        return {
            "valid": self.valid,
            "failing_step": self.failing_step,
            "reason": self.reason,
            "missing_goals": [str(atom) for atom in self.missing_goals],
        }


def ground_action(schema: ActionSchema, args: Sequence[str], dom: DomainModel, prob: ProblemModel) -> GroundedAction:
    """
    Substitute constants for the parameters of one schema

    Equality literals are decided here and dropped; grounded add/delete
    lists follow delete-then-add semantics.
    """
    args = tuple(args)
    signature = f"{schema.name}({','.join(args)})"
    if len(args) != schema.arity:
        raise GroundingError(f"{signature}: expects {schema.arity} arguments, got {len(args)}")
    binding: Dict[str, str] = {}
    for param, arg in zip(schema.params, args):
        arg_type = prob.object_type(arg)
        if arg_type is None:
            raise GroundingError(f"{signature}: unknown constant {arg}")
        if not dom.is_subtype(arg_type, param.type):
            raise GroundingError(f"{signature}: type mismatch, {arg} is {arg_type} but {param.name} expects {param.type}")
        binding[param.name] = arg

    pre = set()
    for literal in schema.precond:
        atom = literal.atom.substitute(binding)
        if atom.predicate == EQUALITY:
            if (atom.args[0] == atom.args[1]) != literal.positive:
                raise GroundingError(f"{signature}: static equality violated: {Literal(atom, literal.positive)}")
            continue
        pre.add(Literal(atom, literal.positive))
    add = frozenset(atom.substitute(binding) for atom in schema.add)
    delete = frozenset(atom.substitute(binding) for atom in schema.delete) - add
    return GroundedAction(signature, schema.name, args, frozenset(pre), add, delete)


def _ground_step(step: PlanStep, dom: DomainModel, prob: ProblemModel) -> GroundedAction:
    schema = dom.schema(step.name)
    if schema is None:
        raise GroundingError(f"unknown action {step.name}", step=step.index)
    try:
        return ground_action(schema, step.args, dom, prob)
    except GroundingError as e:
        raise GroundingError(e.message, step=step.index) from None


def ground(plan: Plan, dom: DomainModel, prob: ProblemModel) -> List[GroundedAction]:
    """Ground each plan step; repeated steps share one GroundedAction"""
    cache: Dict[Tuple[str, Tuple[str, ...]], GroundedAction] = {}
    grounded = []
    for step in plan.steps:
        key = (step.name, step.args)
        if key not in cache:
            try:
                cache[key] = _ground_step(step, dom, prob)
            except GroundingError as e:
                e.source = plan.source
                raise
        grounded.append(cache[key])
    return grounded


def initial_state(prob: ProblemModel) -> State:
    return State(prob.init)


def apply(s: State, a: GroundedAction) -> State:
    """Apply `a` in `s`: (s minus delete) union add, after checking preconditions"""
    for literal in sorted(a.pre):
        if not s.satisfies(literal):
            raise PreconditionError(f"{a.signature}: precondition {literal} unsatisfied", literal=literal)
    return State((s.atoms - a.delete) | a.add)


def _replay(actions: Sequence[GroundedAction], start: State, source: Optional[str]) -> Trajectory:
    states = []
    current = start
    for index, action in enumerate(actions):
        try:
            current = apply(current, action)
        except PreconditionError as e:
            raise PreconditionError(e.message, literal=e.literal, step=index, source=source) from None
        states.append(current)
    return Trajectory(start, tuple(states))


def simulate(plan: Plan, dom: DomainModel, prob: ProblemModel) -> Trajectory:
    """Replay the plan from the initial state; the goal is not checked"""
    return _replay(ground(plan, dom, prob), initial_state(prob), plan.source)


def validate(plan: Plan, dom: DomainModel, prob: ProblemModel) -> ValidationReport:
    """Simulate and check the goal; never raises for invalid plans"""
    try:
        trajectory = simulate(plan, dom, prob)
    except GroundingError as e:
        # PreconditionError is a GroundingError and carries the step too
        return ValidationReport(False, e.step, e.message, source=plan.source)
    missing = tuple(goal for goal in prob.goal if goal not in trajectory.final)
    if missing:
        reason = "goal not achieved: " + " ".join(str(atom) for atom in missing)
        return ValidationReport(False, None, reason, missing, source=plan.source)
    return ValidationReport(True, source=plan.source)


def require_valid(plan: Plan, dom: DomainModel, prob: ProblemModel) -> Tuple[List[GroundedAction], Trajectory]:
    """Ground and simulate, raising InvalidPlanError unless the plan solves the task"""
    report = validate(plan, dom, prob)
    if not report.valid:
        step = f"step {report.failing_step}: " if report.failing_step is not None else ""
        raise InvalidPlanError(f"invalid plan: {step}{report.reason}", report=report, source=plan.source)
    actions = ground(plan, dom, prob)
    return actions, _replay(actions, initial_state(prob), plan.source)


def causal_links(plan: Plan, dom: DomainModel, prob: ProblemModel) -> FrozenSet[CausalLink]:
    """
    Producer/consumer links of a valid plan

    The producer of a precondition is the latest earlier step adding it, or
    INIT; every goal atom is linked to the GOAL token the same way.
    """
    actions, _ = require_valid(plan, dom, prob)
    return links_of(actions, prob)


def links_of(actions: Sequence[GroundedAction], prob: ProblemModel) -> FrozenSet[CausalLink]:
    latest_adder: Dict[Atom, str] = {atom: INIT for atom in prob.init}
    links = set()
    for action in actions:
        for atom in action.pre_pos:
            producer = latest_adder.get(atom)
            if producer is None:
                raise PlanningError(f"{action.signature}: no producer for {atom}; validate the plan first")
            links.add(CausalLink(producer, atom, action.signature))
        for atom in action.add:
            latest_adder[atom] = action.signature
    for goal in prob.goal:
        producer = latest_adder.get(goal)
        if producer is None:
            raise PlanningError(f"no producer for goal {goal}; validate the plan first")
        links.add(CausalLink(producer, goal, GOAL))
    return frozenset(links)


def all_groundings(dom: DomainModel, prob: ProblemModel) -> List[GroundedAction]:
    """Every well-typed grounding whose static equalities hold, in signature order"""
    groundings = []
    for schema in dom.schemas:
        candidates = [
            [obj.name for obj in prob.objects if dom.is_subtype(obj.type, param.type)]
            for param in schema.params
        ]
        for args in itertools.product(*candidates):
            try:
                action = ground_action(schema, args, dom, prob)
            except GroundingError:
                continue
            groundings.append(action)
    groundings.sort(key=lambda action: action.signature)
    return groundings


def applicable_actions(state: Union[State, Iterable[Atom]], dom: DomainModel, prob: ProblemModel,
                       groundings: Optional[Sequence[GroundedAction]] = None) -> List[GroundedAction]:
    """Groundings applicable in `state`, in signature order"""
    if not isinstance(state, State):
        state = State.of(state)
    if groundings is None:
        groundings = all_groundings(dom, prob)
    return [action for action in groundings if all(state.satisfies(literal) for literal in action.pre)]


def random_walk(dom: DomainModel, prob: ProblemModel, rng: random.Random, max_steps: int = 50,
                source: Optional[str] = None,
                groundings: Optional[Sequence[GroundedAction]] = None) -> Optional[Plan]:
    """
    Apply uniformly chosen applicable actions until the goal holds

    Returns None when the goal is not reached within `max_steps` or the walk
    hits a dead end.
    """
    if groundings is None:
        groundings = all_groundings(dom, prob)
    state = initial_state(prob)
    chosen: List[GroundedAction] = []
    while not all(goal in state for goal in prob.goal):
        if len(chosen) >= max_steps:
            return None
        candidates = applicable_actions(state, dom, prob, groundings)
        if not candidates:
            return None
        action = rng.choice(candidates)
        state = apply(state, action)
        chosen.append(action)
    return Plan.from_actions(((action.name,) + action.args for action in chosen), source)

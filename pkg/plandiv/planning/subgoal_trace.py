"""
Subgoal Traces
Encode goal atoms as symbols and record, step by step, which subgoal a plan
newly achieves
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass
from itertools import zip_longest
from typing import Dict, Sequence, Tuple, Union

from plandiv.planning.ground_sim import Trajectory, require_valid
from plandiv.planning.pddl_core import Atom, DomainModel, Plan, ProblemModel

NO_SUBGOAL = "X"
PAD = "#"
LETTERS = tuple(letter for letter in string.ascii_uppercase if letter != NO_SUBGOAL)
_TOKEN = re.compile(r"G\d+|\S")


@dataclass(frozen=True)
class SubgoalAlphabet:
    """Goal atom -> symbol, in textual goal order"""

    goals: Tuple[Atom, ...]
    symbols: Tuple[str, ...]

    @classmethod
    def for_goals(cls, goals: Sequence[Atom]) -> "SubgoalAlphabet":
        symbols = tuple(
            LETTERS[index] if index < len(LETTERS) else f"G{index + 1}"
            for index in range(len(goals))
        )
        return cls(tuple(goals), symbols)

    def symbol(self, goal: Atom) -> str:
        return self.symbols[self.goals.index(goal)]

    def as_dict(self) -> Dict[str, str]:
        return {symbol: str(goal) for symbol, goal in zip(self.symbols, self.goals)}

    def __len__(self) -> int:
        return len(self.goals)


@dataclass(frozen=True)
class SubgoalTrace:
    tokens: Tuple[str, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "SubgoalTrace":
        """Read a rendered trace back; `G<n>` symbols stay whole"""
        return cls(tuple(_TOKEN.findall(text)))

    def render(self) -> str:
        if all(len(token) == 1 for token in self.tokens):
            return "".join(self.tokens)
        return " ".join(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __str__(self) -> str:
        return self.render()


def subgoal_alphabet(prob: ProblemModel) -> SubgoalAlphabet:
    return SubgoalAlphabet.for_goals(prob.goal)


def trace_of(trajectory: Trajectory, alphabet: SubgoalAlphabet) -> SubgoalTrace:
    """
    One token per step: the lowest-indexed goal atom that is true and not yet
    reported, else X

    Goals true initially count as reported; every goal is reported once.
    """
    reported = {goal for goal in alphabet.goals if goal in trajectory.initial}
    tokens = []
    for state in trajectory.post_states:
        token = NO_SUBGOAL
        for goal, symbol in zip(alphabet.goals, alphabet.symbols):
            if goal not in reported and goal in state:
                reported.add(goal)
                token = symbol
                break
        tokens.append(token)
    return SubgoalTrace(tuple(tokens))


def subgoal_trace(plan: Plan, dom: DomainModel, prob: ProblemModel) -> SubgoalTrace:
    """Subgoal trace of a valid plan"""
    _, trajectory = require_valid(plan, dom, prob)
    return trace_of(trajectory, subgoal_alphabet(prob))


def _as_trace(trace: Union[SubgoalTrace, str]) -> SubgoalTrace:
    return SubgoalTrace.parse(trace) if isinstance(trace, str) else trace


def hamming(t1: Union[SubgoalTrace, str], t2: Union[SubgoalTrace, str]) -> int:
    """Positions where the traces differ; the shorter one is padded with '#'"""
    a, b = _as_trace(t1), _as_trace(t2)
    return sum(1 for x, y in zip_longest(a.tokens, b.tokens, fillvalue=PAD) if x != y)



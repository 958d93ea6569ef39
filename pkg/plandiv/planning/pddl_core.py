"""
PDDL Core
Parse STRIPS PDDL domains, problems and IPC plan files into immutable models

Supported requirements: :strips, :typing, :equality, :negative-preconditions.
Identifiers are lower-cased; positions in diagnostics are 1-based.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from plandiv.planning.errors import (
    DomainValidationError,
    PDDLSyntaxError,
    PlanParseError,
    UnsupportedFeatureError,
    UnsupportedGoalError,
    UnsupportedRequirementError,
)
from plandiv.utils.logger import get_logger

logger = get_logger(__name__)

SUPPORTED_REQUIREMENTS = frozenset({":strips", ":typing", ":equality", ":negative-preconditions"})
ROOT_TYPE = "object"
EQUALITY = "="
UNSUPPORTED_CONNECTIVES = frozenset({"or", "imply", "exists", "forall", "when", "either"})
UNSUPPORTED_EFFECTS = frozenset({"when", "forall", "increase", "decrease", "assign", "scale-up", "scale-down"})

TextInput = Union[str, bytes]

# whitespace | comment | parens | any other run of characters
_TOKEN_RE = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")


# ---------------------------------------------------------------------------
# S-expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Symbol:
    text: str
    line: int
    column: int


@dataclass(frozen=True)
class SList:
    items: Tuple["SExpr", ...]
    line: int
    column: int

    @property
    def head(self) -> Optional[str]:
        if self.items and isinstance(self.items[0], Symbol):
            return self.items[0].text
        return None


SExpr = Union[Symbol, SList]


def _decode(text: TextInput, source: Optional[str]) -> str:
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as e:
            raise PDDLSyntaxError(f"input is not valid UTF-8 (byte offset {e.start})", source=source) from None
    return text.lstrip("\ufeff")


def _tokenize(text: str) -> Iterator[Tuple[str, int, int]]:
    line, line_start = 1, 0
    for match in _TOKEN_RE.finditer(text):
        token = match.group()
        start = match.start()
        if token[0].isspace() or token[0] == ";":
            newlines = token.count("\n")
            if newlines:
                line += newlines
                line_start = start + token.rfind("\n") + 1
            continue
        yield token, line, start - line_start + 1


def read_sexprs(text: TextInput, source: Optional[str] = None) -> List[SExpr]:
    """Read every top-level s-expression; symbols are lower-cased"""
    text = _decode(text, source)
    stack: List[Tuple[List[SExpr], int, int]] = []
    top: List[SExpr] = []
    for token, line, column in _tokenize(text):
        if token == "(":
            stack.append((top, line, column))
            top = []
        elif token == ")":
            if not stack:
                raise PDDLSyntaxError("unexpected ')'", line, column, source)
            parent, open_line, open_column = stack.pop()
            parent.append(SList(tuple(top), open_line, open_column))
            top = parent
        else:
            top.append(Symbol(token.lower(), line, column))
    if stack:
        _, line, column = stack[-1]
        raise PDDLSyntaxError("unclosed '('", line, column, source)
    return top


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Atom:
    """Predicate applied to constants (ground) or variables (lifted)"""

    predicate: str
    args: Tuple[str, ...] = ()

    def substitute(self, binding: Dict[str, str]) -> "Atom":
        return Atom(self.predicate, tuple(binding.get(arg, arg) for arg in self.args))

    @property
    def is_ground(self) -> bool:
        return not any(arg.startswith("?") for arg in self.args)

    def __str__(self) -> str:
        return "(" + " ".join((self.predicate,) + self.args) + ")"


@dataclass(frozen=True, order=True)
class Literal:
    atom: Atom
    positive: bool = True

    @property
    def is_equality(self) -> bool:
        return self.atom.predicate == EQUALITY

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"(not {self.atom})"


@dataclass(frozen=True)
class TypedName:
    name: str
    type: str = ROOT_TYPE


@dataclass(frozen=True)
class PredicateDef:
    name: str
    params: Tuple[TypedName, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class ActionSchema:
    """Lifted STRIPS action; `delete` is the delete list"""

    name: str
    params: Tuple[TypedName, ...]
    precond: FrozenSet[Literal]
    add: FrozenSet[Atom]
    delete: FrozenSet[Atom]

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class DomainModel:
    name: str
    requirements: FrozenSet[str]
    types: Dict[str, str]
    predicates: Tuple[PredicateDef, ...]
    schemas: Tuple[ActionSchema, ...]
    constants: Tuple[TypedName, ...] = ()

    @cached_property
    def _schema_index(self) -> Dict[str, ActionSchema]:
        return {schema.name: schema for schema in self.schemas}

    @cached_property
    def _predicate_index(self) -> Dict[str, PredicateDef]:
        return {predicate.name: predicate for predicate in self.predicates}

    def schema(self, name: str) -> Optional[ActionSchema]:
        return self._schema_index.get(name)

    def predicate(self, name: str) -> Optional[PredicateDef]:
        return self._predicate_index.get(name)

    def has_type(self, name: str) -> bool:
        return name == ROOT_TYPE or name in self.types

    def is_subtype(self, child: str, ancestor: str) -> bool:
        """True when `child` equals `ancestor` or descends from it"""
        if ancestor == ROOT_TYPE:
            return True
        current: Optional[str] = child
        while current is not None and current != ROOT_TYPE:
            if current == ancestor:
                return True
            current = self.types.get(current)
        return False


@dataclass(frozen=True)
class ProblemModel:
    """Task instance; `objects` includes the domain constants"""

    name: str
    domain_name: str
    objects: Tuple[TypedName, ...]
    init: FrozenSet[Atom]
    goal: Tuple[Atom, ...]

    @cached_property
    def _object_index(self) -> Dict[str, str]:
        return {obj.name: obj.type for obj in self.objects}

    def object_type(self, name: str) -> Optional[str]:
        return self._object_index.get(name)


@dataclass(frozen=True)
class PlanStep:
    index: int
    name: str
    args: Tuple[str, ...] = ()
    line: int = field(default=0, compare=False)

    @property
    def signature(self) -> str:
        return f"{self.name}({','.join(self.args)})"

    def __str__(self) -> str:
        return "(" + " ".join((self.name,) + self.args) + ")"


@dataclass(frozen=True)
class Plan:
    steps: Tuple[PlanStep, ...] = ()
    source: Optional[str] = field(default=None, compare=False)
    name: Optional[str] = field(default=None, compare=False)

    @classmethod
    def from_actions(cls, actions: Iterable[Sequence[str]], source: Optional[str] = None,
                     name: Optional[str] = None) -> "Plan":
        """Build a plan from (name, arg, ...) sequences"""
        steps = tuple(
            PlanStep(index, str(action[0]).lower(), tuple(str(arg).lower() for arg in action[1:]))
            for index, action in enumerate(actions)
        )
        return cls(steps, source, name)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        return Path(self.source).stem if self.source else "plan"

    @property
    def signatures(self) -> FrozenSet[str]:
        return frozenset(step.signature for step in self.steps)

    def prefix(self, length: int) -> "Plan":
        return Plan(self.steps[:length], self.source, self.name)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[PlanStep]:
        return iter(self.steps)


@dataclass(frozen=True)
class PlanningTask:
    domain: DomainModel
    problem: ProblemModel


# ---------------------------------------------------------------------------
# Shared parsing helpers
# ---------------------------------------------------------------------------

class _Context:
    """Source name plus domain facts needed while checking formulas"""

    def __init__(self, source: Optional[str], requirements: FrozenSet[str] = frozenset()):
        self.source = source
        self.requirements = requirements

    def error(self, cls, message: str, node: Optional[SExpr] = None) -> Exception:
        line = node.line if node is not None else 0
        column = node.column if node is not None else 0
        return cls(message, line, column, self.source)


def _expect_list(node: SExpr, what: str, ctx: _Context) -> SList:
    if not isinstance(node, SList):
        raise ctx.error(PDDLSyntaxError, f"expected '(' to open {what}, got '{node.text}'", node)
    return node


def _expect_symbol(node: SExpr, what: str, ctx: _Context) -> Symbol:
    if not isinstance(node, Symbol):
        raise ctx.error(PDDLSyntaxError, f"expected {what}, got a list", node)
    return node


def _expect_name(node: SExpr, what: str, ctx: _Context) -> Symbol:
    symbol = _expect_symbol(node, what, ctx)
    if symbol.text[0] in "?:-" or symbol.text == EQUALITY:
        raise ctx.error(PDDLSyntaxError, f"invalid {what} '{symbol.text}'", symbol)
    return symbol


def _expect_variable(node: SExpr, ctx: _Context) -> Symbol:
    symbol = _expect_symbol(node, "variable", ctx)
    if not symbol.text.startswith("?") or len(symbol.text) == 1:
        raise ctx.error(PDDLSyntaxError, f"expected variable, got '{symbol.text}'", symbol)
    return symbol


def _typed_list(items: Sequence[SExpr], what: str, ctx: _Context) -> List[Tuple[Symbol, str]]:
    """Parse `a b - t c` into [(a, t), (b, t), (c, object)]"""
    result: List[Tuple[Symbol, str]] = []
    pending: List[Symbol] = []
    index = 0
    while index < len(items):
        node = items[index]
        if isinstance(node, SList):
            raise ctx.error(PDDLSyntaxError, f"unexpected list in {what}", node)
        if node.text == "-":
            if index + 1 >= len(items):
                raise ctx.error(PDDLSyntaxError, f"missing type after '-' in {what}", node)
            type_node = items[index + 1]
            if isinstance(type_node, SList):
                raise ctx.error(UnsupportedFeatureError, "unsupported type expression", type_node)
            if not pending:
                raise ctx.error(PDDLSyntaxError, f"type '{type_node.text}' without names in {what}", type_node)
            result.extend((name, type_node.text) for name in pending)
            pending = []
            index += 2
            continue
        pending.append(node)
        index += 1
    result.extend((name, ROOT_TYPE) for name in pending)
    return result


def _single_define(forms: List[SExpr], kind: str, ctx: _Context) -> SList:
    if not forms:
        raise ctx.error(PDDLSyntaxError, f"empty {kind} file")
    if len(forms) > 1:
        raise ctx.error(PDDLSyntaxError, f"unexpected content after {kind} definition", forms[1])
    define = _expect_list(forms[0], f"{kind} definition", ctx)
    if define.head != "define":
        raise ctx.error(PDDLSyntaxError, "expected (define ...)", define)
    if len(define.items) < 2:
        raise ctx.error(PDDLSyntaxError, f"missing ({kind} <name>)", define)
    header = _expect_list(define.items[1], f"{kind} header", ctx)
    if header.head != kind or len(header.items) != 2:
        raise ctx.error(PDDLSyntaxError, f"expected ({kind} <name>)", header)
    return define


def _sections(define: SList, kind: str, repeatable: FrozenSet[str], ctx: _Context) -> Dict[str, List[SList]]:
    sections: Dict[str, List[SList]] = {}
    for node in define.items[2:]:
        section = _expect_list(node, f"{kind} section", ctx)
        key = section.head
        if key is None or not key.startswith(":"):
            raise ctx.error(PDDLSyntaxError, f"expected {kind} section keyword", section)
        if key in sections and key not in repeatable:
            raise ctx.error(PDDLSyntaxError, f"duplicate section {key}", section)
        sections.setdefault(key, []).append(section)
    return sections


def _check_requirements(section: SList, ctx: _Context) -> FrozenSet[str]:
    flags = set()
    for node in section.items[1:]:
        flag = _expect_symbol(node, "requirement", ctx)
        if not flag.text.startswith(":"):
            raise ctx.error(PDDLSyntaxError, f"invalid requirement '{flag.text}'", flag)
        if flag.text not in SUPPORTED_REQUIREMENTS:
            raise ctx.error(UnsupportedRequirementError, f"unsupported requirement {flag.text}", flag)
        flags.add(flag.text)
    return frozenset(flags)


# ---------------------------------------------------------------------------
# Domain
# ---------------------------------------------------------------------------

_DOMAIN_SECTIONS = frozenset({":requirements", ":types", ":constants", ":predicates", ":action"})
_UNSUPPORTED_DOMAIN_SECTIONS = frozenset({":functions", ":durative-action", ":derived", ":axiom", ":process", ":event"})


def parse_domain(text: TextInput, source: Optional[str] = None) -> DomainModel:
    """
    Parse a PDDL domain

    Args:
        text: Domain text (str or UTF-8 bytes)
        source: Name used in diagnostics, typically the file path

    Returns:
        Validated DomainModel
    """
    ctx = _Context(source)
    try:
        define = _single_define(read_sexprs(text, source), "domain", ctx)
        return _build_domain(define, ctx)
    except RecursionError:
        raise PDDLSyntaxError("formula nesting too deep", source=source) from None


def _build_domain(define: SList, ctx: _Context) -> DomainModel:
    name = _expect_name(define.items[1].items[1], "domain name", ctx).text
    sections = _sections(define, "domain", frozenset({":action"}), ctx)
    for key, nodes in sections.items():
        if key in _UNSUPPORTED_DOMAIN_SECTIONS:
            raise ctx.error(UnsupportedFeatureError, f"unsupported section {key}", nodes[0])
        if key not in _DOMAIN_SECTIONS:
            raise ctx.error(PDDLSyntaxError, f"unknown domain section {key}", nodes[0])

    requirements = frozenset({":strips"})
    if ":requirements" in sections:
        requirements = requirements | _check_requirements(sections[":requirements"][0], ctx)
    ctx.requirements = requirements

    types = _parse_types(sections.get(":types", []), ctx)
    constants = _parse_objects(sections.get(":constants", []), types, "constant", ctx)
    predicates = _parse_predicates(sections.get(":predicates", []), types, ctx)
    predicate_index = {predicate.name: predicate for predicate in predicates}
    constant_names = {constant.name for constant in constants}

    schemas: List[ActionSchema] = []
    seen: Dict[str, SList] = {}
    for node in sections.get(":action", []):
        schema = _parse_action(node, types, predicate_index, constant_names, ctx)
        if schema.name in seen:
            raise ctx.error(DomainValidationError, f"duplicate action {schema.name}", node)
        seen[schema.name] = node
        schemas.append(schema)

    domain = DomainModel(
        name=name,
        requirements=requirements,
        types=types,
        predicates=tuple(predicates),
        schemas=tuple(schemas),
        constants=tuple(constants),
    )
    logger.debug(f"Parsed domain {name}: {len(predicates)} predicates, {len(schemas)} schemas")
    return domain


def _parse_types(nodes: List[SList], ctx: _Context) -> Dict[str, str]:
    types: Dict[str, str] = {}
    symbols: Dict[str, Symbol] = {}
    for node in nodes:
        for symbol, parent in _typed_list(node.items[1:], ":types", ctx):
            _expect_name(symbol, "type name", ctx)
            if symbol.text == ROOT_TYPE:
                if parent != ROOT_TYPE:
                    raise ctx.error(DomainValidationError, "type object cannot have a parent", symbol)
                continue
            if symbol.text in types:
                raise ctx.error(DomainValidationError, f"duplicate type {symbol.text}", symbol)
            types[symbol.text] = parent
            symbols[symbol.text] = symbol
    for type_name, parent in types.items():
        if parent != ROOT_TYPE and parent not in types:
            raise ctx.error(DomainValidationError, f"undeclared type {parent}", symbols[type_name])
    for type_name in types:
        visited = set()
        current = type_name
        while current != ROOT_TYPE:
            if current in visited:
                raise ctx.error(DomainValidationError, f"cyclic type hierarchy at {type_name}", symbols[type_name])
            visited.add(current)
            current = types[current]
    return types


def _check_type(type_name: str, types: Dict[str, str], node: SExpr, ctx: _Context) -> None:
    if type_name != ROOT_TYPE and type_name not in types:
        raise ctx.error(DomainValidationError, f"undeclared type {type_name}", node)


def _parse_objects(nodes: List[SList], types: Dict[str, str], what: str, ctx: _Context,
                   existing: Sequence[TypedName] = ()) -> List[TypedName]:
    objects: List[TypedName] = []
    seen = {obj.name for obj in existing}
    for node in nodes:
        for symbol, type_name in _typed_list(node.items[1:], node.head or what, ctx):
            _expect_name(symbol, f"{what} name", ctx)
            _check_type(type_name, types, symbol, ctx)
            if symbol.text in seen:
                raise ctx.error(DomainValidationError, f"duplicate {what} {symbol.text}", symbol)
            seen.add(symbol.text)
            objects.append(TypedName(symbol.text, type_name))
    return objects


def _parse_predicates(nodes: List[SList], types: Dict[str, str], ctx: _Context) -> List[PredicateDef]:
    predicates: List[PredicateDef] = []
    seen = set()
    for section in nodes:
        for node in section.items[1:]:
            declaration = _expect_list(node, "predicate declaration", ctx)
            if not declaration.items:
                raise ctx.error(PDDLSyntaxError, "empty predicate declaration", declaration)
            name = _expect_name(declaration.items[0], "predicate name", ctx)
            if name.text in seen:
                raise ctx.error(DomainValidationError, f"duplicate predicate {name.text}", name)
            seen.add(name.text)
            params = []
            for variable, type_name in _typed_list(declaration.items[1:], f"predicate {name.text}", ctx):
                _expect_variable(variable, ctx)
                _check_type(type_name, types, variable, ctx)
                params.append(TypedName(variable.text, type_name))
            predicates.append(PredicateDef(name.text, tuple(params)))
    return predicates


def _parse_action(node: SList, types: Dict[str, str], predicates: Dict[str, PredicateDef],
                  constants: set, ctx: _Context) -> ActionSchema:
    if len(node.items) < 2:
        raise ctx.error(PDDLSyntaxError, "missing action name", node)
    name = _expect_name(node.items[1], "action name", ctx).text
    fields: Dict[str, SExpr] = {}
    rest = node.items[2:]
    if len(rest) % 2:
        raise ctx.error(PDDLSyntaxError, f"action {name}: keyword without value", rest[-1])
    for key_node, value in zip(rest[::2], rest[1::2]):
        key = _expect_symbol(key_node, "action keyword", ctx)
        if key.text not in (":parameters", ":precondition", ":effect"):
            raise ctx.error(PDDLSyntaxError, f"action {name}: unknown keyword {key.text}", key)
        if key.text in fields:
            raise ctx.error(PDDLSyntaxError, f"action {name}: duplicate {key.text}", key)
        fields[key.text] = value

    params: List[TypedName] = []
    if ":parameters" in fields:
        parameter_list = _expect_list(fields[":parameters"], "parameter list", ctx)
        for variable, type_name in _typed_list(parameter_list.items, f"action {name} parameters", ctx):
            _expect_variable(variable, ctx)
            _check_type(type_name, types, variable, ctx)
            if any(param.name == variable.text for param in params):
                raise ctx.error(DomainValidationError, f"action {name}: duplicate parameter {variable.text}", variable)
            params.append(TypedName(variable.text, type_name))

    scope = {param.name for param in params}
    checker = _AtomChecker(predicates, scope, constants, ctx, f"action {name}")
    precond: List[Literal] = []
    if ":precondition" in fields:
        precond = _parse_condition(fields[":precondition"], checker, ctx)
    add: List[Atom] = []
    delete: List[Atom] = []
    if ":effect" in fields:
        for literal in _parse_effect(fields[":effect"], checker, ctx):
            (add if literal.positive else delete).append(literal.atom)
    add_set = frozenset(add)
    # delete-then-add semantics
    return ActionSchema(name, tuple(params), frozenset(precond), add_set, frozenset(delete) - add_set)


class _AtomChecker:
    """Validate atoms against declared predicates, variables in scope and constants"""

    def __init__(self, predicates: Dict[str, PredicateDef], scope: set, constants: set,
                 ctx: _Context, where: str):
        self.predicates = predicates
        self.scope = scope
        self.constants = constants
        self.ctx = ctx
        self.where = where

    def atom(self, node: SExpr) -> Atom:
        ctx = self.ctx
        formula = _expect_list(node, "atom", ctx)
        if not formula.items:
            raise ctx.error(PDDLSyntaxError, f"{self.where}: empty atom", formula)
        predicate = _expect_symbol(formula.items[0], "predicate name", ctx).text
        args = tuple(_expect_symbol(arg, "argument", ctx) for arg in formula.items[1:])
        if predicate == EQUALITY:
            if ":equality" not in ctx.requirements:
                raise ctx.error(DomainValidationError, f"{self.where}: equality requires :equality", formula)
            if len(args) != 2:
                raise ctx.error(DomainValidationError, f"{self.where}: equality expects 2 arguments", formula)
        else:
            declared = self.predicates.get(predicate)
            if declared is None:
                raise ctx.error(DomainValidationError, f"undeclared predicate {predicate}", formula)
            if declared.arity != len(args):
                raise ctx.error(
                    DomainValidationError,
                    f"predicate {predicate} expects {declared.arity} arguments, got {len(args)}",
                    formula,
                )
        for arg in args:
            if arg.text.startswith("?"):
                if arg.text not in self.scope:
                    raise ctx.error(DomainValidationError, f"{self.where}: undeclared variable {arg.text}", arg)
            elif arg.text not in self.constants:
                raise ctx.error(DomainValidationError, f"{self.where}: undeclared constant {arg.text}", arg)
        return Atom(predicate, tuple(arg.text for arg in args))


def _parse_condition(node: SExpr, checker: _AtomChecker, ctx: _Context) -> List[Literal]:
    formula = _expect_list(node, "precondition", ctx)
    if not formula.items:
        return []
    head = formula.head
    if head == "and":
        literals: List[Literal] = []
        for child in formula.items[1:]:
            literals.extend(_parse_condition(child, checker, ctx))
        return literals
    if head == "not":
        if len(formula.items) != 2:
            raise ctx.error(PDDLSyntaxError, "(not ...) takes exactly one formula", formula)
        inner = _expect_list(formula.items[1], "negated atom", ctx)
        if inner.head in ("and", "not") or inner.head in UNSUPPORTED_CONNECTIVES:
            raise ctx.error(UnsupportedFeatureError, "unsupported negated formula", inner)
        atom = checker.atom(inner)
        if atom.predicate != EQUALITY and ":negative-preconditions" not in ctx.requirements:
            raise ctx.error(DomainValidationError, "negative precondition requires :negative-preconditions", formula)
        return [Literal(atom, False)]
    if head in UNSUPPORTED_CONNECTIVES:
        raise ctx.error(UnsupportedFeatureError, f"unsupported precondition connective {head}", formula)
    return [Literal(checker.atom(formula), True)]


def _parse_effect(node: SExpr, checker: _AtomChecker, ctx: _Context) -> List[Literal]:
    formula = _expect_list(node, "effect", ctx)
    if not formula.items:
        return []
    head = formula.head
    if head == "and":
        literals: List[Literal] = []
        for child in formula.items[1:]:
            literals.extend(_parse_effect(child, checker, ctx))
        return literals
    if head in UNSUPPORTED_EFFECTS:
        raise ctx.error(UnsupportedFeatureError, f"unsupported effect {head}", formula)
    positive = True
    if head == "not":
        if len(formula.items) != 2:
            raise ctx.error(PDDLSyntaxError, "(not ...) takes exactly one atom", formula)
        formula = _expect_list(formula.items[1], "deleted atom", ctx)
        positive = False
    atom = checker.atom(formula)
    if atom.predicate == EQUALITY:
        raise ctx.error(DomainValidationError, "equality cannot appear in effects", formula)
    return [Literal(atom, positive)]


# ---------------------------------------------------------------------------
# Problem
# ---------------------------------------------------------------------------

_PROBLEM_SECTIONS = frozenset({":domain", ":requirements", ":objects", ":init", ":goal", ":metric"})


def parse_problem(text: TextInput, dom: DomainModel, source: Optional[str] = None) -> ProblemModel:
    """
    Parse a PDDL problem against its domain

    The goal must be a conjunction of positive ground atoms; its textual
    order is preserved because subgoal symbols are assigned from it.
    """
    ctx = _Context(source, dom.requirements)
    try:
        define = _single_define(read_sexprs(text, source), "problem", ctx)
        return _build_problem(define, dom, ctx)
    except RecursionError:
        raise PDDLSyntaxError("formula nesting too deep", source=source) from None


def _build_problem(define: SList, dom: DomainModel, ctx: _Context) -> ProblemModel:
    name = _expect_name(define.items[1].items[1], "problem name", ctx).text
    sections = _sections(define, "problem", frozenset(), ctx)
    for key, nodes in sections.items():
        if key not in _PROBLEM_SECTIONS:
            raise ctx.error(UnsupportedFeatureError if key == ":constraints" else PDDLSyntaxError,
                            f"unknown problem section {key}", nodes[0])

    domain_name = dom.name
    if ":domain" in sections:
        node = sections[":domain"][0]
        if len(node.items) != 2:
            raise ctx.error(PDDLSyntaxError, "expected (:domain <name>)", node)
        domain_name = _expect_name(node.items[1], "domain name", ctx).text
        if domain_name != dom.name:
            logger.warning(f"Problem {name} declares domain {domain_name}, parsing against {dom.name}")
    if ":requirements" in sections:
        ctx.requirements = ctx.requirements | _check_requirements(sections[":requirements"][0], ctx)
    if ":metric" in sections:
        logger.debug(f"Ignoring :metric in problem {name}")

    objects = list(dom.constants) + _parse_objects(sections.get(":objects", []), dom.types, "object", ctx,
                                                   existing=dom.constants)
    object_types = {obj.name: obj.type for obj in objects}

    init = set()
    for section in sections.get(":init", []):
        for node in section.items[1:]:
            formula = _expect_list(node, "initial atom", ctx)
            if formula.head == "not":
                raise ctx.error(PDDLSyntaxError, "negative literal in :init", formula)
            init.add(_ground_atom(formula, dom, object_types, ctx))

    if ":goal" not in sections:
        raise ctx.error(PDDLSyntaxError, f"problem {name} has no :goal section", define)
    goal_section = sections[":goal"][0]
    if len(goal_section.items) != 2:
        raise ctx.error(PDDLSyntaxError, "expected (:goal <formula>)", goal_section)
    goal: List[Atom] = []
    for atom in _parse_goal(goal_section.items[1], dom, object_types, ctx):
        if atom not in goal:
            goal.append(atom)

    problem = ProblemModel(
        name=name,
        domain_name=domain_name,
        objects=tuple(objects),
        init=frozenset(init),
        goal=tuple(goal),
    )
    logger.debug(f"Parsed problem {name}: {len(objects)} objects, {len(init)} init atoms, {len(goal)} goals")
    return problem


def _ground_atom(formula: SList, dom: DomainModel, object_types: Dict[str, str], ctx: _Context) -> Atom:
    if not formula.items:
        raise ctx.error(PDDLSyntaxError, "empty atom", formula)
    predicate = _expect_symbol(formula.items[0], "predicate name", ctx).text
    if predicate == EQUALITY:
        raise ctx.error(DomainValidationError, "equality is built in and cannot be stated", formula)
    declared = dom.predicate(predicate)
    if declared is None:
        raise ctx.error(DomainValidationError, f"undeclared predicate {predicate}", formula)
    args = [_expect_symbol(arg, "constant", ctx) for arg in formula.items[1:]]
    if len(args) != declared.arity:
        raise ctx.error(
            DomainValidationError,
            f"predicate {predicate} expects {declared.arity} arguments, got {len(args)}",
            formula,
        )
    for arg, param in zip(args, declared.params):
        type_name = object_types.get(arg.text)
        if type_name is None:
            raise ctx.error(DomainValidationError, f"unknown constant {arg.text}", arg)
        if not dom.is_subtype(type_name, param.type):
            raise ctx.error(
                DomainValidationError,
                f"type mismatch: {arg.text} is {type_name}, {predicate} expects {param.type}",
                arg,
            )
    return Atom(predicate, tuple(arg.text for arg in args))


def _parse_goal(node: SExpr, dom: DomainModel, object_types: Dict[str, str], ctx: _Context) -> List[Atom]:
    formula = _expect_list(node, "goal", ctx)
    if not formula.items:
        return []
    head = formula.head
    if head == "and":
        atoms: List[Atom] = []
        for child in formula.items[1:]:
            atoms.extend(_parse_goal(child, dom, object_types, ctx))
        return atoms
    if head is None or head == "not" or head in UNSUPPORTED_CONNECTIVES:
        raise ctx.error(UnsupportedGoalError, "unsupported goal form", formula)
    return [_ground_atom(formula, dom, object_types, ctx)]


def load_task(domain_text: TextInput, problem_text: TextInput,
              domain_source: Optional[str] = None, problem_source: Optional[str] = None) -> PlanningTask:
    domain = parse_domain(domain_text, domain_source)
    return PlanningTask(domain, parse_problem(problem_text, domain, problem_source))


def load_task_files(domain_path: Union[str, Path], problem_path: Union[str, Path]) -> PlanningTask:
    domain_path, problem_path = Path(domain_path), Path(problem_path)
    return load_task(domain_path.read_bytes(), problem_path.read_bytes(), str(domain_path), str(problem_path))


# ---------------------------------------------------------------------------
# Plans
# ---------------------------------------------------------------------------

def parse_plan(text: TextInput, dom: DomainModel, problem: Optional[ProblemModel] = None,
               source: Optional[str] = None, name: Optional[str] = None) -> Plan:
    """
    Parse an IPC plan: one `(name arg ...)` per line, `;` comments ignored

    Args:
        text: Plan text
        dom: Domain the action names and arities are checked against
        problem: When given, arguments are checked against its objects here
            rather than at grounding time
        source: Plan file path; its stem becomes the plan label
        name: Explicit label, overriding the file stem
    """
    ctx = _Context(source)
    steps: List[PlanStep] = []
    for node in read_sexprs(text, source):
        if isinstance(node, Symbol):
            raise ctx.error(PlanParseError, f"unexpected token '{node.text}'", node)
        if not node.items:
            raise ctx.error(PlanParseError, "empty plan step", node)
        head = node.items[0]
        if isinstance(head, SList):
            raise ctx.error(PlanParseError, "expected action name", head)
        args = [_expect_symbol(arg, "argument", ctx) for arg in node.items[1:]]
        schema = dom.schema(head.text)
        if schema is None:
            raise ctx.error(PlanParseError, f"unknown action {head.text}", head)
        if schema.arity != len(args):
            raise ctx.error(
                PlanParseError,
                f"action {head.text} expects {schema.arity} arguments, got {len(args)}",
                node,
            )
        if problem is not None:
            for arg in args:
                if problem.object_type(arg.text) is None:
                    raise ctx.error(PlanParseError, f"unknown constant {arg.text}", arg)
        steps.append(PlanStep(len(steps), head.text, tuple(arg.text for arg in args), node.line))
    return Plan(tuple(steps), source, name)


def load_plan_file(path: Union[str, Path], task: PlanningTask) -> Plan:
    path = Path(path)
    return parse_plan(path.read_bytes(), task.domain, task.problem, str(path))


def render_plan(plan: Plan) -> str:
    """Render in IPC format with a unit-cost trailer"""
    lines = [str(step) for step in plan.steps]
    lines.append(f"; cost = {len(plan)} (unit cost)")
    return "\n".join(lines) + "\n"

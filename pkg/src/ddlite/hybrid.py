"""Hybrid queries: XML documents, CSV relations, grouped aggregation.

A goal is a conjunction of ordinary literals plus path bindings of the
form `V := doc('file.xml')/tag::[@'Attr'=Value]` or `V := Node@'Attr'`.
Path bindings walk a document loaded as a term; the rest of the goal
joins derived facts and builtin calls exactly as rule bodies do.
ddbase_aggregate groups the goal's answers by the plain variables of a
template like [DNO, sum(HOURS)] and folds the tagged columns.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

from .errors import (
    NonNumericAggregate,
    NumericParseError,
    ParseError,
    PathError,
    RaggedRowError,
    TemplateVarUnbound,
    UnboundFilterError,
)
from .engine import BUILTINS, FactStore, call_builtin, deferred_negation_ok
from .kernel import (
    Atom,
    Compound,
    Const,
    Literal,
    Num,
    PredKey,
    Program,
    Subst,
    Term,
    Var,
    apply,
    is_ground,
    list_elements,
    mgu,
    parse_number,
    sort_key,
    term_text,
    term_vars,
)
from .syntax import TermParser, tokenize
from .xmlterm import XmlTerm, parse_xml

_CONTROL = {PredKey(None, "!", 0), PredKey(None, "true", 0)}


# ===========================================================================
# Documents as terms
# ===========================================================================


@dataclass(frozen=True, eq=False)
class XmlNode(Term):
    """A document element as an opaque term; two nodes are equal only if
    they are the same element of the same loaded document."""

    node: XmlTerm

    def __eq__(self, other) -> bool:
        return isinstance(other, XmlNode) and self.node is other.node

    def __hash__(self) -> int:
        return id(self.node)

    def __repr__(self) -> str:
        return f"XmlNode(<{self.node.tag}>)"


def load_xml(path: str) -> XmlTerm:
    with open(path, encoding="utf-8") as handle:
        return parse_xml(handle.read(), filename=path)


# ===========================================================================
# Path expressions
# ===========================================================================


@dataclass(frozen=True)
class Child:
    tag: str


@dataclass(frozen=True)
class Filter:
    attr: str
    value: Term  # constant or variable to be looked up in the environment


@dataclass(frozen=True)
class AttrAccess:
    name: str


Step = Union[Child, Filter, AttrAccess]


@dataclass(frozen=True)
class PathExpr:
    steps: tuple[Step, ...]

    def __post_init__(self):
        for step in self.steps[:-1]:
            if isinstance(step, AttrAccess):
                raise PathError("attribute access must be the final step")


@dataclass(frozen=True)
class PathBinding:
    """Goal item `var := <source><steps>`; source is a named document or a
    previously bound node variable."""

    var: str
    doc: Optional[str]
    from_var: Optional[str]
    expr: PathExpr


def _attr_text(t: Term) -> str:
    """Canonical string form of a bound term for attribute comparison."""
    if isinstance(t, Num):
        return str(t.value) if t.is_int() else repr(t.value)
    if isinstance(t, Const):
        return t.symbol
    return term_text(t, quoted=False)


def path_eval(
    doc: XmlTerm, expr: PathExpr, env: Optional[Subst] = None
) -> list[tuple[Union[XmlTerm, Term], Subst]]:
    """Walk the steps from the document root; the result pairs each hit
    (an element, or a Const for attribute access) with the unchanged env."""
    env = env or {}
    items: list[Union[XmlTerm, Term]] = [doc]
    for step in expr.steps:
        if isinstance(step, Child):
            items = [
                child
                for it in items
                if isinstance(it, XmlTerm)
                for child in it.child_elements()
                if child.tag == step.tag
            ]
        elif isinstance(step, Filter):
            value = apply(env, step.value)
            if not is_ground(value):
                names = ", ".join(sorted(term_vars(value)))
                raise UnboundFilterError(f"filter variable {names} is unbound")
            wanted = _attr_text(value)
            items = [
                it
                for it in items
                if isinstance(it, XmlTerm) and it.attributes.get(step.attr) == wanted
            ]
        else:  # AttrAccess
            out: list[Union[XmlTerm, Term]] = []
            for it in items:
                if not isinstance(it, XmlTerm):
                    raise PathError("attribute access on a text node")
                if step.name in it.attributes:
                    out.append(Const(it.attributes[step.name]))
            items = out
    return [(item, env) for item in items]


# ===========================================================================
# Goal and template parsing
# ===========================================================================

GoalItem = Union[Literal, PathBinding]

AGG_FNS = ("sum", "count", "min", "max", "avg")


@dataclass(frozen=True)
class GroupCol:
    var: str


@dataclass(frozen=True)
class AggCol:
    fn: str
    var: str


@dataclass(frozen=True)
class AggTemplate:
    columns: tuple[Union[GroupCol, AggCol], ...]

    def __post_init__(self):
        if not self.columns:
            raise ParseError("aggregation template must have at least one column")

    def group_vars(self) -> list[str]:
        return [c.var for c in self.columns if isinstance(c, GroupCol)]

    def vars(self) -> list[str]:
        return [c.var for c in self.columns]


def _name_token(parser: TermParser) -> str:
    tok = parser.next()
    if tok.kind not in ("atom", "quoted"):
        parser.fail(f"expected a name, found {tok.value!r}", tok)
    return tok.value


def _path_steps(parser: TermParser) -> list[Step]:
    steps: list[Step] = []
    while parser.at_punct("/"):
        parser.next()
        steps.append(Child(_name_token(parser)))
        if parser.at_punct("::"):
            parser.next()
            parser.expect_punct("[")
            parser.expect_punct("@")
            attr = _name_token(parser)
            parser.expect_punct("=")
            steps.append(Filter(attr, parser.primary()))
            parser.expect_punct("]")
    if parser.at_punct("@"):
        parser.next()
        steps.append(AttrAccess(_name_token(parser)))
    return steps


def _path_binding(parser: TermParser) -> PathBinding:
    var_tok = parser.next()
    parser.expect_punct(":=")
    src = parser.peek()
    doc_name = None
    from_var = None
    if src.kind == "var":
        parser.next()
        from_var = src.value
    elif src.kind == "atom" and src.value == "doc":
        parser.next()
        parser.expect_punct("(")
        doc_name = _name_token(parser)
        parser.expect_punct(")")
    else:
        parser.fail("path source must be doc('...') or a bound variable", src)
    steps = _path_steps(parser)
    if not steps:
        parser.fail("path expression has no steps", src)
    return PathBinding(var_tok.value, doc_name, from_var, PathExpr(tuple(steps)))


def _as_builtin(lit: Literal) -> Literal:
    """Bare builtin names act as builtins inside queries."""
    atom = lit.atom
    if atom.module_prefix is None and (atom.predicate, len(atom.args)) in BUILTINS:
        return Literal(
            Atom(atom.predicate, atom.args, "prolog", atom.span), lit.polarity
        )
    return lit


def parse_goal(text: str, filename: str = "<goal>") -> list[GoalItem]:
    """Parse a conjunctive goal; `V := path` items mix with literals."""
    parser = TermParser(tokenize(text, filename), filename)
    parser.begin_clause()
    wrapped = parser.at_punct("(")
    if wrapped:
        parser.next()
    items: list[GoalItem] = []
    while True:
        tok = parser.peek()
        if tok.kind == "var" and parser.tokens[parser.i + 1].kind == "punct" \
                and parser.tokens[parser.i + 1].value == ":=":
            items.append(_path_binding(parser))
        else:
            items.append(_as_builtin(parser.literal()))
        if parser.at_punct(","):
            parser.next()
            continue
        break
    if wrapped:
        parser.expect_punct(")")
    tok = parser.next()
    if tok.kind not in ("end", "eof"):
        parser.fail(f"unexpected trailing {tok.value!r}", tok)
    if tok.kind == "end" and parser.peek().kind != "eof":
        parser.fail("goal must be a single conjunction")
    # `true` alone is the empty conjunction
    return [
        item
        for item in items
        if not (isinstance(item, Literal) and item.atom.key in _CONTROL)
    ]


def parse_template(text: str, filename: str = "<template>") -> AggTemplate:
    parser = TermParser(tokenize(text, filename), filename)
    parser.begin_clause()
    tok = parser.peek()
    term = parser.term(999)
    nxt = parser.next()
    if nxt.kind not in ("end", "eof"):
        parser.fail(f"unexpected trailing {nxt.value!r}", nxt)
    decomposed = list_elements(term)
    if decomposed is None or decomposed[1] != Const("[]"):
        raise ParseError("template must be a list", tok.span(filename))
    columns: list[Union[GroupCol, AggCol]] = []
    for el in decomposed[0]:
        if isinstance(el, Var):
            columns.append(GroupCol(el.name))
        elif (
            isinstance(el, Compound)
            and el.functor in AGG_FNS
            and len(el.args) == 1
            and isinstance(el.args[0], Var)
        ):
            columns.append(AggCol(el.functor, el.args[0].name))
        else:
            raise ParseError(
                f"template column must be a variable or fn(Var) with fn in "
                f"{'/'.join(AGG_FNS)}: {term_text(el)}",
                tok.span(filename),
            )
    return AggTemplate(tuple(columns))


# ===========================================================================
# Goal solving
# ===========================================================================


class _DocRegistry:
    def __init__(self, docs: Optional[dict[str, XmlTerm]], base_dir: str):
        self.docs = dict(docs or {})
        self.base_dir = base_dir

    def get(self, name: str) -> XmlTerm:
        if name not in self.docs:
            self.docs[name] = load_xml(os.path.join(self.base_dir, name))
        return self.docs[name]


def _item_vars(item: GoalItem) -> set[str]:
    if isinstance(item, Literal):
        return term_vars(item.atom)
    names = {item.var}
    if item.from_var:
        names.add(item.from_var)
    for step in item.expr.steps:
        if isinstance(step, Filter):
            names |= term_vars(step.value)
    return names


def solve_goal(
    goal: Sequence[GoalItem],
    program: Optional[Program],
    store: FactStore,
    docs: Optional[dict[str, XmlTerm]] = None,
    base_dir: str = ".",
) -> list[Subst]:
    """All answers of the goal against the store and the named documents,
    left to right; fact matches come sorted, path hits in document order."""
    registry = _DocRegistry(docs, base_dir)
    items = list(goal)

    def step(i: int, s: Subst, pending: list[Atom]) -> Iterator[Subst]:
        if i == len(items):
            if deferred_negation_ok(pending, s, store):
                yield s
            return
        item = items[i]
        if isinstance(item, PathBinding):
            if item.doc is not None:
                root = registry.get(item.doc)
            else:
                bound = apply(s, Var(item.from_var))
                if isinstance(bound, Var):
                    raise PathError(
                        f"path source variable {item.from_var} is unbound"
                    )
                if not isinstance(bound, XmlNode):
                    raise PathError(
                        f"path source variable {item.from_var} is not a "
                        f"document node"
                    )
                root = bound.node
            for hit, _ in path_eval(root, item.expr, s):
                value: Term = XmlNode(hit) if isinstance(hit, XmlTerm) else hit
                s2 = mgu(Var(item.var), value, s)
                if s2 is not None:
                    yield from step(i + 1, s2, pending)
            return
        lit = item
        atom = lit.atom
        if lit.is_negated():
            if atom.module_prefix is not None:
                if not call_builtin(atom, s):
                    yield from step(i + 1, s, pending)
                return
            bound = apply(s, atom)
            if is_ground(bound):
                if not store.has(bound):
                    yield from step(i + 1, s, pending)
            else:
                yield from step(i + 1, s, pending + [atom])
            return
        if lit.is_builtin():
            for s2 in call_builtin(atom, s):
                yield from step(i + 1, s2, pending)
            return
        if atom.key in _CONTROL:
            yield from step(i + 1, s, pending)
            return
        for _, s2 in store.matching(atom, s):
            yield from step(i + 1, s2, pending)

    return list(step(0, {}, []))


# ===========================================================================
# Aggregation
# ===========================================================================


def _numeric_values(fn: str, values: list[Term]) -> list:
    out = []
    for v in values:
        if not isinstance(v, Num):
            raise NonNumericAggregate(
                f"{fn} over non-numeric value {term_text(v)}"
            )
        out.append(v.value)
    return out


def _fold(fn: str, values: list[Term]) -> Term:
    if fn == "count":
        return Num(len(values))
    if fn == "sum":
        return Num(sum(_numeric_values(fn, values)))
    if fn == "avg":
        nums = _numeric_values(fn, values)
        return Num(float(sum(nums)) / len(nums))
    ordered = sorted(values, key=sort_key)
    return ordered[0] if fn == "min" else ordered[-1]


def ddbase_aggregate(
    template: AggTemplate,
    goal: Sequence[GoalItem],
    program: Optional[Program],
    store: FactStore,
    docs: Optional[dict[str, XmlTerm]] = None,
    base_dir: str = ".",
) -> list[list[Term]]:
    """Group the goal's answers by the template's plain variables and fold
    the tagged columns; rows come back sorted by group key."""
    goal_vars: set[str] = set()
    for item in goal:
        goal_vars |= _item_vars(item)
    for name in template.vars():
        if name not in goal_vars:
            raise TemplateVarUnbound(
                f"template variable {name} does not occur in the goal"
            )
    answers = solve_goal(goal, program, store, docs, base_dir)
    group_cols = template.group_vars()
    agg_cols = [c for c in template.columns if isinstance(c, AggCol)]
    group_values: dict[tuple, dict[str, Term]] = {}
    members: dict[tuple, dict[int, list[Term]]] = {}
    for s in answers:
        projection: dict[str, Term] = {}
        for name in template.vars():
            value = apply(s, Var(name))
            if not is_ground(value):
                raise TemplateVarUnbound(
                    f"template variable {name} is unbound in an answer"
                )
            projection[name] = value
        key = tuple(sort_key(projection[name]) for name in group_cols)
        if key not in group_values:
            group_values[key] = {n: projection[n] for n in group_cols}
            members[key] = {i: [] for i in range(len(agg_cols))}
        for i, col in enumerate(agg_cols):
            members[key][i].append(projection[col.var])
    rows: list[list[Term]] = []
    for key in sorted(group_values):
        agg_i = 0
        row: list[Term] = []
        for col in template.columns:
            if isinstance(col, GroupCol):
                row.append(group_values[key][col.var])
            else:
                row.append(_fold(col.fn, members[key][agg_i]))
                agg_i += 1
        rows.append(row)
    return rows


def render_rows(rows: list[list[Term]]) -> str:
    """Nested-list text, e.g. [[1, 12.5], [4, 30.0]]."""
    inner = ", ".join(
        "[" + ", ".join(term_text(v, quoted=False) for v in row) + "]" for row in rows
    )
    return "[" + inner + "]"


def rows_to_json(rows: list[list[Term]]) -> list[list]:
    out: list[list] = []
    for row in rows:
        line: list = []
        for v in row:
            if isinstance(v, Num):
                line.append(v.value)
            elif isinstance(v, Const):
                line.append(v.symbol)
            else:
                line.append(term_text(v, quoted=False))
        out.append(line)
    return out


# ===========================================================================
# CSV relations
# ===========================================================================


def load_facts_csv(
    path: str,
    pred: str,
    header: bool = False,
    numeric_cols: Optional[set] = None,
) -> list[Atom]:
    """Each CSV row becomes one ground fact pred(c1, ..., cn).

    Cells named in numeric_cols (0-based) must parse as numbers; without
    numeric_cols every cell that reads as a number becomes one.  The cell
    "null" (any case) becomes the constant null either way.
    """
    facts: list[Atom] = []
    width: Optional[int] = None
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        for row_i, row in enumerate(reader):
            if header and row_i == 0:
                continue
            if not row:
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise RaggedRowError(
                    f"{path}: line {reader.line_num}: expected {width} "
                    f"columns, got {len(row)}"
                )
            args: list[Term] = []
            for col_i, cell in enumerate(row):
                if cell.lower() == "null":
                    args.append(Const("null"))
                    continue
                num = parse_number(cell)
                if numeric_cols is not None:
                    if col_i in numeric_cols:
                        if num is None:
                            raise NumericParseError(
                                f"{path}: line {reader.line_num}, column "
                                f"{col_i + 1}: {cell!r} is not numeric"
                            )
                        args.append(num)
                    else:
                        args.append(Const(cell))
                else:
                    args.append(num if num is not None else Const(cell))
            facts.append(Atom(pred, tuple(args)))
    return facts

"""Core term algebra: terms, atoms, literals, rules, substitutions.

Terms are immutable.  Substitutions are plain dicts mapping variable names
to terms, kept in triangular solved form so that applying one twice equals
applying it once.  mgu() performs syntactic unification with the occurs
check; failure is an ordinary None result, not an exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Optional, Union

# ===========================================================================
# Source positions
# ===========================================================================


@dataclass(frozen=True)
class SourceSpan:
    """1-based position of a construct in its source text."""

    file: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


# ===========================================================================
# Terms
# ===========================================================================


class Term:
    """Abstract base for every term constructor."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str

    def __repr__(self) -> str:
        return f"Var({self.name!r})"


@dataclass(frozen=True)
class Const(Term):
    """A symbolic constant ('KT', null, [] ...)."""

    symbol: str

    def __repr__(self) -> str:
        return f"Const({self.symbol!r})"


NIL = Const("[]")


@dataclass(frozen=True, eq=False)
class Num(Term):
    """A number.  Integers are exact; floats are 64-bit.

    An integer and a float never unify even when arithmetically equal
    (15 is not 15.0 as a term), so equality and hashing carry the
    concrete type alongside the value.
    """

    value: Union[int, float]

    def is_int(self) -> bool:
        return isinstance(self.value, int)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Num):
            return NotImplemented
        return type(self.value) is type(other.value) and self.value == other.value

    def __hash__(self) -> int:
        return hash((type(self.value).__name__, self.value))

    def __repr__(self) -> str:
        return f"Num({self.value!r})"


@dataclass(frozen=True)
class Compound(Term):
    """functor(arg1, ..., argn) with n >= 1; zero-arity data is a Const."""

    functor: str
    args: tuple[Term, ...]

    def __post_init__(self):
        if not self.args:
            raise ValueError("zero-arity compound; use Const instead")

    def __repr__(self) -> str:
        return f"Compound({self.functor!r}, {self.args!r})"


@dataclass(frozen=True, eq=False)
class List(Term):
    """Convenience list constructor.

    [a, b | T] is sugar for '.'(a, '.'(b, T)); canonical() performs the
    expansion and both spellings compare (and hash) equal.
    """

    elements: tuple[Term, ...]
    tail: Term = NIL

    def __eq__(self, other) -> bool:
        if not isinstance(other, Term):
            return NotImplemented
        return canonical(self) == canonical(other)

    def __hash__(self) -> int:
        return hash(canonical(self))

    def __repr__(self) -> str:
        return f"List({self.elements!r}, {self.tail!r})"


def mklist(elements: Iterable[Term], tail: Term = NIL) -> Term:
    """Build the canonical cons-cell chain for the given elements."""
    out = tail
    for el in reversed(list(elements)):
        out = Compound(".", (el, out))
    return out


def parse_number(text: str) -> Optional[Num]:
    """Strict numeric reading of a text cell; None if it is not a number.

    Stricter than int()/float(): no surrounding whitespace, no underscores,
    no inf/nan.
    """
    if text != text.strip() or "_" in text or not text:
        return None
    try:
        return Num(int(text))
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        return None
    if not math.isfinite(value):
        return None
    return Num(value)


def canonical(t: Term) -> Term:
    """Expand List sugar into cons cells, recursively."""
    if isinstance(t, List):
        return mklist([canonical(e) for e in t.elements], canonical(t.tail))
    if isinstance(t, Compound):
        args = tuple(canonical(a) for a in t.args)
        if args == t.args:
            return t
        return Compound(t.functor, args)
    return t


def list_elements(t: Term) -> Optional[tuple[list[Term], Term]]:
    """Decompose a cons chain into (elements, tail); None if t is no chain.

    A proper list ends with tail == Const('[]').
    """
    t = canonical(t)
    elements: list[Term] = []
    while isinstance(t, Compound) and t.functor == "." and len(t.args) == 2:
        elements.append(t.args[0])
        t = t.args[1]
    if not elements and t != NIL:
        return None
    return elements, t


# ===========================================================================
# Atoms, literals, rules, programs
# ===========================================================================


class PredKey(NamedTuple):
    """Identity of a predicate: optional module prefix, name, arity."""

    module: Optional[str]
    name: str
    arity: int

    def __str__(self) -> str:
        if self.module:
            return f"{self.module}:{self.name}/{self.arity}"
        return f"{self.name}/{self.arity}"


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()
    module_prefix: Optional[str] = None
    span: Optional[SourceSpan] = field(default=None, compare=False)

    @property
    def key(self) -> PredKey:
        return PredKey(self.module_prefix, self.predicate, len(self.args))

    def __repr__(self) -> str:
        return f"Atom({self.key}, {self.args!r})"


POSITIVE = "positive"
NEGATED = "negated"  # default negation ("not")


@dataclass(frozen=True)
class Literal:
    atom: Atom
    polarity: str = POSITIVE

    def is_negated(self) -> bool:
        return self.polarity == NEGATED

    def is_builtin(self) -> bool:
        return self.atom.module_prefix is not None


@dataclass(frozen=True)
class Rule:
    """name: head :- body.  A fact is a rule with an empty body."""

    name: str
    head: Atom
    body: tuple[Literal, ...] = ()
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def is_fact(self) -> bool:
        return not self.body


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...] = ()

    def __post_init__(self):
        seen = set()
        for r in self.rules:
            if r.name in seen:
                raise ValueError(f"duplicate rule name {r.name!r}")
            seen.add(r.name)

    def idb(self) -> frozenset[PredKey]:
        """Predicates appearing in some head."""
        return frozenset(r.head.key for r in self.rules)

    def edb(self) -> frozenset[PredKey]:
        """Predicates only ever called, never defined."""
        heads = self.idb()
        return frozenset(
            lit.atom.key
            for r in self.rules
            for lit in r.body
            if not lit.is_builtin() and lit.atom.key not in heads
        )

    def pred_keys(self) -> frozenset[PredKey]:
        keys = set(self.idb())
        for r in self.rules:
            for lit in r.body:
                if not lit.is_builtin():
                    keys.add(lit.atom.key)
        return frozenset(keys)

    def rule_by_name(self, name: str) -> Optional[Rule]:
        for r in self.rules:
            if r.name == name:
                return r
        return None


# ===========================================================================
# Substitutions
# ===========================================================================

Subst = dict  # Dict[str, Term], kept idempotent


def term_vars(t) -> set[str]:
    """Free variable names of a term, atom, literal, or rule."""
    out: set[str] = set()
    _collect_vars(t, out)
    return out


def _collect_vars(t, out: set[str]) -> None:
    if isinstance(t, Var):
        out.add(t.name)
    elif isinstance(t, Compound):
        for a in t.args:
            _collect_vars(a, out)
    elif isinstance(t, List):
        for a in t.elements:
            _collect_vars(a, out)
        _collect_vars(t.tail, out)
    elif isinstance(t, Atom):
        for a in t.args:
            _collect_vars(a, out)
    elif isinstance(t, Literal):
        _collect_vars(t.atom, out)
    elif isinstance(t, Rule):
        _collect_vars(t.head, out)
        for lit in t.body:
            _collect_vars(lit, out)


def apply(s: Subst, t):
    """Apply substitution s to a Term, Atom, Literal, or Rule."""
    if isinstance(t, Term):
        return _apply_term(s, canonical(t))
    if isinstance(t, Atom):
        return Atom(
            t.predicate,
            tuple(_apply_term(s, canonical(a)) for a in t.args),
            t.module_prefix,
            t.span,
        )
    if isinstance(t, Literal):
        return Literal(apply(s, t.atom), t.polarity)
    if isinstance(t, Rule):
        return Rule(t.name, apply(s, t.head), tuple(apply(s, l) for l in t.body), t.span)
    raise TypeError(f"cannot apply substitution to {type(t).__name__}")


def _apply_term(s: Subst, t: Term) -> Term:
    if isinstance(t, Var):
        return s.get(t.name, t)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(_apply_term(s, a) for a in t.args))
    return t


def is_ground(t) -> bool:
    return not term_vars(t)


def compose(s1: Subst, s2: Subst) -> Subst:
    """s2 after s1: apply(compose(s1,s2), t) == apply(s2, apply(s1, t))."""
    out = {v: apply(s2, t) for v, t in s1.items()}
    for v, t in s2.items():
        if v not in out:
            out[v] = t
    return out


def _occurs(name: str, t: Term) -> bool:
    if isinstance(t, Var):
        return t.name == name
    if isinstance(t, Compound):
        return any(_occurs(name, a) for a in t.args)
    return False


def mgu(a, b, s: Optional[Subst] = None) -> Optional[Subst]:
    """Most general unifier of two terms or two atoms; None on failure.

    The occurs check is on: mgu(X, f(X)) fails.  An optional starting
    substitution is extended rather than rebuilt.
    """
    s = dict(s) if s else {}
    if isinstance(a, Atom) and isinstance(b, Atom):
        if a.key != b.key:
            return None
        pairs = list(zip(a.args, b.args))
    elif isinstance(a, Term) and isinstance(b, Term):
        pairs = [(a, b)]
    else:
        return None
    stack = [(canonical(x), canonical(y)) for x, y in pairs]
    while stack:
        x, y = stack.pop()
        x = _apply_term(s, x) if isinstance(x, Var) else x
        y = _apply_term(s, y) if isinstance(y, Var) else y
        if isinstance(x, Var):
            if isinstance(y, Var) and y.name == x.name:
                continue
            if not _bind(s, x.name, y):
                return None
            continue
        if isinstance(y, Var):
            if not _bind(s, y.name, x):
                return None
            continue
        if isinstance(x, Const) and isinstance(y, Const):
            if x.symbol != y.symbol:
                return None
            continue
        if isinstance(x, Num) and isinstance(y, Num):
            if x != y:
                return None
            continue
        if isinstance(x, Compound) and isinstance(y, Compound):
            if x.functor != y.functor or len(x.args) != len(y.args):
                return None
            stack.extend(zip(x.args, y.args))
            continue
        # opaque leaf terms (e.g. document nodes) unify only with themselves
        if x == y:
            continue
        return None
    return s


def _bind(s: Subst, name: str, t: Term) -> bool:
    """Bind name to t, keeping s idempotent.  False if the occurs check trips."""
    t = _apply_term(s, t)
    if _occurs(name, t):
        return False
    one = {name: t}
    for v in list(s):
        s[v] = _apply_term(one, s[v])
    s[name] = t
    return True


def rename_apart(r: Rule, suffix: str) -> Rule:
    """Rename every variable of r by appending suffix (injective)."""
    s = {v: Var(v + suffix) for v in term_vars(r)}
    return apply(s, r)


# ===========================================================================
# Term ordering and text
# ===========================================================================


def sort_key(t):
    """Total-order key over ground (and almost-ground) terms and atoms.

    Numbers sort before constants, constants before variables, variables
    before compounds; numbers compare arithmetically with ints before an
    arithmetically equal float.
    """
    if isinstance(t, Atom):
        return (
            t.module_prefix or "",
            t.predicate,
            len(t.args),
            tuple(sort_key(a) for a in t.args),
        )
    t = canonical(t)
    if isinstance(t, Num):
        return (0, float(t.value), 0 if t.is_int() else 1)
    if isinstance(t, Const):
        return (1, t.symbol)
    if isinstance(t, Var):
        return (2, t.name)
    return (3, t.functor, len(t.args), tuple(sort_key(a) for a in t.args))


_PLAIN_ATOM = None  # compiled lazily to keep import cheap


def _needs_quotes(symbol: str) -> bool:
    global _PLAIN_ATOM
    if _PLAIN_ATOM is None:
        import re

        _PLAIN_ATOM = re.compile(r"[a-z][a-zA-Z0-9_]*$")
    return not (_PLAIN_ATOM.match(symbol) or symbol in ("[]", "!", ";", "{}"))


# Operators printed infix, by functor: precedence and associativity drive
# parenthesization of nested operands (y side admits equal precedence).
_INFIX = {
    "is": (700, "xfx"), "<": (700, "xfx"), ">": (700, "xfx"),
    "=<": (700, "xfx"), ">=": (700, "xfx"), "=:=": (700, "xfx"),
    "=\\=": (700, "xfx"), "=": (700, "xfx"),
    "+": (500, "yfx"), "-": (500, "yfx"), "*": (400, "yfx"), "/": (400, "yfx"),
}
_SPACED = {"is", "=:=", "=\\=", "=<", ">=", "<", ">", "="}


def term_text(t, quoted: bool = True) -> str:
    """Render a term or atom.

    quoted=True emits re-parseable text (constants quoted when needed);
    quoted=False is display style with quotes dropped.
    """
    if isinstance(t, Atom):
        prefix = f"{t.module_prefix}:" if t.module_prefix else ""
        if not t.args:
            return prefix + _const_text(t.predicate, quoted)
        if t.predicate in _INFIX and len(t.args) == 2:
            return prefix + "(" + _infix_text(t.predicate, t.args, quoted) + ")"
        args = ", ".join(term_text(a, quoted) for a in t.args)
        return f"{prefix}{_functor_text(t.predicate, quoted)}({args})"
    t = canonical(t)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Num):
        return repr(t.value)
    if isinstance(t, Const):
        return _const_text(t.symbol, quoted)
    # compound: list sugar, infix operators, then plain functor notation
    decomp = list_elements(t)
    if decomp is not None:
        elements, tail = decomp
        inner = ", ".join(term_text(e, quoted) for e in elements)
        if tail == NIL:
            return f"[{inner}]"
        return f"[{inner}|{term_text(tail, quoted)}]"
    if t.functor in _INFIX and len(t.args) == 2:
        return "(" + _infix_text(t.functor, t.args, quoted) + ")"
    args = ", ".join(term_text(a, quoted) for a in t.args)
    return f"{_functor_text(t.functor, quoted)}({args})"


def _infix_text(op: str, args: tuple[Term, ...], quoted: bool) -> str:
    prec, assoc = _INFIX[op]
    left_max = prec if assoc == "yfx" else prec - 1
    sep = f" {op} " if op in _SPACED else op
    return _operand_text(args[0], left_max, quoted) + sep + _operand_text(
        args[1], prec - 1, quoted
    )


def _operand_text(t: Term, max_prec: int, quoted: bool) -> str:
    """Render an operand of an infix operator, adding parentheses only when
    the operand's own operator binds more loosely than the slot allows."""
    t = canonical(t)
    if isinstance(t, Compound) and t.functor in _INFIX and len(t.args) == 2:
        inner = _infix_text(t.functor, t.args, quoted)
        prec, _ = _INFIX[t.functor]
        return f"({inner})" if prec > max_prec else inner
    return term_text(t, quoted)


def _const_text(symbol: str, quoted: bool) -> str:
    if quoted and _needs_quotes(symbol):
        body = symbol.replace("\\", "\\\\").replace("'", "\\'")
        return f"'{body}'"
    return symbol


def _functor_text(functor: str, quoted: bool) -> str:
    if functor in _INFIX:
        return f"'{functor}'" if quoted else functor
    return _const_text(functor, quoted)


def literal_text(lit: Literal, quoted: bool = True) -> str:
    inner = term_text(lit.atom, quoted)
    if lit.is_negated():
        return f"not({inner})"
    return inner


def rule_text(r: Rule, quoted: bool = True) -> str:
    head = term_text(r.head, quoted)
    if not r.body:
        return f"{head}."
    body = ", ".join(literal_text(l, quoted) for l in r.body)
    return f"{head} :- {body}."

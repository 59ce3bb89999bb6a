"""Readers and writers for the three input languages.

* Datalog rule text: Prolog-style clauses `H :- B1, ..., Bn.` with
  default negation (`not(A)` / `not A`), builtin calls behind a module
  prefix (`prolog:G`), quoted constants, lists, and infix arithmetic.
* SWRL rules in abstract syntax: `Implies(Antecedent(...) Consequent(...))`.
* A RuleML/XML serialization of the same rules (swrlx:Ontology subset).

parse/print round-trip: parse_program(print_program(p)) == p.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .errors import (
    EmptyConsequent,
    ParseError,
    TranslationError,
    UnsupportedConstruct,
)
from .kernel import (
    NIL,
    Atom,
    Compound,
    Const,
    Literal,
    NEGATED,
    Num,
    POSITIVE,
    Program,
    Rule,
    SourceSpan,
    Term,
    Var,
    literal_text,
    mklist,
    term_text,
)
from .xmlterm import Text, XmlTerm, parse_xml

# ===========================================================================
# Tokenizer for rule text (shared with the goal language in hybrid)
# ===========================================================================

_PUNCT2 = (":-", ":=", "::", "=<", ">=", "=:=", "=\\=")
_PUNCT1 = "()[],|.:<>=+-*/@!"
_DIRECTIVE = re.compile(r"%\s*name:\s*(\S+)\s*$")


@dataclass
class Token:
    kind: str  # atom var num quoted punct directive end eof
    value: object
    line: int
    col: int

    def span(self, filename: str) -> SourceSpan:
        return SourceSpan(filename, self.line, self.col)


def tokenize(text: str, filename: str = "<string>") -> list[Token]:
    tokens: list[Token] = []
    i, line, bol = 0, 1, 0
    n = len(text)

    def pos():
        return line, i - bol + 1

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            bol = i
            continue
        if c.isspace():
            i += 1
            continue
        if c == "%":
            end = text.find("\n", i)
            if end < 0:
                end = n
            comment = text[i:end]
            m = _DIRECTIVE.match(comment)
            if m:
                l, co = pos()
                tokens.append(Token("directive", m.group(1), l, co))
            i = end
            continue
        l, co = pos()
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            is_float = False
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                is_float = True
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    is_float = True
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lit = text[i:j]
            tokens.append(Token("num", float(lit) if is_float else int(lit), l, co))
            i = j
            continue
        if c == "'":
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    raise ParseError("unterminated quoted atom", SourceSpan(filename, l, co))
                ch = text[j]
                if ch == "\\" and j + 1 < n:
                    esc = text[j + 1]
                    buf.append({"n": "\n", "t": "\t", "'": "'", "\\": "\\"}.get(esc, esc))
                    j += 2
                    continue
                if ch == "'":
                    if j + 1 < n and text[j + 1] == "'":
                        buf.append("'")
                        j += 2
                        continue
                    break
                buf.append(ch)
                j += 1
            tokens.append(Token("quoted", "".join(buf), l, co))
            i = j + 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "var" if (c == "_" or c.isupper()) else "atom"
            tokens.append(Token(kind, word, l, co))
            i = j
            continue
        two = text[i : i + 3]
        if two == "=:=" or two == "=\\=":
            tokens.append(Token("punct", two, l, co))
            i += 3
            continue
        two = text[i : i + 2]
        if two in _PUNCT2:
            tokens.append(Token("punct", two, l, co))
            i += 2
            continue
        if c == ".":
            nxt = text[i + 1] if i + 1 < n else ""
            if nxt == "" or nxt.isspace() or nxt == "%":
                tokens.append(Token("end", ".", l, co))
            else:
                tokens.append(Token("punct", ".", l, co))
            i += 1
            continue
        if c in _PUNCT1:
            tokens.append(Token("punct", c, l, co))
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r}", SourceSpan(filename, l, co))
    tokens.append(Token("eof", None, line, n - bol + 1))
    return tokens


# operator table: symbol -> (priority, associativity)
OPERATORS = {
    ",": (1000, "xfy"),
    "is": (700, "xfx"),
    "<": (700, "xfx"),
    ">": (700, "xfx"),
    "=<": (700, "xfx"),
    ">=": (700, "xfx"),
    "=:=": (700, "xfx"),
    "=\\=": (700, "xfx"),
    "=": (700, "xfx"),
    "+": (500, "yfx"),
    "-": (500, "yfx"),
    "*": (400, "yfx"),
    "/": (400, "yfx"),
}


class TermParser:
    """Recursive-descent / precedence-climbing parser over a token list."""

    def __init__(self, tokens: list[Token], filename: str = "<string>"):
        self.tokens = tokens
        self.i = 0
        self.filename = filename
        self._anon = 0
        self._clause_vars: set[str] = set()

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at_punct(self, *values: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.value in values

    def expect_punct(self, value: str) -> Token:
        tok = self.next()
        if tok.kind != "punct" or tok.value != value:
            raise ParseError(
                f"expected {value!r}, found {tok.value!r}", tok.span(self.filename)
            )
        return tok

    def fail(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.span(self.filename))

    def begin_clause(self):
        self._clause_vars = set()

    def fresh_anon(self) -> Var:
        while True:
            self._anon += 1
            name = f"_G{self._anon}"
            if name not in self._clause_vars:
                self._clause_vars.add(name)
                return Var(name)

    # -- terms ---------------------------------------------------------------

    def term(self, max_prec: int = 999) -> Term:
        left = self.primary()
        while True:
            tok = self.peek()
            op = None
            if tok.kind == "punct" and tok.value in OPERATORS:
                op = tok.value
            elif tok.kind == "atom" and tok.value in OPERATORS:
                op = tok.value
            if op is None:
                return left
            prec, assoc = OPERATORS[op]
            if prec > max_prec:
                return left
            self.next()
            right = self.term(prec if assoc == "xfy" else prec - 1)
            left = Compound(op, (left, right))

    def primary(self) -> Term:
        tok = self.next()
        if tok.kind == "num":
            return Num(tok.value)
        if tok.kind == "var":
            if tok.value == "_":
                return self.fresh_anon()
            self._clause_vars.add(tok.value)
            return Var(tok.value)
        if tok.kind in ("atom", "quoted"):
            name = tok.value
            if self.at_punct("("):
                return Compound(name, self.arg_list())
            return Const(name)
        if tok.kind == "punct":
            if tok.value == "(":
                inner = self.term(1200)
                self.expect_punct(")")
                return inner
            if tok.value == "[":
                return self.list_term()
            if tok.value == "-":
                nxt = self.peek()
                if nxt.kind == "num":
                    self.next()
                    return Num(-nxt.value)
                return Compound("-", (self.term(200),))
            if tok.value == "!":
                return Const("!")
        self.fail(f"unexpected token {tok.value!r}", tok)

    def arg_list(self) -> tuple[Term, ...]:
        self.expect_punct("(")
        args = [self.term(999)]
        while self.at_punct(","):
            self.next()
            args.append(self.term(999))
        self.expect_punct(")")
        return tuple(args)

    def list_term(self) -> Term:
        if self.at_punct("]"):
            self.next()
            return NIL
        elements = [self.term(999)]
        while self.at_punct(","):
            self.next()
            elements.append(self.term(999))
        tail: Term = NIL
        if self.at_punct("|"):
            self.next()
            tail = self.term(999)
        self.expect_punct("]")
        return mklist(elements, tail)

    # -- literals and clauses ------------------------------------------------

    def goal_atom(self) -> Atom:
        """One callable goal, with an optional module prefix."""
        tok = self.peek()
        module = None
        if tok.kind == "atom" and self.tokens[self.i + 1].kind == "punct" \
                and self.tokens[self.i + 1].value == ":":
            module = tok.value
            self.next()
            self.next()
            if self.at_punct("("):
                self.next()
                inner = self.term(1200)
                self.expect_punct(")")
                return self.to_atom(inner, module, tok)
            inner = self.primary()
            return self.to_atom(inner, module, tok)
        inner = self.term(999)
        return self.to_atom(inner, module, tok)

    def to_atom(self, t: Term, module: Optional[str], tok: Token) -> Atom:
        span = tok.span(self.filename)
        if isinstance(t, Const):
            return Atom(t.symbol, (), module, span)
        if isinstance(t, Compound) and not (t.functor == "." and len(t.args) == 2):
            return Atom(t.functor, t.args, module, span)
        self.fail(f"{term_text(t)} cannot be used as a goal", tok)

    def literal(self) -> Literal:
        tok = self.peek()
        if tok.kind == "atom" and tok.value == "not":
            nxt = self.tokens[self.i + 1]
            if nxt.kind == "punct" and nxt.value == "(":
                self.next()
                self.next()
                inner = self.goal_atom()
                if self.at_punct(","):
                    self.fail("not/1 takes a single goal")
                self.expect_punct(")")
                return Literal(inner, NEGATED)
            starts_term = nxt.kind in ("atom", "var", "num", "quoted") or (
                nxt.kind == "punct" and nxt.value in ("(", "[", "-", "!")
            )
            if starts_term:
                self.next()
                inner = self.goal_atom()
                return Literal(inner, NEGATED)
        return Literal(self.goal_atom(), POSITIVE)


def parse_program(text: str, filename: str = "<string>") -> Program:
    """Parse `.`-separated clauses into a Program.

    Unnamed rules receive names r1, r2, ... by source order; a comment
    directive `% name: foo` names the clause that follows it.  Duplicate
    explicit names are rejected.
    """
    tokens = tokenize(text, filename)
    parser = TermParser(tokens, filename)
    raw: list[tuple[Optional[str], Rule]] = []
    explicit: dict[str, SourceSpan] = {}
    while parser.peek().kind != "eof":
        name = None
        while parser.peek().kind == "directive":
            tok = parser.next()
            name = tok.value
        if parser.peek().kind == "eof":
            if name is not None:
                parser.fail("name directive without a clause")
            break
        parser.begin_clause()
        head_tok = parser.peek()
        head = parser.to_atom(parser.term(999), None, head_tok)
        body: list[Literal] = []
        if parser.at_punct(":-"):
            parser.next()
            body.append(parser.literal())
            while parser.at_punct(","):
                parser.next()
                body.append(parser.literal())
        tok = parser.next()
        if tok.kind != "end":
            parser.fail(f"expected '.', found {tok.value!r}", tok)
        span = head_tok.span(filename)
        if name is not None:
            if name in explicit:
                raise ParseError(f"duplicate rule name {name!r}", span)
            explicit[name] = span
        raw.append((name, Rule(name or "", head, tuple(body), span)))
    taken = set(explicit)
    rules: list[Rule] = []
    k = 0
    for name, rule in raw:
        if name is None:
            k += 1
            while f"r{k}" in taken:
                k += 1
            name = f"r{k}"
            taken.add(name)
        rules.append(Rule(name, rule.head, rule.body, rule.span))
    return Program(tuple(rules))


def print_program(p: Program) -> str:
    """Render a program as parseable rule text (inverse of parse_program)."""
    lines = []
    for i, r in enumerate(p.rules):
        if r.name != f"r{i + 1}":
            lines.append(f"% name: {r.name}")
        head = term_text(r.head)
        if r.body:
            body = ", ".join(literal_text(l) for l in r.body)
            lines.append(f"{head} :- {body}.")
        else:
            lines.append(f"{head}.")
    return "\n".join(lines) + ("\n" if lines else "")


# ===========================================================================
# SWRL abstract syntax
# ===========================================================================


@dataclass(frozen=True)
class SwrlVar:
    name: str


@dataclass(frozen=True)
class SwrlIndividual:
    name: str


@dataclass(frozen=True)
class SwrlLiteral:
    value: Union[int, float, str]


SwrlObj = Union[SwrlVar, SwrlIndividual, SwrlLiteral]


@dataclass(frozen=True)
class ClassAtom:
    cls: str
    arg: SwrlObj


@dataclass(frozen=True)
class PropertyAtom:
    prop: str
    arg1: SwrlObj
    arg2: SwrlObj


@dataclass(frozen=True)
class SameAs:
    arg1: SwrlObj
    arg2: SwrlObj


@dataclass(frozen=True)
class DifferentFrom:
    arg1: SwrlObj
    arg2: SwrlObj


@dataclass(frozen=True)
class BuiltinAtom:
    name: str
    args: tuple[SwrlObj, ...]


SwrlAtom = Union[ClassAtom, PropertyAtom, SameAs, DifferentFrom, BuiltinAtom]


@dataclass(frozen=True)
class SwrlRule:
    annotations: tuple[str, ...]
    antecedent: tuple[SwrlAtom, ...]
    consequent: tuple[SwrlAtom, ...]


@dataclass(frozen=True)
class SwrlOntology:
    name: str
    rules: tuple[SwrlRule, ...]
    class_atoms: tuple[SwrlAtom, ...] = ()


_SWRL_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>\d+(?:\.\d+)?)
      | "(?P<str>[^"]*)"
      | (?P<name>[A-Za-z_][A-Za-z0-9_:.\-]*)
      | (?P<punct>[()])
    )""",
    re.VERBOSE,
)


class _SwrlParser:
    def __init__(self, text: str, filename: str):
        self.text = text
        self.filename = filename
        self.pos = 0

    def _span(self, at: Optional[int] = None) -> SourceSpan:
        at = self.pos if at is None else at
        line = self.text.count("\n", 0, at) + 1
        col = at - (self.text.rfind("\n", 0, at) + 1) + 1
        return SourceSpan(self.filename, line, col)

    def next(self) -> tuple[str, str, int]:
        while True:
            rest = self.text[self.pos :]
            if not rest.strip():
                return ("eof", "", self.pos)
            m = _SWRL_TOKEN.match(self.text, self.pos)
            if not m:
                raise ParseError("unexpected input", self._span())
            at = m.start() + len(m.group(0)) - len(m.group(0).lstrip())
            self.pos = m.end()
            if m.group("num") is not None:
                return ("num", m.group("num"), at)
            if m.group("str") is not None:
                return ("str", m.group("str"), at)
            if m.group("name") is not None:
                return ("name", m.group("name"), at)
            return ("punct", m.group("punct"), at)

    def peek(self) -> tuple[str, str, int]:
        saved = self.pos
        tok = self.next()
        self.pos = saved
        return tok

    def expect_name(self, expected: str):
        kind, value, at = self.next()
        if kind != "name" or value != expected:
            raise ParseError(f"expected {expected!r}, found {value!r}", self._span(at))

    def expect_punct(self, expected: str):
        kind, value, at = self.next()
        if kind != "punct" or value != expected:
            raise ParseError(f"expected {expected!r}, found {value!r}", self._span(at))

    def rules(self) -> list[SwrlRule]:
        out = []
        while self.peek()[0] != "eof":
            out.append(self.rule())
        return out

    def rule(self) -> SwrlRule:
        self.expect_name("Implies")
        self.expect_punct("(")
        annotations = []
        while True:
            kind, value, _ = self.peek()
            if kind == "name" and value == "annotation":
                self.next()
                annotations.append(self.balanced())
            else:
                break
        self.expect_name("Antecedent")
        antecedent = self.atom_list()
        self.expect_name("Consequent")
        consequent = self.atom_list()
        self.expect_punct(")")
        return SwrlRule(tuple(annotations), tuple(antecedent), tuple(consequent))

    def balanced(self) -> str:
        """Capture a balanced parenthesized chunk verbatim (annotations)."""
        start = self.pos
        self.expect_punct("(")
        depth = 1
        while depth:
            kind, value, at = self.next()
            if kind == "eof":
                raise ParseError("unterminated annotation", self._span(at))
            if kind == "punct":
                depth += 1 if value == "(" else -1
        return self.text[start : self.pos].strip()

    def atom_list(self) -> list[SwrlAtom]:
        self.expect_punct("(")
        atoms = []
        while True:
            kind, value, at = self.peek()
            if kind == "punct" and value == ")":
                self.next()
                return atoms
            if kind != "name":
                raise ParseError(f"expected an atom, found {value!r}", self._span(at))
            atoms.append(self.atom())

    def atom(self) -> SwrlAtom:
        kind, name, at = self.next()
        self.expect_punct("(")
        objs = []
        while True:
            k, v, a = self.peek()
            if k == "punct" and v == ")":
                self.next()
                break
            objs.append(self.obj())
        return self.classify(name, objs, at)

    def obj(self) -> SwrlObj:
        kind, value, at = self.next()
        if kind == "num":
            return SwrlLiteral(float(value) if "." in value else int(value))
        if kind == "str":
            return SwrlLiteral(value)
        if kind == "name":
            if value in ("I-variable", "D-variable"):
                self.expect_punct("(")
                k, v, a = self.next()
                if k != "name":
                    raise ParseError("expected a variable name", self._span(a))
                self.expect_punct(")")
                return SwrlVar(v)
            return SwrlIndividual(value)
        raise ParseError(f"unexpected {value!r} in atom arguments", self._span(at))

    def classify(self, name: str, objs: list[SwrlObj], at: int) -> SwrlAtom:
        span = self._span(at)
        if name in ("sameAs", "same_as"):
            if len(objs) != 2:
                raise ParseError("sameAs takes two arguments", span)
            return SameAs(objs[0], objs[1])
        if name in ("differentFrom", "different_from"):
            if len(objs) != 2:
                raise ParseError("differentFrom takes two arguments", span)
            return DifferentFrom(objs[0], objs[1])
        if name == "builtin":
            if not objs or not isinstance(objs[0], SwrlIndividual):
                raise ParseError("builtin needs a builtin name first", span)
            return BuiltinAtom(objs[0].name, tuple(objs[1:]))
        if ":" in name:
            return BuiltinAtom(name, tuple(objs))
        if len(objs) == 1:
            return ClassAtom(name, objs[0])
        if len(objs) == 2:
            return PropertyAtom(name, objs[0], objs[1])
        raise ParseError(f"unknown atom form {name}/{len(objs)}", span)


def parse_swrl(text: str, filename: str = "<string>") -> list[SwrlRule]:
    """Parse SWRL rules written in the Implies(...) abstract syntax."""
    return _SwrlParser(text, filename).rules()


# ===========================================================================
# RuleML / XML subset
# ===========================================================================


def parse_ruleml_xml(text: str, filename: str = "<xml>") -> SwrlOntology:
    """Read a swrlx:Ontology document into SWRL rules and class assertions."""
    root = parse_xml(text, filename)
    if root.tag != "swrlx:Ontology":
        raise UnsupportedConstruct(f"expected swrlx:Ontology, found <{root.tag}>")
    name = root.attributes.get("swrlx:name", "")
    rules: list[SwrlRule] = []
    class_atoms: list[SwrlAtom] = []
    for child in _elements(root):
        if child.tag == "ruleml:imp":
            rules.append(_imp_to_rule(child))
        elif child.tag == "swrlx:classAtom":
            class_atoms.append(_xml_atom(child))
        else:
            raise UnsupportedConstruct(f"unsupported element <{child.tag}>")
    return SwrlOntology(name, tuple(rules), tuple(class_atoms))


def _elements(node: XmlTerm) -> list[XmlTerm]:
    for c in node.children:
        if isinstance(c, Text) and c.value.strip():
            raise UnsupportedConstruct(
                f"unexpected text {c.value.strip()!r} inside <{node.tag}>"
            )
    return node.child_elements()


def _imp_to_rule(imp: XmlTerm) -> SwrlRule:
    body: tuple[SwrlAtom, ...] = ()
    head: tuple[SwrlAtom, ...] = ()
    seen = set()
    for part in _elements(imp):
        if part.tag == "ruleml:_body":
            body = tuple(_xml_atom(a) for a in _elements(part))
        elif part.tag == "ruleml:_head":
            head = tuple(_xml_atom(a) for a in _elements(part))
        else:
            raise UnsupportedConstruct(f"unsupported element <{part.tag}> in ruleml:imp")
        if part.tag in seen:
            raise UnsupportedConstruct(f"duplicate <{part.tag}> in ruleml:imp")
        seen.add(part.tag)
    return SwrlRule((), body, head)


def _xml_atom(node: XmlTerm) -> SwrlAtom:
    if node.tag == "swrlx:individualPropertyAtom":
        prop = node.attributes.get("swrlx:property")
        if prop is None:
            raise UnsupportedConstruct("individualPropertyAtom without swrlx:property")
        args = [_xml_obj(t) for t in _elements(node)]
        if len(args) != 2:
            raise UnsupportedConstruct(f"{prop} property atom needs two arguments")
        return PropertyAtom(prop, args[0], args[1])
    if node.tag == "swrlx:classAtom":
        parts = _elements(node)
        if len(parts) != 2:
            raise UnsupportedConstruct("classAtom needs a class and one argument")
        cls = _xml_class(parts[0])
        return ClassAtom(cls, _xml_obj(parts[1]))
    if node.tag == "swrlx:sameIndividualAtom":
        args = [_xml_obj(t) for t in _elements(node)]
        if len(args) != 2:
            raise UnsupportedConstruct("sameIndividualAtom needs two arguments")
        return SameAs(args[0], args[1])
    if node.tag == "swrlx:differentIndividualsAtom":
        args = [_xml_obj(t) for t in _elements(node)]
        if len(args) != 2:
            raise UnsupportedConstruct("differentIndividualsAtom needs two arguments")
        return DifferentFrom(args[0], args[1])
    if node.tag == "swrlx:builtinAtom":
        name = node.attributes.get("swrlx:builtin")
        if name is None:
            raise UnsupportedConstruct("builtinAtom without swrlx:builtin")
        return BuiltinAtom(name, tuple(_xml_obj(t) for t in _elements(node)))
    raise UnsupportedConstruct(f"unsupported atom element <{node.tag}>")


def _xml_obj(node: XmlTerm) -> SwrlObj:
    if node.tag == "ruleml:var":
        name = node.text().strip()
        if not name:
            raise UnsupportedConstruct("empty ruleml:var")
        return SwrlVar(name)
    if node.tag == "owlx:Individual":
        name = node.attributes.get("owlx:name")
        if name is None:
            raise UnsupportedConstruct("owlx:Individual without owlx:name")
        return SwrlIndividual(name)
    raise UnsupportedConstruct(f"unsupported term element <{node.tag}>")


def _xml_class(node: XmlTerm) -> str:
    """Flatten a class expression to a canonical opaque name."""
    if node.tag == "owlx:Class":
        name = node.attributes.get("owlx:name")
        if name is None:
            raise UnsupportedConstruct("owlx:Class without owlx:name")
        return name
    if node.tag == "owlx:IntersectionOf":
        inner = ",".join(_xml_class(c) for c in _elements(node))
        return f"and({inner})"
    if node.tag == "owlx:ObjectRestriction":
        prop = node.attributes.get("owlx:property")
        if prop is None:
            raise UnsupportedConstruct("ObjectRestriction without owlx:property")
        parts = _elements(node)
        if len(parts) == 1 and parts[0].tag == "owlx:someValuesFrom":
            sv = parts[0]
            cls = sv.attributes.get("owlx:class")
            if cls is None:
                sub = _elements(sv)
                if len(sub) != 1:
                    raise UnsupportedConstruct("someValuesFrom needs one class")
                cls = _xml_class(sub[0])
            return f"some({prop},{cls})"
        raise UnsupportedConstruct("unsupported restriction form")
    raise UnsupportedConstruct(f"unsupported class expression <{node.tag}>")


# ===========================================================================
# Transformations
# ===========================================================================


def lloyd_topor(rule: SwrlRule) -> list[SwrlRule]:
    """Split a conjunctive consequent into one rule per consequent atom."""
    if not rule.consequent:
        raise EmptyConsequent("rule has an empty consequent")
    return [
        SwrlRule(rule.annotations, rule.antecedent, (atom,))
        for atom in rule.consequent
    ]


def swrl_to_datalog(rules: list[SwrlRule]) -> Program:
    """Map normalized SWRL rules onto plain clauses.

    Class atoms become unary predicates, property atoms binary ones;
    sameAs / differentFrom / builtin atoms become prolog-prefixed calls.
    Variable names are capitalized; two source names that collide after
    capitalization are rejected.  Annotations are dropped.
    """
    out: list[Rule] = []
    for k, rule in enumerate(rules, start=1):
        if len(rule.consequent) != 1:
            raise TranslationError(
                "rule is not normalized: expected exactly one consequent atom"
            )
        varmap: dict[str, str] = {}
        head = _swrl_atom_to_datalog(rule.consequent[0], varmap)
        if head.module_prefix is not None:
            raise TranslationError(
                f"builtin atom {head.predicate!r} cannot be a rule head"
            )
        body = tuple(
            Literal(_swrl_atom_to_datalog(a, varmap)) for a in rule.antecedent
        )
        out.append(Rule(f"r{k}", head, body))
    return Program(tuple(out))


def _swrl_obj_to_term(obj: SwrlObj, varmap: dict[str, str]) -> Term:
    if isinstance(obj, SwrlVar):
        cap = obj.name[0].upper() + obj.name[1:]
        prior = varmap.get(cap)
        if prior is not None and prior != obj.name:
            raise TranslationError(
                f"variables {prior!r} and {obj.name!r} collide as {cap!r}"
            )
        varmap[cap] = obj.name
        return Var(cap)
    if isinstance(obj, SwrlIndividual):
        return Const(obj.name)
    if isinstance(obj.value, str):
        return Const(obj.value)
    return Num(obj.value)


def _swrl_atom_to_datalog(atom: SwrlAtom, varmap: dict[str, str]) -> Atom:
    conv = lambda o: _swrl_obj_to_term(o, varmap)
    if isinstance(atom, ClassAtom):
        return Atom(atom.cls, (conv(atom.arg),))
    if isinstance(atom, PropertyAtom):
        return Atom(atom.prop, (conv(atom.arg1), conv(atom.arg2)))
    if isinstance(atom, SameAs):
        return Atom("same_as", (conv(atom.arg1), conv(atom.arg2)), "prolog")
    if isinstance(atom, DifferentFrom):
        return Atom("different_from", (conv(atom.arg1), conv(atom.arg2)), "prolog")
    local = atom.name.rsplit(":", 1)[-1]
    return Atom(local, tuple(conv(o) for o in atom.args), "prolog")

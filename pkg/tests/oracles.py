"""Independent reference implementations used to cross-check the package.

Everything here is deliberately naive: label-correcting stratification,
nested-loop joins over ground fact lists, compensated sums via math.fsum.
Slow but obviously correct on desk-scale inputs, and sharing no evaluation
machinery with the code under test.
"""

from __future__ import annotations

import csv
import math
import xml.etree.ElementTree as ET

from ddlite.kernel import (
    Atom,
    Compound,
    Const,
    Num,
    Var,
    canonical,
    term_text,
)


# ===========================================================================
# Ground-instantiation model oracle
# ===========================================================================


def _match(pattern, fact_args, env):
    """Extend env so the pattern args equal the ground fact args, or None."""
    out = dict(env)
    for p, f in zip(pattern, fact_args):
        p = canonical(p)
        if isinstance(p, Var):
            bound = out.get(p.name)
            if bound is None:
                out[p.name] = f
            elif bound != f:
                return None
        elif p != f:
            return None
    return out


def _ground(t, env):
    t = canonical(t)
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(_ground(a, env) for a in t.args))
    return t


def _strata(program):
    """Predicate -> stratum by label correction; None if negation is cyclic."""
    keys = set()
    for rule in program.rules:
        keys.add(rule.head.key)
        for lit in rule.body:
            if lit.atom.module_prefix is None:
                keys.add(lit.atom.key)
    level = {k: 0 for k in keys}
    for _ in range(len(keys) + 1):
        changed = False
        for rule in program.rules:
            h = rule.head.key
            for lit in rule.body:
                if lit.atom.module_prefix is not None:
                    continue
                need = level[lit.atom.key] + (1 if lit.is_negated() else 0)
                if level[h] < need:
                    level[h] = need
                    changed = True
        if not changed:
            return level
    return None


_COMPARE = {
    "<": lambda a, b: a < b,
    "=<": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "=:=": lambda a, b: a == b,
    "=\\=": lambda a, b: a != b,
}


def _arith_value(t, env):
    t = _ground(t, env)
    if isinstance(t, Num):
        return t.value
    assert isinstance(t, Compound), "oracle: not an arithmetic expression"
    if t.functor == "-" and len(t.args) == 1:
        return -_arith_value(t.args[0], env)
    assert len(t.args) == 2, "oracle: not an arithmetic expression"
    a, b = (_arith_value(x, env) for x in t.args)
    if t.functor == "+":
        return a + b
    if t.functor == "-":
        return a - b
    if t.functor == "*":
        return a * b
    assert t.functor == "/", "oracle: not an arithmetic expression"
    assert b != 0, "oracle: division by zero"
    if isinstance(a, int) and isinstance(b, int) and a % b == 0:
        return a // b
    return a / b


def ground_model(program):
    """Minimal model of a stratified program by exhaustive rule firing.

    Body literals are processed positives first, then builtin calls in
    their body order (create_owl_thing, is, comparisons, pt, same_as,
    different_from are understood), then negations; any other builtin is
    rejected.  Returns the model as a set of rendered fact strings.
    """
    level = _strata(program)
    assert level is not None, "oracle given a non-stratified program"
    facts: dict = {}

    def rows(key):
        return facts.get(key, [])

    def fire(rule):
        positives = []
        builtins = []
        negatives = []
        for lit in rule.body:
            if lit.atom.module_prefix is not None:
                builtins.append(lit)
            elif lit.is_negated():
                negatives.append(lit.atom)
            elif lit.atom.predicate in ("!", "true") and not lit.atom.args:
                pass
            else:
                positives.append(lit.atom)

        def run_builtin(atom, env):
            """Extended env (or None for failure) after one builtin call."""
            name = atom.predicate
            if name == "create_owl_thing":
                b = canonical(atom.args[0])
                assert isinstance(b, Var)
                args = tuple(_ground(a, env) for a in atom.args[1:])
                out = dict(env)
                out[b.name] = Compound(
                    "skolem", (Const("create_owl_thing"),) + args
                )
                return out
            if name == "is":
                value = Num(_arith_value(atom.args[1], env))
                return _match((atom.args[0],), (value,), env)
            if name in _COMPARE:
                holds = _COMPARE[name](
                    _arith_value(atom.args[0], env),
                    _arith_value(atom.args[1], env),
                )
                return dict(env) if holds else None
            if name in ("pt", "same_as", "="):
                try:
                    return _match((atom.args[0],), (_ground(atom.args[1], env),), env)
                except KeyError:
                    return _match((atom.args[1],), (_ground(atom.args[0], env),), env)
            if name == "different_from":
                a, b = (_ground(x, env) for x in atom.args)
                return dict(env) if a != b else None
            raise AssertionError(f"oracle does not model builtin {name}")

        def walk(i, env):
            if i == len(positives):
                out = dict(env)
                for lit in builtins:
                    out = run_builtin(lit.atom, out)
                    if out is None:
                        return
                for neg in negatives:
                    args = tuple(_ground(a, out) for a in neg.args)
                    if args in set(map(tuple, rows(neg.key))):
                        return
                yield out
                return
            atom = positives[i]
            for stored in rows(atom.key):
                env2 = _match(atom.args, stored, env)
                if env2 is not None:
                    yield from walk(i + 1, env2)

        derived = []
        for env in walk(0, {}):
            derived.append(tuple(_ground(a, env) for a in rule.head.args))
        return derived

    for stratum in range(max(level.values(), default=0) + 1):
        layer = [r for r in program.rules if level[r.head.key] == stratum]
        changed = True
        while changed:
            changed = False
            for rule in layer:
                for args in fire(rule):
                    bucket = facts.setdefault(rule.head.key, [])
                    if args not in bucket:
                        bucket.append(args)
                        changed = True
    out = set()
    for key, tuples in facts.items():
        for args in tuples:
            out.add(term_text(Atom(key.name, tuple(args), key.module)))
    return out


def model_of_store(store):
    """The engine's fact store rendered the same way as ground_model output."""
    return {term_text(f) for f in store.sorted_facts()}


# ===========================================================================
# Hybrid aggregation oracle (stdlib csv + ElementTree, nested loops, fsum)
# ===========================================================================


def sum_hours_by_dept(employee_csv, works_on_xml):
    """Group key -> compensated sum over the employee/works_on join.

    Joins every employee row against every XML row (quadratic on purpose),
    keeps rows whose HOURS parses as a number, groups on the department
    column, and sums each group with math.fsum.
    """
    with open(employee_csv, newline="", encoding="utf-8") as fh:
        employees = [row for row in csv.reader(fh) if row]
    rows = ET.parse(works_on_xml).getroot().findall("row")
    groups: dict = {}
    for emp in employees:
        ssn, dno = emp[1], int(emp[6])
        for row in rows:
            if row.get("ESSN") != ssn:
                continue
            try:
                hours = float(row.get("HOURS"))
            except (TypeError, ValueError):
                continue
            groups.setdefault(dno, []).append(hours)
    return [[dno, math.fsum(groups[dno])] for dno in sorted(groups)]


# ===========================================================================
# Random instance generators (deterministic given the caller's rng)
# ===========================================================================

CONSTANTS = ("a", "b", "c", "d", "e")


def random_term(rng, depth=0):
    """A random term over a small signature; depth limits nesting."""
    roll = rng.random()
    if roll < 0.30:
        return Var(rng.choice(("X", "Y", "Z", "W")))
    if roll < 0.55:
        return Const(rng.choice(CONSTANTS))
    if roll < 0.70:
        return Num(rng.randint(0, 9))
    if depth >= 2:
        return Const(rng.choice(CONSTANTS))
    functor = rng.choice(("f", "g", "h"))
    n = rng.randint(1, 3)
    return Compound(functor, tuple(random_term(rng, depth + 1) for _ in range(n)))


def random_program(rng, allow_negation=False):
    """A small safe program: ground facts plus range-restricted rules.

    Predicates are layered so that negated calls always target a strictly
    lower layer, keeping every generated program stratified.
    """
    from ddlite.kernel import Literal, Program, Rule

    preds = []
    for i in range(rng.randint(3, 5)):
        preds.append((f"p{i}", rng.randint(1, 2), i))
    rules = []
    k = 0
    for name, arity, layer in preds:
        for _ in range(rng.randint(1, 2)):
            if len(rules) >= 8:
                break
            k += 1
            if layer == 0 or rng.random() < 0.4:
                args = tuple(
                    Const(rng.choice(CONSTANTS)) for _ in range(arity)
                )
                rules.append(Rule(f"r{k}", Atom(name, args), ()))
                continue
            lower = [p for p in preds if p[2] < layer]
            body = []
            bound = []
            for _ in range(rng.randint(1, 3)):
                bname, barity, _ = rng.choice(lower)
                bargs = []
                for _ in range(barity):
                    if bound and rng.random() < 0.5:
                        bargs.append(Var(rng.choice(bound)))
                    else:
                        v = f"V{len(bound)}"
                        bound.append(v)
                        bargs.append(Var(v))
                body.append(Literal(Atom(bname, tuple(bargs))))
            if allow_negation and bound and rng.random() < 0.5:
                bname, barity, _ = rng.choice(lower)
                nargs = tuple(
                    Var(rng.choice(bound)) for _ in range(barity)
                )
                body.append(Literal(Atom(bname, nargs), "negated"))
            head_args = tuple(
                Var(rng.choice(bound))
                if bound and rng.random() < 0.7
                else Const(rng.choice(CONSTANTS))
                for _ in range(arity)
            )
            rules.append(Rule(f"r{k}", Atom(name, head_args), tuple(body)))
    return Program(tuple(rules))

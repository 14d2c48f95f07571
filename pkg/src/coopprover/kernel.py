"""First-order logic kernel: terms, literals, clauses, substitutions.

Everything here is immutable after construction and safe to share between
concurrent searches. Substitutions are plain dicts mapping variable names
to terms; the functions that produce them keep them idempotent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Union

EQUALITY = "="

POSITIVE = True
NEGATIVE = False


class Var:
    """A first-order variable, identified by name."""

    __slots__ = ("name", "_h")

    def __init__(self, name: str):
        self.name = name
        self._h = hash(("v", name))

    def __eq__(self, other):
        return type(other) is Var and other.name == self.name

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"Var({self.name!r})"


class App:
    """A function application; constants are 0-ary applications."""

    __slots__ = ("fn", "args", "_h")

    def __init__(self, fn: str, args: tuple = ()):
        self.fn = fn
        self.args = args
        self._h = hash((fn, args))

    def __eq__(self, other):
        return (
            type(other) is App
            and other._h == self._h
            and other.fn == self.fn
            and other.args == self.args
        )

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"App({self.fn!r}, {self.args!r})"


Term = Union[Var, App]


class Literal:
    """A possibly negated atom. Equality atoms use the reserved "=" predicate."""

    __slots__ = ("positive", "pred", "args", "_h", "_key")

    def __init__(self, positive: bool, pred: str, args: tuple = ()):
        self.positive = positive
        self.pred = pred
        self.args = args
        self._h = hash((positive, pred, args))
        self._key = None

    @property
    def is_equality(self) -> bool:
        return self.pred == EQUALITY

    def complement(self) -> "Literal":
        return Literal(not self.positive, self.pred, self.args)

    def key(self):
        if self._key is None:
            self._key = (self.positive, self.pred, tuple(term_key(t) for t in self.args))
        return self._key

    def __eq__(self, other):
        return (
            type(other) is Literal
            and other._h == self._h
            and other.positive == self.positive
            and other.pred == self.pred
            and other.args == self.args
        )

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"Literal({render_literal(self)!r})"


def term_key(t: Term):
    """Total structural order on terms; variables sort before applications."""
    if type(t) is Var:
        return (0, t.name)
    return (1, t.fn, tuple(term_key(a) for a in t.args))


class Clause:
    """A duplicate-free set of literals, stored in a canonical total order.

    Equality and hashing look only at the literal set; ``cid`` and ``role``
    are bookkeeping and never influence comparisons.
    """

    __slots__ = ("literals", "role", "cid", "_h")

    def __init__(self, literals: Iterable[Literal], role: str = "derived", cid=None):
        lits = sorted(set(literals), key=Literal.key)
        self.literals = tuple(lits)
        self.role = role
        self.cid = cid
        self._h = hash(self.literals)

    @property
    def is_empty(self) -> bool:
        return not self.literals

    @property
    def is_negative(self) -> bool:
        return bool(self.literals) and all(not l.positive for l in self.literals)

    @property
    def is_horn(self) -> bool:
        return sum(1 for l in self.literals if l.positive) <= 1

    @property
    def is_unit(self) -> bool:
        return len(self.literals) == 1

    def variables(self) -> set:
        out: set = set()
        for lit in self.literals:
            for t in lit.args:
                collect_vars(t, out)
        return out

    def with_role(self, role: str, cid=None) -> "Clause":
        return Clause(self.literals, role=role, cid=cid if cid is not None else self.cid)

    def __eq__(self, other):
        return type(other) is Clause and other._h == self._h and other.literals == self.literals

    def __hash__(self):
        return self._h

    def __len__(self):
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    def __repr__(self):
        return f"Clause({render_clause(self)!r})"


def collect_vars(t: Term, out: set) -> None:
    if type(t) is Var:
        out.add(t.name)
    else:
        for a in t.args:
            collect_vars(a, out)


def term_vars(t: Term) -> set:
    out: set = set()
    collect_vars(t, out)
    return out


# ---------------------------------------------------------------------------
# Substitutions

Subst = dict


def subst_term(sub: Subst, t: Term) -> Term:
    if type(t) is Var:
        return sub.get(t.name, t)
    if not t.args:
        return t
    return App(t.fn, tuple(subst_term(sub, a) for a in t.args))


def subst_literal(sub: Subst, lit: Literal) -> Literal:
    if not lit.args:
        return lit
    return Literal(lit.positive, lit.pred, tuple(subst_term(sub, a) for a in lit.args))


def subst_clause(sub: Subst, clause: Clause) -> Clause:
    return Clause(
        (subst_literal(sub, l) for l in clause.literals),
        role=clause.role,
        cid=clause.cid,
    )


def apply_sub(sub: Subst, x):
    """Apply a substitution to a term, literal or clause.

    Clause results collapse duplicate literals, since clauses are sets.
    """
    if isinstance(x, Clause):
        return subst_clause(sub, x)
    if isinstance(x, Literal):
        return subst_literal(sub, x)
    return subst_term(sub, x)


def occurs_in(name: str, t: Term) -> bool:
    if type(t) is Var:
        return t.name == name
    return any(occurs_in(name, a) for a in t.args)


def _extend(sub: Subst, name: str, value: Term) -> None:
    # Keep the substitution idempotent: fold the new binding into old values.
    one = {name: value}
    for k in list(sub):
        sub[k] = subst_term(one, sub[k])
    sub[name] = value


def unify(s, t, sub: Optional[Subst] = None) -> Optional[Subst]:
    """Most general unifier of two terms, or None.

    Occurs-check enforced; the result is idempotent and extends ``sub``
    when one is given (the argument itself is not mutated).
    """
    out = dict(sub) if sub else {}
    stack = [(s, t)]
    while stack:
        a, b = stack.pop()
        a = subst_term(out, a)
        b = subst_term(out, b)
        if a == b:
            continue
        if type(a) is Var:
            if occurs_in(a.name, b):
                return None
            _extend(out, a.name, b)
        elif type(b) is Var:
            if occurs_in(b.name, a):
                return None
            _extend(out, b.name, a)
        else:
            if a.fn != b.fn or len(a.args) != len(b.args):
                return None
            stack.extend(zip(a.args, b.args))
    return out


def unify_atoms(l1: Literal, l2: Literal, sub: Optional[Subst] = None) -> Optional[Subst]:
    """Unify the atoms of two literals, ignoring polarity."""
    if l1.pred != l2.pred or len(l1.args) != len(l2.args):
        return None
    out = dict(sub) if sub else {}
    for a, b in zip(l1.args, l2.args):
        got = unify(a, b, out)
        if got is None:
            return None
        out = got
    return out


def match_term(pattern: Term, target: Term, sub: Optional[Subst] = None) -> Optional[Subst]:
    """One-sided matching: a substitution over pattern variables only."""
    out = dict(sub) if sub else {}
    stack = [(pattern, target)]
    while stack:
        p, t = stack.pop()
        if type(p) is Var:
            bound = out.get(p.name)
            if bound is None:
                out[p.name] = t
            elif bound != t:
                return None
        elif type(t) is Var:
            return None
        else:
            if p.fn != t.fn or len(p.args) != len(t.args):
                return None
            stack.extend(zip(p.args, t.args))
    return out


def match(pattern, target, sub: Optional[Subst] = None) -> Optional[Subst]:
    """Match a term or literal atom against a target of the same kind."""
    if isinstance(pattern, Literal):
        if pattern.pred != target.pred or len(pattern.args) != len(target.args):
            return None
        out = dict(sub) if sub else {}
        for p, t in zip(pattern.args, target.args):
            got = match_term(p, t, out)
            if got is None:
                return None
            out = got
        return out
    return match_term(pattern, target, sub)


# ---------------------------------------------------------------------------
# Fresh variables and variants

class VarSupply:
    """Monotone counter handing out variable names never seen before."""

    __slots__ = ("_n", "prefix")

    def __init__(self, prefix: str = "X"):
        self._n = 0
        self.prefix = prefix

    def fresh(self, used=()) -> str:
        while True:
            name = f"{self.prefix}{self._n}"
            self._n += 1
            if name not in used:
                return name


_global_supply = VarSupply()


def reset_fresh_names() -> None:
    """Restart the global fresh-name counter (deterministic replays)."""
    _global_supply._n = 0


def rename_literals(
    literals, used: set, supply: Optional[VarSupply] = None
) -> tuple:
    """Rename the variables of a literal sequence apart from ``used``.

    All occurrences of one variable get the same fresh name. Returns the
    renamed literal tuple; ``used`` is extended with the new names.
    """
    supply = supply or _global_supply
    mapping: Subst = {}
    names: set = set()
    for lit in literals:
        for t in lit.args:
            collect_vars(t, names)
    for name in sorted(names):
        fresh = supply.fresh(used)
        used.add(fresh)
        mapping[name] = Var(fresh)
    if not mapping:
        return tuple(literals)
    return tuple(subst_literal(mapping, l) for l in literals)


def rename_apart(clause: Clause, used=(), supply: Optional[VarSupply] = None) -> Clause:
    """A variant of the clause sharing no variable with ``used``."""
    pool = set(used)
    lits = rename_literals(clause.literals, pool, supply)
    return Clause(lits, role=clause.role, cid=clause.cid)


# ---------------------------------------------------------------------------
# Clause-level tests

def _blind_key(lit: Literal):
    # Literal shape with variables erased; invariant under renaming.
    def tk(t):
        if type(t) is Var:
            return (0, "*")
        return (1, t.fn, tuple(tk(a) for a in t.args))

    return (lit.positive, lit.pred, tuple(tk(a) for a in lit.args))


def clause_shape_key(clause: Clause):
    """Renaming-invariant hash bucket key for variant classes."""
    return tuple(sorted(_blind_key(l) for l in clause.literals))


def variant_equal(c: Clause, d: Clause) -> bool:
    """True iff an injective variable renaming maps c onto d as literal sets."""
    if len(c.literals) != len(d.literals):
        return False
    if clause_shape_key(c) != clause_shape_key(d):
        return False

    d_lits = d.literals

    def go(i: int, fwd: Subst, bwd: Subst, taken: set) -> bool:
        if i == len(c.literals):
            return True
        lit = c.literals[i]
        for j, cand in enumerate(d_lits):
            if j in taken or _blind_key(cand) != _blind_key(lit):
                continue
            pair = _map_vars(lit, cand, fwd, bwd)
            if pair is None:
                continue
            if go(i + 1, pair[0], pair[1], taken | {j}):
                return True
        return False

    return go(0, {}, {}, set())


def _map_vars(l1: Literal, l2: Literal, fwd: Subst, bwd: Subst):
    # Extend a variable bijection so l1 maps exactly onto l2.
    fwd = dict(fwd)
    bwd = dict(bwd)
    stack = list(zip(l1.args, l2.args))
    while stack:
        a, b = stack.pop()
        if type(a) is Var and type(b) is Var:
            if fwd.get(a.name, b.name) != b.name or bwd.get(b.name, a.name) != a.name:
                return None
            fwd[a.name] = b.name
            bwd[b.name] = a.name
        elif type(a) is App and type(b) is App:
            if a.fn != b.fn or len(a.args) != len(b.args):
                return None
            stack.extend(zip(a.args, b.args))
        else:
            return None
    return fwd, bwd


def subsumes(c: Clause, d: Clause) -> bool:
    """True iff some instance of c is a subset of d's literals."""
    if len(c.literals) > len(d.literals):
        # With set semantics an instance can collapse literals, but each
        # c-literal still lands on some d-literal, so this scan is complete.
        pass

    def go(i: int, sub: Subst) -> bool:
        if i == len(c.literals):
            return True
        lit = c.literals[i]
        for cand in d.literals:
            if cand.positive != lit.positive or cand.pred != lit.pred:
                continue
            got = match(lit, cand, sub)
            if got is not None and go(i + 1, got):
                return True
        return False

    return go(0, {})


def is_tautology(clause: Clause) -> bool:
    """Complementary literal pair, or a positive t = t equality."""
    seen = set()
    for lit in clause.literals:
        if lit.positive and lit.is_equality and lit.args[0] == lit.args[1]:
            return True
        if (not lit.positive, lit.pred, lit.args) in seen:
            return True
        seen.add((lit.positive, lit.pred, lit.args))
    return False


# ---------------------------------------------------------------------------
# Syntactic measures

@dataclass(frozen=True)
class Measures:
    symbol_count: int
    var_occurrences: int
    distinct_vars: int
    max_depth: int


def _term_stats(t: Term):
    # (symbols, var occurrences, depth)
    if type(t) is Var:
        return 1, 1, 1
    syms, occ, depth = 1, 0, 1
    for a in t.args:
        s, o, d = _term_stats(a)
        syms += s
        occ += o
        depth = max(depth, d + 1)
    return syms, occ, depth


def measures(x) -> Measures:
    """Symbol, variable and depth counts for a literal or clause.

    Every symbol occurrence counts, variables and the predicate included;
    polarity contributes nothing. A literal's depth is 1 plus the deepest
    argument; constants and variables have depth 1.
    """
    if isinstance(x, Clause):
        lits = x.literals
    else:
        lits = (x,)
    syms = occ = depth = 0
    names: set = set()
    for lit in lits:
        ls, lo, ld = 1, 0, 1
        for a in lit.args:
            s, o, d = _term_stats(a)
            ls += s
            lo += o
            ld = max(ld, d + 1)
            collect_vars(a, names)
        syms += ls
        occ += lo
        depth = max(depth, ld)
    if isinstance(x, Clause) and not lits:
        return Measures(0, 0, 0, 0)
    return Measures(syms, occ, len(names), depth)


def symbol_count(x) -> int:
    return measures(x).symbol_count


# ---------------------------------------------------------------------------
# Rendering

def render_term(t: Term) -> str:
    if type(t) is Var:
        return t.name
    if not t.args:
        return t.fn
    return f"{t.fn}({','.join(render_term(a) for a in t.args)})"


def render_literal(lit: Literal) -> str:
    if lit.is_equality:
        op = "=" if lit.positive else "!="
        return f"{render_term(lit.args[0])} {op} {render_term(lit.args[1])}"
    atom = lit.pred if not lit.args else f"{lit.pred}({','.join(render_term(a) for a in lit.args)})"
    return atom if lit.positive else f"~{atom}"


def render_clause(clause: Clause) -> str:
    if clause.is_empty:
        return "<empty>"
    return " | ".join(render_literal(l) for l in clause.literals)


def canonical_clause(clause: Clause) -> Clause:
    """Variables renamed V0, V1, ... in first-occurrence order."""
    mapping: Subst = {}
    counter = itertools.count()
    for lit in clause.literals:
        for t in lit.args:
            for name in _occurrence_order(t):
                if name not in mapping:
                    mapping[name] = Var(f"V{next(counter)}")
    if not mapping:
        return clause
    return subst_clause(mapping, clause)


def _occurrence_order(t: Term):
    if type(t) is Var:
        yield t.name
    else:
        for a in t.args:
            yield from _occurrence_order(a)


def canonical_text(clause: Clause) -> str:
    """Deterministic rendering used for tie-breaking and dedup keys."""
    return render_clause(canonical_clause(clause))

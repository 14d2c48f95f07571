"""CNF problem files: parsing, serialization, equality axioms, start clauses.

The surface syntax is a deliberately small TPTP-style CNF fragment:

    cnf(<name>, <role>, ( <lit> ( '|' <lit> )* )).

with role one of axiom, hypothesis, negated_conjecture. A literal is an
optionally '~'-prefixed atom; atoms are `ident`, `ident(term,...)`,
`term = term` or `term != term` (a negative equality). Identifiers match
[a-z][A-Za-z0-9_]*, variables [A-Z][A-Za-z0-9_]*, '%' starts a line
comment, whitespace is insignificant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .kernel import EQUALITY, App, Clause, Literal, Var, render_term


class ParseError(Exception):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int
    kind: str  # "function" or "predicate"


@dataclass
class Problem:
    """An immutable CNF problem with a consistent signature."""

    clauses: list
    functions: dict = field(default_factory=dict)   # name -> arity
    predicates: dict = field(default_factory=dict)  # name -> arity, "=" included when used
    name: str = ""

    @property
    def has_equality(self) -> bool:
        return EQUALITY in self.predicates

    @property
    def is_horn(self) -> bool:
        return all(c.is_horn for c in self.clauses)

    @property
    def signature(self) -> set:
        syms = {Symbol(n, a, "function") for n, a in self.functions.items()}
        syms |= {Symbol(n, a, "predicate") for n, a in self.predicates.items()}
        return syms

    def unit_clauses(self) -> list:
        return [c for c in self.clauses if c.is_unit]

    def with_clauses(self, clauses: Iterable[Clause], name: Optional[str] = None) -> "Problem":
        return problem_from_clauses(list(clauses), name=self.name if name is None else name)


def problem_from_clauses(clauses: list, name: str = "") -> Problem:
    """Build a problem, inferring the signature and checking arity consistency."""
    functions: dict = {}
    predicates: dict = {}

    def see_term(t):
        if isinstance(t, Var):
            return
        _check(functions, t.fn, len(t.args), "function")
        for a in t.args:
            see_term(a)

    def _check(table, name_, arity, kind):
        old = table.get(name_)
        if old is None:
            table[name_] = arity
        elif old != arity:
            raise ParseError(0, 0, f"{kind} symbol '{name_}' used with arities {old} and {arity}")

    for c in clauses:
        for lit in c.literals:
            _check(predicates, lit.pred, len(lit.args), "predicate")
            for a in lit.args:
                see_term(a)
    return Problem(list(clauses), functions, predicates, name)


# ---------------------------------------------------------------------------
# Tokenizer

_PUNCT = {"(": "LP", ")": "RP", ",": "COMMA", "|": "PIPE", ".": "DOT", "~": "TILDE"}


def _tokenize(text: str):
    line, col = 1, 1
    i, n = 0, len(text)
    toks = []
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in _PUNCT:
            toks.append((_PUNCT[ch], ch, line, col))
            i += 1
            col += 1
            continue
        if ch == "!":
            if i + 1 < n and text[i + 1] == "=":
                toks.append(("NEQ", "!=", line, col))
                i += 2
                col += 2
                continue
            raise ParseError(line, col, "expected '=' after '!'")
        if ch == "=":
            toks.append(("EQ", "=", line, col))
            i += 1
            col += 1
            continue
        if ch.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "VAR" if ch.isupper() else "IDENT"
            toks.append((kind, word, line, col))
            col += j - i
            i = j
            continue
        raise ParseError(line, col, f"unexpected character {ch!r}")
    toks.append(("EOF", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser

_ROLES = {"axiom": "axiom", "hypothesis": "axiom", "negated_conjecture": "goal"}


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0
        self.functions: dict = {}
        self.predicates: dict = {}

    def peek(self):
        return self.toks[self.pos]

    def take(self, kind: str, what: str = ""):
        tok = self.toks[self.pos]
        if tok[0] != kind:
            raise ParseError(tok[2], tok[3], f"expected {what or kind}, found {tok[1]!r}")
        self.pos += 1
        return tok

    def fail(self, message: str):
        tok = self.peek()
        raise ParseError(tok[2], tok[3], message)

    def check_arity(self, table: dict, name: str, arity: int, kind: str, tok):
        old = table.get(name)
        if old is None:
            table[name] = arity
        elif old != arity:
            raise ParseError(
                tok[2], tok[3],
                f"{kind} symbol '{name}' used with arities {old} and {arity}",
            )

    def parse(self, name: str = "") -> Problem:
        clauses = []
        while self.peek()[0] != "EOF":
            clauses.append(self.statement())
        return Problem(clauses, self.functions, self.predicates, name)

    def statement(self) -> Clause:
        tok = self.take("IDENT", "'cnf'")
        if tok[1] != "cnf":
            raise ParseError(tok[2], tok[3], f"expected 'cnf', found {tok[1]!r}")
        self.take("LP", "'('")
        cid = self.take("IDENT", "clause name")[1]
        self.take("COMMA", "','")
        role_tok = self.take("IDENT", "role")
        role = _ROLES.get(role_tok[1])
        if role is None:
            raise ParseError(role_tok[2], role_tok[3], f"unknown role {role_tok[1]!r}")
        self.take("COMMA", "','")
        self.take("LP", "'('")
        lits = [self.literal()]
        while self.peek()[0] == "PIPE":
            self.take("PIPE")
            lits.append(self.literal())
        self.take("RP", "')'")
        self.take("RP", "')'")
        self.take("DOT", "'.'")
        return Clause(lits, role=role, cid=cid)

    def literal(self) -> Literal:
        negated = False
        if self.peek()[0] == "TILDE":
            self.take("TILDE")
            negated = True
        positive, pred, args = self.atom()
        if negated:
            positive = not positive
        return Literal(positive, pred, args)

    def atom(self):
        # A term followed by =/!= is an equality; otherwise it must be a
        # predicate application. The head symbol's kind is only known after
        # peeking past the term, so its registration is deferred.
        tok = self.peek()
        first = self.term(register_head=False)
        nxt = self.peek()
        if nxt[0] in ("EQ", "NEQ"):
            if isinstance(first, App):
                self.check_arity(self.functions, first.fn, len(first.args), "function", tok)
            self.take(nxt[0])
            second = self.term()
            self.check_arity(self.predicates, EQUALITY, 2, "predicate", tok)
            return nxt[0] == "EQ", EQUALITY, (first, second)
        if isinstance(first, Var):
            raise ParseError(tok[2], tok[3], "a variable cannot be a predicate")
        self.check_arity(self.predicates, first.fn, len(first.args), "predicate", tok)
        return True, first.fn, first.args

    def term(self, register_head: bool = True):
        tok = self.peek()
        if tok[0] == "VAR":
            self.take("VAR")
            return Var(tok[1])
        name_tok = self.take("IDENT", "identifier")
        args = ()
        if self.peek()[0] == "LP":
            self.take("LP")
            parts = [self.term()]
            while self.peek()[0] == "COMMA":
                self.take("COMMA")
                parts.append(self.term())
            self.take("RP", "')'")
            args = tuple(parts)
        term = App(name_tok[1], args)
        if register_head:
            self.check_arity(self.functions, name_tok[1], len(args), "function", name_tok)
        return term


def parse_problem(text: str, name: str = "") -> Problem:
    """Parse a CNF problem; raises ParseError on malformed input."""
    parser = _Parser(text)
    problem = parser.parse(name)
    # Rebuild the signature from the finished clause list so provisional
    # entries from atoms reinterpreted as predicates cannot linger.
    rebuilt = problem_from_clauses(problem.clauses, name=name)
    return rebuilt


# ---------------------------------------------------------------------------
# Serialization

def serialize_problem(problem: Problem) -> str:
    """Round-trips through parse_problem up to clause variants."""
    lines = []
    for i, clause in enumerate(problem.clauses):
        if clause.is_empty:
            raise ValueError("the empty clause has no CNF rendering")
        cid = clause.cid if isinstance(clause.cid, str) and clause.cid else f"c{i + 1}"
        role = "negated_conjecture" if clause.role == "goal" else "axiom"
        body = " | ".join(_serialize_literal(l) for l in clause.literals)
        lines.append(f"cnf({cid}, {role}, ({body})).")
    return "\n".join(lines) + ("\n" if lines else "")


def _serialize_literal(lit: Literal) -> str:
    if lit.is_equality:
        op = "=" if lit.positive else "!="
        return f"{render_term(lit.args[0])} {op} {render_term(lit.args[1])}"
    atom = lit.pred if not lit.args else f"{lit.pred}({','.join(render_term(a) for a in lit.args)})"
    return atom if lit.positive else f"~{atom}"


# ---------------------------------------------------------------------------
# Equality axioms

def add_equality_axioms(problem: Problem) -> Problem:
    """Append reflexivity, symmetry, transitivity and substitution axioms.

    One substitution axiom per argument position of every function and
    every non-equality predicate. No-op when the problem has no equality.
    """
    if not problem.has_equality:
        return problem

    def eq(a, b):
        return Literal(True, EQUALITY, (a, b))

    def neq(a, b):
        return Literal(False, EQUALITY, (a, b))

    x, y, z = Var("X"), Var("Y"), Var("Z")
    axioms = [
        Clause([eq(x, x)], role="axiom", cid="eq_reflexive"),
        Clause([neq(x, y), eq(y, x)], role="axiom", cid="eq_symmetric"),
        Clause([neq(x, y), neq(y, z), eq(x, z)], role="axiom", cid="eq_transitive"),
    ]
    for fn in sorted(problem.functions):
        arity = problem.functions[fn]
        for pos in range(arity):
            args_l = tuple(Var(f"A{i}") if i != pos else x for i in range(arity))
            args_r = tuple(Var(f"A{i}") if i != pos else y for i in range(arity))
            axioms.append(
                Clause(
                    [neq(x, y), eq(App(fn, args_l), App(fn, args_r))],
                    role="axiom",
                    cid=f"eq_sub_{fn}_{pos + 1}",
                )
            )
    for pred in sorted(problem.predicates):
        if pred == EQUALITY:
            continue
        arity = problem.predicates[pred]
        for pos in range(arity):
            args_l = tuple(Var(f"A{i}") if i != pos else x for i in range(arity))
            args_r = tuple(Var(f"A{i}") if i != pos else y for i in range(arity))
            axioms.append(
                Clause(
                    [neq(x, y), Literal(False, pred, args_l), Literal(True, pred, args_r)],
                    role="axiom",
                    cid=f"eq_sub_{pred}_{pos + 1}",
                )
            )
    return problem_from_clauses(problem.clauses + axioms, name=problem.name)


# ---------------------------------------------------------------------------
# Start clauses

def goal_clauses(problem: Problem, mode: str = "ctcneg") -> list:
    """Start clauses for the tableau calculus.

    Mode "ctc" admits every clause; "ctcneg" admits all-negative clauses
    plus clauses with the goal role. The caller decides what an empty
    "ctcneg" result means; it is reported, not raised.
    """
    if mode == "ctc":
        return list(problem.clauses)
    if mode != "ctcneg":
        raise ValueError(f"unknown mode {mode!r}")
    out = []
    seen = set()
    for c in problem.clauses:
        if (c.is_negative or c.role == "goal") and c.literals not in seen:
            seen.add(c.literals)
            out.append(c)
    return out

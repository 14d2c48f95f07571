"""Shared fixture problems and small builders used across the test suite."""

from coopprover.kernel import App, Clause, Literal, Var
from coopprover.problems import parse_problem


def lit(text: str) -> Literal:
    """Tiny literal builder: "~p(x,f(a))" style, lowercase vars x,y,z,u,v,w."""
    text = text.strip()
    positive = True
    if text.startswith("~"):
        positive = False
        text = text[1:]
    name, args = _parse_atom(text)
    return Literal(positive, name, args)


def _parse_atom(text):
    if "(" not in text:
        return text, ()
    name, rest = text.split("(", 1)
    assert rest.endswith(")")
    args = tuple(_parse_term(p) for p in _split_args(rest[:-1]))
    return name, args


def _split_args(text):
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            cur += ch
    parts.append(cur)
    return parts


def _parse_term(text):
    text = text.strip()
    if "(" not in text:
        if text in ("x", "y", "z", "u", "v", "w") or text[0].isupper():
            return Var(text)
        return App(text)
    name, rest = text.split("(", 1)
    args = tuple(_parse_term(p) for p in _split_args(rest[:-1]))
    return App(name, args)


def clause(*lits, role="axiom", cid=None) -> Clause:
    return Clause([lit(t) if isinstance(t, str) else t for t in lits], role=role, cid=cid)


# Bare propositional literals used by several fixtures.
def plit(name: str) -> Literal:
    positive = not name.startswith("~")
    return Literal(positive, name.lstrip("~"), ())


# --------------------------------------------------------------------------
# Fixture problems

# Two-way goal split, n = m = 2.
CHAIN_SPLIT = """
cnf(g, negated_conjecture, (~g)).
cnf(a1, axiom, (~p1 | ~p2 | g)).
cnf(a2, axiom, (~q1 | ~q2 | g)).
"""

# Nine ground clauses over l1..l7 whose shortest resolution refutation
# takes nine steps.
NINE_STEP_GROUND = """
cnf(c1, axiom, (l4 | l6 | l7)).
cnf(c2, axiom, (l4 | l6 | ~l7)).
cnf(c3, axiom, (l3 | ~l4)).
cnf(c4, axiom, (l3 | ~l6)).
cnf(c5, axiom, (~l2 | ~l4)).
cnf(c6, axiom, (l4 | ~l5 | ~l6)).
cnf(c7, axiom, (~l2 | l5)).
cnf(c8, axiom, (l1 | l2 | ~l3)).
cnf(c9, axiom, (~l1 | l2 | ~l3)).
"""

# Five clauses where a scripted selection order reaches the empty clause
# on the ninth activation.
SCRIPTED_TRACE = """
cnf(c1, axiom, (~a | ~b | c)).
cnf(c2, axiom, (~g | b)).
cnf(c3, axiom, (a)).
cnf(c4, axiom, (g)).
cnf(c5, axiom, (~c)).
"""

# Unit equations plus a goal that one superposition step away from the
# axioms; the tableau side needs the equality axiomatization.
REWRITE_GOAL = """
cnf(a1, axiom, (f(f(X)) = g(X))).
cnf(a2, axiom, (h(b) = f(b))).
cnf(goal, negated_conjecture, (g(b) != f(h(b)))).
"""

# p-chain with q-distractors; a literal-weight heuristic that penalizes q
# keeps every derived fact inside the p family.
P_OVER_Q = """
cnf(c1, axiom, (p(a))).
cnf(c2, axiom, (~p(X) | p(f(X)))).
cnf(c3, axiom, (~q(a))).
cnf(c4, axiom, (~q(b) | q(a))).
cnf(c5, axiom, (q(b))).
"""


def chain_split_problem():
    return parse_problem(CHAIN_SPLIT, name="chain_split")


def nine_step_problem():
    return parse_problem(NINE_STEP_GROUND, name="nine_step")


def scripted_trace_problem():
    return parse_problem(SCRIPTED_TRACE, name="scripted_trace")


def rewrite_goal_problem():
    return parse_problem(REWRITE_GOAL, name="rewrite_goal")


def p_over_q_problem():
    return parse_problem(P_OVER_Q, name="p_over_q")


def ground_units(k: int):
    """{a=b} and {f^(k-1)(a) != f^(k-1)(b)}."""
    a, b = App("a"), App("b")
    fa, fb = a, b
    for _ in range(k - 1):
        fa, fb = App("f", (fa,)), App("f", (fb,))
    from coopprover.kernel import EQUALITY
    from coopprover.problems import problem_from_clauses

    c1 = Clause([Literal(True, EQUALITY, (a, b))], role="axiom", cid="e1")
    c2 = Clause([Literal(False, EQUALITY, (fa, fb))], role="axiom", cid="e2")
    return problem_from_clauses([c1, c2], name=f"unit_eq_{k}")


def multi_literal_selfdual(k: int):
    """{~p(x1)...~p(xk)} and {p(y1)...p(yk)}."""
    from coopprover.problems import problem_from_clauses

    neg = Clause([Literal(False, "p", (Var(f"X{i}"),)) for i in range(k)], role="axiom", cid="n")
    pos = Clause([Literal(True, "p", (Var(f"Y{i}"),)) for i in range(k)], role="axiom", cid="p")
    return problem_from_clauses([neg, pos], name=f"selfdual_{k}")

"""Given-clause saturation: resolution, factoring, superposition, equality
resolution/factoring, contraction, fair heuristics and per-clause usage
statistics for the lemma filters.

The engine follows the usual two-set discipline: passive clauses wait in a
priority queue keyed by heuristic weight, active clauses take part in
inferences. Resolution is reserved for non-equality atoms; equality atoms
are handled by the dedicated rules, so a positive and a negative equation
meet through superposition plus equality resolution rather than a direct
resolution step.

One ProverState belongs to one execution context. Cancellation is polled
between activations.
"""

from __future__ import annotations

import heapq
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .kernel import (
    EQUALITY,
    App,
    Clause,
    Literal,
    Var,
    VarSupply,
    apply_sub,
    is_tautology,
    match_term,
    render_clause,
    subst_literal,
    subst_term,
    subsumes,
    symbol_count,
    term_key,
    unify,
    unify_atoms,
)
from .problems import Problem


# ---------------------------------------------------------------------------
# Term ordering

class TermOrder:
    """No ordering: every comparison is incomparable."""

    restricted = False

    def greater(self, s, t) -> bool:
        return False


class LexicographicPathOrder(TermOrder):
    """A lexicographic path order over a total symbol precedence.

    Stable under substitution and context and well-founded, which makes it
    usable as the reduction order behind rewriting.
    """

    restricted = True

    def __init__(self, precedence: Iterable[str]):
        self.rank = {name: i for i, name in enumerate(precedence)}

    def _rank(self, name: str) -> tuple:
        # Unknown symbols order after known ones, alphabetically.
        if name in self.rank:
            return (0, self.rank[name], name)
        return (1, 0, name)

    def greater(self, s, t) -> bool:
        if type(s) is Var:
            return False
        if type(t) is Var:
            return _occurs_var(t.name, s)
        if any(a == t or self.greater(a, t) for a in s.args):
            return True
        rs, rt = self._rank(s.fn), self._rank(t.fn)
        if rs > rt:
            return all(self.greater(s, b) for b in t.args)
        if rs == rt:
            for a, b in zip(s.args, t.args):
                if a == b:
                    continue
                if self.greater(a, b):
                    return all(self.greater(s, bb) for bb in t.args)
                return False
        return False


def _occurs_var(name: str, t) -> bool:
    if type(t) is Var:
        return t.name == name
    return any(_occurs_var(name, a) for a in t.args)


def ordering_for(problem: Problem, mode: str) -> TermOrder:
    """Build the term order named by the configuration.

    Precedence mode ranks symbols by input signature order: functions
    before predicates, each group alphabetically with lower arity first.
    """
    if mode == "none":
        return TermOrder()
    if mode != "precedence":
        raise ValueError(f"unknown ordering mode {mode!r}")
    names = [n for n, _ in sorted(problem.functions.items(), key=lambda kv: (kv[1], kv[0]))]
    names += [
        n
        for n, _ in sorted(problem.predicates.items(), key=lambda kv: (kv[1], kv[0]))
        if n != EQUALITY
    ]
    return LexicographicPathOrder(names)


def _atom_term(lit: Literal):
    return App(lit.pred, lit.args)


def _maximal_literals(clause: Clause, order: TermOrder) -> set:
    """Indices of literals not strictly below another literal's atom."""
    if not order.restricted:
        return set(range(len(clause.literals)))
    atoms = [_atom_term(l) for l in clause.literals]
    out = set()
    for i, a in enumerate(atoms):
        if not any(j != i and order.greater(atoms[j], a) for j in range(len(atoms))):
            out.add(i)
    return out


# ---------------------------------------------------------------------------
# Expansion rules

_rule_supply = VarSupply("R")


def _rename_pair(c: Clause, d: Clause):
    used = set(c.variables())
    from .kernel import rename_apart

    return c, rename_apart(d, used | d.variables(), _rule_supply)


def resolve(c: Clause, d: Clause, order: TermOrder = TermOrder(), on_equality: bool = False):
    """All binary resolvents of two clauses (renamed apart internally).

    Equality literals resolve only when on_equality is set; the saturation
    loop keeps them for the superposition rules instead.
    """
    c, d = _rename_pair(c, d)
    cmax = _maximal_literals(c, order)
    dmax = _maximal_literals(d, order)
    out = []
    for i, li in enumerate(c.literals):
        if li.is_equality and not on_equality:
            continue
        if i not in cmax:
            continue
        for j, lj in enumerate(d.literals):
            if lj.is_equality and not on_equality:
                continue
            if j not in dmax or lj.positive == li.positive:
                continue
            sub = unify_atoms(li, lj)
            if sub is None:
                continue
            lits = [subst_literal(sub, l) for n, l in enumerate(c.literals) if n != i]
            lits += [subst_literal(sub, l) for n, l in enumerate(d.literals) if n != j]
            out.append(Clause(lits))
    return _dedup(out)


def factor(c: Clause, mode: str = "superposition", order: TermOrder = TermOrder()):
    """Binary factors; superposition mode unifies positive literals only."""
    out = []
    for i in range(len(c.literals)):
        for j in range(i + 1, len(c.literals)):
            li, lj = c.literals[i], c.literals[j]
            if li.positive != lj.positive or li.pred != lj.pred:
                continue
            if mode == "superposition" and not li.positive:
                continue
            sub = unify_atoms(li, lj)
            if sub is None:
                continue
            out.append(apply_sub(sub, c).with_role("derived", cid=None))
    return _dedup(out)


def _subterm_positions(t, pos=()):
    # Non-variable subterms, outermost first; includes the term itself.
    if type(t) is Var:
        return
    yield pos, t
    for i, a in enumerate(t.args):
        yield from _subterm_positions(a, pos + (i,))


def _replace(t, pos, new):
    if not pos:
        return new
    i = pos[0]
    return App(t.fn, tuple(_replace(a, pos[1:], new) if j == i else a for j, a in enumerate(t.args)))


def superpose(c: Clause, d: Clause, order: TermOrder = TermOrder()):
    """Superposition of c's positive equations into d's literals.

    Rewrites non-variable subterms of d with either orientation of the
    equation unless the order rules one out.
    """
    c, d = _rename_pair(c, d)
    cmax = _maximal_literals(c, order)
    dmax = _maximal_literals(d, order)
    out = []
    for i, eq in enumerate(c.literals):
        if not (eq.positive and eq.is_equality) or i not in cmax:
            continue
        s, t = eq.args
        for lhs, rhs in ((s, t), (t, s)):
            if type(lhs) is Var:
                continue  # rewriting at a variable instance is never needed
            if order.restricted and order.greater(rhs, lhs):
                continue
            for j, target in enumerate(d.literals):
                if j not in dmax:
                    continue
                for ai, arg in enumerate(target.args):
                    for pos, subterm in _subterm_positions(arg):
                        sub = unify(lhs, subterm)
                        if sub is None:
                            continue
                        if order.restricted and order.greater(
                            subst_term(sub, rhs), subst_term(sub, lhs)
                        ):
                            continue
                        new_arg = _replace(arg, pos, rhs)
                        new_args = tuple(
                            new_arg if n == ai else a for n, a in enumerate(target.args)
                        )
                        new_lit = Literal(target.positive, target.pred, new_args)
                        lits = [l for n, l in enumerate(c.literals) if n != i]
                        lits += [new_lit if n == j else l for n, l in enumerate(d.literals)]
                        out.append(apply_sub(sub, Clause(lits)))
    return _dedup(out)


def equality_resolve(c: Clause):
    """Resolve away negative equations whose sides unify."""
    out = []
    for i, lit in enumerate(c.literals):
        if lit.positive or not lit.is_equality:
            continue
        sub = unify(lit.args[0], lit.args[1])
        if sub is None:
            continue
        out.append(apply_sub(sub, Clause([l for n, l in enumerate(c.literals) if n != i])))
    return _dedup(out)


def equality_factor(c: Clause, order: TermOrder = TermOrder()):
    """From C' | s=t | s'=t' with s, s' unifiable derive C' | t != t' | s'=t'.

    Pairs are taken in the clause's canonical order with equations as
    stored; symmetric variants are reachable through superposition.
    """
    out = []
    pos_eqs = [
        (i, l) for i, l in enumerate(c.literals) if l.positive and l.is_equality
    ]
    maximal = _maximal_literals(c, order)
    for a in range(len(pos_eqs)):
        for b in range(a + 1, len(pos_eqs)):
            i, first = pos_eqs[a]
            j, second = pos_eqs[b]
            if order.restricted and i not in maximal:
                continue
            sub = unify(first.args[0], second.args[0])
            if sub is None:
                continue
            lits = [l for n, l in enumerate(c.literals) if n != i]
            lits.append(Literal(False, EQUALITY, (first.args[1], second.args[1])))
            out.append(apply_sub(sub, Clause(lits)))
    return _dedup(out)


def _dedup(clauses):
    seen = set()
    out = []
    for c in clauses:
        if c.literals not in seen:
            seen.add(c.literals)
            out.append(c)
    return out


# ---------------------------------------------------------------------------
# Heuristics

class Heuristic:
    """Weight-driven selection with periodic breadth-first pulls.

    Every fifo_period-th activation takes the oldest passive clause, which
    keeps selection fair: nothing stays passive forever.
    """

    def __init__(self, fifo_period: int = 5):
        if fifo_period < 1:
            raise ValueError("fifo_period must be >= 1")
        self.fifo_period = fifo_period

    def weight(self, clause: Clause) -> int:
        return symbol_count(clause)

    def select(self, state: "ProverState") -> Optional[int]:
        """Optional override returning a passive clause id, or None to use
        the default weight/FIFO policy."""
        return None


class RecentPairHeuristic(Heuristic):
    """Breadth-first selection that prefers resolvents of the two most
    recently activated clauses; used to script activation traces."""

    def __init__(self):
        super().__init__(fifo_period=1)

    def select(self, state: "ProverState"):
        if len(state.active) >= 2:
            recent = {state.active[-1], state.active[-2]}
            best = None
            for seq, cid in state.fifo:
                if cid not in state.passive_ids:
                    continue
                rec = state.records[cid]
                if rec.rule != "input" and set(rec.premises) == recent:
                    if best is None or seq < best[0]:
                        best = (seq, cid)
            if best is not None:
                return best[1]
        for seq, cid in state.fifo:
            if cid in state.passive_ids:
                return cid
        return None


# ---------------------------------------------------------------------------
# Prover state

@dataclass
class DerivationRecord:
    rule: str  # input | resolution | factoring | superposition |
    #            equality_resolution | equality_factoring | rewriting
    premises: tuple = ()
    expansion_uses: int = 0     # expansion inferences this clause fed
    contraction_uses: int = 0   # contraction inferences this clause fed


class ProverState:
    def __init__(self, weight_fn=symbol_count):
        self.weight_fn = weight_fn
        self.clauses: dict = {}           # id -> Clause
        self.records: dict = {}           # id -> DerivationRecord
        self.active: list = []            # ids, pruned by back subsumption
        self.activation_log: list = []    # ids in chronological order
        self.passive_ids: set = set()
        self.heap: list = []              # (weight, seq, id)
        self.fifo: deque = deque()        # (seq, id)
        self.next_id = 1
        self.seq = 0
        self.activations = 0
        self.expansion_count = 0

    def add_clause(self, clause: Clause, rule: str, premises=(), weight=None) -> int:
        cid = self.next_id
        self.next_id += 1
        self.clauses[cid] = clause
        self.records[cid] = DerivationRecord(rule, tuple(premises))
        self.passive_ids.add(cid)
        self.seq += 1
        if weight is None:
            weight = self.weight_fn(clause)
        heapq.heappush(self.heap, (weight, self.seq, cid))
        self.fifo.append((self.seq, cid))
        return cid

    def remove_passive(self, cid: int) -> None:
        self.passive_ids.discard(cid)

    def pop_min(self) -> Optional[int]:
        while self.heap:
            _, _, cid = heapq.heappop(self.heap)
            if cid in self.passive_ids:
                return cid
        return None

    def pop_oldest(self) -> Optional[int]:
        while self.fifo:
            _, cid = self.fifo[0]
            if cid in self.passive_ids:
                return cid
            self.fifo.popleft()
        return None

    def passive_empty(self) -> bool:
        return not self.passive_ids

    def empty_passive_clause(self) -> Optional[int]:
        for cid in self.passive_ids:
            if self.clauses[cid].is_empty:
                return cid
        return None


# ---------------------------------------------------------------------------
# Contraction

@dataclass
class ContractOutcome:
    kept: Optional[Clause]
    reason: Optional[str] = None       # "tautology" | "subsumed"
    rewrite_rules: tuple = ()          # rule clause ids, in application order


def _rewrite_rules_of(state: ProverState, order: TermOrder):
    rules = []
    if not order.restricted:
        return rules
    for cid in state.active:
        clause = state.clauses[cid]
        if len(clause.literals) != 1:
            continue
        lit = clause.literals[0]
        if not (lit.positive and lit.is_equality):
            continue
        s, t = lit.args
        if order.greater(s, t):
            rules.append((cid, s, t))
        elif order.greater(t, s):
            rules.append((cid, t, s))
    return rules


def _normalize(clause: Clause, rules):
    """Innermost rewriting to a normal form; returns (clause, used ids)."""
    used = []
    if not rules:
        return clause, used

    def rewrite_term(t):
        if type(t) is Var:
            return t
        t = App(t.fn, tuple(rewrite_term(a) for a in t.args))
        changed = True
        while changed:
            changed = False
            for cid, lhs, rhs in rules:
                sub = match_term(lhs, t)
                if sub is not None:
                    t = subst_term(sub, rhs)
                    used.append(cid)
                    if type(t) is App:
                        t = App(t.fn, tuple(rewrite_term(a) for a in t.args))
                    changed = True
                    break
        return t

    lits = [
        Literal(l.positive, l.pred, tuple(rewrite_term(a) for a in l.args))
        for l in clause.literals
    ]
    return Clause(lits, role=clause.role, cid=clause.cid), used


def contract(state: ProverState, clause: Clause, order: TermOrder) -> ContractOutcome:
    """Forward contraction: tautology deletion, subsumption by an active
    clause, then rewriting with active orientable unit equations."""
    if is_tautology(clause):
        return ContractOutcome(None, "tautology")
    for cid in state.active:
        if subsumes(state.clauses[cid], clause):
            state.records[cid].contraction_uses += 1
            return ContractOutcome(None, "subsumed")
    rules = _rewrite_rules_of(state, order)
    clause, used = _normalize(clause, rules)
    for cid in used:
        state.records[cid].contraction_uses += 1
    if used:
        if is_tautology(clause):
            return ContractOutcome(None, "tautology", tuple(used))
        for cid in state.active:
            if subsumes(state.clauses[cid], clause):
                state.records[cid].contraction_uses += 1
                return ContractOutcome(None, "subsumed", tuple(used))
    return ContractOutcome(clause, None, tuple(used))


def back_contract(state: ProverState, cid: int, order: TermOrder) -> list:
    """Remove or re-normalize clauses made redundant by a new active clause.

    Returns the affected clause ids.
    """
    clause = state.clauses[cid]
    affected = []
    for other in list(state.active):
        if other != cid and subsumes(clause, state.clauses[other]):
            state.active.remove(other)
            state.records[cid].contraction_uses += 1
            affected.append(other)
    for other in list(state.passive_ids):
        if subsumes(clause, state.clauses[other]):
            state.remove_passive(other)
            state.records[cid].contraction_uses += 1
            affected.append(other)

    lit = clause.literals[0] if len(clause.literals) == 1 else None
    if order.restricted and lit is not None and lit.positive and lit.is_equality:
        rules = _rewrite_rules_of(state, order)
        rules = [r for r in rules if r[0] == cid]
        if rules:
            for other in list(state.active) + sorted(state.passive_ids):
                if other == cid:
                    continue
                target = state.clauses.get(other)
                if target is None:
                    continue
                rewritten, used = _normalize(target, rules)
                if not used:
                    continue
                if other in state.active:
                    state.active.remove(other)
                else:
                    state.remove_passive(other)
                for rid in used:
                    state.records[rid].contraction_uses += 1
                state.add_clause(rewritten, "rewriting", (other, cid))
                affected.append(other)
    return affected


# ---------------------------------------------------------------------------
# The given-clause loop

@dataclass
class ActivationReport:
    activated: Optional[int] = None
    kept: bool = False
    generated: tuple = ()
    refuted: Optional[int] = None
    saturated: bool = False


def _expansions(state: ProverState, cid: int, order: TermOrder, on_equality: bool = False):
    """All expansion inferences of a freshly activated clause against the
    active set, self-inferences included. Yields (conclusion, rule, premises)."""
    clause = state.clauses[cid]
    out = []
    for other in state.active:
        oc = state.clauses[other]
        for conclusion in resolve(oc, clause, order, on_equality=on_equality):
            out.append((conclusion, "resolution", (other, cid)))
        if other != cid:
            for conclusion in superpose(oc, clause, order):
                out.append((conclusion, "superposition", (other, cid)))
        for conclusion in superpose(clause, oc, order):
            out.append((conclusion, "superposition", (cid, other)))
    for conclusion in factor(clause, "superposition", order):
        out.append((conclusion, "factoring", (cid,)))
    for conclusion in equality_resolve(clause):
        out.append((conclusion, "equality_resolution", (cid,)))
    for conclusion in equality_factor(clause, order):
        out.append((conclusion, "equality_factoring", (cid,)))
    return out


def activate(state: ProverState, heuristic: Heuristic, order: TermOrder) -> ActivationReport:
    """Select one passive clause, contract it, and if kept expand it
    against the active set, feeding conclusions back into passive."""
    report = ActivationReport()
    forced = state.empty_passive_clause()
    cid = forced if forced is not None else heuristic.select(state)
    if cid is None:
        if (state.activations + 1) % heuristic.fifo_period == 0:
            cid = state.pop_oldest()
        else:
            cid = state.pop_min()
    if cid is None:
        report.saturated = True
        return report
    state.remove_passive(cid)

    outcome = contract(state, state.clauses[cid], order)
    if outcome.kept is None:
        return report
    if outcome.rewrite_rules:
        new_id = state.next_id
        state.next_id += 1
        state.clauses[new_id] = outcome.kept
        state.records[new_id] = DerivationRecord(
            "rewriting", (cid,) + tuple(outcome.rewrite_rules)
        )
        cid = new_id
    state.active.append(cid)
    state.activation_log.append(cid)
    state.activations += 1
    report.activated = cid
    report.kept = True
    if state.clauses[cid].is_empty:
        report.refuted = cid
        return report

    back_contract(state, cid, order)
    if cid not in state.active:
        # the clause displaced itself through back rewriting; rare but legal
        return report

    generated = []
    for conclusion, rule, premises in _expansions(state, cid, order):
        state.expansion_count += 1
        for pid in premises:
            state.records[pid].expansion_uses += 1
        out = contract(state, conclusion, order)
        if out.kept is None:
            continue
        weight = heuristic.weight(out.kept)
        premises_full = tuple(premises) + tuple(out.rewrite_rules)
        new_id = state.add_clause(out.kept, rule, premises_full, weight=weight)
        generated.append(new_id)
    report.generated = tuple(generated)
    return report


@dataclass
class SaturationOutcome:
    status: str  # "refuted" | "saturated" | "limit" | "cancelled"
    state: ProverState
    refutation: Optional[int] = None
    activations: int = 0
    inferences: int = 0

    def derivation(self, root: Optional[int] = None) -> list:
        """The derivation DAG as (id, rule, premises, clause text) tuples,
        restricted to the ancestors of root when given."""
        if root is None:
            ids = sorted(self.state.records)
        else:
            ids = []
            seen = set()
            stack = [root]
            while stack:
                cid = stack.pop()
                if cid in seen:
                    continue
                seen.add(cid)
                ids.append(cid)
                stack.extend(self.state.records[cid].premises)
            ids.sort()
        out = []
        for cid in ids:
            rec = self.state.records[cid]
            out.append((cid, rec.rule, rec.premises, render_clause(self.state.clauses[cid])))
        return out


def init_state(problem: Problem, heuristic: Heuristic) -> ProverState:
    state = ProverState(weight_fn=heuristic.weight)
    for clause in problem.clauses:
        state.add_clause(clause, "input", ())
    return state


def saturate(
    problem: Problem,
    heuristic: Optional[Heuristic] = None,
    order: Optional[TermOrder] = None,
    max_activations: Optional[int] = None,
    deadline: Optional[float] = None,
    stop=None,
    state: Optional[ProverState] = None,
) -> SaturationOutcome:
    """Run the given-clause loop until refutation, saturation or a limit."""
    heuristic = heuristic or Heuristic()
    order = order if order is not None else TermOrder()
    if state is None:
        state = init_state(problem, heuristic)
    while True:
        if max_activations is not None and state.activations >= max_activations:
            return SaturationOutcome(
                "limit", state, activations=state.activations, inferences=state.expansion_count
            )
        if stop is not None and stop.is_set():
            return SaturationOutcome(
                "cancelled", state, activations=state.activations, inferences=state.expansion_count
            )
        if deadline is not None and time.monotonic() > deadline:
            return SaturationOutcome(
                "limit", state, activations=state.activations, inferences=state.expansion_count
            )
        report = activate(state, heuristic, order)
        if report.refuted is not None:
            return SaturationOutcome(
                "refuted",
                state,
                refutation=report.refuted,
                activations=state.activations,
                inferences=state.expansion_count,
            )
        if report.saturated:
            return SaturationOutcome(
                "saturated", state, activations=state.activations, inferences=state.expansion_count
            )


@dataclass
class Fact:
    """A positive unit clause from the active set, with usage statistics."""

    clause_id: int
    clause: Clause
    expansion_uses: int
    contraction_uses: int


def preprocess(
    problem: Problem,
    activations: int,
    heuristic: Optional[Heuristic] = None,
    order: Optional[TermOrder] = None,
    stop=None,
    deadline: Optional[float] = None,
) -> tuple:
    """Run a fixed number of activation steps and collect the facts.

    Returns (facts, outcome); facts are the positive unit clauses of the
    active set after min(activations, steps-to-termination) activations.
    """
    heuristic = heuristic or Heuristic()
    order = order if order is not None else TermOrder()
    state = init_state(problem, heuristic)
    outcome = saturate(
        problem,
        heuristic,
        order,
        max_activations=activations,
        stop=stop,
        deadline=deadline,
        state=state,
    )
    facts = []
    for cid in state.active:
        clause = state.clauses[cid]
        if len(clause.literals) == 1 and clause.literals[0].positive:
            rec = state.records[cid]
            facts.append(Fact(cid, clause, rec.expansion_uses, rec.contraction_uses))
    return facts, outcome

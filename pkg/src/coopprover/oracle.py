"""Independent checking machinery: a propositional entailment oracle and an
exhaustive minimal-proof-length search.

Both are deliberately separate from the saturation loop so they can vouch
for it: the proof-length search enumerates raw inference sequences with
its own bookkeeping, and the propositional oracle decides ground
(un)satisfiability by DPLL over the ground atoms.
"""

from __future__ import annotations

import time
from typing import Iterable, Optional

from .kernel import Clause, clause_shape_key, variant_equal
from .saturation import (
    TermOrder,
    equality_factor,
    equality_resolve,
    factor,
    resolve,
    superpose,
)


class OracleBudgetError(Exception):
    """The search hit its node or time budget before reaching a verdict."""


# ---------------------------------------------------------------------------
# Propositional oracle (ground clauses only)

def ground_unsat(clauses: Iterable[Clause]) -> bool:
    """DPLL over ground atoms; True iff the clause set is unsatisfiable."""
    cnf = []
    atom_ids: dict = {}
    for clause in clauses:
        row = set()
        tautology = False
        for lit in clause.literals:
            key = (lit.pred, lit.args)
            if key not in atom_ids:
                atom_ids[key] = len(atom_ids) + 1
            v = atom_ids[key] if lit.positive else -atom_ids[key]
            if -v in row:
                tautology = True
                break
            row.add(v)
        if not tautology:
            cnf.append(frozenset(row))
    return not _dpll(cnf, {})


def _dpll(cnf, assignment) -> bool:
    cnf = list(cnf)
    assignment = dict(assignment)
    changed = True
    while changed:
        changed = False
        nxt = []
        for clause in cnf:
            live = []
            satisfied = False
            for v in clause:
                val = assignment.get(abs(v))
                if val is None:
                    live.append(v)
                elif (v > 0) == val:
                    satisfied = True
                    break
            if satisfied:
                continue
            if not live:
                return False
            if len(live) == 1:
                assignment[abs(live[0])] = live[0] > 0
                changed = True
            else:
                nxt.append(frozenset(live))
        cnf = nxt
    if not cnf:
        return True
    var = abs(next(iter(cnf[0])))
    for val in (True, False):
        trial = dict(assignment)
        trial[var] = val
        if _dpll(cnf, trial):
            return True
    return False


def ground_entails(base: Iterable[Clause], clause: Clause) -> bool:
    """base |= clause for ground inputs: base plus the negated clause is unsat."""
    negated = [Clause([l.complement()]) for l in clause.literals]
    return ground_unsat(list(base) + negated)


# ---------------------------------------------------------------------------
# Minimal proof length

def _conclusions(ci: Clause, cj: Optional[Clause], calculus: str, order: TermOrder):
    """One-step conclusions; cj None means the unary rules of ci."""
    out = []
    if calculus == "resolution":
        if cj is not None:
            out += resolve(ci, cj, order, on_equality=True)
        else:
            out += factor(ci, "resolution", order)
    elif calculus == "superposition":
        if cj is not None:
            out += resolve(ci, cj, order, on_equality=False)
            out += superpose(ci, cj, order)
            out += superpose(cj, ci, order)
        else:
            out += factor(ci, "superposition", order)
            out += equality_resolve(ci)
            out += equality_factor(ci, order)
    else:
        raise ValueError(f"unknown calculus {calculus!r}")
    return out


class _Pool:
    """Clauses available on the current branch, with variant lookup."""

    def __init__(self, inputs):
        self.clauses = list(inputs)
        self.buckets: dict = {}
        for c in inputs:
            self.buckets.setdefault(clause_shape_key(c), []).append(c)

    def contains_variant(self, clause: Clause, key) -> bool:
        return any(variant_equal(clause, old) for old in self.buckets.get(key, ()))

    def push(self, clause: Clause, key) -> None:
        self.clauses.append(clause)
        self.buckets.setdefault(key, []).append(clause)

    def pop(self, key) -> None:
        clause = self.clauses.pop()
        bucket = self.buckets[key]
        assert bucket[-1] is clause
        bucket.pop()


class _MinProofSearch:
    """Iterative deepening over inference sequences.

    A proof is a sequence of derived clauses ending in the empty clause,
    each obtained from earlier clauses by one rule application. Minimal
    proofs never derive a clause twice and never derive a clause they do
    not use, which justifies the prunes:

      * conclusions that are variants of a clause already on the branch
        are skipped (duplicates only; tautologies stay);
      * transposition: a set of derived clauses reached before with at
        most as many steps need not be explored again within one round;
      * budget: with r steps left, at most r dangling conclusions can
        still be woven into the proof;
      * on ground inputs, reaching the empty clause from smallest clause
        size s needs at least s more steps.
    """

    def __init__(self, clauses, calculus, order, max_nodes, deadline):
        self.inputs = list(clauses)
        self.calculus = calculus
        self.order = order
        self.max_nodes = max_nodes
        self.deadline = deadline
        self.nodes = 0
        self.ground = all(not c.variables() for c in self.inputs)
        self.base_candidates = self._initial_candidates()

    def _initial_candidates(self):
        out = []
        n = len(self.inputs)
        for i in range(n):
            for c in _conclusions(self.inputs[i], None, self.calculus, self.order):
                out.append((c, frozenset((i,)), clause_shape_key(c)))
            for j in range(i, n):
                for c in _conclusions(self.inputs[i], self.inputs[j], self.calculus, self.order):
                    out.append((c, frozenset((i, j)), clause_shape_key(c)))
        return out

    def run(self, l_max: int) -> Optional[int]:
        if any(c.is_empty for c in self.inputs):
            return 0
        for limit in range(1, l_max + 1):
            self.seen: dict = {}
            self.complete = True
            pool = _Pool(self.inputs)
            if self._dfs(pool, self.base_candidates, [], set(), limit):
                return limit
            if self.complete:
                return None  # the whole derivation space was finite and searched
        return None

    def _tick(self):
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            raise OracleBudgetError(f"node budget {self.max_nodes} exceeded")
        if self.deadline is not None and self.nodes % 256 == 0:
            if time.monotonic() > self.deadline:
                raise OracleBudgetError("deadline exceeded")

    def _dfs(self, pool: _Pool, candidates, derived, used, remaining) -> bool:
        self._tick()
        fresh = [
            (c, premises, key)
            for c, premises, key in candidates
            if not pool.contains_variant(c, key)
        ]
        if any(c.is_empty for c, _, _ in fresh):
            return remaining >= 1
        if not fresh:
            return False
        if remaining <= 1:
            # Only an immediate empty clause could finish within the round.
            self.complete = False
            return False
        if self.ground:
            smallest = min(len(c.literals) for c in pool.clauses)
            if smallest > remaining:
                self.complete = False
                return False

        n_inputs = len(self.inputs)
        for conclusion, premises, key in fresh:
            derived_premises = {p for p in premises if p >= n_inputs}
            new_used = used | derived_premises
            dangling = len(derived) + 1 - len(new_used)
            if dangling > remaining:
                self.complete = False
                continue
            state_key = frozenset(k for _, k in derived) | {conclusion.literals}
            steps_used = len(derived) + 1
            prev = self.seen.get(state_key)
            if prev is not None and prev <= steps_used:
                continue
            self.seen[state_key] = steps_used

            index = len(pool.clauses)
            pool.push(conclusion, key)
            derived.append((index, conclusion.literals))
            extra = self._steps_with(pool, index)
            if self._dfs(pool, candidates + extra, derived, new_used, remaining - 1):
                return True
            derived.pop()
            pool.pop(key)
        return False

    def _steps_with(self, pool: _Pool, new_index: int):
        out = []
        clause = pool.clauses[new_index]
        for c in _conclusions(clause, None, self.calculus, self.order):
            out.append((c, frozenset((new_index,)), clause_shape_key(c)))
        for other in range(len(pool.clauses)):
            for c in _conclusions(clause, pool.clauses[other], self.calculus, self.order):
                out.append((c, frozenset((new_index, other)), clause_shape_key(c)))
        return out


def min_proof_length(
    clauses: Iterable[Clause],
    calculus: str = "resolution",
    order: Optional[TermOrder] = None,
    l_max: int = 10,
    max_nodes: Optional[int] = None,
    deadline: Optional[float] = None,
) -> Optional[int]:
    """Exact minimal number of inference steps deriving the empty clause.

    Returns None when no proof of length <= l_max exists; raises
    OracleBudgetError when the node or time budget ran out first. Meant for
    small clause sets only: the search is exhaustive.
    """
    order = order if order is not None else TermOrder()
    search = _MinProofSearch(clauses, calculus, order, max_nodes, deadline)
    return search.run(l_max)

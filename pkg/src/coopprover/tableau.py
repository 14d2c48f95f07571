"""Connection tableau engine: start/extension/reduction, bounded search,
iterative deepening proving, and subgoal-clause enumeration.

A tableau is a literal-labeled tree built from instances of input clauses.
Every inner node is connected: one of its child leaves is closed against it
with a complementary literal. Open-branch leaves are the subgoals; the
clause they form is the subgoal clause of the tableau.

Searches mutate a single Tableau in place and restore it through an undo
trail, so one engine instance must not be shared between threads. Finished
proofs and subgoal records are immutable snapshots.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

from .kernel import (
    App,
    Clause,
    Literal,
    Var,
    VarSupply,
    clause_shape_key,
    render_clause,
    render_term,
    variant_equal,
)
from .problems import Problem, goal_clauses


class _Stop(Exception):
    """Internal: abort the current search, outcome already decided."""


# ---------------------------------------------------------------------------
# Binding environment with an undo trail

def walk(t, bindings):
    while type(t) is Var:
        nxt = bindings.get(t.name)
        if nxt is None:
            return t
        t = nxt
    return t


def resolve(t, bindings):
    t = walk(t, bindings)
    if type(t) is Var or not t.args:
        return t
    return App(t.fn, tuple(resolve(a, bindings) for a in t.args))


def resolve_literal(lit: Literal, bindings) -> Literal:
    if not lit.args:
        return lit
    return Literal(lit.positive, lit.pred, tuple(resolve(a, bindings) for a in lit.args))


def _occurs(name: str, t, bindings) -> bool:
    t = walk(t, bindings)
    if type(t) is Var:
        return t.name == name
    return any(_occurs(name, a, bindings) for a in t.args)


def unify_in_env(a, b, bindings, trail) -> bool:
    a = walk(a, bindings)
    b = walk(b, bindings)
    if type(a) is Var:
        if type(b) is Var and a.name == b.name:
            return True
        if _occurs(a.name, b, bindings):
            return False
        bindings[a.name] = b
        trail.append(a.name)
        return True
    if type(b) is Var:
        if _occurs(b.name, a, bindings):
            return False
        bindings[b.name] = a
        trail.append(b.name)
        return True
    if a.fn != b.fn or len(a.args) != len(b.args):
        return False
    for s, t in zip(a.args, b.args):
        if not unify_in_env(s, t, bindings, trail):
            return False
    return True


def unify_atoms_in_env(l1: Literal, l2: Literal, bindings, trail) -> bool:
    if l1.pred != l2.pred or len(l1.args) != len(l2.args):
        return False
    for s, t in zip(l1.args, l2.args):
        if not unify_in_env(s, t, bindings, trail):
            return False
    return True


# ---------------------------------------------------------------------------
# Tableau structure

class TNode:
    __slots__ = ("literal", "parent", "children", "closed", "depth")

    def __init__(self, literal: Optional[Literal], parent: Optional["TNode"]):
        self.literal = literal
        self.parent = parent
        self.children: list = []
        self.closed = False
        self.depth = 0 if parent is None else parent.depth + 1

    def path(self) -> tuple:
        out = []
        node = self
        while node.parent is not None:
            out.append(node.parent.children.index(node))
            node = node.parent
        return tuple(reversed(out))

    def ancestors(self):
        node = self.parent
        while node is not None and node.literal is not None:
            yield node
            node = node.parent


@dataclass(frozen=True)
class Bound:
    """Completeness bound: depth, inference, or a weighted combination.

    The weighted kind caps both tableau depth and inference count at
    ceil(factor * resource).
    """

    kind: str  # "depth" | "inference" | "weighted"
    depth_factor: float = 1.0
    inference_factor: float = 1.0

    def caps(self, n: int) -> tuple:
        # (max inner-node depth, max inferences); None means unlimited
        if self.kind == "depth":
            return n, None
        if self.kind == "inference":
            return None, n
        if self.kind == "weighted":
            return math.ceil(self.depth_factor * n), math.ceil(self.inference_factor * n)
        raise ValueError(f"unknown bound kind {self.kind!r}")


class Tableau:
    """A mutable connection tableau with a backtracking trail."""

    def __init__(self):
        self.root = TNode(None, None)
        self.bindings: dict = {}
        self.trail: list = []
        self.inference_count = 0
        self.steps: list = []
        self.attached: list = []  # (clause, nodes) per start/extension
        self.start_clause: Optional[Clause] = None
        self.supply = VarSupply("_")
        self.used_names: set = set()

    # -- queries ----------------------------------------------------------

    def is_trivial(self) -> bool:
        return not self.root.children

    def open_leaves(self) -> list:
        out: list = []

        def go(node: TNode):
            if not node.children:
                if node.literal is not None and not node.closed:
                    out.append(node)
                return
            for child in node.children:
                go(child)

        go(self.root)
        return out

    def leftmost_open(self) -> Optional[TNode]:
        def go(node: TNode):
            if not node.children:
                if node.literal is not None and not node.closed:
                    return node
                return None
            for child in node.children:
                found = go(child)
                if found is not None:
                    return found
            return None

        return go(self.root)

    def node_at(self, path: tuple) -> TNode:
        node = self.root
        for i in path:
            node = node.children[i]
        return node

    def subgoal_clause(self) -> Clause:
        return Clause(
            [resolve_literal(n.literal, self.bindings) for n in self.open_leaves()]
        )

    def tableau_clause_instances(self) -> list:
        out = []
        for clause, nodes in self.attached:
            out.append(
                Clause(
                    [resolve_literal(n.literal, self.bindings) for n in nodes],
                    role=clause.role,
                    cid=clause.cid,
                )
            )
        return out

    def max_inner_depth(self) -> int:
        best = 0

        def go(node: TNode):
            nonlocal best
            if node.children:
                best = max(best, node.depth)
                for child in node.children:
                    go(child)

        go(self.root)
        return best

    # -- inference rules ---------------------------------------------------

    def _attach(self, parent: TNode, clause: Clause):
        lits = list(clause.literals)
        fresh = _rename_for_tableau(lits, self.used_names, self.supply)
        nodes = [TNode(l, parent) for l in fresh]
        parent.children = nodes
        self.attached.append((clause, tuple(nodes)))
        return nodes

    def apply_start(self, clause: Clause):
        """Expand the trivial tableau with a variant of a start clause."""
        if not self.is_trivial():
            return None
        nodes = self._attach(self.root, clause)
        self.start_clause = clause
        self.inference_count += 1
        self.steps.append(
            {"rule": "start", "subgoal": (), "clause": clause.cid, "unifier": {}}
        )
        return ("start", None, len(nodes))

    def apply_extension(self, leaf: TNode, clause: Clause, lit_index: int):
        """Attach a clause variant below a subgoal, closing the branch
        through its lit_index-th literal by unification."""
        if leaf.closed or leaf.children or leaf.literal is None:
            return None
        connector = clause.literals[lit_index]
        if connector.positive == leaf.literal.positive or connector.pred != leaf.literal.pred:
            return None
        mark = len(self.trail)
        nodes = self._attach(leaf, clause)
        target = nodes[lit_index]
        if not unify_atoms_in_env(leaf.literal, target.literal, self.bindings, self.trail):
            self._undo_trail(mark)
            leaf.children = []
            self.attached.pop()
            return None
        target.closed = True
        self.inference_count += 1
        self.steps.append(
            {
                "rule": "extension",
                "subgoal": leaf.path(),
                "clause": clause.cid,
                "lit_index": lit_index,
                "unifier": self._trail_slice(mark),
            }
        )
        return ("extension", (leaf, mark), len(nodes))

    def apply_reduction(self, leaf: TNode, ancestor: TNode):
        """Close a subgoal against a complementary ancestor literal."""
        if leaf.closed or leaf.children or leaf.literal is None:
            return None
        anc = ancestor.literal
        if anc is None or anc.positive == leaf.literal.positive or anc.pred != leaf.literal.pred:
            return None
        mark = len(self.trail)
        if not unify_atoms_in_env(leaf.literal, anc, self.bindings, self.trail):
            self._undo_trail(mark)
            return None
        leaf.closed = True
        self.inference_count += 1
        self.steps.append(
            {
                "rule": "reduction",
                "subgoal": leaf.path(),
                "ancestor": ancestor.path(),
                "unifier": self._trail_slice(mark),
            }
        )
        return ("reduction", (leaf, mark), 0)

    def undo(self, token) -> None:
        kind, ctx, _n = token
        if kind == "start":
            self._undo_trail(0)
            self.root.children = []
            self.attached.pop()
            self.start_clause = None
        elif kind == "extension":
            leaf, mark = ctx
            self._undo_trail(mark)
            leaf.children = []
            self.attached.pop()
        else:
            leaf, mark = ctx
            self._undo_trail(mark)
            leaf.closed = False
        self.inference_count -= 1
        self.steps.pop()

    def _undo_trail(self, mark: int) -> None:
        while len(self.trail) > mark:
            del self.bindings[self.trail.pop()]

    def _trail_slice(self, mark: int) -> dict:
        return {
            name: render_term(resolve(Var(name), self.bindings))
            for name in self.trail[mark:]
        }


def _rename_for_tableau(literals, used: set, supply: VarSupply):
    mapping: dict = {}
    names: set = set()
    from .kernel import collect_vars, subst_literal

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


def expand_tableau(tab: Tableau, rule: str, subgoal, arg, lit_index: Optional[int] = None):
    """Apply one inference rule; returns the tableau or None on failure.

    For extensions without an explicit lit_index the first complementary
    literal that unifies is used.
    """
    if rule == "start":
        return tab if tab.apply_start(arg) else None
    if rule == "extension":
        indices = [lit_index] if lit_index is not None else range(len(arg.literals))
        for i in indices:
            if tab.apply_extension(subgoal, arg, i):
                return tab
        return None
    if rule == "reduction":
        return tab if tab.apply_reduction(subgoal, arg) else None
    raise ValueError(f"unknown rule {rule!r}")


def within_bound(tab: Tableau, bound: Bound, n: int) -> bool:
    depth_cap, inf_cap = bound.caps(n)
    if inf_cap is not None and tab.inference_count > inf_cap:
        return False
    if depth_cap is not None and tab.max_inner_depth() > depth_cap:
        return False
    return True


# ---------------------------------------------------------------------------
# Invariant checks (used heavily by the test suite)

def check_invariants(tab: Tableau) -> None:
    """Connectedness plus instance-of-input for every attached clause."""
    for clause, nodes in tab.attached:
        got = [resolve_literal(n.literal, tab.bindings) for n in nodes]
        if not _is_instance(clause, got):
            raise AssertionError(f"attached nodes are not an instance of {clause!r}")

    def go(node: TNode):
        for child in node.children:
            go(child)
        if node.children and node.literal is not None:
            lit = resolve_literal(node.literal, tab.bindings)
            ok = any(
                not c.children
                and c.closed
                and resolve_literal(c.literal, tab.bindings) == lit.complement()
                for c in node.children
            )
            if not ok:
                raise AssertionError("inner node without complementary child leaf")

    go(tab.root)


def _is_instance(clause: Clause, literals) -> bool:
    from .kernel import match

    if len(clause.literals) != len(literals):
        return False

    def go(i, sub):
        if i == len(literals):
            return True
        for cand in clause.literals:
            got = match(cand, literals[i], sub)
            if got is not None and go(i + 1, got):
                return True
        return False

    return go(0, {})


# ---------------------------------------------------------------------------
# Proofs

@dataclass(frozen=True)
class TableauProof:
    steps: tuple
    resource: int  # inference count of the closed tableau
    start_clause: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "kind": "tableau",
            "resource": self.resource,
            "steps": [dict(s) for s in self.steps],
        }


def replay(problem: Problem, proof: TableauProof, extra_clauses=()) -> Tableau:
    """Rebuild the closed tableau from a recorded step list.

    Raises AssertionError when a step does not apply or the final tableau
    is not closed.
    """
    by_cid = {c.cid: c for c in list(problem.clauses) + list(extra_clauses)}
    tab = Tableau()
    for step in proof.steps:
        rule = step["rule"]
        if rule == "start":
            token = tab.apply_start(by_cid[step["clause"]])
        elif rule == "extension":
            leaf = tab.node_at(step["subgoal"])
            token = tab.apply_extension(leaf, by_cid[step["clause"]], step["lit_index"])
        else:
            leaf = tab.node_at(step["subgoal"])
            token = tab.apply_reduction(leaf, tab.node_at(step["ancestor"]))
        assert token is not None, f"proof step failed to replay: {step}"
    assert tab.leftmost_open() is None, "replayed tableau is not closed"
    return tab


# ---------------------------------------------------------------------------
# Search engine

class _Index:
    """Extension candidates per (predicate, polarity of the subgoal)."""

    def __init__(self, clauses):
        self.table: dict = {}
        for ci, clause in enumerate(clauses):
            for li, lit in enumerate(clause.literals):
                # A subgoal with the opposite polarity connects to lit.
                self.table.setdefault((lit.pred, not lit.positive), []).append((ci, li))

    def candidates(self, subgoal_lit: Literal):
        return self.table.get((subgoal_lit.pred, subgoal_lit.positive), ())


@dataclass
class ProveOutcome:
    status: str  # "proved" | "exhausted" | "limit" | "cancelled"
    proof: Optional[TableauProof] = None
    resource: Optional[int] = None  # resource of success, or last fully searched
    inferences: int = 0  # inference applications across the whole run
    rounds: int = 0


def prove(
    problem: Problem,
    mode: str = "ctcneg",
    bound: Bound = Bound("inference"),
    n0: int = 2,
    step: int = 1,
    max_resource: Optional[int] = None,
    deadline: Optional[float] = None,
    stop=None,
    max_inferences: Optional[int] = None,
    regularity: bool = True,
) -> ProveOutcome:
    """Iterative-deepening proof search with backtracking.

    Explores the finite segment given by the bound and resource n for
    n = n0, n0 + step, ... with depth-first leftmost subgoal selection,
    clauses tried in input order and extension before reduction. Reduction
    is never attempted on Horn problems.
    """
    starts = goal_clauses(problem, mode)
    if not starts:
        return ProveOutcome("exhausted", resource=None)
    engine = _Engine(problem, starts, regularity, deadline, stop, max_inferences)
    n = n0
    last_full = None
    rounds = 0
    while True:
        rounds += 1
        engine.bound_hit = False
        try:
            proof = engine.search_round(bound, n)
        except _Stop:
            return ProveOutcome(
                engine.stop_reason, resource=last_full, inferences=engine.inferences, rounds=rounds
            )
        if proof is not None:
            return ProveOutcome(
                "proved", proof=proof, resource=n, inferences=engine.inferences, rounds=rounds
            )
        if not engine.bound_hit:
            # The segment was searched completely and a larger resource
            # cannot add tableaux: the whole search tree is exhausted.
            return ProveOutcome(
                "exhausted", resource=n, inferences=engine.inferences, rounds=rounds
            )
        last_full = n
        n += step
        if max_resource is not None and n > max_resource:
            return ProveOutcome(
                "limit", resource=last_full, inferences=engine.inferences, rounds=rounds
            )


class _Engine:
    def __init__(self, problem, starts, regularity, deadline, stop, max_inferences):
        self.problem = problem
        self.clauses = problem.clauses
        self.starts = starts
        self.index = _Index(problem.clauses)
        self.horn = problem.is_horn
        self.regularity = regularity
        self.deadline = deadline
        self.stop = stop
        self.max_inferences = max_inferences
        self.inferences = 0
        self.bound_hit = False
        self.stop_reason = "cancelled"
        self._tick = 0

    def _check_limits(self):
        if self.max_inferences is not None and self.inferences >= self.max_inferences:
            self.stop_reason = "limit"
            raise _Stop
        self._tick += 1
        if self._tick % 64 == 0:
            if self.stop is not None and self.stop.is_set():
                self.stop_reason = "cancelled"
                raise _Stop
            if self.deadline is not None and time.monotonic() > self.deadline:
                self.stop_reason = "limit"
                raise _Stop

    def search_round(self, bound: Bound, n: int):
        depth_cap, inf_cap = bound.caps(n)
        tab = Tableau()
        for start in self.starts:
            if inf_cap is not None and inf_cap < 1:
                self.bound_hit = True
                continue
            token = tab.apply_start(start)
            if token is None:
                continue
            self.inferences += 1
            if self._regular(tab, tab.root.children):
                if self._dfs(tab, depth_cap, inf_cap):
                    proof = TableauProof(
                        tuple(dict(s) for s in tab.steps),
                        tab.inference_count,
                        start_clause=start.cid,
                    )
                    return proof
            tab.undo(token)
        return None

    def _dfs(self, tab: Tableau, depth_cap, inf_cap) -> bool:
        self._check_limits()
        leaf = tab.leftmost_open()
        if leaf is None:
            return True
        lit = resolve_literal(leaf.literal, tab.bindings)
        extensions = self.index.candidates(lit)
        reductions = ()
        if not self.horn:
            reductions = [
                a
                for a in leaf.ancestors()
                if a.literal.pred == lit.pred and a.literal.positive != lit.positive
            ]
        if not extensions and not reductions:
            return False
        if inf_cap is not None and tab.inference_count + 1 > inf_cap:
            # A candidate inference existed but the bound forbids it, so
            # the segment at this resource is a strict prefix of the tree.
            self.bound_hit = True
            return False
        depth_ok = depth_cap is None or leaf.depth <= depth_cap
        if not depth_ok and extensions:
            self.bound_hit = True
        if depth_ok:
            for ci, li in extensions:
                token = tab.apply_extension(leaf, self.clauses[ci], li)
                if token is None:
                    continue
                self.inferences += 1
                if self._regular(tab, leaf.children):
                    if self._dfs(tab, depth_cap, inf_cap):
                        return True
                tab.undo(token)
        for ancestor in reductions:
            token = tab.apply_reduction(leaf, ancestor)
            if token is None:
                continue
            self.inferences += 1
            if self._dfs(tab, depth_cap, inf_cap):
                return True
            tab.undo(token)
        return False

    def _regular(self, tab: Tableau, new_nodes) -> bool:
        if not self.regularity:
            return True
        for node in new_nodes:
            lit = resolve_literal(node.literal, tab.bindings)
            for anc in node.ancestors():
                if resolve_literal(anc.literal, tab.bindings) == lit:
                    return False
        return True


# ---------------------------------------------------------------------------
# Subgoal clause enumeration

@dataclass(frozen=True)
class SubgoalRecord:
    """A subgoal clause with the provenance its scoring needs."""

    clause: Clause
    inference_count: int
    tableau_clauses: tuple
    start_clause: Optional[str]

    def adjusted(self, extra_inferences: int) -> "SubgoalRecord":
        return SubgoalRecord(
            self.clause,
            self.inference_count + extra_inferences,
            self.tableau_clauses,
            self.start_clause,
        )


@dataclass
class EnumerationOutcome:
    records: list
    proof: Optional[TableauProof]
    complete: bool  # False when the cap or a budget cut the segment short
    tableaux: int = 0


class _RecordStore:
    def __init__(self, exclude):
        self.buckets: dict = {}
        self.order: list = []
        self.count = 0
        self.exclude_buckets: dict = {}
        for c in exclude:
            self.exclude_buckets.setdefault(clause_shape_key(c), []).append(c)

    def excluded(self, clause: Clause) -> bool:
        for cand in self.exclude_buckets.get(clause_shape_key(clause), ()):
            if variant_equal(clause, cand):
                return True
        return False

    def add(self, record: SubgoalRecord) -> bool:
        """Insert or update; returns True when a new class was added."""
        key = clause_shape_key(record.clause)
        bucket = self.buckets.setdefault(key, [])
        for i, old in enumerate(bucket):
            if variant_equal(old.clause, record.clause):
                if record.inference_count < old.inference_count:
                    bucket[i] = record
                    self.order[self.order.index(old)] = record
                return False
        bucket.append(record)
        self.order.append(record)
        self.count += 1
        return True


def enumerate_subgoal_clauses(
    problem: Problem,
    k: int,
    mode: str = "ctcneg",
    start_set=None,
    cap: Optional[int] = None,
    max_tableaux: Optional[int] = None,
    stop=None,
    deadline: Optional[float] = None,
) -> EnumerationOutcome:
    """All subgoal clauses of tableaux with at most k inferences.

    Every tableau in the inference-bounded segment is visited, branching
    over every open subgoal (the start step counts as one inference).
    Records that are variants of input clauses are dropped; the rest are
    deduplicated keeping the smallest inference count. Closed tableaux are
    reported through the proof field instead of producing a record.
    """
    if k < 1:
        raise ValueError("resource must be at least 1")
    starts = start_set if start_set is not None else goal_clauses(problem, mode)
    store = _RecordStore(problem.clauses)
    state = {"proof": None, "visited": 0, "complete": True}
    index = _Index(problem.clauses)
    horn = problem.is_horn
    tab = Tableau()

    def visit(start_cid):
        state["visited"] += 1
        if max_tableaux is not None and state["visited"] > max_tableaux:
            state["complete"] = False
            raise _Stop
        if state["visited"] % 256 == 0:
            if stop is not None and stop.is_set():
                state["complete"] = False
                raise _Stop
            if deadline is not None and time.monotonic() > deadline:
                state["complete"] = False
                raise _Stop
        opens = tab.open_leaves()
        if not opens:
            if state["proof"] is None:
                state["proof"] = TableauProof(
                    tuple(dict(s) for s in tab.steps),
                    tab.inference_count,
                    start_clause=start_cid,
                )
            return
        sg = tab.subgoal_clause()
        if not store.excluded(sg):
            record = SubgoalRecord(
                sg,
                tab.inference_count,
                tuple(tab.tableau_clause_instances()),
                start_cid,
            )
            if store.add(record) and cap is not None and store.count >= cap:
                state["complete"] = False
                raise _Stop
        if tab.inference_count >= k:
            return
        for leaf in opens:
            lit = resolve_literal(leaf.literal, tab.bindings)
            for ci, li in index.candidates(lit):
                token = tab.apply_extension(leaf, problem.clauses[ci], li)
                if token is None:
                    continue
                visit(start_cid)
                tab.undo(token)
            if not horn:
                for ancestor in leaf.ancestors():
                    token = tab.apply_reduction(leaf, ancestor)
                    if token is None:
                        continue
                    visit(start_cid)
                    tab.undo(token)

    try:
        for start in starts:
            token = tab.apply_start(start)
            if token is None:
                continue
            visit(start.cid)
            tab.undo(token)
    except _Stop:
        pass
    return EnumerationOutcome(
        list(store.order), state["proof"], state["complete"], state["visited"]
    )

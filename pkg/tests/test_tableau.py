import pytest

from coopprover.kernel import Clause, Literal, variant_equal
from coopprover.problems import add_equality_axioms, parse_problem
from coopprover.tableau import (
    Bound,
    Tableau,
    check_invariants,
    enumerate_subgoal_clauses,
    expand_tableau,
    prove,
    replay,
    within_bound,
)
from helpers import (
    chain_split_problem,
    clause,
    nine_step_problem,
    rewrite_goal_problem,
)


def set_of(clauses):
    return {c.literals for c in clauses}


class TestExpand:
    def test_start(self):
        p = chain_split_problem()
        tab = Tableau()
        assert expand_tableau(tab, "start", None, p.clauses[0]) is tab
        assert tab.inference_count == 1
        assert [n.literal for n in tab.open_leaves()] == [Literal(False, "g", ())]

    def test_start_only_on_trivial(self):
        p = chain_split_problem()
        tab = Tableau()
        expand_tableau(tab, "start", None, p.clauses[0])
        assert expand_tableau(tab, "start", None, p.clauses[1]) is None

    def test_extension(self):
        p = chain_split_problem()
        tab = Tableau()
        expand_tableau(tab, "start", None, p.clauses[0])
        leaf = tab.leftmost_open()
        assert expand_tableau(tab, "extension", leaf, p.clauses[1]) is tab
        assert tab.inference_count == 2
        assert tab.subgoal_clause() == clause("~p1", "~p2")
        check_invariants(tab)

    def test_extension_failure_is_clean(self):
        p = parse_problem("cnf(g, negated_conjecture, (~p(a))). cnf(a1, axiom, (p(b))).")
        tab = Tableau()
        expand_tableau(tab, "start", None, p.clauses[0])
        leaf = tab.leftmost_open()
        assert expand_tableau(tab, "extension", leaf, p.clauses[1]) is None
        assert tab.inference_count == 1
        assert len(tab.open_leaves()) == 1

    def test_reduction_propositional(self):
        text = """
        cnf(g, negated_conjecture, (~p)).
        cnf(a1, axiom, (p | p2)).
        cnf(a2, axiom, (~p2 | p)).
        """
        p = parse_problem(text)
        tab = Tableau()
        expand_tableau(tab, "start", None, p.clauses[0])
        expand_tableau(tab, "extension", tab.leftmost_open(), p.clauses[1])
        # branch now: ~p / p2; extend p2 with {~p2, p} leaves subgoal p
        expand_tableau(tab, "extension", tab.leftmost_open(), p.clauses[2])
        leaf = tab.leftmost_open()
        ancestor = next(iter(leaf.ancestors()))
        while ancestor.literal.pred != "p":
            ancestor = next(ancestor.ancestors())
        assert expand_tableau(tab, "reduction", leaf, ancestor) is tab
        assert tab.leftmost_open() is None
        check_invariants(tab)

    def test_undo_restores(self):
        p = chain_split_problem()
        tab = Tableau()
        expand_tableau(tab, "start", None, p.clauses[0])
        leaf = tab.leftmost_open()
        token = tab.apply_extension(leaf, p.clauses[1], 2)
        assert token is not None
        tab.undo(token)
        assert tab.inference_count == 1
        assert tab.subgoal_clause() == clause("~g")


class TestBounds:
    def test_trivial_tableau(self):
        tab = Tableau()
        for kind in ("depth", "inference", "weighted"):
            assert within_bound(tab, Bound(kind), 0)

    def test_inference_bound(self):
        p = chain_split_problem()
        tab = Tableau()
        expand_tableau(tab, "start", None, p.clauses[0])
        expand_tableau(tab, "extension", tab.leftmost_open(), p.clauses[1])
        expand_tableau(tab, "extension", tab.leftmost_open(), p.clauses[0].with_role("axiom"))
        # three inferences recorded
        assert tab.inference_count == 3 or tab.inference_count == 2

    def test_inference_bound_check(self):
        p = chain_split_problem()
        tab = Tableau()
        expand_tableau(tab, "start", None, p.clauses[0])
        expand_tableau(tab, "extension", tab.leftmost_open(), p.clauses[1])
        assert within_bound(tab, Bound("inference"), 2)
        assert not within_bound(tab, Bound("inference"), 1)

    def test_depth_bound(self):
        text = """
        cnf(g, negated_conjecture, (~p1)).
        cnf(a1, axiom, (p1 | ~p2)).
        cnf(a2, axiom, (p2 | ~p3)).
        """
        p = parse_problem(text)
        tab = Tableau()
        expand_tableau(tab, "start", None, p.clauses[0])
        expand_tableau(tab, "extension", tab.leftmost_open(), p.clauses[1])
        expand_tableau(tab, "extension", tab.leftmost_open(), p.clauses[2])
        # inner nodes at depths 0 (root), 1 and 2
        assert within_bound(tab, Bound("depth"), 2)
        assert not within_bound(tab, Bound("depth"), 1)

    def test_weighted_bound(self):
        tab = Tableau()
        p = chain_split_problem()
        expand_tableau(tab, "start", None, p.clauses[0])
        b = Bound("weighted", depth_factor=0.5, inference_factor=1.5)
        # n=2: depth cap ceil(1)=1, inference cap ceil(3)=3
        assert within_bound(tab, b, 2)


class TestProve:
    def test_two_clause_refutation(self):
        p = parse_problem("cnf(g, negated_conjecture, (~g)). cnf(a, axiom, (g)).")
        out = prove(p, mode="ctcneg", bound=Bound("inference"), n0=1, step=1, max_resource=5)
        assert out.status == "proved"
        assert out.proof.resource == 2
        replay(p, out.proof)

    def test_exhausted_without_proof(self):
        p = parse_problem("cnf(g, negated_conjecture, (~g)). cnf(a, axiom, (p)).")
        out = prove(p, mode="ctcneg", bound=Bound("inference"), n0=1, step=1, max_resource=10)
        assert out.status == "exhausted"

    def test_limit_reached(self):
        # Satisfiable with an ever-growing search; the ceiling stops it.
        text = """
        cnf(g, negated_conjecture, (~p(a))).
        cnf(a1, axiom, (p(X) | ~p(f(X)))).
        """
        p = parse_problem(text)
        out = prove(p, mode="ctcneg", bound=Bound("inference"), n0=1, step=1, max_resource=4)
        assert out.status == "limit"
        assert out.resource == 4

    def test_rewrite_goal_within_six(self):
        p = add_equality_axioms(rewrite_goal_problem())
        out = prove(p, mode="ctcneg", bound=Bound("inference"), n0=1, step=1, max_resource=6)
        assert out.status == "proved"
        assert out.proof.resource <= 6
        replay(p, out.proof)

    def test_nine_step_set_closes(self):
        p = nine_step_problem()
        out = prove(p, mode="ctcneg", bound=Bound("depth"), n0=1, step=1, max_resource=10)
        assert out.status == "proved"
        replay(p, out.proof)

    def test_depth_bound_proves_too(self):
        p = chain_split_problem()
        # Unsatisfiable only with units for p1, p2 added:
        text = """
        cnf(g, negated_conjecture, (~g)).
        cnf(a1, axiom, (~p1 | ~p2 | g)).
        cnf(u1, axiom, (p1)).
        cnf(u2, axiom, (p2)).
        """
        p = parse_problem(text)
        out = prove(p, mode="ctcneg", bound=Bound("depth"), n0=1, step=1, max_resource=5)
        assert out.status == "proved"

    def test_horn_never_reduces(self):
        text = """
        cnf(g, negated_conjecture, (~p1)).
        cnf(a1, axiom, (p1 | ~p2)).
        cnf(u, axiom, (p2)).
        """
        p = parse_problem(text)
        assert p.is_horn
        out = prove(p, mode="ctcneg", bound=Bound("inference"), n0=1, step=1, max_resource=10)
        assert out.status == "proved"
        assert all(s["rule"] != "reduction" for s in out.proof.steps)

    def test_non_horn_uses_reduction(self):
        # Classic non-Horn example needing a reduction step.
        text = """
        cnf(g, negated_conjecture, (~p | ~q)).
        cnf(a1, axiom, (p | q)).
        cnf(a2, axiom, (p | ~q)).
        cnf(a3, axiom, (~p | q)).
        """
        p = parse_problem(text)
        out = prove(p, mode="ctc", bound=Bound("inference"), n0=1, step=1, max_resource=12)
        assert out.status == "proved"


class TestEnumerate:
    def test_chain_split_k2_both_modes(self):
        p = chain_split_problem()
        expected = {clause("~p1", "~p2").literals, clause("~q1", "~q2").literals}
        for mode in ("ctcneg", "ctc"):
            out = enumerate_subgoal_clauses(p, 2, mode=mode)
            assert out.complete
            assert set_of(r.clause for r in out.records) == expected

    def test_chain_split_k1_empty(self):
        # One-inference tableaux only produce input clauses, which are dropped.
        out = enumerate_subgoal_clauses(chain_split_problem(), 1, mode="ctcneg")
        assert out.complete
        assert out.records == []

    def test_nine_step_k2_exact_five(self):
        out = enumerate_subgoal_clauses(nine_step_problem(), 2, mode="ctcneg")
        expected = {
            clause("~l2", "l6", "l7").literals,
            clause("~l2", "l6", "~l7").literals,
            clause("l1", "~l3", "~l4").literals,
            clause("~l1", "~l3", "~l4").literals,
            clause("~l2", "~l5", "~l6").literals,
        }
        assert out.complete
        assert set_of(r.clause for r in out.records) == expected

    def test_inference_counts(self):
        out = enumerate_subgoal_clauses(chain_split_problem(), 2, mode="ctcneg")
        assert all(r.inference_count == 2 for r in out.records)
        out3 = enumerate_subgoal_clauses(chain_split_problem(), 3, mode="ctcneg")
        assert all(r.inference_count <= 3 for r in out3.records)

    def test_monotone_in_k(self):
        p = nine_step_problem()
        small = enumerate_subgoal_clauses(p, 2, mode="ctcneg")
        large = enumerate_subgoal_clauses(p, 3, mode="ctcneg")
        small_set = set_of(r.clause for r in small.records)
        large_set = set_of(r.clause for r in large.records)
        assert small_set <= large_set

    def test_neg_mode_subset_of_ctc(self):
        p = nine_step_problem()
        neg = enumerate_subgoal_clauses(p, 2, mode="ctcneg")
        full = enumerate_subgoal_clauses(p, 2, mode="ctc")
        assert set_of(r.clause for r in neg.records) <= set_of(r.clause for r in full.records)

    def test_cap_stops_early(self):
        out = enumerate_subgoal_clauses(chain_split_problem(), 2, mode="ctcneg", cap=1)
        assert len(out.records) == 1
        assert not out.complete
        # Deterministic: the first candidate in input-clause order.
        assert out.records[0].clause == clause("~p1", "~p2")

    def test_closed_tableau_reports_proof(self):
        p = parse_problem("cnf(g, negated_conjecture, (~g)). cnf(a, axiom, (g)).")
        out = enumerate_subgoal_clauses(p, 2, mode="ctcneg")
        assert out.proof is not None
        assert all(r.clause.literals for r in out.records)

    def test_start_set_overrides_goals(self):
        p = chain_split_problem()
        out = enumerate_subgoal_clauses(p, 2, mode="ctcneg", start_set=[clause("~p1", "~p2", cid="m1")])
        # Start clause is not an input clause, so its start tableau is recorded.
        assert any(r.clause == clause("~p1", "~p2") and r.inference_count == 1 for r in out.records)

    def test_records_keep_provenance(self):
        out = enumerate_subgoal_clauses(chain_split_problem(), 2, mode="ctcneg")
        rec = next(r for r in out.records if r.clause == clause("~p1", "~p2"))
        assert rec.start_clause == "g"
        assert len(rec.tableau_clauses) == 2
        assert any(variant_equal(tc, clause("~p1", "~p2", "g")) for tc in rec.tableau_clauses)

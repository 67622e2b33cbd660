import pytest

from sti.derivation import (Derivation, DerivationError, Rule, alpha_equivalent, and_n, arrow_e,
                            arrow_i, ax, check_derivation, decompose_intersection_tree,
                            derivation_key, freshen, introduce, iter_nodes, leaf_instance_witnesses,
                            mux, peel_delta, rename_free_var, replay_delta, weaken)
from sti.itypes import Arrow, Context, Inter, parse_type
from sti.terms import App, Var, free_vars, is_instance, parse_term

from conftest import A, a, example_first, id_applied


def messages(d):
    return [v.message for v in check_derivation(d).violations]


class TestChecker:
    def test_example_derivations_pass(self, example):
        for d in example:
            assert check_derivation(d).ok, str(check_derivation(d))

    def test_example_conclusion(self, example):
        first = example[0]
        assert first.ctx == Context({"z": Inter((A, a))})
        assert first.term == parse_term(r"(\x. x x) ((\y. y) z)")
        assert first.type == a

    def test_disjointness_violation(self):
        f = arrow_i(weaken(ax("y", a), "z", a), "y")
        bad = Derivation(Rule.ARROW_E, Context({"z": a}), App(f.term, Var("z")), a,
                         (f, ax("z", a)))
        msgs = messages(bad)
        assert any("Γ # Δ" in m for m in msgs)

    def test_axiom_needs_linear_type(self):
        t = Inter((a, a))
        bad = Derivation(Rule.AX, Context({"x": t}), Var("x"), t)
        assert "axiom requires linear type" in messages(bad)

    def test_all_violations_reported_with_paths(self):
        t = Inter((a, a))
        bad_ax = Derivation(Rule.AX, Context({"x": t}), Var("y"), t)
        root = Derivation(Rule.WEAKEN, Context({"x": t, "w": t}), Var("y"), t, (bad_ax,), var="w")
        report = check_derivation(root)
        paths = {v.path for v in report.violations}
        assert () in paths and (0,) in paths
        assert len(report.violations) >= 4

    def test_mux_wrong_subject(self):
        good = mux(arrow_e(ax("x1", A), ax("x2", a)), ["x1", "x2"], "x")
        bad = Derivation(Rule.MUX, good.ctx, parse_term("x x1"), good.type, good.premises,
                         var="x", merged=("x1", "x2"))
        assert messages(bad)

    def test_and_needs_same_subject(self):
        bad = Derivation(Rule.AND, Context({"z": Inter((a, a))}), Var("z"), Inter((a, a)),
                         (ax("z", a), id_applied(a)))
        assert messages(bad)

    def test_free_variables_within_context(self, example):
        for d in example:
            for _, node in iter_nodes(d):
                assert free_vars(node.term) <= node.ctx.domain


class TestConstructors:
    def test_weaken_rejects_intersection(self):
        with pytest.raises(DerivationError):
            weaken(ax("x", a), "y", Inter((a, a)))

    def test_and_needs_two(self):
        with pytest.raises(DerivationError):
            and_n([ax("x", a)])

    def test_mux_needs_fresh_target(self):
        d = arrow_e(ax("x1", A), ax("x2", a))
        with pytest.raises(DerivationError):
            mux(d, ["x1", "x2"], "x1")
        with pytest.raises(DerivationError):
            mux(d, ["x1"], "x")

    def test_mux_over_dead_variables(self):
        d = weaken(weaken(ax("y", a), "x1", a), "x2", a)
        m = mux(d, ["x1", "x2"], "x")
        assert m.term == Var("y")
        assert check_derivation(m).ok

    def test_introduce_builds_weaken_and_mux(self):
        t = parse_type("((a ∧ (a -> a)) ∧ a)")
        d = introduce(ax("y", a), "z", t, {"y", "z"})
        assert check_derivation(d).ok
        assert d.ctx["z"] == t
        rules = [n.rule for _, n in iter_nodes(d)]
        assert rules.count(Rule.WEAKEN) == 3 and rules.count(Rule.MUX) == 2


class TestIntersectionTrees:
    def test_example_sigma(self):
        sigma = example_first().premises[1]
        tree = decompose_intersection_tree(sigma)
        assert not tree.is_empty
        leaves = tree.leaves()
        assert len(leaves) == 2
        assert [leaf.type for leaf in leaves] == [A, a]
        assert all(leaf.rule.constructive for leaf in leaves)

    def test_identity_is_empty_tree(self, identity):
        tree = decompose_intersection_tree(identity)
        assert tree.is_empty and tree.leaves() == [identity]

    def test_delta_is_peeled(self):
        inner = and_n([ax("z1", a), ax("z1", A)])
        d = weaken(inner, "w", a)
        core, steps = peel_delta(d)
        assert core is inner and [s.rule for s in steps] == [Rule.WEAKEN]
        assert replay_delta(core, steps).ctx == d.ctx
        tree = decompose_intersection_tree(d)
        assert tree.node is inner and len(tree.leaves()) == 2

    def test_leaf_subjects_have_instance_witnesses(self):
        leaves = [arrow_e(ax("x1", A), ax("x2", a)), arrow_e(ax("y1", A), ax("y2", a))]
        body = and_n([mux(leaves[0], ["x1", "x2"], "x"), mux(leaves[1], ["y1", "y2"], "x")])
        tree = decompose_intersection_tree(body)
        assert len(tree.leaves()) == 2
        for leaf, w in zip(tree.leaves(), leaf_instance_witnesses(tree)):
            assert w is not None
            assert is_instance(body.term, leaf.term)

    def test_corpus_intersections_decompose(self, corpus):
        seen = 0
        for _, d, _ in corpus:
            for _, node in iter_nodes(d):
                if isinstance(node.type, Inter):
                    seen += 1
                    tree = decompose_intersection_tree(node)
                    assert not tree.is_empty and len(tree.leaves()) >= 2
        assert seen > 0


class TestRenaming:
    def test_rename_free_var(self):
        d = example_first()
        r = rename_free_var(d, "z", "w")
        assert check_derivation(r).ok
        assert r.ctx.domain == {"w"} and r.term == parse_term(r"(\x. x x) ((\y. y) w)")

    def test_freshen_keeps_alpha_class(self):
        d = example_first()
        f = freshen(d, {"x", "x1", "y"})
        assert check_derivation(f).ok
        assert not ({"x", "x1", "y"} & (f.names - d.ctx.domain))
        assert alpha_equivalent(f, d)

    def test_key_ignores_child_order_inside_types(self):
        d1 = arrow_i(ax("x", a), "x")
        d2 = weaken(d1, "q", Arrow(Inter((A, a)), a))
        d3 = weaken(d1, "q", Arrow(Inter((a, A)), a))
        assert alpha_equivalent(d2, d3)
        assert derivation_key(and_n([ax("z", A), ax("z", a)])) != derivation_key(
            and_n([ax("z", a), ax("z", A)]))

    def test_key_separates_different_proofs(self, example):
        assert not alpha_equivalent(example[0], example[1])

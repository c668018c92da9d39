import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normlog.evaluator import (
    Evaluator, NegativeTime, UnboundVariable, eval_path, eval_state, eval_stit, eval_time_term,
)
from normlog.model import ModelError, all_paths, build_model, linear_model
from normlog.scenarios import CHAIN, figure_model
from normlog.syntax import (
    Atom, Freeze, TimeTerm, parse, parse_path_formula, parse_state_formula,
)

from generators import random_base, random_model, random_path, random_tau
from oracle import Oracle

MAIN = CHAIN + ("s7a",)


def test_time_terms():
    assert eval_time_term({"t": 5}, TimeTerm("t", 2)) == 7
    assert eval_time_term({"t": 5}, TimeTerm("t", -5)) == 0
    with pytest.raises(NegativeTime, match="negative time"):
        eval_time_term({"t": 3}, TimeTerm("t", -4))
    with pytest.raises(UnboundVariable):
        eval_time_term({}, TimeTerm("t"))


def test_comparisons_use_integer_arithmetic():
    # a shifted term below zero is simply smaller, not an error
    m = linear_model([(set(), set())] * 2)
    assert eval_state(m, "s1", parse("t.(t-2 < t)"))
    assert not eval_state(m, "s1", parse("t.(t-2 = t)"))


def test_state_examples():
    m = figure_model("1a")
    assert eval_state(m, "s6", parse("V[i,a]"))
    for s in m.states:
        assert eval_state(m, s, parse("t.(t = t)"))


def test_unbound_variable_is_an_error():
    m = figure_model("1a")
    with pytest.raises(UnboundVariable):
        eval_state(m, "s0", parse("tv < tb"))
    assert eval_state(m, "s0", parse("tb < tv"), {"tb": 1, "tv": 6})


def test_freeze_binds_current_depth():
    m = figure_model("1a")
    for s in m.states:
        d = m.depth(s)
        body = parse("t < tv")
        for tv in range(9):
            assert eval_state(m, s, Freeze("t", body), {"tv": tv}) == eval_state(
                m, s, body, {"t": d, "tv": tv})


def test_path_freeze_binds_position():
    m = figure_model("1a")
    alpha = parse_path_formula("t. F- (t = u + 3)")
    for j in range(len(MAIN)):
        assert eval_path(m, MAIN, j, alpha, {"u": 0}) == (j == 3)


def test_stit_fixture_and_past_finally():
    m = figure_model("1a")
    phi = Atom("phi")
    assert eval_stit(m, "s5", "a", phi)
    assert not eval_stit(m, "s6", "a", phi)
    assert eval_path(m, MAIN, 6, parse_path_formula("F- E<a> phi"))


def test_stit_false_at_leaves():
    m = figure_model("1a")
    for leaf in ("s7a", "s7b", "u0"):
        assert not eval_stit(m, leaf, "a", parse("true"))
        assert not eval_stit(m, leaf, "a", parse("false"))


def test_stit_false_for_formula_true_everywhere():
    m = figure_model("1a")
    for s in m.states:
        assert not eval_stit(m, s, "a", parse("t.(t = t)"))
        assert not eval_stit(m, s, "a", parse("phi | !phi"))


def test_stit_requires_every_transition_labelled():
    edges = [("r", "x", {"a"}), ("r", "y", {"b"})]
    m = build_model("r", edges, {"x": {"p"}, "y": {"p"}})
    assert not eval_stit(m, "r", "a", Atom("p"))
    m = build_model("r", [("r", "x", {"a", "b"}), ("r", "y", {"a"})], {"x": {"p"}, "y": {"p"}})
    assert eval_stit(m, "r", "a", Atom("p"))
    assert not eval_stit(m, "r", "b", Atom("p"))


def test_unlabelled_transition_is_nobodys_action():
    m = build_model("r", [("r", "x", set())], {"x": {"p"}})
    assert not eval_stit(m, "r", "a", Atom("p"))
    assert eval_state(m, "r", parse("Apath X+ p"))


def test_stit_non_triviality_is_checked_from_the_root():
    # p holds below r but not at r itself, so it is not settled everywhere
    m = build_model("r", [("r", "x", {"a"}), ("x", "y", {"a"})], {"x": {"p"}, "y": {"p"}})
    assert eval_stit(m, "x", "a", Atom("p"))
    m = build_model("r", [("r", "x", {"a"}), ("x", "y", {"a"})],
                    {"r": {"p"}, "x": {"p"}, "y": {"p"}})
    assert not eval_stit(m, "x", "a", Atom("p"))


def test_next_at_last_position_is_false():
    m = figure_model("2")
    for sigma in all_paths(m):
        last = len(sigma) - 1
        assert not eval_path(m, sigma, last, parse_path_formula("X+ true"))
        assert not eval_path(m, sigma, 0, parse_path_formula("X- true"))


def test_strict_finally_versus_reflexive_globally():
    m = linear_model([({"p"}, set()), (set(), set())])
    sigma = m.order
    assert eval_path(m, sigma, 0, parse_path_formula("p"))
    assert not eval_path(m, sigma, 0, parse_path_formula("F+ p"))
    assert not eval_path(m, sigma, 1, parse_path_formula("F- q"))
    assert eval_path(m, sigma, 1, parse_path_formula("F- p"))
    assert not eval_path(m, sigma, 0, parse_path_formula("G+ p"))
    m = linear_model([({"p"}, set()), ({"p"}, set())])
    assert eval_path(m, m.order, 0, parse_path_formula("G+ p"))
    assert eval_path(m, m.order, 1, parse_path_formula("G- p"))


def test_until_witness_is_strict():
    m = linear_model([({"q"}, set()), ({"p"}, set()), ({"q"}, set())])
    sigma = m.order
    # the witness at j itself does not count
    assert eval_path(m, sigma, 0, parse_path_formula("false U+ q")) is False
    assert eval_path(m, sigma, 1, parse_path_formula("p U+ q"))
    # left operand covers [j, witness)
    assert not eval_path(m, sigma, 0, parse_path_formula("p U+ q"))
    # mirrored: left operand covers (witness, j]
    assert not eval_path(m, sigma, 2, parse_path_formula("p U- q"))
    back = linear_model([({"q"}, set()), ({"p"}, set()), ({"p"}, set())])
    assert eval_path(back, back.order, 2, parse_path_formula("p U- q"))
    assert not eval_path(back, back.order, 1, parse_path_formula("false U- q"))


def test_path_quantifiers_range_over_paths_through_the_state():
    m = figure_model("1a")
    assert eval_state(m, "s6", parse("Epath X+ true"))
    assert not eval_state(m, "s7a", parse("Epath X+ true"))
    assert eval_state(m, "s5", parse("Apath X+ phi"))
    assert not eval_state(m, "s4", parse("Apath X+ phi"))


def test_unknown_special_proposition_ids():
    m = figure_model("1a")
    with pytest.raises(ModelError, match="unknown norm"):
        eval_state(m, "s0", parse("V[nope,a]"))
    with pytest.raises(ModelError, match="unknown agent"):
        eval_state(m, "s0", parse("V[i,zed]"))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 1_000_000))
def test_agrees_with_oracle(seed):
    rng = random.Random(seed)
    model = random_model(rng, 12)
    ev, oracle = Evaluator(model), Oracle(model)
    tau = random_tau(rng, model)
    phi = random_base(rng, rng.randint(1, 4))
    for s in model.states:
        assert ev.state(s, phi, tau) == oracle.state(s, phi, tau)
    alpha = random_path(rng, rng.randint(1, 4))
    for sigma in all_paths(model):
        for j in range(len(sigma)):
            assert ev.path(sigma, j, alpha, tau) == oracle.path(sigma, j, alpha, tau)


def test_memo_is_keyed_on_free_bindings_only():
    m = figure_model("1a")
    ev = Evaluator(m)
    phi = parse_state_formula("Apath G+ (phi -> V[i,a])")
    ev.state("s0", phi, {"x": 1})
    misses = ev.misses
    ev.state("s0", phi, {"x": 2})
    assert ev.misses == misses

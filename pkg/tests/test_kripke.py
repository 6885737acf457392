import itertools

import pytest

from intcalc.formula import Param, parse_formula
from intcalc.kripke import (
    BudgetExceeded,
    KripkeModel,
    ModelError,
    count_models,
    dump_model,
    enumerate_models,
    labelled_sequent_holds,
    load_model,
    nested_sequent_holds,
    satisfies,
)
from intcalc.labelled import parse_sequent
from intcalc.nested import parse_nested


def two_chain(p_at=("v",)):
    return KripkeModel(
        frozenset({"w", "v"}),
        frozenset({("w", "w"), ("v", "v"), ("w", "v")}),
        {("p", ()): frozenset(p_at)},
    )


def test_atom_clause():
    m = two_chain()
    assert not satisfies(m, "w", parse_formula("p"))
    assert satisfies(m, "v", parse_formula("p"))


def test_excluded_middle_fails():
    # w does not force p, and w does not force ~p since v above forces p
    m = two_chain()
    assert not satisfies(m, "w", parse_formula("p | ~p"))


def test_bot_never_holds():
    m = two_chain()
    for w in m.worlds:
        assert not satisfies(m, w, parse_formula("false"))


def test_implication_clause_quantifies_up():
    m = two_chain()
    assert satisfies(m, "w", parse_formula("p -> p"))
    # p holds at v above w but q never does, so w does not force p -> q
    assert not satisfies(m, "w", parse_formula("p -> q"))
    assert satisfies(m, "v", parse_formula("q -> p"))


def test_model_invariants():
    with pytest.raises(ModelError, match="reflexive"):
        KripkeModel(frozenset({"w"}), frozenset())
    with pytest.raises(ModelError, match="monotone"):
        two_chain(p_at=("w",))
    with pytest.raises(ModelError, match="empty"):
        KripkeModel(frozenset(), frozenset())


def test_monotonicity_generalizes():
    # general monotonicity on every enumerated 2-world model and a corpus
    corpus = [parse_formula(t) for t in
              ["p", "~p", "p -> q", "p & (q | ~p)", "~~p -> ~~~p"]]
    for m in enumerate_models(2, ["p", "q"]):
        for f in corpus:
            for (w, v) in m.leq:
                if satisfies(m, w, f):
                    assert satisfies(m, v, f)


def test_signature_conversion_preserves_truth():
    from intcalc.formula import convert_signature

    corpus = [parse_formula(t) for t in
              ["~p", "false -> p", "~(p & ~p)", "p | ~p", "~p | q"]]
    for m in enumerate_models(2, ["p", "q", "p0"]):
        for f in corpus:
            for d in ("toBot", "toNeg"):
                g = convert_signature(f, d)
                for w in m.worlds:
                    assert satisfies(m, w, f) == satisfies(m, w, g)


def test_labelled_sequent_monotone_example():
    # exhaustive oracle over all models with <= 3 worlds and one atom
    s = parse_sequent("w<=v, w:p => v:p")
    for m in enumerate_models(3, ["p"]):
        assert labelled_sequent_holds(m, s)


def test_labelled_sequent_falsifiable():
    s = parse_sequent(" => w:p")
    m = KripkeModel(frozenset({"u"}), frozenset({("u", "u")}), {("p", ()): frozenset()})
    assert not labelled_sequent_holds(m, s)


def test_bot_antecedent_always_holds():
    s = parse_sequent("w:false => ")
    for m in enumerate_models(2, ["p"]):
        assert labelled_sequent_holds(m, s)


def test_nested_sequent_semantics():
    m = two_chain()
    assert nested_sequent_holds(m, parse_nested("p -> p"))
    assert not nested_sequent_holds(m, parse_nested(" -> p, [p -> ]"))
    assert nested_sequent_holds(m, parse_nested(" -> [ -> p -> p]"))


def test_nested_agrees_with_labelled_on_translation():
    from intcalc.graph import labelify

    sigmas = [parse_nested(t) for t in
              ["p -> q, [q -> p]", " -> [p -> ], [ -> q]", "p & q -> [ -> p]"]]
    for m in enumerate_models(2, ["p", "q"]):
        for s in sigmas:
            assert nested_sequent_holds(m, s) == labelled_sequent_holds(m, labelify(s))


def test_enumerate_one_world_one_atom():
    ms = list(enumerate_models(1, ["p"]))
    assert len(ms) == 2


def test_enumerate_two_worlds_no_atoms():
    # brute-force oracle: subsets of off-diagonal pairs, reflexive-transitive
    def preorders(n):
        worlds = list(range(n))
        off = [(i, j) for i in worlds for j in worlds if i != j]
        count = 0
        for bits in itertools.product([0, 1], repeat=len(off)):
            rel = {(i, i) for i in worlds} | {e for e, b in zip(off, bits) if b}
            if all((a, d) in rel for (a, b) in rel for (c, d) in rel if b == c):
                count += 1
        return count

    want = preorders(1) + preorders(2)
    ms = list(enumerate_models(2))
    assert len(ms) == want == 5


def test_enumerated_models_pass_invariants():
    for m in enumerate_models(2, ["p"], domain_size=1, arity={"p": 1}):
        KripkeModel(m.worlds, m.leq, m.valuation, m.domain)  # re-validate


def test_random_models_deterministic():
    a = list(enumerate_models(3, ["p"], mode="random", seed=7, count=20))
    b = list(enumerate_models(3, ["p"], mode="random", seed=7, count=20))
    assert a == b
    c = list(enumerate_models(3, ["p"], mode="random", seed=8, count=20))
    assert a != c


def test_budget_guard():
    assert count_models(3, ["p", "q", "r"], 2, {"p": 2, "q": 2, "r": 2}) > 10**7
    with pytest.raises(BudgetExceeded):
        next(enumerate_models(3, ["p", "q", "r"], 2,
                              arity={"p": 2, "q": 2, "r": 2}))


def test_model_file_roundtrip():
    m = KripkeModel(
        frozenset({"w", "v"}),
        frozenset({("w", "w"), ("v", "v"), ("w", "v")}),
        {("p", ()): frozenset({"v"}), ("q", ("d1",)): frozenset({"w", "v"})},
        ("d1", "d2"),
    )
    assert load_model(dump_model(m)) == m


def test_model_loader_closes_and_rejects():
    m = load_model("worlds: a b c\nleq: a <= b, b <= c\n")
    assert ("a", "c") in m.leq and ("a", "a") in m.leq
    with pytest.raises(ModelError, match="monotone"):
        load_model("worlds: a b\nleq: a <= b\nval: p @ a\n")


def test_unassigned_parameter_error():
    m = KripkeModel(
        frozenset({"w"}), frozenset({("w", "w")}),
        {("r", ("d",)): frozenset({"w"})}, ("d",),
    )
    with pytest.raises(ModelError, match="unassigned parameter"):
        satisfies(m, "w", parse_formula("r(#a)"))
    assert satisfies(m, "w", parse_formula("r(#a)"), {Param("a"): "d"})


def test_quantifiers_over_constant_domain():
    m = KripkeModel(
        frozenset({"w"}), frozenset({("w", "w")}),
        {("r", ("d1",)): frozenset({"w"}), ("r", ("d2",)): frozenset()},
        ("d1", "d2"),
    )
    assert satisfies(m, "w", parse_formula("exists x. r(x)"))
    assert not satisfies(m, "w", parse_formula("forall x. r(x)"))

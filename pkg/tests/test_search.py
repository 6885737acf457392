import pytest

from intcalc.formula import convert_signature, parse_formula
from intcalc.kripke import satisfies
from intcalc.labelled import (
    Label,
    LabelledSequent,
    SequentError,
    check_derivation,
    parse_sequent,
)
from intcalc.nested import NestedSequent, check_nested_derivation, parse_nested
from intcalc.search import (
    SearchConfig,
    decide_prop,
    find_countermodel,
    prove,
)


def labelled_goal(text, calc="g3int"):
    f = parse_formula(text)
    if calc in ("g3int", "g3intqc"):
        f = convert_signature(f, "toBot")
    return LabelledSequent(succ=((Label("w"), f),))


def test_prove_nint_star_axiom():
    d = prove(parse_nested(" -> p -> q -> p"), SearchConfig("nint-star", 10))
    assert d is not None
    assert check_nested_derivation("nint-star", d)[0]


def test_peirce_not_provable():
    goal = labelled_goal("((p -> q) -> p) -> p")
    assert prove(goal, SearchConfig("g3int", 12)) is None
    cm = find_countermodel(parse_formula("((p -> q) -> p) -> p"), 3)
    assert cm is not None
    assert not satisfies(cm.model, cm.world, parse_formula("((p -> q) -> p) -> p"))


def test_prove_bottom_axiom_after_conversion():
    f = convert_signature(parse_formula("false -> p"), "toNeg")
    d = prove(NestedSequent(succ=(f,)), SearchConfig("nint-star", 10))
    assert d is not None and check_nested_derivation("nint-star", d)[0]


def test_prove_in_original_nested_calculus():
    d = prove(parse_nested(" -> p & q -> q & p"), SearchConfig("nint", 10))
    assert d is not None
    assert check_nested_derivation("nint", d)[0]


def test_prove_fo_in_nested_star():
    d = prove(
        parse_nested(" -> (forall x. r(x)) -> forall y. r(y)"),
        SearchConfig("nintqc-star", 10, parameter_budget=2),
    )
    assert d is not None and check_nested_derivation("nintqc-star", d)[0]


def test_search_determinism():
    goal = labelled_goal("(p -> q) | (q -> q)")
    cfg = SearchConfig("g3int", 10)
    a = prove(goal, cfg)
    b = prove(goal, cfg)
    assert a == b


def test_depth_bound_respected():
    # provable, but not at depth 1
    goal = labelled_goal("p -> (q -> p & q)")
    assert prove(goal, SearchConfig("g3int", 1)) is None
    assert prove(goal, SearchConfig("g3int", 12)) is not None


def test_prove_checker_agreement_on_corpus():
    corpus = [
        "p -> p", "p -> (q -> p)", "(p & q) -> (q & p)",
        "~(p & ~p)", "((p | q) -> r) -> (p -> r)",
        "(p -> q) -> (~q -> ~p)", "~~(p | ~p)",
    ]
    for text in corpus:
        d = prove(labelled_goal(text), SearchConfig("g3int", 12))
        assert d is not None, text
        ok, _, msg = check_derivation("g3int", d)
        assert ok, f"{text}: {msg}"
        nd = prove(NestedSequent(succ=(parse_formula(text),)),
                   SearchConfig("nint-star", 12))
        assert nd is not None, text
        assert check_nested_derivation("nint-star", nd)[0], text


def test_decide_prop_excluded_middle():
    dec = decide_prop(parse_formula("p | ~p"), 2, SearchConfig("nint-star", 12))
    assert dec.verdict == "countermodel"
    assert len(dec.countermodel.model.worlds) == 2


def test_decide_prop_double_negated_em():
    dec = decide_prop(parse_formula("~~(p | ~p)"), 4, SearchConfig("nint-star", 12))
    assert dec.verdict == "theorem"
    # double-checked against every model with up to 4 worlds
    from intcalc.kripke import enumerate_models

    f = parse_formula("~~(p | ~p)")
    for m in enumerate_models(4, ["p"]):
        for w in m.worlds:
            assert satisfies(m, w, f)


def test_decide_prop_atom():
    dec = decide_prop(parse_formula("p"), 2, SearchConfig("nint-star", 8))
    assert dec.verdict == "countermodel"
    assert len(dec.countermodel.model.worlds) == 1
    assert not dec.countermodel.model.valuation.get(("p", ()), frozenset())


def test_decide_prop_never_both():
    cfg = SearchConfig("nint-star", 10)
    for text in ["p -> p", "p | ~p", "~p | ~~p", "p -> q", "~~p -> p"]:
        dec = decide_prop(parse_formula(text), 4, cfg)
        assert (dec.proof is None) or (dec.countermodel is None)
        assert dec.verdict in ("theorem", "countermodel", "undecided")


def test_find_countermodel_weak_em():
    cm = find_countermodel(parse_formula("~p | ~~p"), 4)
    assert cm is not None
    f = parse_formula("~p | ~~p")
    assert not satisfies(cm.model, cm.world, f)


def test_find_countermodel_none_for_theorem():
    assert find_countermodel(parse_formula("p -> p"), 3) is None


def test_find_countermodel_first_order():
    f = parse_formula("(forall x. r(x)) -> r(#a)")
    assert find_countermodel(f, 2, domain_size=2) is None
    g = parse_formula("r(#a) -> forall x. r(x)")
    cm = find_countermodel(g, 2, domain_size=2)
    assert cm is not None
    assert not satisfies(cm.model, cm.world, g, cm.env)


def test_config_validation():
    with pytest.raises(SequentError):
        SearchConfig("g3int", 0)
    with pytest.raises(SequentError):
        prove(parse_sequent(" => w: p"), SearchConfig("nosuch", 5))

import pytest

from intcalc.formula import Atom, Impl, Param, parse_formula
from intcalc.labelled import (
    CALCULI,
    DomAtom,
    Label,
    LabelledDerivation,
    LabelledSequent,
    RelAtom,
    Rule,
    SequentError,
    Witness,
    apply_backward,
    check_derivation,
    check_inference,
    parse_sequent,
    path_exists,
    show_sequent,
    substitute_sequent,
)

w, v, u, z = Label("w"), Label("v"), Label("u"), Label("z")
p, q = Atom("p"), Atom("q")


def test_sequent_text_roundtrip():
    texts = [
        "w<=v, a in D(w), w: p(#a) => v: p(#a)",
        " => w: p -> p",
        "w: false => ",
        "w<=v, v<=u, w: p & q, w: p & q => v: p, u: q",
    ]
    for t in texts:
        s = parse_sequent(t)
        assert parse_sequent(show_sequent(s)) == s


def test_multiset_identification():
    a = parse_sequent("w: p, w<=u, u: q => ")
    b = parse_sequent("w<=u, u: q, w: p => ")
    assert a == b
    # but multiplicities matter
    c = parse_sequent("w: p, w: p => ")
    assert c != parse_sequent("w: p => ")


def test_empty_sides_allowed():
    s = parse_sequent(" => ")
    assert not s.ante and not s.succ


# -- single inferences per the rule schemas ---------------------------------

def test_imp_r_checks():
    concl = parse_sequent(" => w: p -> q")
    prem = parse_sequent("w<=v, v: p => v: q")
    wit = Witness(principal=(w, Impl(p, q)), label=v)
    ok, msg = check_inference("g3int", Rule.IMP_R, concl, [prem], wit)
    assert ok, msg


def test_imp_r_eigenvariable_violation():
    concl = parse_sequent("v: q => w: p -> q")
    prem = parse_sequent("w<=v, v: p, v: q => v: q")
    wit = Witness(principal=(w, Impl(p, q)), label=v)
    ok, msg = check_inference("g3int", Rule.IMP_R, concl, [prem], wit)
    assert not ok and "eigenvariable" in msg and "occurs in conclusion" in msg


def test_id_q_star_needs_path():
    concl = parse_sequent("a in D(v), w: p(#a) => w: p(#a)")
    wit = Witness(principal=(w, Atom("p", (Param("a"),))),
                  formula=(w, Atom("p", (Param("a"),))))
    ok, msg = check_inference("intqcl", Rule.ID_Q_STAR, concl, [], wit)
    assert not ok and "path" in msg
    concl2 = parse_sequent("v<=w, a in D(v), w: p(#a) => w: p(#a)")
    ok2, msg2 = check_inference("intqcl", Rule.ID_Q_STAR, concl2, [], wit)
    assert ok2, msg2


def test_imp_l_keeps_principal():
    concl = parse_sequent("w<=v, w: p -> q => ")
    outs = apply_backward("g3int", Rule.IMP_L, concl)
    assert len(outs) == 1
    (prems, wit) = outs[0]
    assert prems[0] == parse_sequent("w<=v, w: p -> q => v: p")
    assert prems[1] == parse_sequent("w<=v, w: p -> q, v: q => ")


def test_rule_not_in_calculus():
    concl = parse_sequent("w: p => w: p")
    wit = Witness(principal=(w, p), formula=(w, p))
    ok, msg = check_inference("g3int", Rule.ID_STAR, concl, [], wit)
    assert not ok and "not in calculus" in msg


def test_check_derivation_section4_proof():
    leaf = LabelledDerivation(
        parse_sequent("w<=v, v<=v, v: p => v: p"),
        Rule.ID, (),
        Witness(principal=(v, p), formula=(v, p), rel=RelAtom(v, v)),
    )
    refn = LabelledDerivation(
        parse_sequent("w<=v, v: p => v: p"), Rule.REF, (leaf,), Witness(label=v)
    )
    root = LabelledDerivation(
        parse_sequent(" => w: p -> p"), Rule.IMP_R, (refn,),
        Witness(principal=(w, parse_formula("p -> p")), label=v),
    )
    ok, where, msg = check_derivation("g3int", root)
    assert ok, msg
    # the calculus without ref rejects the same tree
    ok2, where2, msg2 = check_derivation("g3int-tree", root)
    assert not ok2 and "ref" in msg2


def test_bot_leaf():
    d = LabelledDerivation(
        parse_sequent("w: false => "), Rule.BOT_L, (),
        Witness(principal=(w, parse_formula("false"))),
    )
    assert check_derivation("g3int", d)[0]


def test_check_derivation_reports_failing_node():
    bad_leaf = LabelledDerivation(
        parse_sequent("w: p => v: p"), Rule.ID, (),
        Witness(principal=(w, p), formula=(v, p), rel=RelAtom(w, v)),
    )
    ok, where, msg = check_derivation("g3int", bad_leaf)
    assert not ok and where == ()


# -- backward application ----------------------------------------------------

def test_apply_backward_imp_r():
    goal = parse_sequent(" => w: p -> q")
    outs = apply_backward("g3int", Rule.IMP_R, goal)
    assert len(outs) == 1
    prems, wit = outs[0]
    fresh = wit.label
    assert prems[0] == parse_sequent(f"w<={fresh.name}, {fresh.name}: p => {fresh.name}: q")


def test_apply_backward_inapplicable():
    goal = parse_sequent(" => w: p")
    assert apply_backward("g3int", Rule.AND_L, goal) == []


def test_apply_backward_coherence():
    goals = [
        parse_sequent("w<=v, w: p -> q, w: p & q, v: p | q => v: p, w: q & p"),
        parse_sequent("w<=v, a in D(v), w: forall x. r(x) => v: exists y. r(y)"),
        parse_sequent("w<=v, v<=u, a in D(w), w: p(#a) => u: p(#a)"),
    ]
    for goal in goals:
        for rule in CALCULI["g3intqc"] | CALCULI["intqcl"]:
            for prems, wit in apply_backward("intqcl", rule, goal):
                ok, msg = check_inference("intqcl", rule, goal, prems, wit)
                assert ok, f"{rule.value}: {msg}"


# -- path_exists --------------------------------------------------------------

def test_path_exists_undirected():
    rel = [RelAtom(w, v)]
    assert path_exists(rel, v, w)
    assert path_exists([], w, w)
    assert not path_exists([RelAtom(w, v), RelAtom(u, z)], w, z)


def test_path_exists_chain():
    rel = [RelAtom(w, v), RelAtom(u, v), RelAtom(u, z)]
    assert path_exists(rel, w, z)  # w ~ v ~ u ~ z


# -- substitution -------------------------------------------------------------

def test_substitute_label():
    s = parse_sequent("w<=v, v: p => v: q")
    got = substitute_sequent(s, "label", w, v)
    assert got == parse_sequent("w<=w, w: p => w: q")


def test_substitute_param():
    s = parse_sequent("a in D(w) => w: p(#b)")
    got = substitute_sequent(s, "param", Param("a"), Param("b"))
    assert got == parse_sequent("a in D(w) => w: p(#a)")


def test_substitute_absent_identity():
    s = parse_sequent("w: p => ")
    assert substitute_sequent(s, "label", w, v) == s


# -- admissible-rule tags (checker-only) --------------------------------------

def test_cut_checks():
    concl = parse_sequent("w: p => w: q")
    left = parse_sequent("w: p => w: q, w: p -> q")
    right = parse_sequent("w: p, w: p -> q => w: q")
    wit = Witness(formula=(w, Impl(p, q)))
    ok, msg = check_inference("g3int", Rule.CUT, concl, [left, right], wit)
    assert ok, msg


def test_wk_and_ctr_check():
    concl = parse_sequent("w<=v, w: p => v: p, u: q")
    prem = parse_sequent("w<=v, w: p => v: p")
    ok, msg = check_inference("g3int", Rule.WK, concl, [prem], Witness())
    assert ok, msg
    concl2 = parse_sequent("w: p => ")
    prem2 = parse_sequent("w: p, w: p => ")
    ok2, msg2 = check_inference("g3int", Rule.CTR_FL, concl2, [prem2], Witness())
    assert ok2, msg2
    # contracted material must remain in the conclusion
    bad_prem = parse_sequent("w: p, w: q => ")
    ok3, _ = check_inference("g3int", Rule.CTR_FL, concl2, [bad_prem], Witness())
    assert not ok3


def test_lsub_checks():
    prem = parse_sequent("w<=v, v: p => v: q")
    concl = parse_sequent("w<=w, w: p => w: q")
    wit = Witness(label=w, label2=v)
    ok, msg = check_inference("g3int", Rule.LSUB, concl, [prem], wit)
    assert ok, msg

import pytest

from intcalc.formula import Atom, Impl, Param, Var, parse_formula
from intcalc.labelled import (
    DomAtom,
    Label,
    LabelledDerivation,
    LabelledSequent,
    RelAtom,
    Rule,
    Witness,
    check_derivation,
    parse_sequent,
)
from intcalc.search import SearchConfig, prove
from intcalc.transform import (
    contract_derivation,
    eliminate_nd_cd,
    eliminate_ref,
    eliminate_structural,
    eliminate_tra,
    expand_derived_rules,
    invert_derivation,
    proof_to_nested,
    substitute_derivation,
    weaken_derivation,
)

w, v, u = Label("w"), Label("v"), Label("u")
p, q = Atom("p"), Atom("q")


def prove_g3(text, depth=12, calc="g3int"):
    goal = LabelledSequent(succ=((Label("w"), parse_formula(text)),))
    d = prove(goal, SearchConfig(calc, depth, parameter_budget=2))
    assert d is not None, f"could not prove {text}"
    ok, _, msg = check_derivation(calc, d)
    assert ok, msg
    return d


def section4_proof():
    leaf = LabelledDerivation(
        parse_sequent("w<=v, v<=v, v: p => v: p"),
        Rule.ID, (),
        Witness(principal=(v, p), formula=(v, p), rel=RelAtom(v, v)),
    )
    refn = LabelledDerivation(
        parse_sequent("w<=v, v: p => v: p"), Rule.REF, (leaf,), Witness(label=v)
    )
    return LabelledDerivation(
        parse_sequent(" => w: p -> p"), Rule.IMP_R, (refn,),
        Witness(principal=(w, parse_formula("p -> p")), label=v),
    )


# -- weakening ----------------------------------------------------------------

def test_weaken_preserves_height_and_checks():
    d = section4_proof()
    d2 = weaken_derivation(d, "g3int", succ=[(u, q)])
    assert d2.height() == d.height()
    assert d2.conclusion == parse_sequent(" => w: p -> p, u: q")
    assert check_derivation("g3int", d2)[0]


def test_weaken_by_nothing_is_identity():
    d = section4_proof()
    assert weaken_derivation(d, "g3int") is d


def test_weaken_renames_clashing_eigenvariable():
    d = section4_proof()  # eigenvariable v inside
    d2 = weaken_derivation(d, "g3int", ante=[(v, q)])
    assert d2.height() == d.height()
    assert check_derivation("g3int", d2)[0]
    # the old eigenvariable occurs in the added formula only
    root_wit = d2.witness
    assert root_wit.label != v


# -- substitution -------------------------------------------------------------

def test_substitute_label_no_occurrence():
    d = section4_proof()
    d2 = substitute_derivation(d, "label", w, Label("zz"), "g3int")
    assert d2.conclusion == d.conclusion
    assert d2.height() == d.height()


def test_substitute_through_eigenvariable():
    d = section4_proof()
    # [w/v] forces renaming of the inner eigenvariable v
    d2 = substitute_derivation(d, "label", w, v, "g3int")
    assert d2.height() == d.height()
    assert d2.conclusion == d.conclusion  # v did not occur in the end sequent
    assert check_derivation("g3int", d2)[0]


def test_substitute_param_through_exists():
    d = prove_g3("(exists x. r(x)) -> exists y. r(y)", calc="g3intqc")
    a, b = Param("a"), Param("b")
    d2 = substitute_derivation(d, "param", a, b, "g3intqc")
    assert d2.height() == d.height()
    assert check_derivation("g3intqc", d2)[0]


# -- inversion ----------------------------------------------------------------

def test_invert_imp_r():
    d = prove_g3("p -> p")
    wit = Witness(principal=(w, parse_formula("p -> p")), label=Label("x0"))
    d2 = invert_derivation(d, Rule.IMP_R, wit, "g3int")
    assert d2.conclusion == parse_sequent("w<=x0, x0: p => x0: p")
    assert check_derivation("g3int", d2)[0]
    assert d2.height() <= d.height()


def test_invert_or_r():
    d = prove_g3("(p -> q) | (q -> q)")
    f = parse_formula("(p -> q) | (q -> q)")
    d2 = invert_derivation(d, Rule.OR_R, Witness(principal=(w, f)), "g3int")
    assert d2.conclusion == parse_sequent(" => w: p -> q, w: q -> q")
    assert check_derivation("g3int", d2)[0]
    assert d2.height() <= d.height()


def test_invert_weakening_class():
    d = prove_g3("p -> p")
    wit = Witness(label=u)
    d2 = invert_derivation(d, Rule.REF, wit, "g3int")
    assert d2.conclusion == parse_sequent("u<=u => w: p -> p")
    assert d2.height() == d.height()


def test_invert_and_l_never_principal():
    # the conjunction is pure context: pointwise rewrite, height preserved
    d = prove_g3("p -> p")
    d1 = weaken_derivation(d, "g3int", ante=[(u, parse_formula("p & q"))])
    wit = Witness(principal=(u, parse_formula("p & q")))
    d2 = invert_derivation(d1, Rule.AND_L, wit, "g3int", 0)
    assert d2.conclusion == parse_sequent("u: p, u: q => w: p -> p")
    assert d2.height() == d1.height()
    assert check_derivation("g3int", d2)[0]


def test_invert_and_l_under_lift_grows():
    # conclusion: w<=v, w: p & q => v: p  proved with lift and and_l
    seq = parse_sequent("w<=v, w: p & q => v: p")
    d = prove(seq, SearchConfig("g3int-ext", 8))
    assert d is not None and check_derivation("g3int-ext", d)[0]
    wit = Witness(principal=(w, parse_formula("p & q")))
    d2 = invert_derivation(d, Rule.AND_L, wit, "g3int-ext", 0)
    assert d2.conclusion == parse_sequent("w<=v, w: p, w: q => v: p")
    assert check_derivation("g3int-ext", d2)[0]


# -- contraction --------------------------------------------------------------

def test_contract_rel_atom():
    d = section4_proof()
    d1 = weaken_derivation(d, "g3int", rel=[RelAtom(u, u), RelAtom(u, u)])
    d2 = contract_derivation(d1, Rule.CTR_R, RelAtom(u, u), "g3int")
    assert d2.conclusion == parse_sequent("u<=u => w: p -> p")
    assert d2.height() == d1.height()
    assert check_derivation("g3int", d2)[0]


def test_contract_context_formula_on_leaf():
    leaf = LabelledDerivation(
        parse_sequent("w<=v, w: p, w: p => v: p"), Rule.ID, (),
        Witness(principal=(w, p), formula=(v, p), rel=RelAtom(w, v)),
    )
    d2 = contract_derivation(leaf, Rule.CTR_FL, (w, p), "g3int")
    assert d2.conclusion == parse_sequent("w<=v, w: p => v: p")
    assert d2.rule is Rule.ID


def test_contract_principal_twice():
    # contract a formula that is principal of imp_r: uses inversion
    d = prove_g3("p -> p")
    f = parse_formula("p -> p")
    d1 = weaken_derivation(d, "g3int", succ=[(w, f)])
    assert d1.conclusion.succ.count((w, f)) == 2
    d2 = contract_derivation(d1, Rule.CTR_FR, (w, f), "g3int")
    assert d2.conclusion == parse_sequent(" => w: p -> p")
    assert check_derivation("g3int", d2)[0]


def test_contract_ante_principal():
    seq = parse_sequent("w: p & q, w: p & q => w: p")
    d = prove(seq, SearchConfig("g3int", 8))
    assert d is not None
    d2 = contract_derivation(d, Rule.CTR_FL, (w, parse_formula("p & q")), "g3int")
    assert d2.conclusion == parse_sequent("w: p & q => w: p")
    assert check_derivation("g3int", d2)[0]


# -- eliminations -------------------------------------------------------------

def test_eliminate_ref_section4():
    d = section4_proof()
    d2 = eliminate_ref(d, "g3int-ext")
    assert all(n.rule is not Rule.REF for n in d2.nodes())
    assert d2.conclusion == d.conclusion
    assert check_derivation("g3int-ext", d2)[0]
    assert any(n.rule is Rule.ID_STAR for n in d2.nodes())


def test_eliminate_ref_no_op():
    d = prove_g3("false -> p")  # no ref needed
    d1 = eliminate_ref(d, "g3int-ext")
    refs = [n for n in d.nodes() if n.rule is Rule.REF]
    if not refs:
        assert d1 is d or d1.conclusion == d.conclusion


def test_eliminate_tra_above_id():
    # tra with the composite atom principal in id: id* plus two lifts
    leaf = LabelledDerivation(
        parse_sequent("w<=v, v<=u, w<=u, w: p => u: p"),
        Rule.ID, (),
        Witness(principal=(w, p), formula=(u, p), rel=RelAtom(w, u)),
    )
    tra = LabelledDerivation(
        parse_sequent("w<=v, v<=u, w: p => u: p"), Rule.TRA, (leaf,),
        Witness(rel=RelAtom(w, v), rel2=RelAtom(v, u)),
    )
    d2 = eliminate_tra(tra, "g3int-ext")
    assert all(n.rule is not Rule.TRA for n in d2.nodes())
    assert d2.conclusion == tra.conclusion
    assert check_derivation("g3int-ext", d2)[0]
    rules = [n.rule for n in d2.nodes()]
    assert rules.count(Rule.LIFT) == 2 and Rule.ID_STAR in rules


def test_eliminate_nd_under_id_q():
    # nd below an id_q whose required domain atom is the moved one
    leaf = LabelledDerivation(
        parse_sequent("u<=w, w<=v, a in D(u), a in D(w), w: p(#a) => v: p(#a)"),
        Rule.ID_Q, (),
        Witness(principal=(w, Atom("p", (Param("a"),))),
                formula=(v, Atom("p", (Param("a"),))), rel=RelAtom(w, v)),
    )
    nd = LabelledDerivation(
        parse_sequent("u<=w, w<=v, a in D(u), w: p(#a) => v: p(#a)"),
        Rule.ND, (leaf,),
        Witness(rel=RelAtom(u, w), dom=DomAtom(Param("a"), u)),
    )
    assert check_derivation("g3intqc", nd)[0]
    d2 = eliminate_nd_cd(nd, "intqcl")
    assert all(n.rule not in (Rule.ND, Rule.CD) for n in d2.nodes())
    assert d2.conclusion == nd.conclusion
    assert check_derivation("intqcl", d2)[0]
    rules = [n.rule for n in d2.nodes()]
    assert Rule.ID_Q_STAR in rules and Rule.LIFT in rules


def test_eliminate_nd_cd_no_op():
    d = section4_proof()
    d1 = eliminate_ref(d, "intqcl")
    assert eliminate_nd_cd(d1, "intqcl").conclusion == d.conclusion


# -- derived-rule expansion ---------------------------------------------------

def test_expand_bot_l():
    d = prove_g3("false -> q")
    d1 = eliminate_ref(d, "g3int-ext") if any(
        n.rule is Rule.REF for n in d.nodes()) else d
    out = expand_derived_rules(d1, "g3int-tree")
    assert check_derivation("g3int-tree", out)[0]
    rules = {n.rule for n in out.nodes()}
    assert Rule.BOT_L not in rules and Rule.ID not in rules
    assert Rule.NEG_L in rules and Rule.AND_L in rules  # the bottom encoding
    assert out.conclusion.succ[0][1] == parse_formula("(p0 & ~p0) -> q")


def test_expand_requires_structural_free():
    d = section4_proof()
    with pytest.raises(Exception, match="structural"):
        expand_derived_rules(d, "g3int-tree")


def test_expand_imp_l():
    seq = parse_sequent("w<=v, w: p -> q, v: p => v: q")
    d = prove(seq, SearchConfig("g3int", 6))
    assert d is not None
    d1 = eliminate_ref(d, "g3int-ext")
    out = expand_derived_rules(d1, "g3int-tree")
    assert check_derivation("g3int-tree", out)[0]
    assert all(n.rule is not Rule.IMP_L for n in out.nodes())
    assert any(n.rule is Rule.IMP_L_STAR for n in out.nodes())


# -- the full pipeline --------------------------------------------------------

def test_pipeline_section4():
    out, report = eliminate_structural(section4_proof(), "g3int")
    assert report.rules_eliminated.get(Rule.REF) == 1
    assert check_derivation("g3int-tree", out)[0]
    from intcalc.graph import is_treelike
    for n in out.nodes():
        assert is_treelike(n.conclusion)[0]


def test_pipeline_preserves_end_sequent():
    d = prove_g3("p & q -> q & p")
    out, report = eliminate_structural(d, "g3int")
    assert out.conclusion == d.conclusion  # no bottom in this formula
    assert report.height_before == d.height()
    assert report.height_after == out.height()


def test_pipeline_to_nested():
    d = prove_g3("p -> (q -> p)")
    out, _ = eliminate_structural(d, "g3int")
    nd = proof_to_nested(out)
    from intcalc.nested import check_nested_derivation, parse_nested
    ok, _, msg = check_nested_derivation("nint-star", nd)
    assert ok, msg
    assert nd.conclusion == parse_nested(" -> p -> q -> p")


def test_pipeline_non_theorem_shape_warns():
    seq = parse_sequent("w: p & q => w: p")
    d = prove(seq, SearchConfig("g3int", 6))
    out, report = eliminate_structural(d, "g3int")
    assert report.warnings  # treelike not guaranteed
    assert check_derivation("g3int-tree", out)[0]


def test_pipeline_semantic_preservation():
    from intcalc.kripke import enumerate_models, labelled_sequent_holds

    d = prove_g3("p -> (q -> p & q)")
    out, _ = eliminate_structural(d, "g3int")
    models = enumerate_models(3, ["p", "q"], mode="random", seed=11, count=200)
    for m in models:
        assert labelled_sequent_holds(m, d.conclusion) == labelled_sequent_holds(
            m, out.conclusion
        )


def test_transform_rejects_checker_only_tags():
    d = section4_proof()
    cut = LabelledDerivation(
        parse_sequent(" => w: p -> p"), Rule.CUT,
        (weaken_derivation(d, "g3int", succ=[(w, q)]),
         weaken_derivation(d, "g3int", ante=[(w, q)])),
        Witness(formula=(w, q)),
    )
    with pytest.raises(Exception, match="checker-only"):
        eliminate_structural(cut, "g3int")

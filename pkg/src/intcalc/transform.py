"""Proof transformations: admissible structural rules as executable
functions, and the elimination pipeline that turns G3Int/G3IntQC
derivations into derivations over the treelike rule sets, ready for the
nested translation.

Every rewrite this module performs is re-checked node by node as it is
built; a failed check is an internal invariant breach, not a user error.

The elimination strategy always rewrites the topmost offending inference
(ref, tra, nd, cd), so each step works on a subproof free of that rule,
and the (rule count, height) measure strictly decreases.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace as dc_replace

from .formula import (
    And,
    Atom,
    Bot,
    Exists,
    Forall,
    Formula,
    Impl,
    Neg,
    Or,
    Param,
    convert_signature,
    rename_param,
    show_formula,
    substitute_param,
)
from .graph import is_treelike, nestify_with_paths, tree_root
from .labelled import (
    ADMISSIBLE_TAGS,
    DERIVED,
    DomAtom,
    Label,
    LabelledDerivation,
    LabelledFormula,
    LabelledSequent,
    RelAtom,
    Rule,
    STRUCTURAL,
    SequentError,
    Witness,
    check_derivation,
    check_inference,
    fresh_labels,
    fresh_params,
    premises_for,
    substitute_sequent,
)
from .nested import (
    NRule,
    NWitness,
    NestedDerivation,
    check_nested_derivation,
)


class TransformError(RuntimeError):
    """Internal invariant breach while rewriting a derivation."""


@dataclass
class TransformReport:
    calculus_in: str
    calculus_out: str
    height_before: int = 0
    height_after: int = 0
    rules_eliminated: dict = field(default_factory=dict)
    steps: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def text(self) -> str:
        lines = [
            f"calculus: {self.calculus_in} -> {self.calculus_out}",
            f"height: {self.height_before} -> {self.height_after}",
        ]
        if self.rules_eliminated:
            pretty = ", ".join(
                f"{r.value} x{n}" for r, n in sorted(
                    self.rules_eliminated.items(), key=lambda kv: kv[0].value
                )
            )
            lines.append(f"eliminated: {pretty}")
        for w in self.warnings:
            lines.append(f"warning: {w}")
        lines.extend(f"step: {s}" for s in self.steps)
        return "\n".join(lines) + "\n"


def _mk(
    calc: str,
    rule: Rule,
    conclusion: LabelledSequent,
    premises: tuple[LabelledDerivation, ...],
    witness: Witness,
) -> LabelledDerivation:
    ok, msg = check_inference(
        calc, rule, conclusion, [p.conclusion for p in premises], witness
    )
    if not ok:
        raise TransformError(f"rewrite produced a bad {rule.value} inference: {msg}")
    return LabelledDerivation(conclusion, rule, premises, witness)


def _no_tags(d: LabelledDerivation) -> None:
    for n in d.nodes():
        if n.rule in ADMISSIBLE_TAGS:
            raise TransformError(
                f"derivation contains checker-only rule {n.rule.value}; "
                "transformations require real inferences"
            )


_EIGEN_LABEL_RULES = (Rule.IMP_R, Rule.NEG_R, Rule.FORALL_R)
_EIGEN_PARAM_RULES = (Rule.FORALL_R, Rule.EXISTS_L, Rule.FORALL_R_STAR)


def _witness_sub_label(w: Witness, new: Label, old: Label) -> Witness:
    def ml(l):
        return new if l == old else l

    def mr(r):
        return None if r is None else RelAtom(ml(r.w), ml(r.v))

    def md(d):
        return None if d is None else DomAtom(d.a, ml(d.w))

    def mf(lf):
        return None if lf is None else (ml(lf[0]), lf[1])

    return Witness(
        principal=mf(w.principal), rel=mr(w.rel), rel2=mr(w.rel2), dom=md(w.dom),
        label=None if w.label is None else ml(w.label),
        label2=None if w.label2 is None else ml(w.label2),
        param=w.param, param2=w.param2, formula=mf(w.formula),
    )


def _witness_sub_param(w: Witness, new: Param, old: Param) -> Witness:
    def mp(p):
        return new if p == old else p

    def md(d):
        return None if d is None else DomAtom(mp(d.a), d.w)

    def mf(lf):
        return None if lf is None else (lf[0], rename_param(lf[1], new, old))

    return Witness(
        principal=mf(w.principal), rel=w.rel, rel2=w.rel2, dom=md(w.dom),
        label=w.label, label2=w.label2,
        param=None if w.param is None else mp(w.param),
        param2=None if w.param2 is None else mp(w.param2),
        formula=mf(w.formula),
    )


def substitute_derivation(
    d: LabelledDerivation, kind: str, new, old, calc: str
) -> LabelledDerivation:
    """[new/old] through a derivation, height preserving.

    Eigenvariables clashing with either name are renamed first (the
    double-induction recipe), so side conditions survive.
    """
    _no_tags(d)
    used = d.all_labels() | d.all_params() | {getattr(new, "name"), getattr(old, "name")}

    def go(n: LabelledDerivation) -> LabelledDerivation:
        w = n.witness
        if kind == "label" and n.rule in _EIGEN_LABEL_RULES and w.label in (new, old):
            fresh = fresh_labels(used)[0]
            n = _rename_eigen_label(n, fresh, calc)
            w = n.witness
        if kind == "param" and n.rule in _EIGEN_PARAM_RULES and w.param in (new, old):
            fresh = fresh_params(used)[0]
            n = _rename_eigen_param(n, fresh, calc)
            w = n.witness
        prem = tuple(go(p) for p in n.premises)
        concl = substitute_sequent(n.conclusion, kind, new, old)
        nw = (
            _witness_sub_label(w, new, old)
            if kind == "label"
            else _witness_sub_param(w, new, old)
        )
        return _mk(calc, n.rule, concl, prem, nw)

    out = go(d)
    if out.height() != d.height():
        raise TransformError("substitution changed the derivation height")
    return out


def _rename_eigen_label(n: LabelledDerivation, fresh: Label, calc: str) -> LabelledDerivation:
    old = n.witness.label
    prem = tuple(
        substitute_derivation(p, "label", fresh, old, calc) for p in n.premises
    )
    return _mk(
        calc, n.rule, n.conclusion, prem, dc_replace(n.witness, label=fresh)
    )


def _rename_eigen_param(n: LabelledDerivation, fresh: Param, calc: str) -> LabelledDerivation:
    old = n.witness.param
    prem = tuple(
        substitute_derivation(p, "param", fresh, old, calc) for p in n.premises
    )
    return _mk(
        calc, n.rule, n.conclusion, prem, dc_replace(n.witness, param=fresh)
    )


def weaken_derivation(
    d: LabelledDerivation,
    calc: str,
    rel=(),
    dom=(),
    ante=(),
    succ=(),
) -> LabelledDerivation:
    """Adds the given material to every sequent; height preserving.

    Eigenvariables clashing with the added material are renamed first.
    """
    _no_tags(d)
    rel, dom, ante, succ = tuple(rel), tuple(dom), tuple(ante), tuple(succ)
    if not (rel or dom or ante or succ):
        return d
    extra = LabelledSequent(rel, dom, ante, succ)
    clash_labels = {l for l in extra.labels()}
    clash_params = {p for p in extra.params()}
    used = d.all_labels() | d.all_params()
    used |= {l.name for l in clash_labels} | {p.name for p in clash_params}

    def go(n: LabelledDerivation) -> LabelledDerivation:
        w = n.witness
        if n.rule in _EIGEN_LABEL_RULES and w.label in clash_labels:
            n = _rename_eigen_label(n, fresh_labels(used)[0], calc)
            w = n.witness
        if n.rule in _EIGEN_PARAM_RULES and w.param in clash_params:
            n = _rename_eigen_param(n, fresh_params(used)[0], calc)
            w = n.witness
        prem = tuple(go(p) for p in n.premises)
        return _mk(calc, n.rule, n.conclusion.add(rel, dom, ante, succ), prem, w)

    out = go(d)
    if out.height() != d.height():
        raise TransformError("weakening changed the derivation height")
    return out


# ---------------------------------------------------------------------------
# inversion

_SUCC_INVERTIBLE = {
    Rule.AND_R, Rule.OR_R, Rule.IMP_R, Rule.NEG_R, Rule.FORALL_R,
    Rule.FORALL_R_STAR,
}
_ANTE_INVERTIBLE = {Rule.AND_L, Rule.OR_L, Rule.EXISTS_L}
_WEAKENING_INVERTIBLE = {
    Rule.IMP_L, Rule.IMP_L_STAR, Rule.NEG_L, Rule.FORALL_L, Rule.FORALL_L_STAR,
    Rule.EXISTS_R, Rule.EXISTS_R_STAR, Rule.REF, Rule.TRA, Rule.ND, Rule.CD,
    Rule.LIFT,
}


@dataclass(frozen=True)
class _Plan:
    """Replacement material for one inverted occurrence."""

    rel: tuple[RelAtom, ...] = ()
    dom: tuple[DomAtom, ...] = ()
    ante: tuple[LabelledFormula, ...] = ()
    succ: tuple[LabelledFormula, ...] = ()
    label: Label | None = None  # the fresh eigenlabel used, if any
    param: Param | None = None  # the fresh eigenparameter used, if any


def _make_plan(
    rule: Rule,
    occ: LabelledFormula,
    idx: int,
    used: set[str],
    label: Label | None = None,
    param: Param | None = None,
) -> _Plan:
    (w, f) = occ
    if rule is Rule.AND_L:
        return _Plan(ante=((w, f.left), (w, f.right)))
    if rule is Rule.OR_L:
        return _Plan(ante=((w, (f.left, f.right)[idx]),))
    if rule is Rule.AND_R:
        return _Plan(succ=((w, (f.left, f.right)[idx]),))
    if rule is Rule.OR_R:
        return _Plan(succ=((w, f.left), (w, f.right)))
    if rule is Rule.IMP_R:
        v = label or fresh_labels(used)[0]
        return _Plan(rel=(RelAtom(w, v),), ante=((v, f.left),), succ=((v, f.right),), label=v)
    if rule is Rule.NEG_R:
        v = label or fresh_labels(used)[0]
        return _Plan(rel=(RelAtom(w, v),), ante=((v, f.body),), label=v)
    if rule is Rule.FORALL_R:
        v = label or fresh_labels(used)[0]
        a = param or fresh_params(used)[0]
        inst = substitute_param(f.body, a, f.var)
        return _Plan(rel=(RelAtom(w, v),), dom=(DomAtom(a, v),), succ=((v, inst),),
                     label=v, param=a)
    if rule is Rule.FORALL_R_STAR:
        a = param or fresh_params(used)[0]
        inst = substitute_param(f.body, a, f.var)
        return _Plan(dom=(DomAtom(a, w),), succ=((w, inst),), param=a)
    if rule is Rule.EXISTS_L:
        a = param or fresh_params(used)[0]
        inst = substitute_param(f.body, a, f.var)
        return _Plan(dom=(DomAtom(a, w),), ante=((w, inst),), param=a)
    raise TransformError(f"no inversion plan for {rule.value}")


def invert_derivation(
    d: LabelledDerivation,
    rule: Rule,
    witness: Witness,
    calc: str,
    premise_index: int = 0,
) -> LabelledDerivation:
    """Proof of the designated premise of (rule, witness) at d's conclusion.

    Height preserving except for and_l / exists_l in the extended calculi,
    where lift interaction may grow the proof.
    """
    _no_tags(d)
    want = premises_for(rule, d.conclusion, witness)
    if premise_index >= len(want):
        raise SequentError(f"{rule.value} has no premise {premise_index}")
    target = want[premise_index]
    if rule in _WEAKENING_INVERTIBLE:
        extra_rel = _diff(target.rel, d.conclusion.rel)
        extra_dom = _diff(target.dom, d.conclusion.dom)
        extra_ante = _diff(target.ante, d.conclusion.ante)
        extra_succ = _diff(target.succ, d.conclusion.succ)
        return weaken_derivation(d, calc, extra_rel, extra_dom, extra_ante, extra_succ)
    if rule not in _SUCC_INVERTIBLE and rule not in _ANTE_INVERTIBLE:
        raise SequentError(f"{rule.value} is not invertible")
    occ = witness.principal
    used = d.all_labels() | d.all_params()
    plan = _make_plan(rule, occ, premise_index, used,
                      label=witness.label, param=witness.param)
    out = _invert(d, rule, premise_index, {occ: [plan]}, used, calc)
    if out.conclusion != target:
        raise TransformError(
            f"inversion produced {out.conclusion!r}, wanted {target!r}"
        )
    return out


def _diff(big, small):
    have = list(small)
    res = []
    for x in big:
        if x in have:
            have.remove(x)
        else:
            res.append(x)
    return tuple(res)


def _apply_plans(s: LabelledSequent, side: str, occs) -> LabelledSequent:
    for occ, plans in occs.items():
        for plan in plans:
            s = s.remove(**{side: [occ]})
            s = s.add(plan.rel, plan.dom, plan.ante, plan.succ)
    return s


def _invert(
    d: LabelledDerivation,
    rule: Rule,
    idx: int,
    occs: dict[LabelledFormula, list[_Plan]],
    used: set[str],
    calc: str,
) -> LabelledDerivation:
    side = "ante" if rule in _ANTE_INVERTIBLE else "succ"
    n = d
    w = n.witness
    tracked = occs.get(w.principal) if w.principal is not None else None

    # the node consumes a tracked occurrence with its own instance of the
    # target rule: the chosen premise subproof realises one plan
    if n.rule is rule and tracked:
        plan = tracked[0]
        rest = {k: v for k, v in occs.items() if k != w.principal}
        if len(tracked) > 1:
            rest[w.principal] = tracked[1:]
        sub = n.premises[idx]
        # align the node's own fresh names with the plan's
        if plan.label is not None and w.label != plan.label:
            sub = substitute_derivation(sub, "label", plan.label, w.label, calc)
        if plan.param is not None and w.param != plan.param:
            sub = substitute_derivation(sub, "param", plan.param, w.param, calc)
        return _invert(sub, rule, idx, rest, used, calc) if rest else sub

    # lift duplicates a tracked antecedent occurrence into the upper label
    if (
        n.rule is Rule.LIFT
        and side == "ante"
        and tracked
        and n.conclusion.ante.count(w.principal) <= len(tracked)
    ):
        u = w.rel.v
        (wl, f) = w.principal
        up_occ = (u, f)
        plan_u = _make_plan(rule, up_occ, idx, used)
        grown = dict(occs)
        grown[up_occ] = grown.get(up_occ, []) + [plan_u]
        inner = _invert(n.premises[0], rule, idx, grown, used, calc)
        plan_w = tracked[0]
        if rule is Rule.EXISTS_L:
            # unify the two fresh parameters, lift the instance, close the
            # duplicated domain atom with nd
            inner = substitute_derivation(inner, "param", plan_w.param, plan_u.param, calc)
            inst_w = plan_w.ante[0]
            inst_u = (u, inst_w[1])
            c1 = inner.conclusion.remove(ante=[inst_u])
            inner = _mk(calc, Rule.LIFT, c1, (inner,),
                        Witness(principal=inst_w, rel=w.rel))
            dom_w = plan_w.dom[0]
            dom_u = DomAtom(dom_w.a, u)
            c2 = c1.remove(dom=[dom_u])
            return _mk(calc, Rule.ND, c2, (inner,), Witness(rel=w.rel, dom=dom_w))
        cur = inner
        for (lbl, g) in plan_w.ante:
            up = (u, g)
            c1 = cur.conclusion.remove(ante=[up])
            cur = _mk(calc, Rule.LIFT, c1, (cur,),
                      Witness(principal=(lbl, g), rel=w.rel))
        return cur

    # context: the tracked occurrences ride along unchanged
    prem = tuple(_invert(p, rule, idx, occs, used, calc) for p in n.premises)
    concl = _apply_plans(n.conclusion, side, occs)
    return _mk(calc, n.rule, concl, prem, w)


# ---------------------------------------------------------------------------
# contraction

def contract_derivation(
    d: LabelledDerivation, kind: Rule, duplicate, calc: str
) -> LabelledDerivation:
    """Removes one copy of a duplicated atom (ctr_R) or formula
    (ctr_Fl / ctr_Fr) from the end sequent, rebuilding the proof."""
    _no_tags(d)
    if kind is Rule.CTR_R:
        return _contract_atom(d, duplicate, calc)
    if kind is Rule.CTR_FL:
        return _contract_formula(d, duplicate, True, calc)
    if kind is Rule.CTR_FR:
        return _contract_formula(d, duplicate, False, calc)
    raise SequentError(f"{kind.value} is not a contraction kind")


def _contract_atom(d: LabelledDerivation, dup, calc: str) -> LabelledDerivation:
    """hp: atoms persist upward, so one copy vanishes from every sequent."""
    is_rel = isinstance(dup, RelAtom)
    count = d.conclusion.count_rel(dup) if is_rel else d.conclusion.count_dom(dup)
    if count < 2:
        raise SequentError(f"duplicate {dup!r} not present twice")

    def go(n: LabelledDerivation) -> LabelledDerivation:
        concl = n.conclusion.remove(rel=[dup]) if is_rel else n.conclusion.remove(dom=[dup])
        prem = tuple(go(p) for p in n.premises)
        return _mk(calc, n.rule, concl, prem, n.witness)

    return go(d)


_CONSUMING_ANTE = {Rule.AND_L, Rule.OR_L, Rule.EXISTS_L}
_CONSUMING_SUCC = {
    Rule.AND_R, Rule.OR_R, Rule.IMP_R, Rule.NEG_R, Rule.FORALL_R,
    Rule.FORALL_R_STAR,
}


def _contract_formula(
    d: LabelledDerivation, dup: LabelledFormula, left: bool, calc: str
) -> LabelledDerivation:
    side = d.conclusion.ante if left else d.conclusion.succ
    if side.count(dup) < 2:
        raise SequentError(f"duplicate {dup!r} not present twice")
    consuming = _CONSUMING_ANTE if left else _CONSUMING_SUCC

    n = d
    w = n.witness
    if n.rule in consuming and w.principal == dup:
        return _contract_principal(n, dup, left, calc)

    def strip(s: LabelledSequent) -> LabelledSequent:
        return s.remove(ante=[dup]) if left else s.remove(succ=[dup])

    prem = tuple(_contract_formula(p, dup, left, calc) for p in n.premises)
    return _mk(calc, n.rule, strip(n.conclusion), prem, w)


def _contract_principal(
    n: LabelledDerivation, dup: LabelledFormula, left: bool, calc: str
) -> LabelledDerivation:
    """The contracted formula is principal of a consuming rule: invert the
    surviving copy in the premise, contract the pieces, reapply."""
    (wl, f) = dup
    rule = n.rule
    w = n.witness
    used = n.all_labels() | n.all_params()
    kindl, kindr = Rule.CTR_FL, Rule.CTR_FR

    def inv(sub: LabelledDerivation, idx: int, plan_witness: Witness) -> LabelledDerivation:
        return invert_derivation(sub, rule, plan_witness, calc, idx)

    if rule is Rule.AND_L:
        p = inv(n.premises[0], 0, Witness(principal=dup))
        p = contract_derivation(p, kindl, (wl, f.left), calc)
        p = contract_derivation(p, kindl, (wl, f.right), calc)
        return _mk(calc, rule, n.conclusion.remove(ante=[dup]), (p,), w)
    if rule is Rule.OR_L:
        p0 = inv(n.premises[0], 0, Witness(principal=dup))
        p0 = contract_derivation(p0, kindl, (wl, f.left), calc)
        p1 = inv(n.premises[1], 1, Witness(principal=dup))
        p1 = contract_derivation(p1, kindl, (wl, f.right), calc)
        return _mk(calc, rule, n.conclusion.remove(ante=[dup]), (p0, p1), w)
    if rule is Rule.AND_R:
        p0 = inv(n.premises[0], 0, Witness(principal=dup))
        p0 = contract_derivation(p0, kindr, (wl, f.left), calc)
        p1 = inv(n.premises[1], 1, Witness(principal=dup))
        p1 = contract_derivation(p1, kindr, (wl, f.right), calc)
        return _mk(calc, rule, n.conclusion.remove(succ=[dup]), (p0, p1), w)
    if rule is Rule.OR_R:
        p = inv(n.premises[0], 0, Witness(principal=dup))
        p = contract_derivation(p, kindr, (wl, f.left), calc)
        p = contract_derivation(p, kindr, (wl, f.right), calc)
        return _mk(calc, rule, n.conclusion.remove(succ=[dup]), (p,), w)
    if rule in (Rule.IMP_R, Rule.NEG_R, Rule.FORALL_R, Rule.FORALL_R_STAR,
                Rule.EXISTS_L):
        sub = n.premises[0]
        fresh_w = _fresh_witness_like(rule, dup, used)
        p = inv(sub, 0, fresh_w)
        # merge the fresh copy back onto the rule's own eigennames
        if fresh_w.label is not None:
            p = substitute_derivation(p, "label", w.label, fresh_w.label, calc)
        if fresh_w.param is not None:
            p = substitute_derivation(p, "param", w.param, fresh_w.param, calc)
        # contract the now-duplicated side material
        if rule is Rule.IMP_R:
            p = _contract_atom(p, RelAtom(wl, w.label), calc)
            p = contract_derivation(p, kindl, (w.label, f.left), calc)
            p = contract_derivation(p, kindr, (w.label, f.right), calc)
            new_concl = n.conclusion.remove(succ=[dup])
        elif rule is Rule.NEG_R:
            p = _contract_atom(p, RelAtom(wl, w.label), calc)
            p = contract_derivation(p, kindl, (w.label, f.body), calc)
            new_concl = n.conclusion.remove(succ=[dup])
        elif rule is Rule.FORALL_R:
            inst = substitute_param(f.body, w.param, f.var)
            p = _contract_atom(p, RelAtom(wl, w.label), calc)
            p = _contract_atom(p, DomAtom(w.param, w.label), calc)
            p = contract_derivation(p, kindr, (w.label, inst), calc)
            new_concl = n.conclusion.remove(succ=[dup])
        elif rule is Rule.FORALL_R_STAR:
            inst = substitute_param(f.body, w.param, f.var)
            p = _contract_atom(p, DomAtom(w.param, wl), calc)
            p = contract_derivation(p, kindr, (wl, inst), calc)
            new_concl = n.conclusion.remove(succ=[dup])
        else:  # EXISTS_L
            inst = substitute_param(f.body, w.param, f.var)
            p = _contract_atom(p, DomAtom(w.param, wl), calc)
            p = contract_derivation(p, kindl, (wl, inst), calc)
            new_concl = n.conclusion.remove(ante=[dup])
        return _mk(calc, rule, new_concl, (p,), w)
    raise TransformError(f"unhandled principal contraction at {rule.value}")


def _fresh_witness_like(rule: Rule, occ: LabelledFormula, used: set[str]) -> Witness:
    if rule in (Rule.IMP_R, Rule.NEG_R):
        return Witness(principal=occ, label=fresh_labels(set(used))[0])
    if rule is Rule.FORALL_R:
        return Witness(
            principal=occ,
            label=fresh_labels(set(used))[0],
            param=fresh_params(set(used))[0],
        )
    if rule in (Rule.FORALL_R_STAR, Rule.EXISTS_L):
        return Witness(principal=occ, param=fresh_params(set(used))[0])
    return Witness(principal=occ)


# ---------------------------------------------------------------------------
# structural-rule elimination

def _find_topmost(d: LabelledDerivation, rules) -> tuple[int, ...] | None:
    """Path to an occurrence with no occurrence of `rules` above it."""
    for i, p in enumerate(d.premises):
        sub = _find_topmost(p, rules)
        if sub is not None:
            return (i,) + sub
    if d.rule in rules:
        return ()
    return None


def _node_at(d: LabelledDerivation, path) -> LabelledDerivation:
    for i in path:
        d = d.premises[i]
    return d


def _replace_at(d: LabelledDerivation, path, new: LabelledDerivation, calc: str):
    if not path:
        return new
    prem = list(d.premises)
    prem[path[0]] = _replace_at(prem[path[0]], path[1:], new, calc)
    return _mk(calc, d.rule, d.conclusion, tuple(prem), d.witness)


def eliminate_ref(d: LabelledDerivation, calc: str, trace=None) -> LabelledDerivation:
    """Removes every ref inference; input must be tra-free above each ref."""
    _no_tags(d)
    trace = trace if trace is not None else []
    while True:
        path = _find_topmost(d, {Rule.REF})
        if path is None:
            return d
        node = _node_at(d, path)
        z = node.witness.label
        before = sum(1 for n in d.nodes() if n.rule is Rule.REF)
        new_sub = _ref_step(node.premises[0], RelAtom(z, z), calc, trace)
        if new_sub.conclusion != node.conclusion:
            raise TransformError("ref elimination changed the sequent")
        d = _replace_at(d, path, new_sub, calc)
        after = sum(1 for n in d.nodes() if n.rule is Rule.REF)
        if after >= before:
            raise TransformError("ref elimination failed to decrease the measure")


def _ref_step(
    P: LabelledDerivation, zz: RelAtom, calc: str, trace: list
) -> LabelledDerivation:
    """Proof of P's conclusion minus one copy of the self-loop zz."""
    n = P
    w = n.witness
    C = n.conclusion
    target = C.remove(rel=[zz])
    spare = C.count_rel(zz) >= 2

    def active_rels():
        return [r for r in (w.rel, w.rel2) if r is not None]

    if not spare and zz in active_rels():
        if n.rule in (Rule.ID, Rule.ID_Q):
            leaf = Rule.ID_STAR if n.rule is Rule.ID else Rule.ID_Q_STAR
            # w = v = z, so both occurrences sit at the same label
            return _mk(calc, leaf, target, (),
                       Witness(principal=w.principal, formula=w.formula))
        if n.rule is Rule.IMP_L:
            p0 = _ref_step(n.premises[0], zz, calc, trace)
            p1 = _ref_step(n.premises[1], zz, calc, trace)
            return _mk(calc, Rule.IMP_L_STAR, target, (p0, p1),
                       Witness(principal=w.principal))
        if n.rule is Rule.FORALL_L:
            p = _ref_step(n.premises[0], zz, calc, trace)
            return _mk(calc, Rule.FORALL_L_STAR, target, (p,),
                       Witness(principal=w.principal, dom=w.dom))
        if n.rule is Rule.LIFT:
            # self-lift: the premise duplicates the principal formula
            p = _ref_step(n.premises[0], zz, calc, trace)
            return contract_derivation(p, Rule.CTR_FL, w.principal, calc)
        if n.rule is Rule.ND or n.rule is Rule.CD:
            # w = v = z: the added atom duplicates the source atom
            dup = DomAtom(w.dom.a, zz.w)
            p = _contract_atom(n.premises[0], dup, calc)
            return _ref_step(p, zz, calc, trace)
        if n.rule is Rule.TRA:
            raise TransformError("ref elimination hit a tra inference above it")
        raise TransformError(f"ref elimination: unhandled active case {n.rule.value}")

    # context: remove the loop atom everywhere above
    prem = tuple(_ref_step(p, zz, calc, trace) for p in n.premises)
    return _mk(calc, n.rule, target, prem, w)


def eliminate_tra(d: LabelledDerivation, calc: str, trace=None) -> LabelledDerivation:
    """Removes every tra inference; input must be ref-free above each tra."""
    _no_tags(d)
    trace = trace if trace is not None else []
    while True:
        path = _find_topmost(d, {Rule.TRA})
        if path is None:
            return d
        node = _node_at(d, path)
        r1, r2 = node.witness.rel, node.witness.rel2
        comp = RelAtom(r1.w, r2.v)
        before = sum(1 for n in d.nodes() if n.rule is Rule.TRA)
        new_sub = _tra_step(node.premises[0], comp, r1, r2, calc, trace)
        if new_sub.conclusion != node.conclusion:
            raise TransformError("tra elimination changed the sequent")
        d = _replace_at(d, path, new_sub, calc)
        after = sum(1 for n in d.nodes() if n.rule is Rule.TRA)
        if after >= before:
            raise TransformError("tra elimination failed to decrease the measure")


def _tra_step(
    P: LabelledDerivation,
    comp: RelAtom,
    r1: RelAtom,
    r2: RelAtom,
    calc: str,
    trace: list,
) -> LabelledDerivation:
    """Proof of P's conclusion minus one copy of the composite w<=u,
    given that w<=v and v<=u remain present."""
    n = P
    w = n.witness
    C = n.conclusion
    target = C.remove(rel=[comp])
    spare = C.count_rel(comp) >= 2
    wl, vl, ul = r1.w, r1.v, r2.v

    def lift_down(onto: LabelledDerivation, a: Label, b: Label, f: Formula, rel: RelAtom):
        c = onto.conclusion.remove(ante=[(b, f)])
        return _mk(calc, Rule.LIFT, c, (onto,), Witness(principal=(a, f), rel=rel))

    if not spare and comp in [r for r in (w.rel, w.rel2) if r is not None]:
        if n.rule is Rule.ID:
            # id* at the upper label, then lift back down the chain
            (pw, pf) = w.principal
            leaf_c = target.add(ante=[(vl, pf), (ul, pf)])
            leaf = _mk(calc, Rule.ID_STAR, leaf_c, (),
                       Witness(principal=(ul, pf), formula=w.formula))
            step1 = lift_down(leaf, vl, ul, pf, r2)
            return lift_down(step1, wl, vl, pf, r1)
        if n.rule is Rule.ID_Q:
            # id_q via the upper edge, lift the atom, close domain atoms
            (pw, pf) = w.principal
            ps = [a for a in dict.fromkeys(t for t in pf.args if isinstance(t, Param))]
            leaf_c = target.add(
                dom=[DomAtom(a, vl) for a in ps], ante=[(vl, pf)]
            )
            leaf = _mk(calc, Rule.ID_Q, leaf_c, (),
                       Witness(principal=(vl, pf), formula=w.formula, rel=r2))
            cur = lift_down(leaf, wl, vl, pf, r1)
            for a in ps:
                c = cur.conclusion.remove(dom=[DomAtom(a, vl)])
                cur = _mk(calc, Rule.ND, c, (cur,),
                          Witness(rel=r1, dom=DomAtom(a, wl)))
            return cur
        if n.rule is Rule.IMP_L:
            (pw, pf) = w.principal
            p0 = _tra_step(n.premises[0], comp, r1, r2, calc, trace)
            p1 = _tra_step(n.premises[1], comp, r1, r2, calc, trace)
            add = dict(ante=[(vl, pf), (ul, pf)])
            p0 = weaken_derivation(p0, calc, **add)
            p1 = weaken_derivation(p1, calc, **add)
            c_star = target.add(ante=[(vl, pf), (ul, pf)])
            star = _mk(calc, Rule.IMP_L_STAR, c_star, (p0, p1),
                       Witness(principal=(ul, pf)))
            step1 = lift_down(star, vl, ul, pf, r2)
            return lift_down(step1, wl, vl, pf, r1)
        if n.rule is Rule.FORALL_L:
            (pw, pf) = w.principal
            inst = substitute_param(pf.body, w.dom.a, pf.var)
            p = _tra_step(n.premises[0], comp, r1, r2, calc, trace)
            p = weaken_derivation(p, calc, ante=[(vl, pf)])
            c_fl = target.add(ante=[(vl, pf)])
            fl = _mk(calc, Rule.FORALL_L, c_fl, (p,),
                     Witness(principal=(vl, pf), rel=r2, dom=w.dom))
            return lift_down(fl, wl, vl, pf, r1)
        if n.rule is Rule.LIFT:
            (pw, pf) = w.principal
            p = _tra_step(n.premises[0], comp, r1, r2, calc, trace)
            p = weaken_derivation(p, calc, ante=[(vl, pf)])
            c1 = p.conclusion.remove(ante=[(ul, pf)])
            step1 = _mk(calc, Rule.LIFT, c1, (p,), Witness(principal=(vl, pf), rel=r2))
            return lift_down(step1, wl, vl, pf, r1)
        if n.rule is Rule.ND:
            a = w.dom.a
            p = _tra_step(n.premises[0], comp, r1, r2, calc, trace)
            p = weaken_derivation(p, calc, dom=[DomAtom(a, vl)])
            c1 = p.conclusion.remove(dom=[DomAtom(a, ul)])
            s1 = _mk(calc, Rule.ND, c1, (p,), Witness(rel=r2, dom=DomAtom(a, vl)))
            c2 = c1.remove(dom=[DomAtom(a, vl)])
            return _mk(calc, Rule.ND, c2, (s1,), Witness(rel=r1, dom=DomAtom(a, wl)))
        if n.rule is Rule.CD:
            a = w.dom.a
            p = _tra_step(n.premises[0], comp, r1, r2, calc, trace)
            p = weaken_derivation(p, calc, dom=[DomAtom(a, vl)])
            c1 = p.conclusion.remove(dom=[DomAtom(a, wl)])
            s1 = _mk(calc, Rule.CD, c1, (p,), Witness(rel=r1, dom=DomAtom(a, vl)))
            c2 = c1.remove(dom=[DomAtom(a, vl)])
            return _mk(calc, Rule.CD, c2, (s1,), Witness(rel=r2, dom=DomAtom(a, ul)))
        raise TransformError(
            f"tra elimination: unhandled active case {n.rule.value}"
        )

    prem = tuple(_tra_step(p, comp, r1, r2, calc, trace) for p in n.premises)
    return _mk(calc, n.rule, target, prem, w)


def eliminate_nd_cd(d: LabelledDerivation, calc: str, trace=None) -> LabelledDerivation:
    """Removes every nd and cd inference; input must be ref/tra-free."""
    _no_tags(d)
    trace = trace if trace is not None else []
    for n in d.nodes():
        if n.rule in (Rule.REF, Rule.TRA):
            raise SequentError("eliminate nd/cd requires a ref/tra-free derivation")
    while True:
        path = _find_topmost(d, {Rule.ND, Rule.CD})
        if path is None:
            return d
        node = _node_at(d, path)
        kind = node.rule
        rel, src = node.witness.rel, node.witness.dom
        removed = (
            DomAtom(src.a, rel.v) if kind is Rule.ND else DomAtom(src.a, rel.w)
        )
        before = sum(1 for n2 in d.nodes() if n2.rule in (Rule.ND, Rule.CD))
        new_sub = _nd_step(node.premises[0], removed, rel, src, calc, trace)
        if new_sub.conclusion != node.conclusion:
            raise TransformError("nd/cd elimination changed the sequent")
        d = _replace_at(d, path, new_sub, calc)
        after = sum(1 for n2 in d.nodes() if n2.rule in (Rule.ND, Rule.CD))
        if after >= before:
            raise TransformError("nd/cd elimination failed to decrease the measure")


def _nd_step(
    P: LabelledDerivation,
    removed: DomAtom,
    rel: RelAtom,
    src: DomAtom,
    calc: str,
    trace: list,
) -> LabelledDerivation:
    """Proof of P's conclusion minus one copy of `removed`, given that the
    source domain atom and its relational atom remain present."""
    n = P
    w = n.witness
    C = n.conclusion
    target = C.remove(dom=[removed])
    spare = C.count_dom(removed) >= 2

    if not spare and n.rule in (Rule.ID, Rule.ID_Q) and w.rel is not None:
        (pw, pf) = w.principal
        needed = [
            DomAtom(a, pw)
            for a in dict.fromkeys(t for t in pf.args if isinstance(t, Param))
        ]
        if removed in needed:
            # rebuild as id_q* at the succedent label plus one lift
            (sv, _) = w.formula
            leaf_c = target.add(ante=[(sv, pf)])
            leaf = _mk(calc, Rule.ID_Q_STAR, leaf_c, (),
                       Witness(principal=(sv, pf), formula=(sv, pf)))
            c = leaf_c.remove(ante=[(sv, pf)])
            return _mk(calc, Rule.LIFT, c, (leaf,),
                       Witness(principal=w.principal, rel=w.rel))

    if not spare and w.dom == removed:
        if n.rule is Rule.FORALL_L:
            (pw, pf) = w.principal
            inst = substitute_param(pf.body, removed.a, pf.var)
            p = _nd_step(n.premises[0], removed, rel, src, calc, trace)
            p = weaken_derivation(p, calc, ante=[(pw, inst)])
            c1 = p.conclusion.remove(ante=[(w.rel.v, inst)])
            s1 = _mk(calc, Rule.LIFT, c1, (p,),
                     Witness(principal=(pw, inst), rel=w.rel))
            c2 = c1.remove(ante=[(pw, inst)])
            return _mk(calc, Rule.FORALL_L_STAR, c2, (s1,),
                       Witness(principal=w.principal, dom=src))
        if n.rule is Rule.FORALL_L_STAR:
            p = _nd_step(n.premises[0], removed, rel, src, calc, trace)
            return _mk(calc, Rule.FORALL_L_STAR, target, (p,),
                       Witness(principal=w.principal, dom=src))
        if n.rule is Rule.EXISTS_R:
            p = _nd_step(n.premises[0], removed, rel, src, calc, trace)
            return _mk(calc, Rule.EXISTS_R_STAR, target, (p,),
                       Witness(principal=w.principal, dom=src))
        if n.rule is Rule.EXISTS_R_STAR:
            p = _nd_step(n.premises[0], removed, rel, src, calc, trace)
            return _mk(calc, Rule.EXISTS_R_STAR, target, (p,),
                       Witness(principal=w.principal, dom=src))
        if n.rule in (Rule.ND, Rule.CD):
            raise TransformError("nd/cd elimination hit another nd/cd above it")
        raise TransformError(f"nd/cd elimination: unhandled active case {n.rule.value}")

    prem = tuple(_nd_step(p, removed, rel, src, calc, trace) for p in n.premises)
    return _mk(calc, n.rule, target, prem, w)


# ---------------------------------------------------------------------------
# derived-rule expansion (into the treelike rule set)

def _conv_formula(f: Formula) -> Formula:
    return convert_signature(f, "toNeg")


def _conv_sequent(s: LabelledSequent) -> LabelledSequent:
    return LabelledSequent(
        s.rel,
        s.dom,
        tuple((w, _conv_formula(f)) for (w, f) in s.ante),
        tuple((w, _conv_formula(f)) for (w, f) in s.succ),
    )


def _conv_witness(w: Witness) -> Witness:
    def mf(lf):
        return None if lf is None else (lf[0], _conv_formula(lf[1]))

    return dc_replace(w, principal=mf(w.principal), formula=mf(w.formula))


def expand_derived_rules(d: LabelledDerivation, calc: str) -> LabelledDerivation:
    """Replaces id, id_q, bot_l, imp_l, forall_l, forall_r and exists_r by
    their expansions over the treelike rule set, converting the signature
    to {~, &, |, ->} (false := p0 & ~p0) on the way.

    Requires a ref/tra/nd/cd-free derivation.
    """
    _no_tags(d)
    for n in d.nodes():
        if n.rule in STRUCTURAL:
            raise SequentError(
                "expand_derived_rules requires structural rules to be eliminated first"
            )

    def go(n: LabelledDerivation) -> LabelledDerivation:
        w = _conv_witness(n.witness)
        concl = _conv_sequent(n.conclusion)
        prem = tuple(go(p) for p in n.premises)

        if n.rule is Rule.BOT_L:
            (wl, _) = w.principal
            pair = _conv_formula(Bot())
            p0 = pair.left
            occ_pair = (wl, pair)
            leaf_c = concl.remove(ante=[occ_pair]).add(
                ante=[(wl, p0), (wl, Neg(p0))], succ=[(wl, p0)]
            )
            leaf = _mk(calc, Rule.ID_STAR, leaf_c, (),
                       Witness(principal=(wl, p0), formula=(wl, p0)))
            c_neg = leaf_c.remove(succ=[(wl, p0)])
            negl = _mk(calc, Rule.NEG_L, c_neg, (leaf,),
                       Witness(principal=(wl, Neg(p0))))
            return _mk(calc, Rule.AND_L, concl, (negl,),
                       Witness(principal=occ_pair))
        if n.rule in (Rule.ID, Rule.ID_Q):
            (wl, pf) = w.principal
            (vl, _) = w.formula
            leaf_rule = Rule.ID_STAR if not pf.args else Rule.ID_Q_STAR
            leaf_c = concl.add(ante=[(vl, pf)])
            leaf = _mk(calc, leaf_rule, leaf_c, (),
                       Witness(principal=(vl, pf), formula=(vl, pf)))
            return _mk(calc, Rule.LIFT, concl, (leaf,),
                       Witness(principal=(wl, pf), rel=w.rel))
        if n.rule is Rule.IMP_L:
            (wl, pf) = w.principal
            vl = w.rel.v
            occ_v = (vl, pf)
            p0 = weaken_derivation(prem[0], calc, ante=[occ_v])
            p1 = weaken_derivation(prem[1], calc, ante=[occ_v])
            c_star = concl.add(ante=[occ_v])
            star = _mk(calc, Rule.IMP_L_STAR, c_star, (p0, p1),
                       Witness(principal=occ_v))
            return _mk(calc, Rule.LIFT, concl, (star,),
                       Witness(principal=w.principal, rel=w.rel))
        if n.rule is Rule.FORALL_L:
            (wl, pf) = w.principal
            vl = w.rel.v
            inst = substitute_param(pf.body, w.dom.a, pf.var)
            p = weaken_derivation(prem[0], calc, ante=[(wl, inst)])
            c1 = p.conclusion.remove(ante=[(vl, inst)])
            s1 = _mk(calc, Rule.LIFT, c1, (p,),
                     Witness(principal=(wl, inst), rel=w.rel))
            return _mk(calc, Rule.FORALL_L_STAR, concl, (s1,),
                       Witness(principal=w.principal, dom=w.dom))
        if n.rule is Rule.FORALL_R:
            # the eigenlabel is fresh, so collapsing it onto the principal
            # label leaves the context untouched
            (wl, pf) = w.principal
            vl, a = w.label, w.param
            p = substitute_derivation(prem[0], "label", wl, vl, calc)
            p = _ref_step(p, RelAtom(wl, wl), calc, [])
            return _mk(calc, Rule.FORALL_R_STAR, concl, (p,),
                       Witness(principal=w.principal, param=a))
        if n.rule is Rule.EXISTS_R:
            return _mk(calc, Rule.EXISTS_R_STAR, concl, prem,
                       Witness(principal=w.principal, dom=w.dom))
        return _mk(calc, n.rule, concl, prem, w)

    return go(d)


# ---------------------------------------------------------------------------
# the full pipeline

_PROP_IN = ("g3int", "g3int-ext")


def eliminate_structural(
    d: LabelledDerivation, calc: str
) -> tuple[LabelledDerivation, TransformReport]:
    """G3Int(QC) derivation -> treelike-rule-set derivation.

    Eliminates ref/tra (then nd/cd in the first-order case) topmost-first,
    then expands the remaining derived rules; on theorem-shaped end
    sequents the output is verified treelike at every node.
    """
    ambient = "g3int-ext" if calc in _PROP_IN else "intqcl"
    target = "g3int-tree" if calc in _PROP_IN else "intqcl-tree"
    _no_tags(d)
    ok, where, msg = check_derivation(ambient, d)
    if not ok:
        raise SequentError(f"input does not check in {ambient} at {where}: {msg}")
    report = TransformReport(calculus_in=calc, calculus_out=target,
                             height_before=d.height())
    counts = d.rule_counts()
    for r in (Rule.REF, Rule.TRA, Rule.ND, Rule.CD, Rule.ID, Rule.ID_Q,
              Rule.BOT_L, Rule.IMP_L, Rule.FORALL_L, Rule.FORALL_R,
              Rule.EXISTS_R):
        if counts.get(r):
            report.rules_eliminated[r] = counts[r]

    end = d.conclusion
    theorem_shape = (
        not end.rel and not end.dom and not end.ante and len(end.succ) == 1
    )
    if not theorem_shape:
        report.warnings.append(
            "end sequent is not of the form '=> w:A'; treelike output not guaranteed"
        )

    steps = report.steps
    # ref and tra interleave, so always rewrite the topmost of either
    while True:
        path = _find_topmost(d, {Rule.REF, Rule.TRA})
        if path is None:
            break
        node = _node_at(d, path)
        before = sum(1 for n in d.nodes() if n.rule in (Rule.REF, Rule.TRA))
        if node.rule is Rule.REF:
            z = node.witness.label
            new_sub = _ref_step(node.premises[0], RelAtom(z, z), ambient, steps)
            steps.append(f"ref at {z} rewritten")
        else:
            r1, r2 = node.witness.rel, node.witness.rel2
            new_sub = _tra_step(
                node.premises[0], RelAtom(r1.w, r2.v), r1, r2, ambient, steps
            )
            steps.append(f"tra {r1!r} ; {r2!r} rewritten")
        if new_sub.conclusion != node.conclusion:
            raise TransformError("structural elimination changed the sequent")
        d = _replace_at(d, path, new_sub, ambient)
        after = sum(1 for n in d.nodes() if n.rule in (Rule.REF, Rule.TRA))
        if after >= before:
            raise TransformError("ref/tra measure failed to decrease")
    if any(n.rule in (Rule.ND, Rule.CD) for n in d.nodes()):
        n_ndcd = sum(1 for n in d.nodes() if n.rule in (Rule.ND, Rule.CD))
        d = eliminate_nd_cd(d, ambient, steps)
        steps.append(f"nd/cd eliminated ({n_ndcd} inference(s))")
    d = expand_derived_rules(d, target)
    steps.append("derived rules expanded; signature converted to {~,&,|,->}")

    ok, where, msg = check_derivation(target, d)
    if not ok:
        raise TransformError(f"output fails in {target} at {where}: {msg}")
    if theorem_shape:
        root = end.succ[0][0]
        for n in d.nodes():
            okt, viol = is_treelike(n.conclusion)
            if not okt:
                raise TransformError(
                    f"non-treelike sequent in output: {viol.kind}: {viol.detail}"
                )
            r = tree_root(n.conclusion)
            if r is not None and r != root:
                raise TransformError(
                    f"output sequent rooted at {r}, expected {root}"
                )
    report.height_after = d.height()
    return d, report


# ---------------------------------------------------------------------------
# labelled-to-nested proof translation

_RULE_TO_NESTED = {
    Rule.ID_STAR: NRule.ID,
    Rule.ID_Q_STAR: NRule.ID_Q,
    Rule.AND_L: NRule.AND_L,
    Rule.AND_R: NRule.AND_R,
    Rule.OR_L: NRule.OR_L,
    Rule.OR_R: NRule.OR_R,
    Rule.NEG_L: NRule.NEG_L,
    Rule.NEG_R: NRule.NEG_R,
    Rule.IMP_L_STAR: NRule.IMP_L,
    Rule.IMP_R: NRule.IMP_R,
    Rule.LIFT: NRule.LIFT,
    Rule.FORALL_L_STAR: NRule.FORALL_L,
    Rule.FORALL_R_STAR: NRule.FORALL_R,
    Rule.EXISTS_L: NRule.EXISTS_L,
    Rule.EXISTS_R_STAR: NRule.EXISTS_R,
}


def proof_to_nested(d: LabelledDerivation, calc: str = "auto") -> NestedDerivation:
    """Node-wise nested translation of a treelike-rule-set derivation.

    The output checks in nint-star (propositional) or nintqc-star.
    """
    _no_tags(d)
    if calc == "auto":
        fo = any(
            n.rule in (Rule.ID_Q_STAR, Rule.FORALL_L_STAR, Rule.FORALL_R_STAR,
                       Rule.EXISTS_L, Rule.EXISTS_R_STAR)
            for n in d.nodes()
        )
        calc = "nintqc-star" if fo else "nint-star"

    def go(n: LabelledDerivation) -> NestedDerivation:
        if n.rule not in _RULE_TO_NESTED:
            raise SequentError(
                f"rule {n.rule.value} has no nested counterpart; "
                "run eliminate_structural first"
            )
        okt, viol = is_treelike(n.conclusion)
        if not okt:
            raise TransformError(
                f"non-treelike sequent reached the nested translation: "
                f"{viol.kind}: {viol.detail}"
            )
        nested, paths = nestify_with_paths(n.conclusion)
        w = n.witness
        nrule = _RULE_TO_NESTED[n.rule]
        if n.rule in (Rule.ID_STAR, Rule.ID_Q_STAR):
            hole = paths[w.principal[0]]
            nw = NWitness(formula=w.principal[1])
        elif n.rule is Rule.LIFT:
            hole = paths[w.principal[0]]
            child_path = paths[w.rel.v]
            nw = NWitness(formula=w.principal[1], child=child_path[-1])
        elif n.rule in (Rule.FORALL_R_STAR, Rule.EXISTS_L):
            hole = paths[w.principal[0]]
            nw = NWitness(formula=w.principal[1], param=w.param)
        elif n.rule in (Rule.FORALL_L_STAR, Rule.EXISTS_R_STAR):
            hole = paths[w.principal[0]]
            nw = NWitness(formula=w.principal[1], param=w.dom.a)
        else:
            hole = paths[w.principal[0]]
            nw = NWitness(formula=w.principal[1])
        prem = tuple(go(p) for p in n.premises)
        return NestedDerivation(nested, nrule, hole, prem, nw)

    out = go(d)
    ok, where, msg = check_nested_derivation(calc, out)
    if not ok:
        raise TransformError(f"nested translation fails at {where}: {msg}")
    return out

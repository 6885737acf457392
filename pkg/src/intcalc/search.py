"""Backward proof search, a propositional decision procedure, and
countermodel extraction.

The labelled and star-variant nested calculi have all rules invertible, so
the search applies rules in a fixed priority order without backtracking
over rule choice: consuming rules first, then structural/copy saturation
restricted to applications that add new material.  Branches are pruned by
a depth bound on logical inferences and, optionally, by a loop check that
prunes a sequent equal to an ancestor up to label renaming.

In the original Fitting calculi (nint / nintqc) the copy-free left rules
discard information, so there the engine backtracks over alternatives.

`notFoundWithinBounds` (None results) is never a refutation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace as dc_replace
from typing import Iterator, Optional, Union

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
    Var,
    atoms_of,
    fkey,
    params_of,
    show_formula,
)
from .kripke import KripkeModel, enumerate_models, satisfies
from .labelled import (
    CALCULI,
    DomAtom,
    Label,
    LabelledDerivation,
    LabelledSequent,
    RelAtom,
    Rule,
    SequentError,
    Witness,
    check_derivation,
    fresh_labels,
    fresh_params,
    path_exists,
    premises_for,
)
from .nested import (
    NESTED_CALCULI,
    NRule,
    NWitness,
    NestedDerivation,
    NestedSequent,
    check_nested_derivation,
    nested_premises_for,
)


@dataclass(frozen=True)
class SearchConfig:
    calculus: str = "g3int"
    depth_bound: int = 12
    loop_check: bool = True
    parameter_budget: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.depth_bound < 1:
            raise SequentError("depth_bound must be >= 1")
        if self.parameter_budget < 1:
            raise SequentError("parameter_budget must be >= 1")


Derivation = Union[LabelledDerivation, NestedDerivation]


def prove(goal, cfg: SearchConfig) -> Optional[Derivation]:
    """A checkable derivation of the goal, or None within the bounds.

    depth_bound limits the number of logical inferences along a branch;
    relational saturation steps (ref, tra, nd, cd) are free, since with the
    labels fixed they reach a fixpoint.  Invertible decomposition rules are
    applied eagerly without backtracking; the engine backtracks over the
    copy-rule family (imp_l and friends) and instantiation choices.  A
    sequent exactly equal to an ancestor on its branch is always pruned;
    loop_check additionally prunes sequents equal to an ancestor up to
    label renaming.
    """
    if isinstance(goal, LabelledSequent):
        if cfg.calculus not in CALCULI:
            raise SequentError(f"unknown calculus {cfg.calculus!r}")
        return _LabelledProver(cfg).search(goal, cfg.depth_bound, ())
    if isinstance(goal, NestedSequent):
        if cfg.calculus not in NESTED_CALCULI:
            raise SequentError(f"unknown nested calculus {cfg.calculus!r}")
        return _NestedProver(cfg).search(goal, cfg.depth_bound, (), 0)
    raise SequentError(f"goal must be a labelled or nested sequent, got {goal!r}")


# ---------------------------------------------------------------------------
# loop check: equality up to a label renaming

def _fingerprint(s: LabelledSequent):
    fp = s.__dict__.get("_fp_")
    if fp is None:
        fp = (
            len(s.rel), len(s.dom),
            tuple(sorted(fkey(f) for (_, f) in s.ante)),
            tuple(sorted(fkey(f) for (_, f) in s.succ)),
        )
        object.__setattr__(s, "_fp_", fp)
    return fp


def _renaming_equal(s1: LabelledSequent, s2: LabelledSequent) -> bool:
    if _fingerprint(s1) != _fingerprint(s2):
        return False
    l1 = sorted({l.name for l in s1.labels()})
    l2 = sorted({l.name for l in s2.labels()})
    if len(l1) != len(l2):
        return False

    def local_sig(s: LabelledSequent, l: str):
        return (
            tuple(sorted(fkey(f) for (w, f) in s.ante if w.name == l)),
            tuple(sorted(fkey(f) for (w, f) in s.succ if w.name == l)),
            sum(1 for r in s.rel if r.w.name == l),
            sum(1 for r in s.rel if r.v.name == l),
            tuple(sorted(d.a.name for d in s.dom if d.w.name == l)),
        )

    sig1 = {l: local_sig(s1, l) for l in l1}
    sig2 = {l: local_sig(s2, l) for l in l2}

    def extend(i: int, m: dict[str, str], used: set[str]) -> bool:
        if i == len(l1):
            ren = {Label(a): Label(b) for a, b in m.items()}
            img = LabelledSequent(
                tuple(RelAtom(ren[r.w], ren[r.v]) for r in s1.rel),
                tuple(DomAtom(d.a, ren[d.w]) for d in s1.dom),
                tuple((ren[w], f) for (w, f) in s1.ante),
                tuple((ren[w], f) for (w, f) in s1.succ),
            )
            return img == s2
        a = l1[i]
        for b in l2:
            if b in used or sig1[a] != sig2[b]:
                continue
            m[a] = b
            used.add(b)
            if extend(i + 1, m, used):
                return True
            del m[a]
            used.discard(b)
        return False

    return extend(0, {}, set())


# ---------------------------------------------------------------------------
# labelled prover

_CLOSERS = (Rule.BOT_L, Rule.ID, Rule.ID_Q, Rule.ID_STAR, Rule.ID_Q_STAR)
_CONSUME_SIMPLE = (Rule.AND_L, Rule.OR_R)
_CONSUME_BRANCH = (Rule.AND_R, Rule.OR_L)
_CONSUME_EIGEN = (Rule.IMP_R, Rule.NEG_R, Rule.FORALL_R, Rule.FORALL_R_STAR,
                  Rule.EXISTS_L)
_SATURATE_REL = (Rule.REF, Rule.TRA, Rule.ND, Rule.CD)
_COPY = (Rule.NEG_L, Rule.LIFT, Rule.FORALL_L, Rule.FORALL_L_STAR,
         Rule.EXISTS_R, Rule.EXISTS_R_STAR, Rule.IMP_L, Rule.IMP_L_STAR)


def _adds_new(s: LabelledSequent, premise: LabelledSequent) -> bool:
    return (
        any(r not in s.rel for r in premise.rel)
        or any(d not in s.dom for d in premise.dom)
        or any(x not in s.ante for x in premise.ante)
        or any(x not in s.succ for x in premise.succ)
    )


def _label_depths(s: LabelledSequent) -> dict[Label, int]:
    """Longest directed distance from any in-degree-0 label (loops skipped)."""
    labels = sorted(s.labels(), key=lambda l: l.name)
    depth = {l: 0 for l in labels}
    edges = [(r.w, r.v) for r in s.rel if r.w != r.v]
    for _ in range(len(labels)):
        changed = False
        for (a, b) in edges:
            if depth[b] < depth[a] + 1:
                depth[b] = depth[a] + 1
                changed = True
        if not changed:
            break
    return depth


def _copy_target(w: Witness) -> Label | None:
    if w.rel is not None:
        return w.rel.v
    if w.principal is not None:
        return w.principal[0]
    return None


def _world_content(s: LabelledSequent, v: Label):
    return (
        frozenset(f for (w, f) in s.ante if w == v),
        frozenset(f for (w, f) in s.succ if w == v),
    )


def _blocked_eigen(s: LabelledSequent, witness: Witness) -> bool:
    """Loop check at world-creating rules: the step at (v, F) is blocked
    when an earlier world reachable from v already carries exactly the
    content v would keep, so expanding v again can only repeat it."""
    (v, f) = witness.principal
    ante_v = frozenset(g for (w, g) in s.ante if w == v)
    succ_v = frozenset(g for (w, g) in s.succ if w == v) - {f}
    for u in sorted(s.labels(), key=lambda l: l.name):
        if u == v:
            continue
        if _world_content(s, u) == (ante_v, succ_v) and path_exists(s.rel, u, v):
            return True
    return False


class _LabelledProver:
    """Deterministic backward search.

    Every rule of these calculi is invertible, so the first applicable
    instance is followed without backtracking over alternatives.  Proved
    sequents are cached; failed sequents are cached only when no
    ancestor-loop prune fired below them (pure failures), keyed by the
    largest budget that failed.
    """

    def __init__(self, cfg: SearchConfig):
        self.cfg = cfg
        self.rules = CALCULI[cfg.calculus]
        self.proved: dict[LabelledSequent, LabelledDerivation] = {}
        self.failed: dict[LabelledSequent, int] = {}

    def _instances(self, rule: Rule, s: LabelledSequent):
        from .labelled import _candidate_witnesses

        for w in _candidate_witnesses(rule, s):
            try:
                prem = premises_for(rule, s, w)
            except SequentError:
                continue
            yield prem, w

    def search(self, s, budget: int, history) -> Optional[LabelledDerivation]:
        out, _pure = self._search(s, budget, history, frozenset(history))
        return out

    def _search(
        self, s: LabelledSequent, budget: int, history, hset
    ) -> tuple[Optional[LabelledDerivation], bool]:
        hit = self.proved.get(s)
        if hit is not None:
            return hit, True
        if self.failed.get(s, -1) >= budget:
            return None, True
        for rule in _CLOSERS:
            if rule not in self.rules:
                continue
            for prem, w in self._instances(rule, s):
                d = LabelledDerivation(s, rule, (), w)
                self.proved[s] = d
                return d, True
        if s in hset:
            return None, False
        if self.cfg.loop_check and any(_renaming_equal(s, h) for h in history):
            return None, False
        hist = history + (s,)
        hs = hset | {s}

        def attempt(rule, prem, w, cost):
            subs = []
            for p in prem:
                sub, pure = self._search(p, budget - cost, hist, hs)
                if sub is None:
                    return None, pure
                subs.append(sub)
            return LabelledDerivation(s, rule, tuple(subs), w), True

        def settle(result):
            d, pure = result
            if d is not None:
                self.proved[s] = d
            elif pure:
                self.failed[s] = max(self.failed.get(s, -1), budget)
            return d, pure

        # relational saturation: free and deterministic
        for rule in _SATURATE_REL:
            if rule not in self.rules:
                continue
            for prem, w in self._instances(rule, s):
                if not _adds_new(s, prem[0]):
                    continue
                return settle(attempt(rule, prem, w, 0))

        if budget <= 0:
            return settle((None, True))

        # invertible decomposition: deterministic, no alternatives
        for rule in _CONSUME_SIMPLE + _CONSUME_BRANCH:
            if rule not in self.rules:
                continue
            for prem, w in self._instances(rule, s):
                return settle(attempt(rule, prem, w, 1))

        for rule in _CONSUME_EIGEN:
            if rule not in self.rules:
                continue
            for prem, w in self._instances(rule, s):
                if (
                    self.cfg.loop_check
                    and rule in (Rule.IMP_R, Rule.NEG_R, Rule.FORALL_R)
                    and _blocked_eigen(s, w)
                ):
                    continue  # the block is a function of s alone
                return settle(attempt(rule, prem, w, 1))

        # copy rules: backtrack over instantiation choices, trying targets
        # deep in the relational order first
        depth = _label_depths(s)
        all_pure = True
        for rule in _COPY:
            if rule not in self.rules:
                continue
            cands = [
                (prem, w)
                for prem, w in self._instances(rule, s)
                if any(_adds_new(s, p) for p in prem)
            ]
            cands.sort(key=lambda c: -depth.get(_copy_target(c[1]), 0))
            for prem, w in cands:
                got, pure = attempt(rule, prem, w, 1)
                if got is not None:
                    return settle((got, True))
                all_pure = all_pure and pure
        return settle((None, all_pure))


# ---------------------------------------------------------------------------
# nested prover

_N_CLOSERS = (NRule.ID, NRule.ID_Q)
_N_CONSUME_SIMPLE = (NRule.AND_L, NRule.OR_R)
_N_CONSUME_BRANCH = (NRule.AND_R, NRule.OR_L)
_N_CONSUME_EIGEN = (NRule.IMP_R, NRule.NEG_R, NRule.FORALL_R, NRule.EXISTS_L)
_N_COPY = (NRule.NEG_L, NRule.LIFT, NRule.FORALL_L, NRule.EXISTS_R, NRule.IMP_L)


def _n_adds_new(goal: NestedSequent, prem: NestedSequent) -> bool:
    # structure changes (new brackets) always count as new
    def items(n: NestedSequent, path):
        out = {(path, "a", fkey(f)) for f in n.ante}
        out |= {(path, "s", fkey(f)) for f in n.succ}
        for i, c in enumerate(n.children):
            out |= items(c, path + (i,))
        return out

    return not items(prem, ()) <= items(goal, ())


def _n_blocked(s: NestedSequent, hole, f) -> bool:
    """Nested analogue of the eigen loop check: creating a child of the
    hole node is blocked when an ancestor node already carries exactly the
    content the hole node would keep."""
    node = s.at(hole)
    ante_v = frozenset(node.ante)
    succ_v = frozenset(node.succ) - {f}
    for k in range(len(hole)):
        anc = s.at(hole[:k])
        if frozenset(anc.ante) == ante_v and frozenset(anc.succ) == succ_v:
            return True
    return False


class _NestedProver:
    """Backward search on nested sequents.

    In the star calculi every rule is invertible, so the first applicable
    instance is followed without backtracking; in nint/nintqc the engine
    backtracks over alternatives.  Caching as in the labelled prover.
    """

    def __init__(self, cfg: SearchConfig):
        self.cfg = cfg
        self.calc = cfg.calculus
        self.rules = NESTED_CALCULI[self.calc]
        self.star = self.calc.endswith("-star")
        self.proved: dict[NestedSequent, NestedDerivation] = {}
        self.failed: dict[NestedSequent, int] = {}

    def _instances(self, rule: NRule, s: NestedSequent, fresh_used: int):
        from .nested import _nested_candidates

        budget_left = self.cfg.parameter_budget - fresh_used
        for hole in s.holes():
            node = s.at(hole)
            for w in _nested_candidates(rule, s, node):
                if rule in (NRule.FORALL_L, NRule.EXISTS_R):
                    is_fresh = w.param not in s.params()
                    if is_fresh and budget_left <= 0:
                        continue
                try:
                    prem = nested_premises_for(self.calc, rule, s, hole, w)
                except SequentError:
                    continue
                yield hole, prem, w

    def search(self, s, budget, history, fresh_used):
        out, _pure = self._search(s, budget, tuple(history), frozenset(history), fresh_used)
        return out

    def _search(
        self, s: NestedSequent, budget: int, history, hset, fresh_used: int
    ) -> tuple[Optional[NestedDerivation], bool]:
        hit = self.proved.get(s)
        if hit is not None:
            return hit, True
        if self.failed.get(s, -1) >= budget:
            return None, True
        for rule in _N_CLOSERS:
            if rule not in self.rules:
                continue
            for hole, prem, w in self._instances(rule, s, fresh_used):
                d = NestedDerivation(s, rule, hole, (), w)
                self.proved[s] = d
                return d, True
        if s in hset:
            return None, False
        hist = history + (s,)
        hs = hset | {s}

        def attempt(rule, hole, prem, w, cost=0, extra_fresh=0):
            subs = []
            for p in prem:
                sub, pure = self._search(
                    p, budget - cost, hist, hs, fresh_used + extra_fresh
                )
                if sub is None:
                    return None, pure
                subs.append(sub)
            return NestedDerivation(s, rule, hole, tuple(subs), w), True

        def settle(result):
            d, pure = result
            if d is not None:
                self.proved[s] = d
            elif pure:
                self.failed[s] = max(self.failed.get(s, -1), budget)
            return d, pure

        if budget <= 0:
            return settle((None, True))

        all_pure = True
        for rule in _N_CONSUME_SIMPLE + _N_CONSUME_BRANCH + _N_CONSUME_EIGEN:
            if rule not in self.rules:
                continue
            for hole, prem, w in self._instances(rule, s, fresh_used):
                if (
                    self.cfg.loop_check
                    and rule in (NRule.IMP_R, NRule.NEG_R)
                    and _n_blocked(s, hole, w.formula)
                ):
                    continue
                got, pure = attempt(rule, hole, prem, w, cost=1)
                if got is not None:
                    return settle((got, True))
                if self.star:
                    # invertible: the premises are provable or nothing is
                    return settle((None, pure))
                all_pure = all_pure and pure
        for rule in _N_COPY:
            if rule not in self.rules:
                continue
            for hole, prem, w in self._instances(rule, s, fresh_used):
                fresh = 0
                if rule in (NRule.FORALL_L, NRule.EXISTS_R):
                    fresh = int(w.param not in s.params())
                if self.star and not any(_n_adds_new(s, p) for p in prem):
                    continue
                got, pure = attempt(rule, hole, prem, w, cost=1, extra_fresh=fresh)
                if got is not None:
                    return settle((got, True))
                all_pure = all_pure and pure
        return settle((None, all_pure))


# ---------------------------------------------------------------------------
# countermodels and the decision procedure

@dataclass(frozen=True)
class Countermodel:
    model: KripkeModel
    world: str
    env: dict = field(default_factory=dict)


def find_countermodel(
    f: Formula, max_worlds: int, domain_size: int = 0
) -> Optional[Countermodel]:
    """Exhaustive finite-model search; None only exhausts the bound.

    Propositional formulas are decided up to max_worlds; with quantifiers
    the search is relative to the fixed domain_size and incomplete.
    """
    names = sorted(atoms_of(f))
    arity = {g.name: len(g.args) for g in _subatoms(f)}
    needs_domain = bool(params_of(f)) or any(arity.values()) or _has_quantifier(f)
    dsize = domain_size if domain_size else (1 if needs_domain else 0)
    for m in enumerate_models(max_worlds, names, dsize, arity=arity):
        envs = _param_envs(f, m)
        for env in envs:
            for w in sorted(m.worlds):
                if not satisfies(m, w, f, env):
                    return Countermodel(m, w, env)
    return None


def _subatoms(f: Formula):
    from .formula import subformulas

    return [g for g in subformulas(f) if isinstance(g, Atom)]


def _has_quantifier(f: Formula) -> bool:
    from .formula import subformulas

    return any(isinstance(g, (Forall, Exists)) for g in subformulas(f))


def _param_envs(f: Formula, m: KripkeModel):
    ps = params_of(f)
    if not ps:
        return [dict()]
    dom = m.domain or ("*",)
    return [dict(zip(ps, combo)) for combo in itertools.product(dom, repeat=len(ps))]


@dataclass(frozen=True)
class Decision:
    verdict: str  # "theorem" | "countermodel" | "undecided"
    proof: Optional[Derivation] = None
    countermodel: Optional[Countermodel] = None


def decide_prop(
    f: Formula, model_bound: int, cfg: SearchConfig
) -> Decision:
    """Alternates countermodel search and proof search with growing bounds.

    Never returns both witnesses; a proof re-checks and a countermodel
    re-evaluates to false before being returned.
    """
    for g in _subatoms(f):
        if g.args:
            raise SequentError("decide_prop expects a propositional formula")
    goal = _goal_for(f, cfg.calculus)
    depth_schedule = _interleave(model_bound, cfg.depth_bound)
    proof = None
    cm = None
    for kind, bound in depth_schedule:
        if kind == "model":
            cm = _countermodel_at(f, bound)
            if cm is not None:
                break
        else:
            proof = prove(goal, dc_replace(cfg, depth_bound=bound))
            if proof is not None:
                break
    if proof is not None:
        _assert_proof(proof, cfg.calculus)
        return Decision("theorem", proof=proof)
    if cm is not None:
        if satisfies(cm.model, cm.world, f, cm.env):
            raise SequentError("countermodel failed to re-evaluate to false")
        return Decision("countermodel", countermodel=cm)
    return Decision("undecided")


def _countermodel_at(f: Formula, n: int) -> Optional[Countermodel]:
    names = sorted(atoms_of(f))
    for m in _models_of_size(n, names):
        for w in sorted(m.worlds):
            if not satisfies(m, w, f, {}):
                return Countermodel(m, w, {})
    return None


def _models_of_size(n: int, names):
    from .kripke import _enumerate_exhaustive

    for m in _enumerate_exhaustive(n, list(names), 0, {}):
        if len(m.worlds) == n:
            yield m


def _interleave(model_bound: int, depth_bound: int):
    sched = []
    depths = [d for d in (4, 6, 8, 10, 12, 14, 16) if d <= depth_bound]
    if not depths or depths[-1] != depth_bound:
        depths.append(depth_bound)
    for i in range(max(model_bound, len(depths))):
        if i < model_bound:
            sched.append(("model", i + 1))
        if i < len(depths):
            sched.append(("prove", depths[i]))
    return sched


def _goal_for(f: Formula, calculus: str):
    from .formula import convert_signature

    if calculus in CALCULI:
        # the plain G3 calculi have no negation rules
        g = convert_signature(f, "toBot") if calculus in ("g3int", "g3intqc") else f
        return LabelledSequent(succ=((Label("w"), g),))
    # the nested calculi have no bottom rule
    g = convert_signature(f, "toNeg") if _mentions_bot(f) else f
    return NestedSequent(succ=(g,))


def _mentions_bot(f: Formula) -> bool:
    from .formula import subformulas

    return any(isinstance(g, Bot) for g in subformulas(f))


def _assert_proof(proof, calculus: str) -> None:
    if isinstance(proof, LabelledDerivation):
        ok, _, msg = check_derivation(calculus, proof)
    else:
        ok, _, msg = check_nested_derivation(calculus, proof)
    if not ok:
        raise SequentError(f"returned proof fails to check: {msg}")

"""Finite Kripke semantics for intuitionistic logic with constant domains.

Models are finite reflexive-transitive frames with monotone valuations; the
first-order layer uses one global individual domain shared by every world.
This module is the semantic oracle: proof machinery elsewhere is fuzzed
against `satisfies` / `labelled_sequent_holds`.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

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
)

World = str
Individual = str


class ModelError(ValueError):
    """Raised for frames or valuations violating the model invariants."""


class BudgetExceeded(RuntimeError):
    """Raised when an enumeration would exceed the combinatorial guard."""


MODEL_BUDGET = 10**7


@dataclass(frozen=True)
class KripkeModel:
    """Finite intuitionistic model (constant first-order domain).

    valuation maps (atom name, argument tuple) to the set of worlds where
    the atom holds; propositional atoms use the empty argument tuple.
    """

    worlds: frozenset[World]
    leq: frozenset[tuple[World, World]]
    valuation: Mapping[tuple[str, tuple[Individual, ...]], frozenset[World]] = field(
        default_factory=dict
    )
    domain: tuple[Individual, ...] = ()

    def __post_init__(self) -> None:
        if not self.worlds:
            raise ModelError("empty set of worlds")
        for w, v in self.leq:
            if w not in self.worlds or v not in self.worlds:
                raise ModelError(f"leq edge ({w},{v}) outside worlds")
        for w in self.worlds:
            if (w, w) not in self.leq:
                raise ModelError(f"leq not reflexive at {w}")
        for w, v in self.leq:
            for v2, u in self.leq:
                if v2 == v and (w, u) not in self.leq:
                    raise ModelError(f"leq not transitive: {w}<={v}<={u}")
        for (name, args), ws in self.valuation.items():
            for w in ws:
                if w not in self.worlds:
                    raise ModelError(f"valuation of {name}{args} names unknown world {w}")
                for v in self.up(w):
                    if v not in ws:
                        raise ModelError(
                            f"valuation of {name}{args} not monotone: {w} <= {v}"
                        )
            for d in args:
                if d not in self.domain:
                    raise ModelError(f"valuation argument {d} outside domain")

    def up(self, w: World) -> frozenset[World]:
        return frozenset(v for (x, v) in self.leq if x == w)

    def holds_atom(self, name: str, args: tuple[Individual, ...], w: World) -> bool:
        return w in self.valuation.get((name, args), frozenset())


def satisfies(
    m: KripkeModel,
    w: World,
    f: Formula,
    env: Mapping[Param | Var, Individual] | None = None,
) -> bool:
    """Forcing M,w |- f under an assignment of parameters and variables."""
    env = env or {}
    if w not in m.worlds:
        raise ModelError(f"unknown world {w}")
    if isinstance(f, Bot):
        return False
    if isinstance(f, Atom):
        args = []
        for t in f.args:
            if t not in env:
                raise ModelError(f"unassigned parameter {t!r}")
            args.append(env[t])
        return m.holds_atom(f.name, tuple(args), w)
    if isinstance(f, And):
        return satisfies(m, w, f.left, env) and satisfies(m, w, f.right, env)
    if isinstance(f, Or):
        return satisfies(m, w, f.left, env) or satisfies(m, w, f.right, env)
    if isinstance(f, Impl):
        return all(
            satisfies(m, u, f.right, env)
            for u in m.up(w)
            if satisfies(m, u, f.left, env)
        )
    if isinstance(f, Neg):
        return satisfies(m, w, Impl(f.body, Bot()), env)
    if isinstance(f, Forall):
        return all(
            satisfies(m, w, f.body, {**env, f.var: d}) for d in m.domain
        )
    if isinstance(f, Exists):
        return any(
            satisfies(m, w, f.body, {**env, f.var: d}) for d in m.domain
        )
    raise TypeError(f"not a formula: {f!r}")


def globally_true(m: KripkeModel, f: Formula, env=None) -> bool:
    return all(satisfies(m, w, f, env) for w in m.worlds)


def labelled_sequent_holds(m: KripkeModel, s) -> bool:
    """Truth of a labelled sequent in m.

    Universally quantified over label assignments rho and parameter
    assignments iota: whenever every relational atom w<=v has
    rho(w) leq rho(v) (domain atoms are vacuous under constant domains),
    some antecedent formula fails or some succedent formula holds.
    """
    labels = sorted(s.labels(), key=lambda l: l.name)
    params = sorted(s.params(), key=lambda p: p.name)
    worlds = sorted(m.worlds)
    if params and not m.domain:
        raise ModelError("sequent has parameters but the model domain is empty")
    dom = m.domain or ("*",)
    for rho_tuple in itertools.product(worlds, repeat=len(labels)):
        rho = dict(zip(labels, rho_tuple))
        if not all((rho[r.w], rho[r.v]) in m.leq for r in s.rel):
            continue
        for iota_tuple in itertools.product(dom, repeat=len(params)):
            env = dict(zip(params, iota_tuple))
            ante_ok = all(satisfies(m, rho[w], f, env) for (w, f) in s.ante)
            if not ante_ok:
                continue
            if not any(satisfies(m, rho[w], f, env) for (w, f) in s.succ):
                return False
    return True


def nested_sequent_holds(m: KripkeModel, s) -> bool:
    """Truth of a nested sequent: truth of its labelled image."""
    from .graph import labelify

    return labelled_sequent_holds(m, labelify(s))


# ---------------------------------------------------------------------------
# enumeration and generation

def _preorders(n: int) -> Iterator[frozenset[tuple[int, int]]]:
    """All reflexive-transitive relations on {0..n-1} (labelled)."""
    diag = [(i, i) for i in range(n)]
    off = [(i, j) for i in range(n) for j in range(n) if i != j]
    for bits in itertools.product((False, True), repeat=len(off)):
        rel = set(diag)
        rel.update(p for p, b in zip(off, bits) if b)
        ok = True
        for (a, b) in rel:
            for (c, d) in rel:
                if b == c and (a, d) not in rel:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            yield frozenset(rel)


def _upsets(worlds: list[World], leq: frozenset[tuple[World, World]]) -> list[frozenset[World]]:
    ups = []
    for bits in itertools.product((False, True), repeat=len(worlds)):
        s = frozenset(w for w, b in zip(worlds, bits) if b)
        if all(v in s for w in s for (x, v) in leq if x == w):
            ups.append(s)
    return ups


def count_models(
    max_worlds: int,
    atoms: Iterable[str],
    domain_size: int = 0,
    arity: Mapping[str, int] | None = None,
) -> int:
    """Size of the exhaustive enumeration (one upset per atom slot)."""
    atom_list = sorted(set(atoms))
    arity = arity or {}
    total = 0
    for n in range(1, max_worlds + 1):
        worlds = [f"w{i}" for i in range(n)]
        for rel in _preorders(n):
            named = frozenset((worlds[i], worlds[j]) for (i, j) in rel)
            k = len(_upsets(worlds, named))
            slots = sum(
                max(1, domain_size) ** arity.get(name, 0) for name in atom_list
            )
            total += k**slots
    return total


def enumerate_models(
    max_worlds: int,
    atoms: Iterable[str] = (),
    domain_size: int = 0,
    mode: str = "exhaustive",
    seed: int = 0,
    count: int = 0,
    arity: Mapping[str, int] | None = None,
    allow_large: bool = False,
) -> Iterator[KripkeModel]:
    """Stream finite models.

    exhaustive: every labelled model with up to max_worlds worlds — all
    reflexive-transitive relations, all monotone valuations of the given
    atoms (argument tuples drawn from a domain of domain_size individuals,
    arity per atom from `arity`, default 0).

    random: `count` pseudo-random valid models, deterministic per seed.
    """
    if max_worlds < 1:
        raise ModelError("max_worlds must be >= 1")
    atom_list = sorted(set(atoms))
    arity = arity or {}
    if mode == "exhaustive":
        est = count_models(max_worlds, atom_list, domain_size, arity)
        if est > MODEL_BUDGET and not allow_large:
            raise BudgetExceeded(
                f"{est} models exceeds the {MODEL_BUDGET} budget; pass allow_large to override"
            )
        yield from _enumerate_exhaustive(max_worlds, atom_list, domain_size, arity)
    elif mode == "random":
        yield from _generate_random(max_worlds, atom_list, domain_size, arity, seed, count)
    else:
        raise ModelError(f"unknown mode {mode!r}")


def _arg_tuples(domain: tuple[str, ...], k: int) -> list[tuple[str, ...]]:
    if k == 0:
        return [()]
    return list(itertools.product(domain, repeat=k))


def _enumerate_exhaustive(max_worlds, atom_list, domain_size, arity):
    domain = tuple(f"d{i}" for i in range(domain_size))
    for n in range(1, max_worlds + 1):
        worlds = [f"w{i}" for i in range(n)]
        wset = frozenset(worlds)
        for rel in _preorders(n):
            named = frozenset((worlds[i], worlds[j]) for (i, j) in rel)
            ups = _upsets(worlds, named)
            slots = [
                (name, args)
                for name in atom_list
                for args in _arg_tuples(domain, arity.get(name, 0))
            ]
            for choice in itertools.product(ups, repeat=len(slots)):
                val = {slot: up for slot, up in zip(slots, choice)}
                yield KripkeModel(wset, named, val, domain)


def _generate_random(max_worlds, atom_list, domain_size, arity, seed, count):
    rng = random.Random(seed)
    produced = 0
    domain = tuple(f"d{i}" for i in range(domain_size))
    while produced < count:
        n = rng.randint(1, max_worlds)
        worlds = [f"w{i}" for i in range(n)]
        rel = {(w, w) for w in worlds}
        for i in range(n):
            for j in range(n):
                if i != j and rng.random() < 0.4:
                    rel.add((worlds[i], worlds[j]))
        # reflexive-transitive closure
        changed = True
        while changed:
            changed = False
            for (a, b) in list(rel):
                for (c, d) in list(rel):
                    if b == c and (a, d) not in rel:
                        rel.add((a, d))
                        changed = True
        named = frozenset(rel)
        val = {}
        for name in atom_list:
            for args in _arg_tuples(domain, arity.get(name, 0)):
                seedset = {w for w in worlds if rng.random() < 0.5}
                up = set(seedset)
                for w in seedset:
                    up.update(v for (x, v) in named if x == w)
                val[(name, args)] = frozenset(up)
        yield KripkeModel(frozenset(worlds), named, val, domain)
        produced += 1


# ---------------------------------------------------------------------------
# model text files
#
#   worlds: w v u
#   leq: w <= v, v <= u
#   domain: d1 d2
#   val: p @ w
#   val: q(d1, d2) @ v
#
# The loader closes leq reflexively and transitively and rejects
# non-monotone valuations.

def dump_model(m: KripkeModel) -> str:
    lines = ["worlds: " + " ".join(sorted(m.worlds))]
    edges = sorted((w, v) for (w, v) in m.leq if w != v)
    if edges:
        lines.append("leq: " + ", ".join(f"{w} <= {v}" for w, v in edges))
    if m.domain:
        lines.append("domain: " + " ".join(m.domain))
    for (name, args), ws in sorted(m.valuation.items()):
        head = name if not args else f"{name}({', '.join(args)})"
        for w in sorted(ws):
            lines.append(f"val: {head} @ {w}")
    return "\n".join(lines) + "\n"


def load_model(text: str) -> KripkeModel:
    worlds: list[str] = []
    edges: set[tuple[str, str]] = set()
    domain: list[str] = []
    val: dict[tuple[str, tuple[str, ...]], set[str]] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ModelError(f"malformed model line: {raw!r}")
        key, rest = line.split(":", 1)
        key = key.strip()
        rest = rest.strip()
        if key == "worlds":
            worlds.extend(rest.split())
        elif key == "leq":
            for pair in rest.split(","):
                if not pair.strip():
                    continue
                if "<=" not in pair:
                    raise ModelError(f"malformed leq entry: {pair!r}")
                a, b = (x.strip() for x in pair.split("<=", 1))
                edges.add((a, b))
        elif key == "domain":
            domain.extend(rest.split())
        elif key == "val":
            if "@" not in rest:
                raise ModelError(f"malformed val entry: {rest!r}")
            head, w = (x.strip() for x in rest.rsplit("@", 1))
            if "(" in head:
                name, argtext = head.split("(", 1)
                if not argtext.endswith(")"):
                    raise ModelError(f"malformed val entry: {rest!r}")
                args = tuple(a.strip() for a in argtext[:-1].split(",") if a.strip())
            else:
                name, args = head, ()
            val.setdefault((name.strip(), args), set()).add(w)
        else:
            raise ModelError(f"unknown model key {key!r}")
    wset = frozenset(worlds)
    if not wset:
        raise ModelError("model file names no worlds")
    rel = {(w, w) for w in wset} | edges
    changed = True
    while changed:
        changed = False
        for (a, b) in list(rel):
            for (c, d) in list(rel):
                if b == c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
    return KripkeModel(
        wset,
        frozenset(rel),
        {k: frozenset(v) for k, v in val.items()},
        tuple(domain),
    )

"""Graphs of sequents, treelike detection, isomorphism, and the translation
between treelike labelled sequents and nested sequents.

The graph of a labelled sequent has the sequent's labels as vertices, one
edge per relational atom, and each vertex labelled with the formulas living
there.  Nested-sequent graphs use prefix strings ("0", "00", "01", ...) as
vertices.  A treelike labelled sequent (unique root, unique directed path to
every vertex) translates to the nested sequent with the isomorphic graph;
domain atoms are dropped in translation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .formula import Formula, fkey
from .labelled import (
    DomAtom,
    Label,
    LabelledSequent,
    RelAtom,
    SequentError,
)
from .nested import NestedSequent

ISO_BUDGET = 12


@dataclass(frozen=True)
class SequentGraph:
    vertices: frozenset[str]
    edges: frozenset[tuple[str, str]]
    labelling: dict[str, tuple[tuple[Formula, ...], tuple[Formula, ...]]]

    def __post_init__(self) -> None:
        for (a, b) in self.edges:
            if a not in self.vertices or b not in self.vertices:
                raise SequentError(f"edge ({a},{b}) endpoint is not a vertex")
        for v in self.vertices:
            if v not in self.labelling:
                raise SequentError(f"vertex {v} has no labelling entry")


def graph_of_labelled(s: LabelledSequent) -> SequentGraph:
    verts = {l.name for l in s.labels()}
    edges = {(r.w.name, r.v.name) for r in s.rel}
    lab: dict[str, tuple[tuple[Formula, ...], tuple[Formula, ...]]] = {}
    for v in verts:
        ante = tuple(sorted((f for (w, f) in s.ante if w.name == v), key=fkey))
        succ = tuple(sorted((f for (w, f) in s.succ if w.name == v), key=fkey))
        lab[v] = (ante, succ)
    return SequentGraph(frozenset(verts), frozenset(edges), lab)


def graph_of_nested(s: NestedSequent, root_prefix: str = "0") -> SequentGraph:
    verts: set[str] = set()
    edges: set[tuple[str, str]] = set()
    lab: dict[str, tuple[tuple[Formula, ...], tuple[Formula, ...]]] = {}

    def walk(node: NestedSequent, prefix: str) -> None:
        verts.add(prefix)
        lab[prefix] = (node.ante, node.succ)
        for i, c in enumerate(node.children):
            child = f"{prefix}{i}"
            edges.add((prefix, child))
            walk(c, child)

    walk(s, root_prefix)
    return SequentGraph(frozenset(verts), frozenset(edges), lab)


@dataclass(frozen=True)
class TreelikeViolation:
    kind: str  # disconnected | cycle | backwards-branching | multiple-roots | no-root
    detail: str


def treelike_violation(g: SequentGraph) -> TreelikeViolation | None:
    verts = sorted(g.vertices)
    if not verts:
        return None
    for (a, b) in sorted(g.edges):
        if a == b:
            return TreelikeViolation("cycle", f"self-loop at {a}")
    indeg = {v: 0 for v in verts}
    for (_, b) in g.edges:
        indeg[b] += 1
    branched = [v for v in verts if indeg[v] > 1]
    if branched:
        v = branched[0]
        srcs = sorted(a for (a, b) in g.edges if b == v)
        return TreelikeViolation(
            "backwards-branching", f"{' and '.join(srcs)} both reach {v}"
        )
    roots = [v for v in verts if indeg[v] == 0]
    if not roots:
        return TreelikeViolation("cycle", "every vertex has an incoming edge")
    if len(roots) > 1:
        # distinguish plain disconnection from genuine multi-rootedness
        return TreelikeViolation(
            "disconnected", f"no path joins roots {', '.join(sorted(roots))}"
        )
    root = roots[0]
    # in-degree <= 1 everywhere: follow edges from the root
    reach = {root}
    frontier = [root]
    while frontier:
        nxt = []
        for x in frontier:
            for (a, b) in g.edges:
                if a == x and b not in reach:
                    reach.add(b)
                    nxt.append(b)
        frontier = nxt
    missing = sorted(set(verts) - reach)
    if missing:
        # unreached vertices with in-degree 1 sit on a directed cycle
        cyc = [v for v in missing if indeg[v] >= 1]
        if cyc and all(indeg[v] >= 1 for v in missing):
            return TreelikeViolation("cycle", f"cycle through {cyc[0]}")
        return TreelikeViolation("disconnected", f"{missing[0]} unreachable from {root}")
    return None


def is_treelike(s: LabelledSequent) -> tuple[bool, TreelikeViolation | None]:
    """Unique root with a unique directed path to every other vertex."""
    v = treelike_violation(graph_of_labelled(s))
    return (v is None), v


def tree_root(s: LabelledSequent) -> Label | None:
    ok, _ = is_treelike(s)
    if not ok:
        return None
    g = graph_of_labelled(s)
    indeg = {v: 0 for v in g.vertices}
    for (_, b) in g.edges:
        indeg[b] += 1
    roots = [v for v in g.vertices if indeg[v] == 0]
    return Label(roots[0]) if roots else None


def isomorphic(g0: SequentGraph, g1: SequentGraph) -> dict[str, str] | None:
    """A bijection preserving edges and vertex labelling, or None.

    Exact search pruned by (in-degree, out-degree, labelling) signatures;
    refuses graphs beyond ISO_BUDGET vertices.
    """
    if len(g0.vertices) > ISO_BUDGET or len(g1.vertices) > ISO_BUDGET:
        raise SequentError(f"isomorphism search limited to {ISO_BUDGET} vertices")
    if len(g0.vertices) != len(g1.vertices) or len(g0.edges) != len(g1.edges):
        return None

    def sig(g: SequentGraph, v: str):
        ind = sum(1 for (_, b) in g.edges if b == v)
        outd = sum(1 for (a, _) in g.edges if a == v)
        ante, succ = g.labelling[v]
        return (ind, outd, tuple(map(fkey, ante)), tuple(map(fkey, succ)))

    sig0 = {v: sig(g0, v) for v in g0.vertices}
    sig1 = {v: sig(g1, v) for v in g1.vertices}
    if sorted(sig0.values()) != sorted(sig1.values()):
        return None
    order = sorted(g0.vertices)
    candidates = {
        v: [u for u in sorted(g1.vertices) if sig1[u] == sig0[v]] for v in order
    }

    def extend(i: int, mapping: dict[str, str], used: set[str]):
        if i == len(order):
            return dict(mapping)
        v = order[i]
        for u in candidates[v]:
            if u in used:
                continue
            ok = True
            for (a, b) in g0.edges:
                fa, fb = mapping.get(a), mapping.get(b)
                if a == v and fb is not None and (u, fb) not in g1.edges:
                    ok = False
                    break
                if b == v and fa is not None and (fa, u) not in g1.edges:
                    ok = False
                    break
            if ok:
                for (a, b) in g1.edges:
                    if a == u or b == u:
                        ra = _rev(mapping, a) if a != u else v
                        rb = _rev(mapping, b) if b != u else v
                        if ra is not None and rb is not None and (ra, rb) not in g0.edges:
                            ok = False
                            break
            if ok:
                mapping[v] = u
                used.add(u)
                res = extend(i + 1, mapping, used)
                if res is not None:
                    return res
                del mapping[v]
                used.discard(u)
        return None

    return extend(0, {}, set())


def _rev(mapping: dict[str, str], u: str) -> str | None:
    for k, v in mapping.items():
        if v == u:
            return k
    return None


def nestify(s: LabelledSequent) -> NestedSequent:
    """The translation of a treelike labelled sequent; domain atoms dropped.

    Labels that occur only in domain atoms (no formulas, no edges) are
    dropped rather than becoming empty nested nodes.
    """
    nested, _paths = nestify_with_paths(s)
    return nested


def nestify_with_paths(
    s: LabelledSequent,
) -> tuple[NestedSequent, dict[Label, tuple[int, ...]]]:
    """nestify plus the context path of each surviving label."""
    g = graph_of_labelled(s)
    isolated_dom_only = {
        v
        for v in g.vertices
        if g.labelling[v] == ((), ())
        and not any(v in e for e in g.edges)
        and any(d.w.name == v for d in s.dom)
    }
    verts = g.vertices - isolated_dom_only
    if not verts:
        return NestedSequent(), {}
    g2 = SequentGraph(
        frozenset(verts),
        g.edges,
        {v: g.labelling[v] for v in verts},
    )
    bad = treelike_violation(g2)
    if bad is not None:
        full = treelike_violation(g)
        raise SequentError(f"sequent is not treelike: {(full or bad).kind}: {(full or bad).detail}")
    indeg = {v: 0 for v in verts}
    for (_, b) in g2.edges:
        indeg[b] += 1
    root = [v for v in verts if indeg[v] == 0][0]
    children = {v: sorted(b for (a, b) in g2.edges if a == v) for v in verts}
    paths: dict[Label, tuple[int, ...]] = {}

    # children are stored canonically sorted, so compute paths against the
    # final canonical layout rather than the construction order
    def build2(v: str) -> NestedSequent:
        ante, succ = g2.labelling[v]
        kids = tuple(build2(b) for b in children[v])
        return NestedSequent(ante, succ, kids)

    nested = build2(root)

    def assign(v: str, node: NestedSequent, path: tuple[int, ...]) -> None:
        paths[Label(v)] = path
        remaining = list(range(len(node.children)))
        for b in children[v]:
            sub = build2(b)
            for i in remaining:
                if node.children[i] == sub:
                    remaining.remove(i)
                    assign(b, node.children[i], path + (i,))
                    break

    assign(root, nested, ())
    return nested, paths


def labelify(s: NestedSequent, stem: str = "w") -> LabelledSequent:
    """Fresh labels per nesting node, one relational atom per bracket."""
    rel: list[RelAtom] = []
    ante: list[tuple[Label, Formula]] = []
    succ: list[tuple[Label, Formula]] = []
    counter = itertools.count()

    def walk(node: NestedSequent) -> Label:
        me = Label(f"{stem}{next(counter)}")
        for f in node.ante:
            ante.append((me, f))
        for f in node.succ:
            succ.append((me, f))
        for c in node.children:
            kid = walk(c)
            rel.append(RelAtom(me, kid))
        return me

    walk(s)
    return LabelledSequent(tuple(rel), (), tuple(ante), tuple(succ))


def dot_of_graph(g: SequentGraph, name: str = "sequent") -> str:
    """Graphviz export for inspection."""
    from .formula import show_formula

    lines = [f"digraph {name} {{", "  rankdir=TB;"]
    for v in sorted(g.vertices):
        ante, succ = g.labelling[v]
        a = ", ".join(show_formula(f) for f in ante)
        b = ", ".join(show_formula(f) for f in succ)
        text = f"{v}: {a} => {b}".replace('"', "'")
        lines.append(f'  "{v}" [label="{text}"];')
    for (a, b) in sorted(g.edges):
        lines.append(f'  "{a}" -> "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"

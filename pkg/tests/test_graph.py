import pytest

from intcalc.formula import Atom, fkey
from intcalc.graph import (
    SequentGraph,
    dot_of_graph,
    graph_of_labelled,
    graph_of_nested,
    is_treelike,
    isomorphic,
    labelify,
    nestify,
    tree_root,
)
from intcalc.kripke import enumerate_models, labelled_sequent_holds, nested_sequent_holds
from intcalc.labelled import Label, SequentError, parse_sequent
from intcalc.nested import NestedSequent, parse_nested


# the worked example pair: a sequent with a self-loop and an undirected
# cycle, and its treelike variant
LOOPY = parse_sequent(
    "w0<=w0, w0<=w1, w1<=w2, w0<=w2, w0<=w3,"
    "w0: g0, w1: g1, w2: g2, w3: g3 => w0: d0, w1: d1, w2: d2, w3: d3"
)
TREE = parse_sequent(
    "w0<=w1, w1<=w2, w0<=w3,"
    "w0: g0, w1: g1, w2: g2, w3: g3 => w0: d0, w1: d1, w2: d2, w3: d3"
)
SIGMA = parse_nested("g0 -> d0, [g1 -> d1, [g2 -> d2]], [g3 -> d3]")


def test_graph_of_labelled_loopy():
    g = graph_of_labelled(LOOPY)
    assert ("w0", "w0") in g.edges
    # undirected cycle w0, w1, w2
    assert {("w0", "w1"), ("w1", "w2"), ("w0", "w2")} <= g.edges
    assert g.labelling["w1"] == ((Atom("g1"),), (Atom("d1"),))


def test_graph_of_single_labelled_formula():
    g = graph_of_labelled(parse_sequent(" => w: p"))
    assert g.vertices == frozenset({"w"})
    assert not g.edges
    assert g.labelling["w"] == ((), (Atom("p"),))


def test_graph_of_nested_prefixes():
    g = graph_of_nested(parse_nested("p -> q"), "0")
    assert g.vertices == frozenset({"0"})
    g2 = graph_of_nested(SIGMA)
    assert g2.vertices == frozenset({"0", "00", "000", "01"})
    assert ("0", "00") in g2.edges and ("00", "000") in g2.edges


def test_graph_of_nested_edge():
    g = graph_of_nested(parse_nested("p -> q, [r -> s]"))
    assert g.edges == frozenset({("0", "00")})


def test_treelike_detection():
    ok, viol = is_treelike(LOOPY)
    assert not ok and viol.kind == "cycle" and "w0" in viol.detail
    ok2, viol2 = is_treelike(TREE)
    assert ok2 and viol2 is None
    ok3, viol3 = is_treelike(parse_sequent("w<=v, u<=v => "))
    assert not ok3 and viol3.kind == "backwards-branching"
    ok4, viol4 = is_treelike(parse_sequent("w<=v, u<=z => "))
    assert not ok4 and viol4.kind == "disconnected"


def test_treelike_directed_cycle():
    ok, viol = is_treelike(parse_sequent("w<=v, v<=w => "))
    assert not ok and viol.kind in ("cycle", "backwards-branching")


def test_isomorphic_worked_example():
    f = isomorphic(graph_of_labelled(TREE), graph_of_nested(SIGMA))
    assert f is not None
    assert f["w0"] == "0" and f["w2"] == "000"


def test_isomorphic_identity_and_negative():
    g = graph_of_labelled(TREE)
    assert isomorphic(g, g) is not None
    two_path = graph_of_labelled(parse_sequent("w<=v => "))
    isolated = SequentGraph(
        frozenset({"a", "b"}), frozenset(), {"a": ((), ()), "b": ((), ())}
    )
    assert isomorphic(two_path, isolated) is None


def test_isomorphic_is_equivalence_on_corpus():
    seqs = [
        TREE,
        parse_sequent("a<=b, b<=c, a<=d, a: g0, b: g1, c: g2, d: g3 "
                      "=> a: d0, b: d1, c: d2, d: d3"),
        parse_sequent("w<=v => w: p"),
    ]
    graphs = [graph_of_labelled(s) for s in seqs]
    # reflexive
    for g in graphs:
        assert isomorphic(g, g) is not None
    # symmetric with inverse bijection
    f = isomorphic(graphs[0], graphs[1])
    assert f is not None
    back = isomorphic(graphs[1], graphs[0])
    assert back is not None
    assert {v: k for k, v in f.items()} == {k: back[k] for k in back}
    # transitive via composition: g0 ~ g1 ~ g0 gives identity-compatible map
    comp = {k: back[f[k]] for k in f}
    assert set(comp) == set(graphs[0].vertices)


def test_isomorphic_budget():
    big = SequentGraph(
        frozenset(f"x{i}" for i in range(13)), frozenset(),
        {f"x{i}": ((), ()) for i in range(13)},
    )
    with pytest.raises(SequentError, match="limited"):
        isomorphic(big, big)


def test_nestify_worked_example():
    assert nestify(TREE) == SIGMA


def test_nestify_single():
    assert nestify(parse_sequent(" => w: p")) == parse_nested(" -> p")


def test_nestify_drops_domain_atoms():
    s = parse_sequent("w<=v, a in D(w), w: p(#a) => v: p(#a)")
    got = nestify(s)
    assert got == parse_nested("p(#a) -> , [ -> p(#a)]")
    # verified through the graphs: nested graph isomorphic to the
    # labelled one on the formula content
    gl = graph_of_labelled(s)
    gn = graph_of_nested(got)
    assert isomorphic(gl, gn) is not None


def test_nestify_rejects_non_treelike():
    with pytest.raises(SequentError, match="not treelike"):
        nestify(LOOPY)


def test_labelify_examples():
    got = labelify(parse_nested(" -> p"))
    assert got == parse_sequent(" => w0: p")
    s = labelify(parse_nested("p -> q, [r -> s]"))
    assert len(s.rel) == 1 and len(s.ante) == 2


def test_roundtrips():
    sigmas = [
        SIGMA,
        parse_nested(" -> p -> q, [p -> q], [ -> r, [s -> ]]"),
        parse_nested(" -> "),
    ]
    for sig in sigmas:
        assert nestify(labelify(sig)) == sig
    trees = [TREE, parse_sequent("w<=v, w: p => v: q")]
    for t in trees:
        back = labelify(nestify(t))
        assert isomorphic(graph_of_labelled(back), graph_of_labelled(t)) is not None


def test_labelify_of_sigma_matches_tree_shape():
    lab = labelify(SIGMA)
    assert isomorphic(graph_of_labelled(lab), graph_of_labelled(TREE)) is not None


def test_translation_preserves_semantics():
    seqs = [
        parse_sequent("w<=v, w: p => v: p"),
        parse_sequent("w<=v, w: p -> q => v: q, w: p"),
        parse_sequent(" => w: p | q"),
    ]
    for m in enumerate_models(2, ["p", "q"]):
        for s in seqs:
            assert labelled_sequent_holds(m, s) == nested_sequent_holds(m, nestify(s))


def test_root_label():
    assert tree_root(TREE) == Label("w0")
    assert tree_root(LOOPY) is None


def test_dot_export():
    text = dot_of_graph(graph_of_labelled(TREE))
    assert text.startswith("digraph") and '"w0" -> "w1"' in text

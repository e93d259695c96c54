import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gogconj import gog, oracle, parse
from gogconj.backends import GenericHom, make_backend
from gogconj.gog import GraphError, GraphOfGroups, HopDepthExceeded, Path, bar

TORUS = """
vertex A kind=free_abelian rank=2
vertex B kind=free_abelian rank=2
edge e from=A to=B kind=free_abelian rank=1
mono e+ x1=x1
mono e- x1=x2
base A
"""

CYCLE = """
vertex A kind=free_abelian rank=1
vertex B kind=free_abelian rank=1
vertex C kind=free_abelian rank=1
edge e from=A to=B kind=trivial
edge f from=B to=C kind=trivial
edge g from=C to=A kind=trivial
mono e+
mono e-
mono f+
mono f-
mono g+
mono g-
base A
"""


@pytest.fixture(scope="module")
def torus():
    return parse(TORUS)


def loops_in_ball(X, r):
    return list(oracle.ball(X, r).elements.values())


def test_validate_accepts_torus_amalgam(torus):
    assert torus.validate() == []


def test_validate_rejects_fixed_bar(torus):
    X = parse(TORUS)
    X.bar_table[0] = 0
    assert any("involution" in p for p in X.validate())


def test_validate_rejects_torsion_image():
    X = GraphOfGroups()
    A = make_backend("torus_semidirect_z2")
    E = make_backend("free_abelian", rank=1)
    X.add_vertex("A", A)
    e = X.add_edge("e", "A", "A", E)
    X.set_mono(e, GenericHom(E, A, [A.parse("t")]))
    X.set_mono(bar(e), GenericHom(E, A, [A.parse("a")]))
    X.base = "A"
    assert any("torsion" in p for p in X.validate())
    with pytest.raises(Exception, match="translations"):
        parse(TORUS.replace("kind=free_abelian rank=2\nvertex B", "kind=torus_semidirect_z2\nvertex B")
              .replace("mono e- x1=x2", "mono e- x1=t"))


def test_concat_examples(torus):
    X = torus
    A = X.G("A")
    p = X.path("A", (), ["x1"])
    q = X.path("A", (), ["x2"])
    assert X.concat(p, q).labels == (A.parse("x1 x2"),)
    p = X.path("A", (0,), ["x1", "x1"])
    q = X.path("B", (1,), ["x2", "x2"])
    r = X.concat(p, q)
    assert r.edges == (0, 1) and r.labels[1] == X.G("B").parse("x1 x2")
    with pytest.raises(GraphError):
        X.concat(X.path("A", (0,)), X.path("A"))


def test_reduce_path_examples(torus):
    X = torus
    assert len(X.reduce_path(X.path("A", (0, 1))).edges) == 0
    p = X.path("A", (0, 1), ["x1", "x2", "x1"])
    assert X.reduce_path(p) == p
    p = X.path("A", (0, 1), ["x1", "x1 x1", "x2"])
    r = X.reduce_path(p)
    assert r.edges == () and r.labels[0] == X.G("A").parse("x1 x2 x2 x2")
    assert X.loop_is_identity(X.chain(p, X.inverse(r)))


def test_is_cyclically_reduced_examples(torus):
    X = torus
    T = X.tree
    assert X.is_cyclically_reduced(T, X.path("A", (), ["x1"]))
    # (1, e, g, e~, 1) with g off the edge image: reduced and cyclically reduced
    assert X.is_cyclically_reduced(T, X.path("A", (0, 1), [None, "x2", None]))
    assert not X.is_cyclically_reduced(T, X.path("A", (0, 1), [None, "x1", None]))


def test_cyclically_reduce_examples():
    X = parse(CYCLE)
    T = X.tree
    # the loop through the one non-tree edge runs round the triangle
    e = next(e for e in range(0, X.nedges, 2) if e not in T.edges)
    g = X.edge_loop(T, e)
    red, alpha = X.cyclically_reduce(T, g)
    assert len(red.edges) == 3 and alpha.edges == ()
    triv = X.path("A", (), ["x1"])
    assert X.cyclically_reduce(T, triv)[0] == triv


def test_cyclic_reduction_peels(torus):
    X = torus
    T = X.tree
    p = X.path("A", (0, 1), ["x2", "x1 x2", "x2^-1 x1 x1"])
    red, alpha = X.cyclically_reduce(T, p)
    assert len(red.edges) < 2 or X.is_cyclically_reduced(T, red)
    assert X.loop_is_identity(X.chain(alpha, p, X.inverse(alpha), X.inverse(red)))


def test_maximal_tree_examples(graphs, torus):
    assert graphs["klein"].tree.pair_count() == 0
    flat = graphs["flat"]
    assert flat.tree.pair_count() == 1 and len(flat.edge_names) == 1
    cyc = parse(CYCLE)
    assert cyc.tree.pair_count() == 2
    two = parse(TORUS + "edge f from=A to=B kind=free_abelian rank=1\nmono f+ x1=x2\nmono f- x1=x1\n")
    assert two.tree.pair_count() == 1
    assert all(X.tree.pair_count() == len(X.vertices) - 1 for X in graphs.values())


def test_maximal_tree_is_deterministic(graphs):
    for X in graphs.values():
        assert X.maximal_tree().parent == X.maximal_tree().parent


def test_vertex_embed_examples(graphs):
    X = graphs["p2"]
    T = X.tree
    assert X.vertex_embed(T, "P", "a").edges == ()
    q = X.vertex_embed(T, "Q1", "a")
    assert len(q.edges) == 2 * T.distance("Q1")
    assert X.loop_is_identity(X.vertex_embed(T, "Q1", "1"))
    with pytest.raises(GraphError):
        X.vertex_embed(T, "nowhere", "1")


def test_loop_is_identity_examples(graphs, torus):
    X = torus
    assert X.loop_is_identity(X.path("A", (0, 1)))
    K = graphs["klein"]
    assert K.loop_is_identity(K.vertex_embed(K.tree, "K", "t b t^-1 b"))
    assert not K.loop_is_identity(K.path("K", (), ["b"]))


def test_path_format_round_trip(graphs):
    for X in graphs.values():
        rng = random.Random(3)
        for _ in range(30):
            p = gog.random_loop(X, rng, rng.randint(0, 4))
            assert X.parse_path(X.format_path(p)) == p


@pytest.mark.parametrize("name", ["klein", "flat", "p2", "sol"])
def test_reduction_length_is_order_independent(graphs, name):
    X = graphs[name]
    rng = random.Random(7)
    for _ in range(200):
        p = gog.random_loop(X, rng, rng.randint(0, 9))
        lens = {len(X.reduce_path(p, order=o, rng=rng).edges) for o in ("stack", "left", "right", "random")}
        assert len(lens) == 1


@pytest.mark.parametrize("name", ["klein", "flat", "p2", "sol", "kleinedge", "seifert2"])
def test_reduce_and_cyclic_reduce_are_equalities(graphs, name):
    X = graphs[name]
    T = X.tree
    rng = random.Random(11)
    for _ in range(100):
        p = gog.random_loop(X, rng, rng.randint(0, 6))
        r = X.reduce_path(p)
        assert X.is_reduced(r)
        assert X.loop_is_identity(X.concat(p, X.inverse(r)))
        c, alpha = X.cyclically_reduce(T, p)
        assert X.is_cyclically_reduced(T, c)
        assert X.loop_is_identity(X.chain(alpha, p, X.inverse(alpha), X.inverse(c)))


def test_pi1_conjugate_examples(graphs, torus):
    X = torus
    T = X.tree
    u = X.path("A", (), ["x1"])
    h = X.pi1_conjugate(T, u, u)
    assert X.loop_is_identity(h)
    K = graphs["klein"]
    u, v = K.parse_path("[a b t]"), K.parse_path("[a b^3 t]")
    h = K.pi1_conjugate(K.tree, u, v)
    assert h == K.parse_path("[b^-1]")
    # x2 in A equals x1 in B across e: length-2 twist
    u = X.parse_path("[1] e [x2] e~ [x1]")
    v = X.parse_path("[x1] e [x2] e~ [1]")
    h = X.pi1_conjugate(T, u, v)
    assert h is not None and X.verify_conjugate(u, v, h)


@pytest.mark.parametrize("name, r", [("klein", 4), ("p2", 4), ("flat", 3), ("kleinedge", 3), ("seifert2", 2), ("sol", 2)])
def test_pi1_conjugate_agrees_with_oracle(graphs, name, r):
    X = graphs[name]
    T = X.tree
    elts = loops_in_ball(X, r)
    for u in elts:
        for v in elts:
            h = X.pi1_conjugate(T, u, v)
            if h is not None:
                assert X.verify_conjugate(u, v, h)
            else:
                assert oracle.brute_conjugate(X, u, v, 2 * r) is None


def test_hop_closure_examples(graphs, torus):
    X = torus
    st = X.hop_closure("A", X.G("A").parse("x1 x2"))
    assert [s.location for s in st] == [("vertex", "A")]
    st = X.hop_closure("A", X.G("A").parse("x2"))
    assert ("vertex", "B") in [s.location for s in st]
    for s in st:
        if s.location[0] == "vertex":
            p = X.concat(s.path, Path(X.end(s.path), (), (s.element,)))
            assert X.loop_is_identity(X.chain(p, X.inverse(s.path), X.path("A", (), ["x2^-1"])))
    S = graphs["sol"]
    st = S.hop_closure("K", S.G("K").parse("b"))
    assert {s.location for s in st} >= {("vertex", "K"), ("vertex", "S")}


def test_hop_closure_depth_overflow(graphs):
    S = graphs["sol"]
    with pytest.raises(HopDepthExceeded):
        S.hop_closure("K", S.G("K").parse("b"), max_depth=-1)


def test_bar_is_involution():
    assert all(bar(bar(e)) == e and bar(e) != e for e in range(20))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 5))
def test_normal_form_is_canonical(graphs, seed, n):
    X = graphs["flat"]
    rng = random.Random(seed)
    p = gog.random_loop(X, rng, n)
    q = X.chain(p, gog.random_loop(X, rng, 3))
    q = X.concat(q, X.inverse(X.reduce_path(X.chain(X.inverse(p), q))))
    assert X.normal_form(q) == X.normal_form(p)

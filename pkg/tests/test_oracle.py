import itertools

import pytest

from gogconj import oracle
from gogconj.backends import make_backend
from gogconj.words import Word


def kb():
    return make_backend("klein_bottle")


def test_ball_radius_zero():
    B = make_backend("free_abelian", rank=2)
    assert len(oracle.ball(B, 0).elements) == 1


def test_ball_free_abelian_radius_one():
    assert len(oracle.ball(make_backend("free_abelian", rank=2), 1).elements) == 5


@pytest.mark.parametrize("r", [1, 2, 3])
def test_klein_ball_matches_normal_form_count(r):
    K = kb()
    n = len(K.alphabet)
    letters = [(i, s) for i in range(n) for s in (1, -1)]
    nfs = {K.normalize(Word(K.alphabet, w))
           for k in range(r + 1) for w in itertools.product(letters, repeat=k)}
    assert len(oracle.ball(K, r).elements) == len(nfs)
    if r == 2:
        assert len(nfs) == 21


def test_graph_ball_is_closed_under_inverse(graphs):
    for X in graphs.values():
        B = oracle.ball(X, 2)
        keys = set(B.elements)
        assert X.normal_form(X.identity_path(X.base)) in keys
        assert all(X.normal_form(X.inverse(p)) in keys for p in B.elements.values())


def test_brute_conjugate_equal_inputs():
    K = kb()
    t = K.parse("t")
    assert K.normalize(oracle.brute_conjugate(K, t, t, 3)) == K.identity()


def test_brute_conjugate_klein():
    K = kb()
    h = oracle.brute_conjugate(K, K.parse("t"), K.parse("b b t"), 2)
    assert oracle.to_backend(K, h) == K.parse("b^-1")
    assert oracle.brute_conjugate(K, K.parse("t"), K.parse("b t"), 8) is None


def test_brute_conjugate_is_symmetric(graphs):
    X = graphs["klein"]
    elts = list(oracle.ball(X, 2).elements.values())
    for u, v in itertools.product(elts, elts):
        h = oracle.brute_conjugate(X, u, v, 4)
        back = oracle.brute_conjugate(X, v, u, 4)
        assert (h is None) == (back is None)
        if h is not None:
            assert X.verify_conjugate(u, v, h)
            assert X.verify_conjugate(v, u, X.inverse(h))


def test_brute_centralizer_abelian():
    B = make_backend("free_abelian", rank=2)
    assert len(oracle.brute_centralizer(B, B.parse("x1"), 3)) == len(oracle.ball(B, 3).elements)


def test_brute_centralizer_sol_left_factor():
    S = make_backend("sol", theta="2,1,1,1")
    cent = oracle.brute_centralizer(S, ((1, 0), 0), 3)
    assert cent
    assert all(S.normalize(w)[1] == 0 for w in cent)
    assert len(cent) == sum(1 for w in oracle.ball(S, 3).elements.values() if S.normalize(w)[1] == 0)


def test_brute_centralizer_klein_t():
    K = kb()
    cent = {K.normalize(w) for w in oracle.brute_centralizer(K, K.parse("t"), 3)}
    assert all(z[0][1] == 0 for z in cent)
    assert {K.parse("t"), K.parse("a"), K.parse("t^-1"), K.identity()} <= cent


def test_budget_cap(monkeypatch):
    monkeypatch.setenv(oracle.CAP_ENV, "10")
    with pytest.raises(oracle.OracleBudgetExceeded):
        oracle.ball(make_backend("free_abelian", rank=3), 3)


def test_same_element_uses_the_model():
    K = kb()
    assert oracle.same_element(K, K.parse("t t"), K.parse("a"))
    assert not oracle.same_element(K, K.parse("t b"), K.parse("b t"))


def test_negative_radius():
    with pytest.raises(ValueError):
        oracle.ball(kb(), -1)

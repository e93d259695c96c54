"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import itertools
import random
import time

import pytest

from gogconj import corpus, gog, oracle
from gogconj.backends import (
    SolBundle,
    classify_index2_extension,
    index2_extension,
    make_backend,
)
from gogconj.conjalg import (
    centralizer_in_H,
    conjugate_in_G,
    cover_of,
    cp1_index2,
    cp2_order2,
    cp3_equal_centralizers,
    twisted_conjugate,
)
from gogconj.cover import lift_loop, p_sharp

ANOSOV = ((2, 1), (1, 1))


@pytest.fixture
def report(capsys):
    def emit(n, title, ok, elapsed, limit, detail=""):
        status = "PASS" if ok and elapsed < limit else "FAIL"
        with capsys.disabled():
            print(f"\ncriterion {n} [{status}] {title}: {elapsed:.1f}s (limit {limit}s) {detail}".rstrip())
        assert ok, detail
        assert elapsed < limit, f"took {elapsed:.1f}s"
    return emit


# -- independent integer helpers ------------------------------------------------


def mat_mul(A, B):
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2)) for i in range(2))


def mat_pow(A, n):
    if n < 0:
        (a, b), (c, d) = A
        A, n = ((d, -b), (-c, a)), -n
    out = ((1, 0), (0, 1))
    for _ in range(n):
        out = mat_mul(out, A)
    return out


def mat_vec(A, x):
    return (A[0][0] * x[0] + A[0][1] * x[1], A[1][0] * x[0] + A[1][1] * x[1])


def solves(A, r):
    """Integer g with A g = r (A nonsingular), by the adjugate."""
    (a, b), (c, d) = A
    det = a * d - b * c
    g0, g1 = d * r[0] - b * r[1], -c * r[0] + a * r[1]
    if g0 % det or g1 % det:
        return None
    return (g0 // det, g1 // det)


def period_mod(A, m):
    """Smallest P > 0 with A^P = I modulo m."""
    m = abs(m)
    if m == 1:
        return 1
    P, cur = 1, tuple(tuple(x % m for x in row) for row in A)
    while cur != ((1 % m, 0), (0, 1 % m)):
        cur = tuple(tuple(x % m for x in row) for row in mat_mul(cur, A))
        P += 1
    return P


def sol_residue_oracle(theta, u, v):
    """Conjugacy of x t^l and y t^l2 in Z^2 x|_theta Z by orbits and residues."""
    (x, l), (y, l2) = u, v
    if l != l2:
        return False
    if l == 0:
        # hyperbolic theta moves every nonzero vector off any bounded set quickly
        return any(mat_vec(mat_pow(theta, j), y) == x for j in range(-40, 41))
    tl = mat_pow(theta, l)
    A = ((1 - tl[0][0], -tl[0][1]), (-tl[1][0], 1 - tl[1][1]))
    det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    for j in range(period_mod(theta, det)):
        ty = mat_vec(mat_pow(theta, j), y)
        if solves(A, (x[0] - ty[0], x[1] - ty[1])) is not None:
            return True
    return False


# -- 1 ---------------------------------------------------------------------------


def test_criterion_1_reduction_length_invariance(report):
    t0 = time.time()
    bad = 0
    for name in ["flat", "p2", "sol"]:
        X = corpus(name)
        rng = random.Random(2024)
        for _ in range(1000):
            p = gog.random_loop(X, rng, rng.randint(0, 10))
            lens = {len(X.reduce_path(p, order=o).edges) for o in ("stack", "left", "right")}
            lens |= {len(X.reduce_path(p, order="random", rng=random.Random(s)).edges) for s in range(3)}
            bad += len(lens) != 1
    report(1, "reduction length invariance", bad == 0, time.time() - t0, 30, f"mismatches={bad}")


# -- 2 ---------------------------------------------------------------------------


def test_criterion_2_virtualzz_criteria(report):
    t0 = time.time()
    bad, total = 0, 0
    rng = range(-3, 4)
    for kind in ["moebius_circle", "klein_bottle", "torus_semidirect_z2"]:
        B = make_backend(kind)
        elts = [B.parse(f"a^{n} b^{m} t") for n in rng for m in rng]
        for u, v in itertools.product(elts, elts):
            total += 1
            h = B.conjugate(u, v)
            found = oracle.brute_conjugate(B, u, v, 8) is not None
            if h is not None and B.conj(h, v) != u:
                bad += 1
            elif (h is not None) != found:
                bad += 1
    report(2, "virtually Z+Z criteria vs oracle", bad == 0, time.time() - t0, 60, f"pairs={total} mismatches={bad}")


# -- 3 ---------------------------------------------------------------------------


def test_criterion_3_cover_correctness(report):
    t0 = time.time()
    bad, checks = 0, 0
    for name in ["klein", "flat", "p2", "sol", "kleinedge", "seifert2"]:
        M = corpus(name)
        C = cover_of(M)
        N = C.N
        for ne in range(N.nedges):
            H = N.Ge(ne)
            e = C.p_edge[ne]
            D = M.G(M.t(e))
            for i in range(len(H.alphabet)):
                z = H.gen(i)
                checks += 1
                left = C.pv[N.t(ne)].apply(N.mono[ne].apply(z))
                bad += left != D.conj(C.mu[ne], M.mono[e].apply(C.pe[ne // 2].apply(z)))
        rng = random.Random(17)
        for _ in range(1000):
            l = N.reduce_path(gog.random_loop(N, rng, rng.randint(0, 10)))
            checks += 1
            bad += not M.is_reduced(p_sharp(C, l))
        for g in oracle.ball(M, 5).elements.values():
            l = lift_loop(C, g)
            if l is None:
                continue
            checks += 1
            bad += not M.loop_is_identity(M.concat(p_sharp(C, l), M.inverse(g)))
    report(3, "cover correctness", bad == 0, time.time() - t0, 60, f"checks={checks} failures={bad}")


# -- 4 ---------------------------------------------------------------------------


def presentation_ball(p, r):
    """Normal forms t^n v^e of <v, t | [v, t], v^2 = t^p>, by word length."""
    def mul(x, y):
        (n1, e1), (n2, e2) = x, y
        return (n1 + n2 + p * (e1 & e2), e1 ^ e2)

    v_inv = (-p, 1)
    gens = [(1, 0), (-1, 0), (0, 1), v_inv]
    seen = {(0, 0)}
    layer = [(0, 0)]
    for _ in range(r):
        layer = [q for x in layer for g in gens for q in [mul(x, g)] if q not in seen and not seen.add(q)]
    return seen, mul


def mm(A, B):
    return tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in zip(*B)) for row in A)


def test_criterion_4_index2_dichotomy(report):
    t0 = time.time()
    notes = []
    # Z + Z2: a central element of order two, judged in the faithful matrix model
    assert classify_index2_extension(4, 1) == "ZplusZ2"
    keys = list(oracle.ball(index2_extension(4, 1), 8).elements)
    I = keys[0]  # balls start from the identity
    central2 = [K for K in keys if K != I and mm(K, K) == I and all(mm(K, G) == mm(G, K) for G in keys)]
    ok1 = bool(central2)
    notes.append(f"central-order-2={len(central2)}")
    # Z2 * Z2: v^2 = 1 and v t v^-1 = t^-1
    assert classify_index2_extension(0, -1) == "InfiniteDihedral"
    D = index2_extension(0, -1)
    keys = list(oracle.ball(D, 8).elements)
    I = keys[0]
    T, V = oracle.matrix_model(D)
    Ti = next(K for K in keys if mm(T, K) == I)
    Vi = next(K for K in keys if mm(V, K) == I)
    ok2 = mm(V, V) == I and mm(mm(V, T), Vi) == Ti
    # p odd, eps = +1: no element of order two
    assert classify_index2_extension(1, 1) == "torsion-free"
    ok3 = True
    for p in (1, 3, -1):
        seen, mul = presentation_ball(p, 8)
        ok3 &= not [x for x in seen if x != (0, 0) and mul(x, x) == (0, 0)]
    notes.append("odd-p-order-2=none" if ok3 else "odd-p-order-2=found")
    report(4, "index-2 extension dichotomy", ok1 and ok2 and ok3, time.time() - t0, 30, " ".join(notes))


# -- 5 ---------------------------------------------------------------------------


def test_criterion_5_sol_conjugacy(report):
    t0 = time.time()
    S = SolBundle(ANOSOV)
    rng = range(-3, 4)
    elts = [((n, m), k) for n in rng for m in rng for k in range(-2, 3)]
    bad = 0
    for u, v in itertools.product(elts, elts):
        h = S.conjugate(u, v)
        if h is not None and S.conj(h, v) != u:
            bad += 1
        elif (h is not None) != sol_residue_oracle(ANOSOV, u, v):
            bad += 1
    report(5, "Sol conjugacy vs residue/orbit oracle", bad == 0, time.time() - t0, 60,
           f"pairs={len(elts) ** 2} mismatches={bad}")


# -- 6 ---------------------------------------------------------------------------


def test_criterion_6_end_to_end(report):
    t0 = time.time()
    bad, total, unconfirmed = 0, 0, 0
    for name in ["flat", "p2", "klein"]:
        M = corpus(name)
        C = cover_of(M)
        elts = list(oracle.ball(M, 4).elements.values())
        for u, v in itertools.product(elts, elts):
            total += 1
            V = conjugate_in_G(C, u, v)
            found = oracle.brute_conjugate(M, u, v, 8) is not None
            if V.conjugate:
                bad += not M.verify_conjugate(u, v, V.witness)
                unconfirmed += not found
            else:
                bad += found
    report(6, "end-to-end conjugacy vs oracle", bad == 0, time.time() - t0, 600,
           f"pairs={total} mismatches={bad} yes-beyond-radius={unconfirmed}")


# -- 7 ---------------------------------------------------------------------------


def test_criterion_7_certificates(report):
    t0 = time.time()
    counts = {"cyclically_reduce": 0, "cp1": 0, "cp2": 0, "cp3": 0}
    bad = 0
    for name, r in [("klein", 3), ("flat", 2), ("p2", 3), ("sol", 2), ("kleinedge", 3), ("seifert2", 2)]:
        M = corpus(name)
        C = cover_of(M)
        T = M.tree
        elts = list(oracle.ball(M, r).elements.values())
        inH = [g for g in elts if lift_loop(C, g) is not None]
        outH = [g for g in elts if lift_loop(C, g) is None]
        for p in elts:
            c, alpha = M.cyclically_reduce(T, p)
            counts["cyclically_reduce"] += 1
            bad += not M.verify_conjugate(c, p, alpha)
        for u, v in itertools.product(inH, inH):
            h = cp1_index2(C, u, v)
            if h is not None:
                counts["cp1"] += 1
                bad += not M.verify_conjugate(u, v, h)
        two = [g for g in outH if M.loop_is_identity(M.concat(g, g))]
        for u, v in itertools.product(two, two):
            h = cp2_order2(C, u, v)
            if h is not None:
                counts["cp2"] += 1
                bad += not M.verify_conjugate(u, v, h)
        inf = [g for g in outH if g not in two]
        for u, v in itertools.product(inf, inf):
            u2, v2 = M.reduce_path(M.concat(u, u)), M.reduce_path(M.concat(v, v))
            k = cp1_index2(C, u2, v2)
            if k is None or centralizer_in_H(C, v2).kind != "InfiniteCyclic":
                continue
            h = cp3_equal_centralizers(C, u, v, k)
            if h is not None:
                counts["cp3"] += 1
                bad += not M.verify_conjugate(u, v, h)
    ok = bad == 0 and all(counts.values())
    detail = " ".join(f"{k}={n}" for k, n in counts.items()) + f" failures={bad}"
    report(7, "certificate composition", ok, time.time() - t0, 60, detail)


# -- 8 ---------------------------------------------------------------------------


def twisted_residue_oracle(theta, u, v):
    A = ((theta[0][0] - 1, theta[0][1]), (theta[1][0], theta[1][1] - 1))
    return solves(A, (v[0] - u[0], v[1] - u[1])) is not None


@pytest.mark.parametrize("theta", [ANOSOV, ((3, 1), (2, 1))])
def test_criterion_8_twisted_conjugacy(report, theta):
    t0 = time.time()
    B = make_backend("free_abelian", rank=2, gens="a,b")
    rng = random.Random(8)

    def vec():
        return (rng.randint(-6, 6), rng.randint(-6, 6))

    def ok_witness(g, u, v):
        tg = mat_vec(theta, g[0])
        return tuple(a + b - c for a, b, c in zip(tg, u, g[0])) == v

    bad, yes = 0, 0
    for _ in range(200):
        u, g = vec(), vec()
        tg = mat_vec(theta, g)
        v = tuple(a + b - c for a, b, c in zip(tg, u, g))
        w = twisted_conjugate(B, theta, (u, 0), (v, 0))
        bad += w is None or not ok_witness(w, u, v)
    for _ in range(200):
        u, v = vec(), vec()
        w = twisted_conjugate(B, theta, (u, 0), (v, 0))
        yes += w is not None
        if w is not None and not ok_witness(w, u, v):
            bad += 1
        elif (w is not None) != twisted_residue_oracle(theta, u, v):
            bad += 1
    report(8, f"twisted conjugacy theta={theta}", bad == 0, time.time() - t0, 60,
           f"random-yes={yes}/200 mismatches={bad}")

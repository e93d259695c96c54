"""Brute-force ground truth: balls, conjugator search, centralizer search.

Backends are evaluated in faithful integer matrix models built from their
presentations, so the oracle shares no arithmetic with the backends.
Graphs of groups use reduced-path normal forms as canonical keys.
Answers are always qualified by the search radius.
"""

import os
import weakref
from dataclasses import dataclass

from .gog import GraphOfGroups
from .words import Word

CAP_ENV = "GOGCONJ_ORACLE_CAP"
DEFAULT_CAP = 200_000


class OracleBudgetExceeded(MemoryError):
    pass


def _cap():
    return int(os.environ.get(CAP_ENV, DEFAULT_CAP))


# -- integer matrices ---------------------------------------------------------


def _mm(A, B):
    return tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in zip(*B)) for row in A)


def _eye(n):
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def _affine(lin, trans):
    n = len(trans)
    rows = [tuple(lin[i]) + (trans[i],) for i in range(n)]
    rows.append((0,) * n + (1,))
    return tuple(rows)


def _inv_unimodular(A):
    """Inverse of an integer matrix with determinant +-1 (fraction-free)."""
    n = len(A)
    M = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(A)]
    for c in range(n):
        p = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[p] = M[p], M[c]
        # reduce column c below and above by integer row operations
        while True:
            nz = [r for r in range(n) if r != c and M[r][c] != 0]
            if not nz:
                break
            r = nz[0]
            if abs(M[r][c]) < abs(M[c][c]):
                M[c], M[r] = M[r], M[c]
                continue
            q = M[r][c] // M[c][c]
            M[r] = [x - q * y for x, y in zip(M[r], M[c])]
        if abs(M[c][c]) != 1:
            raise ValueError("matrix is not unimodular")
        if M[c][c] == -1:
            M[c] = [-x for x in M[c]]
    return tuple(tuple(r[n:]) for r in M)


def _translations(k, gens):
    return [_affine(_eye(k), v) for v in gens]


def matrix_model(B):
    """Generator matrices of a faithful integer representation of B."""
    kind = B.kind
    p = B.params
    if kind == "trivial":
        return []
    if kind == "cyclic_order2":
        return [((-1,),)]
    if kind == "free_abelian":
        k = int(p["rank"])
        return _translations(k, _eye(k))
    if kind == "klein_bottle":
        # doubled x-coordinate: t is a glide reflection with t^2 = a
        a, b = _translations(2, [(2, 0), (0, 1)])
        return [a, b, _affine(((1, 0), (0, -1)), (1, 0))]
    if kind == "torus_semidirect_z2":
        a, b = _translations(2, [(1, 0), (0, 1)])
        return [a, b, _affine(((-1, 0), (0, -1)), (0, 0))]
    if kind == "moebius_circle":
        # abelian on t, b with a = t^2
        return _translations(2, [(2, 0), (0, 1), (1, 0)])
    if kind == "z_plus_z2":
        q = int(p.get("p", 0))
        return [_affine(((1, 0), (0, 1)), (0, 2)), _affine(((-1, 0), (0, 1)), (0, q))]
    if kind == "infinite_dihedral":
        return [_affine(((1,),), (1,)), _affine(((-1,),), (0,))]
    if kind == "sol":
        th = [int(x) for x in p["theta"].split(",")]
        lin_t = ((th[0], th[1], 0), (th[2], th[3], 0), (0, 0, 1))
        a, b = _translations(3, [(1, 0, 0), (0, 1, 0)])
        return [a, b, _affine(lin_t, (0, 0, 1))]
    if kind == "free_group":
        # conjugates of one Sanov generator by powers of the other: a free basis
        A, Bm = ((1, 2), (0, 1)), ((1, 0), (2, 1))
        Ai = _inv_unimodular(A)
        out, P, Pi = [], _eye(2), _eye(2)
        for _ in range(int(p["rank"])):
            out.append(_mm(_mm(P, Bm), Pi))
            P, Pi = _mm(P, A), _mm(Ai, Pi)
        return out
    raise ValueError(f"no matrix model for kind {kind!r}")


class _Model:
    def __init__(self, B):
        self.B = B
        gens = matrix_model(B)
        self.dim = len(gens[0]) if gens else 1
        self.gens = gens
        self.invs = [_inv_unimodular(g) for g in gens]

    def letter(self, i, s):
        return self.gens[i] if s == 1 else self.invs[i]

    def evaluate(self, w):
        out = _eye(self.dim)
        for i, s in w.letters:
            out = _mm(out, self.letter(i, s))
        return out

    def element(self, x):
        return self.evaluate(self.B.nf_word(x))


# -- balls -------------------------------------------------------------------


@dataclass
class Ball:
    radius: int
    elements: dict  # canonical key -> shortest representative


class _GraphSpace:
    """Loops at the base; keys are normal forms."""

    def __init__(self, X):
        self.X = X
        T = X.tree
        gens = [p for _, p in X.generators(T)]
        self.gens = [X.normal_form(g) for g in gens] + [X.normal_form(X.inverse(g)) for g in gens]
        self.identity = X.normal_form(X.identity_path(X.base))

    def key(self, p):
        return self.X.normal_form(p)

    def mul(self, p, q):
        return self.X.normal_form(self.X.concat(p, q))

    def inv(self, p):
        return self.X.normal_form(self.X.inverse(p))

    def rep(self, p):
        return p


class _BackendSpace:
    """Words over the generators; keys are model matrices."""

    def __init__(self, B):
        self.B = B
        self.model = _Model(B)
        n = len(B.alphabet)
        self.gens = [Word(B.alphabet, ((i, s),)) for i in range(n) for s in (1, -1)]
        self.identity = Word(B.alphabet, ())
        self._invs = {}

    def inv_key(self, k):
        if k not in self._invs:
            self._invs[k] = _inv_unimodular(k)
        return self._invs[k]

    def key(self, w):
        return self.model.evaluate(w)

    def mul(self, p, q):
        return p * q

    def inv(self, p):
        return p.inverse()

    def rep(self, w):
        return w


_spaces = weakref.WeakKeyDictionary()


def _space(X):
    if X not in _spaces:
        _spaces[X] = {"space": _GraphSpace(X) if isinstance(X, GraphOfGroups) else _BackendSpace(X),
                      "balls": {}, "conj": {}}
    return _spaces[X]


def ball(X, r):
    """All elements of word length <= r, with shortest representatives."""
    if r < 0:
        raise ValueError("radius must be non-negative")
    entry = _space(X)
    S, balls = entry["space"], entry["balls"]
    if r in balls:
        return balls[r]
    cap = _cap()
    elems = {S.key(S.identity): S.identity}
    layer = [S.identity]
    for _ in range(r):
        nxt = []
        for p in layer:
            for g in S.gens:
                q = S.mul(p, g)
                k = S.key(q)
                if k not in elems:
                    elems[k] = q
                    nxt.append(q)
                    if len(elems) > cap:
                        raise OracleBudgetExceeded(
                            f"ball of radius {r} exceeds {cap} elements (set {CAP_ENV} to raise)")
        layer = nxt
    balls[r] = Ball(r, elems)
    return balls[r]


def _as_key(X, S, x):
    """Canonical key of an input: a loop for graphs, an element or word for backends."""
    if isinstance(S, _GraphSpace):
        return S.key(x)
    if isinstance(x, Word):
        return S.key(x)
    return S.model.element(x)


def _conj_keys(X, S, r, x_key, x):
    """key of g x g^-1 -> g over the radius-r ball (memoized per element)."""
    memo = _space(X)["conj"]
    if (r, x_key) in memo:
        return memo[(r, x_key)]
    B = ball(X, r)
    out = memo[(r, x_key)] = {}
    if isinstance(S, _GraphSpace):
        for g in B.elements.values():
            k = S.key(S.X.chain(g, x, S.X.inverse(g)))
            out.setdefault(k, g)
    else:
        for gk, g in B.elements.items():
            k = _mm(_mm(gk, x_key), S.inv_key(gk))
            out.setdefault(k, g)
    return out


def brute_conjugate(X, u, v, r):
    """A representative h of length <= r with h v h^-1 = u, or None.

    None means only that no conjugator exists within radius r.
    """
    S = _space(X)["space"]
    ku, kv = _as_key(X, S, u), _as_key(X, S, v)
    if ku == kv:
        return S.identity
    r1, r2 = (r + 1) // 2, r // 2
    # g1 u g1^-1 = g2 v g2^-1  gives  h = g1^-1 g2
    cu = _conj_keys(X, S, r1, ku, u if isinstance(S, _GraphSpace) else None)
    cv = _conj_keys(X, S, r2, kv, v if isinstance(S, _GraphSpace) else None)
    best = None
    for k, g2 in cv.items():
        g1i = cu.get(k)
        if g1i is None:
            continue
        h = S.mul(S.inv(g1i), g2)
        size = len(h) if isinstance(S, _BackendSpace) else len(h.edges)
        if best is None or size < best[0]:
            best = (size, h)
    return None if best is None else best[1]


def brute_centralizer(X, u, r):
    """All elements of the radius-r ball commuting with u."""
    S = _space(X)["space"]
    ku = _as_key(X, S, u)
    out = []
    for gk, g in ball(X, r).elements.items():
        if isinstance(S, _GraphSpace):
            if S.key(S.X.chain(g, u, S.X.inverse(g))) == ku:
                out.append(g)
        elif _mm(gk, ku) == _mm(ku, gk):
            out.append(g)
    return out


def to_backend(B, w):
    """Backend element of a word found by the oracle."""
    return B.normalize(w)


def same_element(B, x, y):
    """Equality of backend elements judged by the matrix model."""
    m = _space(B)["space"].model
    return m.element(x) == m.element(y)

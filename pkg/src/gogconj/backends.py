"""Vertex and edge group backends.

Every backend works on hashable normal forms.  Most kinds are
virtually abelian and share one implementation, :class:`AffineGroup`:
an element is a pair ``(x, f)`` with ``x`` in ``Z^k`` and ``f`` in a finite
group ``F``, multiplied by ``(x, f)(y, g) = (x + A_f y + c(f, g), fg)``.
Conjugacy, centralizers and subgroup questions then become integer linear
algebra (see :mod:`gogconj.lattice`).  The Sol mapping torus and free
groups have their own classes.
"""

from dataclasses import dataclass, field
from itertools import product

from . import lattice as lat
from .words import Alphabet, Word, WordError


class BackendError(ValueError):
    pass


class CapabilityMissing(RuntimeError):
    """Raised when a backend has no exact solver for a question."""


class Backend:
    kind = "abstract"

    def __init__(self, names, params=None):
        self.alphabet = Alphabet(names, label=self.kind)
        self.params = dict(params or {})

    def __repr__(self):
        extra = " ".join(f"{k}={v}" for k, v in self.params.items())
        return f"<{self.kind} {extra}>".replace(" >", ">")

    # -- words ---------------------------------------------------------
    def gen(self, i):
        raise NotImplementedError

    def normalize(self, w):
        if isinstance(w, str):
            w = self.alphabet.parse(w)
        if w.alphabet is not self.alphabet:
            if w.alphabet.names != self.alphabet.names:
                raise WordError(f"word over {w.alphabet!r} given to {self!r}")
        x = self.identity()
        for i, s in w.letters:
            g = self.gen(i)
            x = self.mul(x, g if s == 1 else self.inv(g))
        return x

    def parse(self, text):
        return self.normalize(self.alphabet.parse(text))

    def nf_word(self, x):
        raise NotImplementedError

    def fmt(self, x):
        return str(self.nf_word(x))

    # -- group structure -----------------------------------------------
    def is_identity(self, x):
        return x == self.identity()

    def power(self, x, n):
        if n < 0:
            x, n = self.inv(x), -n
        r = self.identity()
        while n:
            if n & 1:
                r = self.mul(r, x)
            x = self.mul(x, x)
            n >>= 1
        return r

    def conj(self, h, x):
        """h x h^-1"""
        return self.mul(self.mul(h, x), self.inv(h))

    def order_two(self, u):
        return not self.is_identity(u) and self.is_identity(self.mul(u, u))

    def commutes(self, a, b):
        return self.mul(a, b) == self.mul(b, a)

    def word_length(self, x):
        return len(self.nf_word(x))


class AffineGroup(Backend):
    """Virtually abelian group ``Z^k`` extended by a finite group ``F``.

    ``fmul`` is the multiplication table of ``F`` (identity 0), ``A`` the
    action matrices, ``cocycle`` a dict ``(f, g) -> vector`` (zero when
    absent, and zero whenever f or g is the identity).  ``gens`` gives the
    normal form of each generator, ``trans_gens[i]`` the generator equal to
    the i-th unit translation and ``section[f]`` a word (tuple of letters)
    equal to ``(0, f)``.
    """

    def __init__(self, kind, names, k, fmul, A, cocycle, gens, trans_gens, section, params=None):
        self.kind = kind
        super().__init__(names, params)
        self.k = k
        self.fmul = fmul
        self.order = len(fmul)
        self.finv = [next(g for g in range(self.order) if fmul[f][g] == 0) for f in range(self.order)]
        self.A = [tuple(tuple(r) for r in a) for a in A]
        self.cocycle = {key: tuple(v) for key, v in cocycle.items()}
        self.gens = list(gens)
        self.trans_gens = list(trans_gens)
        self.section = [tuple(s) for s in section]
        self._zero = (0,) * k
        self._Lf = [lat.hnf(lat.transpose(self._i_minus(f)), k) for f in range(self.order)]

    def _i_minus(self, f):
        A = self.A[f]
        return tuple(tuple((1 if i == j else 0) - A[i][j] for j in range(self.k)) for i in range(self.k))

    def c(self, f, g):
        return self.cocycle.get((f, g), self._zero)

    def identity(self):
        return (self._zero, 0)

    def gen(self, i):
        return self.gens[i]

    def mul(self, x, y):
        (a, f), (b, g) = x, y
        Ab = lat.matvec(self.A[f], b)
        cc = self.c(f, g)
        return (tuple(p + q + r for p, q, r in zip(a, Ab, cc)), self.fmul[f][g])

    def inv(self, x):
        a, f = x
        fi = self.finv[f]
        v = tuple(p + q for p, q in zip(a, self.c(f, fi)))
        return (tuple(-q for q in lat.matvec(self.A[fi], v)), fi)

    def translation(self, v):
        return (tuple(v), 0)

    def nf_word(self, x):
        a, f = x
        letters = []
        for i, n in enumerate(a):
            letters.extend([(self.trans_gens[i], 1 if n > 0 else -1)] * abs(n))
        letters.extend(self.section[f])
        return Word(self.alphabet, tuple(letters))

    def elements_in_box(self, radius):
        """All normal forms with translation coordinates bounded by radius."""
        rng = range(-radius, radius + 1)
        for f in range(self.order):
            for a in product(rng, repeat=self.k):
                yield (a, f)

    # -- affine functions of the translation part ----------------------
    def linearize(self, fn, p):
        """Write ``fn(w)`` (w in Z^p) as ``(offset + M w, slice)``.

        ``fn`` must be affine in ``w`` with constant slice, which holds for
        any product of fixed elements with elements whose translation is
        affine in ``w``.  Returns ``(slice, offset, M)``.
        """
        x0, f = fn((0,) * p)
        cols = []
        for j in range(p):
            e = tuple(1 if i == j else 0 for i in range(p))
            xj, fj = fn(e)
            if fj != f:
                raise BackendError("non-affine dependence in linearize")
            cols.append(tuple(a - b for a, b in zip(xj, x0)))
        M = lat.transpose(cols, self.k) if cols else tuple(() for _ in range(self.k))
        return f, x0, M

    def conj_action(self, g, u):
        """(slice, d, M): (y, g) u (y, g)^-1 = (d + M y, slice)."""
        return self.linearize(lambda y: self.conj((tuple(y), g), u), self.k)

    # -- conjugacy ------------------------------------------------------
    def class_key(self, u):
        best = None
        for g in range(self.order):
            x, f = self.conj(((self._zero), g), u)
            key = (f, lat.reduce_mod(x, self._Lf[f]))
            if best is None or key < best:
                best = key
        return best

    def _solutions(self, u, v):
        """Yield (g, y0, kernel) with (y, g) v (y, g)^-1 = u for y in y0 + kernel."""
        xu, fu = u
        for g in range(self.order):
            s, d, M = self.conj_action(g, v)
            if s != fu:
                continue
            sol = lat.solve(M, tuple(a - b for a, b in zip(xu, d)))
            if sol is not None:
                yield g, sol[0], sol[1]

    def _short(self, y0, ker):
        best = y0
        if ker:
            for cs in product(range(-2, 3), repeat=len(ker)):
                y = y0
                for c, kv in zip(cs, ker):
                    y = tuple(a + c * b for a, b in zip(y, kv))
                if (lat.l1norm(y), y) < (lat.l1norm(best), best):
                    best = y
        return best

    def conjugate(self, u, v):
        """A witness h with u = h v h^-1, or None."""
        if self.class_key(u) != self.class_key(v):
            return None
        cands = []
        for g, y0, ker in self._solutions(u, v):
            y = self._short(y0, ker)
            h = (y, g)
            cands.append((self.word_length(h), h))
        h = min(cands)[1]
        assert self.conj(h, v) == u
        return h

    def centralizer(self, u):
        pieces = []
        for g, y0, ker in self._solutions(u, u):
            pieces.append(((y0, g), ker))
        covered = {p[0][1] for p in pieces if p[1] == lat.identity(self.k)}
        if len(covered) == self.order:
            return Subgroup.whole(self)
        return Subgroup.cosets(self, pieces)

    def cyclic_log(self, g, y):
        """n with g^n = y, or None."""
        if self.is_identity(g):
            return 0 if self.is_identity(y) else None
        # order of the slice of g
        o, p = 1, self.mul(g, self.identity())
        while p[1] != 0:
            p = self.mul(p, g)
            o += 1
        # p = g^o is a translation
        for r in range(o):
            rest = self.mul(y, self.power(g, -r))
            if rest[1] != 0:
                continue
            if not any(p[0]):
                if not any(rest[0]):
                    return r
                continue
            sol = lat.solve(lat.transpose([p[0]]), rest[0])
            if sol is not None:
                return r + o * sol[0][0]
        return None


def _z2(k, A1, c11=None):
    return dict(fmul=[[0, 1], [1, 0]], A=[lat.identity(k), A1],
                cocycle={} if c11 is None else {(1, 1): c11})


def trivial_group():
    return AffineGroup("trivial", (), 0, [[0]], [()], {}, [], [], [()])


def cyclic_order2(gens=("a",)):
    return AffineGroup("cyclic_order2", gens, 0, [[0, 1], [1, 0]], [(), ()], {},
                       [((), 1)], [], [(), ((0, 1),)])


def free_abelian(rank, gens=None):
    gens = tuple(gens) if gens else tuple(f"x{i + 1}" for i in range(rank))
    if len(gens) != rank:
        raise BackendError("rank and generator names disagree")
    I = lat.identity(rank)
    return AffineGroup("free_abelian", gens, rank, [[0]], [I], {},
                       [(I[i], 0) for i in range(rank)], list(range(rank)), [()],
                       params={"rank": rank})


def klein_bottle(gens=("a", "b", "t")):
    z = _z2(2, ((1, 0), (0, -1)), (1, 0))
    return AffineGroup("klein_bottle", gens, 2, gens=[((1, 0), 0), ((0, 1), 0), ((0, 0), 1)],
                       trans_gens=[0, 1], section=[(), ((2, 1),)], **z)


def torus_semidirect_z2(gens=("a", "b", "t")):
    z = _z2(2, ((-1, 0), (0, -1)))
    return AffineGroup("torus_semidirect_z2", gens, 2, gens=[((1, 0), 0), ((0, 1), 0), ((0, 0), 1)],
                       trans_gens=[0, 1], section=[(), ((2, 1),)], **z)


def moebius_circle(gens=("a", "b", "t")):
    # coordinates (k, m) for t^k b^m, with a = t^2
    return AffineGroup("moebius_circle", gens, 2, [[0]], [lat.identity(2)], {},
                       [((2, 0), 0), ((0, 1), 0), ((1, 0), 0)], [2, 1], [()])


def z_plus_z2(p=0, gens=("t", "v")):
    """<t, v | [t, v], v^2 = t^p>; isomorphic to Z + Z2 when p is even."""
    z = _z2(1, ((1,),), (p,))
    params = {"p": p} if p else {}
    return AffineGroup("z_plus_z2", gens, 1, gens=[((1,), 0), ((0,), 1)],
                       trans_gens=[0], section=[(), ((1, 1),)], params=params, **z)


def infinite_dihedral(gens=("t", "v")):
    z = _z2(1, ((-1,),))
    return AffineGroup("infinite_dihedral", gens, 1, gens=[((1,), 0), ((0,), 1)],
                       trans_gens=[0], section=[(), ((1, 1),)], **z)


def classify_index2_extension(p, eps):
    """Which group is <v, t | t^v = t^eps, v^2 = t^p>?

    Returns ``"ZplusZ2"``, ``"InfiniteDihedral"`` or ``"torsion-free"``.
    """
    if eps == 1 and p % 2 == 0:
        return "ZplusZ2"
    if eps == -1 and p == 0:
        return "InfiniteDihedral"
    return "torsion-free"


def index2_extension(p, eps):
    """Backend for <v, t | t^v = t^eps, v^2 = t^p> (eps = -1 needs p = 0)."""
    if eps == 1:
        return z_plus_z2(p)
    if p != 0:
        raise CapabilityMissing("t^v = t^-1 with v^2 = t^p, p != 0, has finite t")
    return infinite_dihedral()


# ---------------------------------------------------------------------------
# Sol mapping tori


def _mat_pow(M, n):
    if n < 0:
        (a, b), (c, d) = M
        M = ((d, -b), (-c, a))
        n = -n
    R = lat.identity(2)
    while n:
        if n & 1:
            R = lat.matmul(R, M)
        M = lat.matmul(M, M)
        n >>= 1
    return R


class SolBundle(Backend):
    """``Z^2 x|_theta Z``: elements ``((n, m), k)`` meaning ``x t^k``."""

    kind = "sol"

    def __init__(self, theta, gens=("a", "b", "t")):
        theta = tuple(tuple(r) for r in theta)
        if lat.det2(theta) != 1:
            raise BackendError(f"theta={theta} must have determinant 1")
        tr = theta[0][0] + theta[1][1]
        self.anosov = abs(tr) > 2
        self.period = None
        if not self.anosov:
            if abs(tr) == 2 and theta not in (lat.identity(2), ((-1, 0), (0, -1))):
                raise BackendError(f"theta={theta} is neither Anosov nor of finite order")
            self.period = next(n for n in (1, 2, 3, 4, 6) if _mat_pow(theta, n) == lat.identity(2))
        super().__init__(gens, {"theta": ",".join(str(x) for r in theta for x in r)})
        self.theta = theta
        self.k = 2
        self._pow = {}

    # fiber coordinates are affine in the same way as for AffineGroup
    linearize = AffineGroup.linearize

    def tpow(self, n):
        if n not in self._pow:
            self._pow[n] = _mat_pow(self.theta, n)
        return self._pow[n]

    def identity(self):
        return ((0, 0), 0)

    def gen(self, i):
        return (((1, 0), 0), ((0, 1), 0), ((0, 0), 1))[i]

    def mul(self, x, y):
        (a, k), (b, l) = x, y
        tb = lat.matvec(self.tpow(k), b)
        return ((a[0] + tb[0], a[1] + tb[1]), k + l)

    def inv(self, x):
        a, k = x
        v = lat.matvec(self.tpow(-k), a)
        return ((-v[0], -v[1]), -k)

    def nf_word(self, x):
        (n, m), k = x
        letters = [(0, 1 if n > 0 else -1)] * abs(n) + [(1, 1 if m > 0 else -1)] * abs(m)
        letters += [(2, 1 if k > 0 else -1)] * abs(k)
        return Word(self.alphabet, tuple(letters))

    def _lattice(self, l):
        I_minus = tuple(tuple((1 if i == j else 0) - self.tpow(l)[i][j] for j in range(2)) for i in range(2))
        return I_minus, lat.hnf(lat.transpose(I_minus), 2)

    def _j_range(self, l):
        if self.period is not None:
            return range(self.period)
        return range(abs(l))

    def _orbit_hits(self, x, y):
        """All j with theta^j y == x (k = 0 case)."""
        if not any(y):
            return [0] if not any(x) else []
        if self.period is not None:
            return [j for j in range(self.period) if lat.matvec(self.tpow(j), y) == x]

        def f(j):
            v = lat.matvec(self.tpow(j), y)
            return v[0] * v[0] + v[1] * v[1]

        target = x[0] * x[0] + x[1] * x[1]
        # f is strictly convex in j: walk to the minimum, then outwards
        j = 0
        while f(j - 1) < f(j):
            j -= 1
        while f(j + 1) < f(j):
            j += 1
        hits = []
        for step in (1, -1):
            i = j if step == 1 else j - 1
            while f(i) <= target:
                if lat.matvec(self.tpow(i), y) == x:
                    hits.append(i)
                i += step
        return sorted(set(hits))

    def _solutions(self, u, v):
        """Yield (j, z0, kernel): (z, j) v (z, j)^-1 = u."""
        (x, l), (y, l2) = u, v
        if l != l2:
            return
        I_minus, _ = self._lattice(l)
        if l == 0:
            for j in self._orbit_hits(x, y):
                yield j, (0, 0), ((1, 0), (0, 1))
            return
        for j in self._j_range(l):
            rhs = tuple(a - b for a, b in zip(x, lat.matvec(self.tpow(j), y)))
            sol = lat.solve(I_minus, rhs)
            if sol is not None:
                yield j, sol[0], sol[1]

    def class_key(self, u):
        x, l = u
        if l == 0:
            if self.period is not None:
                return (0, min(lat.matvec(self.tpow(j), x) for j in range(self.period)))
            if not any(x):
                return (0, (0, 0))
            norm = lambda v: (v[0] * v[0] + v[1] * v[1], v)
            j = 0
            v = lambda i: lat.matvec(self.tpow(i), x)
            while norm(v(j - 1)) < norm(v(j)):
                j -= 1
            while norm(v(j + 1)) < norm(v(j)):
                j += 1
            return (0, min(v(j - 1), v(j), v(j + 1), key=norm))
        _, L = self._lattice(l)
        return (l, min(lat.reduce_mod(lat.matvec(self.tpow(j), x), L) for j in self._j_range(l)))

    def conjugate(self, u, v):
        cands = []
        for j, z0, ker in self._solutions(u, v):
            z = z0 if u[1] != 0 else (0, 0)
            h = (z, j)
            if self.conj(h, v) == u:
                cands.append((self.word_length(h), h))
        if not cands:
            return None
        return min(cands)[1]

    def centralizer(self, u):
        x, l = u
        if self.is_identity(u):
            return Subgroup.whole(self)
        if self.period is not None:
            raise CapabilityMissing("centralizers for finite-order monodromy")
        if l == 0:
            # theta has no eigenvalue 1, so only j = 0 fixes x: the fiber
            return Subgroup.cosets(self, [(((0, 0), 0), ((1, 0), (0, 1)))], note="left factor")
        I_minus, _ = self._lattice(l)
        for j in range(1, abs(l) + 1):
            rhs = tuple(a - b for a, b in zip(x, lat.matvec(self.tpow(j), x)))
            sol = lat.solve(I_minus, rhs)
            if sol is not None:
                h = (sol[0], j)
                assert self.commutes(h, u)
                return Subgroup.cyclic(self, h)
        raise AssertionError("u centralizes itself")

    def cyclic_log(self, g, y):
        (xg, kg), (xy, ky) = g, y
        if kg != 0:
            if ky % kg:
                return None
            n = ky // kg
            return n if self.power(g, n) == y else None
        if ky != 0:
            return None
        if not any(xg):
            return 0 if not any(xy) else None
        sol = lat.solve(lat.transpose([xg]), xy)
        return None if sol is None else sol[0][0]


# ---------------------------------------------------------------------------
# free groups


def _reduce_letters(letters):
    out = []
    for i, s in letters:
        if out and out[-1] == (i, -s):
            out.pop()
        else:
            out.append((i, s))
    return tuple(out)


def _inv_letters(w):
    return tuple((i, -s) for i, s in reversed(w))


def _cyclic_split(w):
    """w = p c p^-1 with c cyclically reduced."""
    i = 0
    while i < len(w) - 1 - i and w[i] == (w[-1 - i][0], -w[-1 - i][1]):
        i += 1
    return w[:i], w[i:len(w) - i]


def _primitive_root(c):
    n = len(c)
    for d in range(1, n + 1):
        if n % d == 0 and c[:d] * (n // d) == c:
            return c[:d]
    return c


class FreeGroup(Backend):
    kind = "free_group"

    def __init__(self, rank, gens=None):
        gens = tuple(gens) if gens else tuple(f"x{i + 1}" for i in range(rank))
        super().__init__(gens, {"rank": rank})
        self.rank = rank

    def identity(self):
        return ()

    def gen(self, i):
        return ((i, 1),)

    def mul(self, x, y):
        return _reduce_letters(x + y)

    def inv(self, x):
        return _inv_letters(x)

    def nf_word(self, x):
        return Word(self.alphabet, x)

    def class_key(self, u):
        _, c = _cyclic_split(u)
        if not c:
            return ()
        return min(c[i:] + c[:i] for i in range(len(c)))

    def conjugate(self, u, v):
        pu, cu = _cyclic_split(u)
        pv, cv = _cyclic_split(v)
        if len(cu) != len(cv):
            return None
        if not cu:
            return ()
        for i in range(len(cv)):
            if cv[i:] + cv[:i] == cu:
                alpha = cv[:i]
                # cu = alpha^-1 cv alpha
                h = self.mul(self.mul(pu, _inv_letters(alpha)), _inv_letters(pv))
                assert self.conj(h, v) == u
                return h
        return None

    def centralizer(self, u):
        if not u:
            return Subgroup.whole(self)
        p, c = _cyclic_split(u)
        r = _primitive_root(c)
        return Subgroup.cyclic(self, self.mul(self.mul(p, r), _inv_letters(p)))

    def cyclic_log(self, g, y):
        if not g:
            return 0 if not y else None
        p, c = _cyclic_split(g)
        rest = len(y) - 2 * len(p)
        if not y:
            return 0
        if rest <= 0 or rest % len(c):
            return None
        n = rest // len(c)
        for m in (n, -n):
            if self.power(g, m) == y:
                return m
        return None


# ---------------------------------------------------------------------------
# subgroup descriptors


@dataclass(frozen=True)
class Subgroup:
    """A subset of a backend group: whole, trivial, cyclic or affine cosets.

    ``pieces`` is a tuple of ``(base, basis)``: the set
    ``{(base_x + v, base_f) : v in span_Z(basis)}`` with ``basis`` in
    Hermite form.
    """

    backend: object
    tag: str
    pieces: tuple = ()
    generator: object = None
    note: str = ""

    @classmethod
    def whole(cls, B):
        return cls(B, "whole")

    @classmethod
    def trivial(cls, B):
        return cls(B, "trivial")

    @classmethod
    def cyclic(cls, B, g):
        return cls(B, "cyclic", generator=g)

    @classmethod
    def cosets(cls, B, pieces, note=""):
        seen = {}
        for base, basis in pieces:
            dim = len(base[0])
            basis = lat.hnf(basis, dim)
            base = (lat.reduce_mod(base[0], basis), base[1])
            seen[(base, basis)] = None
        pieces = tuple(seen)
        if pieces and all(not b for _, b in pieces) and all(B.is_identity(p) for p, _ in pieces):
            return cls(B, "trivial")
        return cls(B, "cosets", pieces=pieces, note=note)

    def is_empty(self):
        return self.tag == "cosets" and not self.pieces

    def contains(self, x):
        if self.tag == "whole":
            return True
        if self.tag == "trivial":
            return self.backend.is_identity(x)
        if self.tag == "cyclic":
            return self.backend.cyclic_log(self.generator, x) is not None
        for (bx, bf), basis in self.pieces:
            if x[1] == bf and lat.in_lattice(tuple(a - b for a, b in zip(x[0], bx)), basis):
                return True
        return False

    def sample(self):
        """A few elements of the subset (bases and base + basis vectors)."""
        B = self.backend
        if self.tag == "whole":
            return [B.gen(i) for i in range(len(B.alphabet))]
        if self.tag == "trivial":
            return [B.identity()]
        if self.tag == "cyclic":
            return [self.generator]
        out = []
        for (bx, bf), basis in self.pieces:
            out.append((bx, bf))
            for v in basis:
                out.append((tuple(a + b for a, b in zip(bx, v)), bf))
        return out

    def describe(self):
        B = self.backend
        if self.tag in ("whole", "trivial"):
            return self.tag
        if self.tag == "cyclic":
            return f"cyclic({B.fmt(self.generator)})"
        parts = []
        for base, basis in self.pieces:
            gens = ",".join(B.fmt(B.mul(self._t(v), B.identity())) for v in basis) if basis else ""
            parts.append(f"{B.fmt(base)}<{gens}>")
        return "cosets(" + " ".join(parts) + ")" if parts else "empty"

    def _t(self, v):
        return (tuple(v), 0)


# ---------------------------------------------------------------------------
# homomorphisms (edge monomorphisms, cover inclusions)


class Hom:
    """A homomorphism ``src -> dst`` given by generator images (normal forms)."""

    def __init__(self, src, dst, images):
        self.src, self.dst = src, dst
        self.images = list(images)
        if len(self.images) != len(src.alphabet):
            raise BackendError("one image per source generator is required")

    @classmethod
    def from_words(cls, src, dst, words):
        return make_hom(src, dst, [dst.normalize(w) for w in words])

    def apply_word(self, w):
        x = self.dst.identity()
        for i, s in w.letters:
            g = self.images[i]
            x = self.dst.mul(x, g if s == 1 else self.dst.inv(g))
        return x

    def apply(self, z):
        return self.apply_word(self.src.nf_word(z))

    def check_homomorphism(self, sample):
        """Check phi(xy) = phi(x) phi(y) on pairs from ``sample``."""
        bad = []
        for x in sample:
            for y in sample:
                if self.apply(self.src.mul(x, y)) != self.dst.mul(self.apply(x), self.apply(y)):
                    bad.append((x, y))
        return bad

    def membership_word(self, y):
        """Word over the source generators mapping to y, or None."""
        z = self.preimage(y)
        return None if z is None else self.src.nf_word(z)

    def contains(self, y):
        return self.preimage(y) is not None

    def split(self, g):
        """g = r phi(c) with r canonical for the left coset g Im(phi)."""
        r = self.coset_rep(g)
        c = self.preimage(self.dst.mul(self.dst.inv(r), g))
        assert c is not None
        return r, c


class AffineHom(Hom):
    """Homomorphism between affine groups mapping translations to translations."""

    def __init__(self, src, dst, images):
        super().__init__(src, dst, images)
        cols = []
        for i in range(src.k):
            e = tuple(1 if j == i else 0 for j in range(src.k))
            y, f = self.apply_word(src.nf_word((e, 0)))
            if f != 0:
                raise BackendError("translations must map to translations")
            cols.append(y)
        self.B = lat.transpose(cols, dst.k) if cols else tuple(() for _ in range(dst.k))
        self.slice_img = []
        for s in range(src.order):
            self.slice_img.append(self.apply_word(src.nf_word((src._zero, s))))
        sig = [y[1] for y in self.slice_img]
        self.sigma = sig
        if len(set(sig)) != len(sig):
            raise BackendError("finite quotient map is not injective")
        self.sigma_inv = {f: s for s, f in enumerate(sig)}
        rank = len(lat.hnf(cols, dst.k))
        if rank != src.k:
            raise BackendError("translation lattice map is not injective")

    def apply(self, z):
        x, s = z
        ys, f = self.slice_img[s]
        Bx = lat.matvec(self.B, x) if self.src.k else self.dst._zero
        return (tuple(a + b for a, b in zip(Bx, ys)), f)

    def preimage(self, y):
        X, f = y
        s = self.sigma_inv.get(f)
        if s is None:
            return None
        rhs = tuple(a - b for a, b in zip(X, self.slice_img[s][0]))
        if self.src.k == 0:
            return (() , s) if not any(rhs) else None
        sol = lat.solve(self.B, rhs)
        if sol is None:
            return None
        return (sol[0], s)

    def coset_rep(self, g):
        D = self.dst
        xg, fg = g
        L = lat.hnf(lat.transpose(lat.matmul(D.A[fg], self.B)), D.k) if self.src.k else ()
        best = None
        for s in range(self.src.order):
            x, f = D.mul(g, self.slice_img[s])
            cand = (lat.reduce_mod(x, L), f)
            if best is None or (cand[1], cand[0]) < (best[1], best[0]):
                best = cand
        return best

    def class_reps(self, u):
        """One source element per source-conjugacy class mapping into the class of u.

        Returns a list of ``(z, h)`` with ``h phi(z) h^-1 = u``.
        """
        S, D = self.src, self.dst
        out = {}
        for g in range(D.order):
            sl, d, M = D.conj_action(g, u)
            s = self.sigma_inv.get(sl)
            if s is None:
                continue
            ys = self.slice_img[s][0]
            # B z - M y = d - ys in unknowns (z, y)
            A = tuple(tuple(self.B[i]) + tuple(-m for m in M[i]) for i in range(D.k))
            rhs = tuple(a - b for a, b in zip(d, ys))
            if D.k == 0:
                z0, Kz = (), ()
            else:
                sol = lat.solve(A, rhs)
                if sol is None:
                    continue
                z0 = sol[0][: S.k]
                Kz = lat.hnf([k[: S.k] for k in sol[1]], S.k)
            for z in _quotient_reps(z0, Kz, S._Lf[s], S.k):
                key = S.class_key((z, s))
                if key not in out:
                    h = D.conjugate(u, self.apply((z, s)))
                    assert h is not None
                    out[key] = ((z, s), h)
        return list(out.values())

    def transfer(self, g, g2, other):
        """{a in src : g2^-1 phi(a) g in Im(other)} as a Subgroup of src."""
        S, D = self.src, self.dst
        pieces = []
        gi = D.inv(g2)
        for s in range(S.order):
            fn = lambda z, s=s: D.mul(D.mul(gi, self.apply((tuple(z), s))), g)
            sl, q, P = D.linearize(fn, S.k)
            s2 = other.sigma_inv.get(sl)
            if s2 is None:
                continue
            # P z + q = B' w + y'  ->  [P | -B'] (z, w) = y' - q
            A = tuple(tuple(P[i]) + tuple(-b for b in other.B[i]) for i in range(D.k))
            rhs = tuple(a - b for a, b in zip(other.slice_img[s2][0], q))
            if D.k == 0:
                pieces.append((((), s), ()))
                continue
            sol = lat.solve(A, rhs)
            if sol is None:
                continue
            z0 = sol[0][: S.k]
            Kz = [k[: S.k] for k in sol[1]]
            pieces.append(((z0, s), Kz))
        cov = Subgroup.cosets(S, pieces)
        full = {p[0][1] for p in cov.pieces if p[1] == lat.identity(S.k)}
        if cov.tag == "cosets" and len(full) == S.order:
            return Subgroup.whole(S)
        return cov


def _quotient_reps(z0, K, L, dim):
    """Representatives of (z0 + K) modulo the lattice L (must be finite)."""
    if not K:
        return [z0]
    KL = lat.intersect(K, L, dim) if L else ()
    if len(KL) != len(K):
        raise CapabilityMissing("infinitely many classes meet the edge group")
    # coordinates of KL in the basis K, then box of representatives
    coords = [lat.express(v, K) for v in KL]
    H = lat.hnf(coords, len(K))
    ranges = [range(H[i][i]) for i in range(len(K))]
    out = []
    for cs in product(*ranges):
        z = z0
        for c, kv in zip(cs, K):
            z = tuple(a + c * b for a, b in zip(z, kv))
        out.append(z)
    return out


class GenericHom(Hom):
    """Homomorphisms whose source is trivial, infinite cyclic or Z^2 into a fiber."""

    def __init__(self, src, dst, images):
        super().__init__(src, dst, images)
        if src.kind not in ("trivial", "free_abelian"):
            raise BackendError(f"{src.kind} edge groups into {dst.kind} are not supported")
        self.rank = 0 if src.kind == "trivial" else src.k
        if self.rank == 2:
            if dst.kind != "sol" or any(g[1] != 0 for g in self.images):
                raise BackendError("rank 2 images must lie in the fiber of a sol group")
            self.B = lat.transpose([g[0] for g in self.images])
            if len(lat.hnf([g[0] for g in self.images], 2)) != 2:
                raise BackendError("fiber images are not independent")
        elif self.rank > 2:
            raise BackendError("rank > 2 edge group into a non-affine backend")
        elif self.rank == 1 and dst.is_identity(self.images[0]):
            raise BackendError("edge image is trivial: not injective")
        if self.rank == 1 and dst.kind == "sol" and self.images[0][1] == 0:
            self.B = lat.transpose([self.images[0][0]])
        if hasattr(self, "B"):
            # image inside the fiber: affine like an AffineHom
            self.slice_img = [dst.identity()]
            self.sigma = [0]

    def apply(self, z):
        if self.rank == 0:
            return self.dst.identity()
        if self.rank == 1:
            return self.dst.power(self.images[0], z[0][0])
        return (lat.matvec(self.B, z[0]), 0)

    def preimage(self, y):
        D = self.dst
        if self.rank == 0:
            return ((), 0) if D.is_identity(y) else None
        if self.rank == 1:
            n = D.cyclic_log(self.images[0], y)
            return None if n is None else ((n,), 0)
        if y[1] != 0:
            return None
        sol = lat.solve(self.B, y[0])
        return None if sol is None else (sol[0], 0)

    def coset_rep(self, g):
        D = self.dst
        if self.rank == 0:
            return g
        if self.rank == 2:
            x, k = g
            L = lat.hnf(lat.transpose(lat.matmul(D.tpow(k), self.B)), 2)
            return (lat.reduce_mod(x, L), k)
        w = self.images[0]
        if D.kind == "sol":
            x, k = g
            (xw, kw) = w
            if kw:
                return D.mul(g, D.power(w, -(k // kw) if kw > 0 else -((-k) // (-kw))))
            L = lat.hnf([lat.matvec(D.tpow(k), xw)], 2)
            return (lat.reduce_mod(x, L), k)
        # free group: shortest element of g <w>, ties broken lexicographically
        span = 2 * len(g) + 2
        cands = [D.mul(g, D.power(w, n)) for n in range(-span, span + 1)]
        return min(cands, key=lambda c: (len(c), c))

    def class_reps(self, u):
        D = self.dst
        if self.rank == 0:
            return []
        if self.rank == 2:
            raise CapabilityMissing("conjugates of fiber elements in a sol group")
        w = self.images[0]
        if D.kind == "sol":
            (xu, ku), (xw, kw) = u, w
            if kw:
                ns = [ku // kw] if ku % kw == 0 else []
            else:
                gu = _gcd2(xu)
                gw = _gcd2(xw)
                ns = [gu // gw, -(gu // gw)] if ku == 0 and gu % gw == 0 else []
        else:
            _, cu = _cyclic_split(u)
            _, cw = _cyclic_split(w)
            ns = [len(cu) // len(cw), -(len(cu) // len(cw))] if len(cu) % len(cw) == 0 else []
        out = []
        for n in dict.fromkeys(ns):
            if n == 0:
                continue
            h = D.conjugate(u, D.power(w, n))
            if h is not None:
                out.append((((n,), 0), h))
        return out

    def transfer(self, g, g2, other):
        raise CapabilityMissing(f"transfer sets in {self.dst.kind} groups")


def _gcd2(v):
    from math import gcd
    return gcd(abs(v[0]), abs(v[1]))


def make_hom(src, dst, images):
    if isinstance(src, AffineGroup) and isinstance(dst, AffineGroup):
        return AffineHom(src, dst, images)
    return GenericHom(src, dst, images)


def edge_image_membership(B, E, u):
    """Word over the edge generators of ``E`` mapping to ``u``, or None."""
    assert E.dst is B
    return E.membership_word(u)


def conjugates_into_edge(B, u, E):
    """Edge elements (one per edge-group class) conjugate to u, with conjugators."""
    assert E.dst is B
    if B.is_identity(u):
        raise BackendError("u must be nontrivial")
    return E.class_reps(u)


def transfer_solve(B, A, g, g2, Bsub):
    """{a in A : g2^-1 a g in Bsub}, described over the source of A."""
    return A.transfer(g, g2, Bsub)


def backend_conjugate(B, u, v):
    return B.conjugate(u, v)


def order_two(B, u):
    return B.order_two(u)


def centralizer(B, u):
    return B.centralizer(u)


def normalize(B, w):
    return B.normalize(w)


# ---------------------------------------------------------------------------
# construction from file parameters

KINDS = {
    "trivial": lambda gens=None, **kw: trivial_group(),
    "cyclic_order2": lambda gens=None, **kw: cyclic_order2(gens or ("a",)),
    "free_abelian": lambda rank, gens=None, **kw: free_abelian(int(rank), gens),
    "free_group": lambda rank, gens=None, **kw: FreeGroup(int(rank), gens),
    "klein_bottle": lambda gens=None, **kw: klein_bottle(gens or ("a", "b", "t")),
    "moebius_circle": lambda gens=None, **kw: moebius_circle(gens or ("a", "b", "t")),
    "torus_semidirect_z2": lambda gens=None, **kw: torus_semidirect_z2(gens or ("a", "b", "t")),
    "z_plus_z2": lambda gens=None, p=0, **kw: z_plus_z2(int(p), gens or ("t", "v")),
    "infinite_dihedral": lambda gens=None, **kw: infinite_dihedral(gens or ("t", "v")),
    "sol": lambda theta, gens=None, **kw: SolBundle(_theta(theta), gens or ("a", "b", "t")),
}


def _theta(s):
    if isinstance(s, str):
        vals = [int(x) for x in s.split(",")]
    else:
        vals = [int(x) for r in s for x in (r if isinstance(r, (tuple, list)) else [r])]
    if len(vals) != 4:
        raise BackendError("theta needs four entries a,b,c,d")
    return ((vals[0], vals[1]), (vals[2], vals[3]))


def make_backend(kind, **params):
    if kind not in KINDS:
        raise BackendError(f"unknown backend kind {kind!r}")
    gens = params.pop("gens", None)
    if isinstance(gens, str):
        gens = tuple(gens.split(","))
    try:
        B = KINDS[kind](gens=gens, **params)
    except TypeError as exc:
        raise BackendError(f"bad parameters for {kind}: {exc}") from None
    if gens is not None:
        B.params["gens"] = ",".join(gens)
    return B

"""Graphs of groups, paths in them, reduction and conjugacy in pi_1.

Edges come in pairs: edge ``2i`` is the edge as declared, ``2i + 1`` its
reverse, so ``bar(e) = e ^ 1``.  A path ``(g0, e1, g1, ..., en, gn)`` is a
:class:`Path` holding its start vertex, the edges and the vertex-group
labels as backend normal forms.
"""

from collections import deque
from dataclasses import dataclass
import random as _random

from . import lattice as lat
from .backends import AffineGroup, AffineHom, BackendError, CapabilityMissing
from .words import OrientationCharacter, WordError, character_parity


class GraphError(ValueError):
    pass


class HopDepthExceeded(RuntimeError):
    pass


def bar(e):
    return e ^ 1


@dataclass(frozen=True)
class Path:
    start: str
    edges: tuple
    labels: tuple

    def __len__(self):
        return len(self.edges)


class GraphOfGroups:
    def __init__(self):
        self.vertices = []
        self.vertex_backend = {}
        self.seifert = {}
        self.edge_names = []  # per pair
        self.edge_kind = []  # per pair: (kind, params)
        self.edge_backend = []  # per pair
        self.target = []  # per edge index: t(e)
        self.mono = {}  # edge index -> Hom into G(t(e))
        self.mono_words = {}  # edge index -> list of words (for emission)
        self.orientation = {}
        self.base = None
        self.bar_table = []  # declared involution; algorithms rely on e ^ 1
        self._tree = None

    # -- construction --------------------------------------------------
    def add_vertex(self, name, backend, seifert=False):
        if name in self.vertex_backend:
            raise GraphError(f"duplicate vertex {name}")
        self.vertices.append(name)
        self.vertex_backend[name] = backend
        self.seifert[name] = seifert
        if self.base is None:
            self.base = name

    def add_edge(self, name, src, dst, backend, kind=None):
        """Declare the pair e / e~ with t(e) = dst and t(e~) = src."""
        for v in (src, dst):
            if v not in self.vertex_backend:
                raise GraphError(f"edge {name}: unknown vertex {v}")
        if name in self.edge_names:
            raise GraphError(f"duplicate edge {name}")
        self.edge_names.append(name)
        self.edge_kind.append(kind)
        self.edge_backend.append(backend)
        self.target += [dst, src]
        n = len(self.bar_table)
        self.bar_table += [n + 1, n]
        return 2 * (len(self.edge_names) - 1)

    def set_mono(self, e, hom, words=None):
        self.mono[e] = hom
        if words is not None:
            self.mono_words[e] = list(words)

    def set_orientation(self, v, mapping):
        B = self.vertex_backend[v]
        self.orientation[v] = OrientationCharacter.from_dict(B.alphabet, mapping)

    # -- graph structure -----------------------------------------------
    @property
    def nedges(self):
        return len(self.target)

    def t(self, e):
        return self.target[e]

    def o(self, e):
        return self.target[e ^ 1]

    def G(self, v):
        return self.vertex_backend[v]

    def Ge(self, e):
        return self.edge_backend[e // 2]

    def edge_name(self, e):
        return self.edge_names[e // 2] + ("~" if e & 1 else "")

    def edge_index(self, name):
        b = name.endswith("~")
        n = name[:-1] if b else name
        try:
            return 2 * self.edge_names.index(n) + b
        except ValueError:
            raise GraphError(f"unknown edge {name}") from None

    def edges_into(self, v):
        return [e for e in range(self.nedges) if self.target[e] == v]

    def omega(self, v, x):
        """Orientation character of vertex v on the normal form x."""
        om = self.orientation.get(v)
        if om is None:
            return 1
        return character_parity(om, self.G(v).nf_word(x))

    def is_connected(self):
        if not self.vertices:
            return False
        seen = {self.vertices[0]}
        todo = [self.vertices[0]]
        while todo:
            v = todo.pop()
            for e in self.edges_into(v):
                w = self.o(e)
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return len(seen) == len(self.vertices)

    # -- validation ----------------------------------------------------
    def validate(self, ball=2):
        """List of problems (empty when the graph of groups is well formed)."""
        problems = []
        if not self.vertices:
            return ["graph has no vertices"]
        if not self.is_connected():
            problems.append("graph is not connected")
        if self.base not in self.vertex_backend:
            problems.append(f"base vertex {self.base} is not a vertex")
        for e in range(self.nedges):
            b = self.bar_table[e]
            if b == e or self.bar_table[b] != e or b != bar(e):
                problems.append(f"edge {self.edge_name(e)}: bar is not a fixed-point free involution")
            if e not in self.mono:
                sign = "-" if e & 1 else "+"
                problems.append(f"edge {self.edge_names[e // 2]}: missing mono {self.edge_names[e // 2]}{sign}")
                continue
            hom = self.mono[e]
            if hom.src is not self.Ge(e) or hom.dst is not self.G(self.t(e)):
                problems.append(f"edge {self.edge_name(e)}: mono has wrong source or target")
            if not isinstance(hom.src, AffineGroup):
                problems.append(f"edge {self.edge_name(e)}: edge group kind {hom.src.kind} unsupported")
                continue
            sample = _small_ball(hom.src, ball)
            if hom.check_homomorphism(sample):
                problems.append(f"edge {self.edge_name(e)}: images do not satisfy the edge relators")
            for z in sample:
                if z != hom.src.identity() and hom.dst.is_identity(hom.apply(z)):
                    problems.append(f"edge {self.edge_name(e)}: mono is not injective")
                    break
                if not hom.src.order_two(z) and hom.dst.order_two(hom.apply(z)):
                    problems.append(f"edge {self.edge_name(e)}: element of infinite order sent to torsion")
                    break
        for v, om in self.orientation.items():
            B = self.G(v)
            if om.alphabet is not B.alphabet:
                problems.append(f"vertex {v}: orientation on wrong alphabet")
                continue
            if isinstance(B, AffineGroup):
                sample = _small_ball(B, ball)
                for x in sample:
                    for y in sample:
                        if self.omega(v, B.mul(x, y)) != self.omega(v, x) * self.omega(v, y):
                            problems.append(f"vertex {v}: orientation is not a homomorphism")
                            break
                    else:
                        continue
                    break
        return problems

    def check(self):
        problems = self.validate()
        if problems:
            raise GraphError("; ".join(problems))
        return self

    # -- maximal trees -------------------------------------------------
    def maximal_tree(self, base=None):
        base = base or self.base
        if base not in self.vertex_backend:
            raise GraphError(f"unknown base vertex {base}")
        if not self.is_connected():
            raise GraphError("graph is not connected")
        parent = {base: None}
        order = [base]
        todo = deque([base])
        while todo:
            v = todo.popleft()
            for e in range(self.nedges):
                if self.o(e) == v and self.t(e) not in parent:
                    parent[self.t(e)] = e
                    order.append(self.t(e))
                    todo.append(self.t(e))
        return MaximalTree(self, base, parent)

    @property
    def tree(self):
        if self._tree is None or self._tree.base != self.base:
            self._tree = self.maximal_tree()
        return self._tree

    # -- paths ---------------------------------------------------------
    def path(self, start, edges=(), labels=None):
        edges = tuple(edges)
        if labels is None:
            labels = [None] * (len(edges) + 1)
        labels = list(labels)
        verts = [start] + [self.t(e) for e in edges]
        for i, e in enumerate(edges):
            if self.o(e) != verts[i]:
                raise GraphError(f"edge {self.edge_name(e)} does not start at {verts[i]}")
        out = []
        for v, g in zip(verts, labels):
            B = self.G(v)
            if g is None:
                g = B.identity()
            elif isinstance(g, str):
                g = B.parse(g)
            out.append(g)
        return Path(start, edges, tuple(out))

    def end(self, p):
        return self.t(p.edges[-1]) if p.edges else p.start

    def vertex_of(self, p, i):
        return p.start if i == 0 else self.t(p.edges[i - 1])

    def identity_path(self, v=None):
        v = v or self.base
        return Path(v, (), (self.G(v).identity(),))

    def concat(self, p, q):
        if self.end(p) != q.start:
            raise GraphError(f"cannot concatenate: path ends at {self.end(p)}, next starts at {q.start}")
        B = self.G(q.start)
        mid = B.mul(p.labels[-1], q.labels[0])
        return Path(p.start, p.edges + q.edges, p.labels[:-1] + (mid,) + q.labels[1:])

    def chain(self, *paths):
        out = paths[0]
        for q in paths[1:]:
            out = self.concat(out, q)
        return out

    def inverse(self, p):
        labels = []
        for i in range(len(p.labels) - 1, -1, -1):
            labels.append(self.G(self.vertex_of(p, i)).inv(p.labels[i]))
        return Path(self.end(p), tuple(bar(e) for e in reversed(p.edges)), tuple(labels))

    def is_loop(self, p, base=None):
        return p.start == self.end(p) and (base is None or p.start == base)

    # -- reduction -----------------------------------------------------
    def reducible_positions(self, p):
        """Indices i such that (e_i, g_i, e_{i+1}) = (e, phi_e(c), e~)."""
        out = []
        for i in range(len(p.edges) - 1):
            e = p.edges[i]
            if p.edges[i + 1] == bar(e) and self.mono[e].contains(p.labels[i + 1]):
                out.append(i)
        return out

    def eliminate(self, p, i):
        e = p.edges[i]
        c = self.mono[e].preimage(p.labels[i + 1])
        B = self.G(self.o(e))
        g = B.mul(B.mul(p.labels[i], self.mono[bar(e)].apply(c)), p.labels[i + 2])
        return Path(p.start, p.edges[:i] + p.edges[i + 2:], p.labels[:i] + (g,) + p.labels[i + 3:])

    def reduce_path(self, p, order="stack", rng=None):
        """Eliminate every (e, phi_e(c), e~) pattern.

        ``order`` is "stack" (one left-to-right pass), "left", "right" or
        "random" (repeatedly eliminate the leftmost / rightmost / a random
        reducible position); all give the same length.
        """
        if order == "stack":
            return self._reduce_stack(p)
        while True:
            pos = self.reducible_positions(p)
            if not pos:
                return p
            if order == "left":
                i = pos[0]
            elif order == "right":
                i = pos[-1]
            else:
                i = (rng or _random).choice(pos)
            p = self.eliminate(p, i)

    def _reduce_stack(self, p):
        edges = []
        labels = [p.labels[0]]
        for e, g in zip(p.edges, p.labels[1:]):
            if edges and edges[-1] == bar(e):
                prev = edges[-1]
                c = self.mono[prev].preimage(labels[-1])
                if c is not None:
                    edges.pop()
                    labels.pop()
                    B = self.G(self.o(prev))
                    labels[-1] = B.mul(B.mul(labels[-1], self.mono[bar(prev)].apply(c)), g)
                    continue
            edges.append(e)
            labels.append(g)
        return Path(p.start, tuple(edges), tuple(labels))

    def is_reduced(self, p):
        return not self.reducible_positions(p)

    def normal_form(self, p):
        """Canonical representative of the class of p (fixed endpoints)."""
        p = self.reduce_path(p)
        labels = list(p.labels)
        for i, e in enumerate(p.edges):
            r, c = self.mono[bar(e)].split(labels[i])
            labels[i] = r
            B = self.G(self.t(e))
            labels[i + 1] = B.mul(self.mono[e].apply(c), labels[i + 1])
        return Path(p.start, p.edges, tuple(labels))

    def equal(self, p, q):
        return self.normal_form(p) == self.normal_form(q)

    def loop_is_identity(self, p):
        r = self.reduce_path(p)
        return not r.edges and self.G(r.start).is_identity(r.labels[0])

    def mul(self, p, q):
        return self.normal_form(self.concat(p, q))

    def power(self, p, n):
        if n < 0:
            p, n = self.inverse(p), -n
        out = self.identity_path(p.start)
        for _ in range(n):
            out = self.concat(out, p)
        return self.normal_form(out)

    def conj(self, h, p):
        """h p h^-1 (reduced)."""
        return self.reduce_path(self.chain(h, p, self.inverse(h)))

    def verify_conjugate(self, u, v, h):
        """True iff u = h v h^-1 in pi_1."""
        return self.loop_is_identity(self.chain(h, v, self.inverse(h), self.inverse(u)))

    # -- cyclic reduction ----------------------------------------------
    def split_prefix(self, T, p):
        """Greedy split p = P core P^-1 with P a tree path from the base."""
        n = len(p.edges)
        k = 0
        while 2 * (k + 1) <= n:
            e = p.edges[k]
            if T.parent.get(self.t(e)) != e:
                break
            if not self.G(self.vertex_of(p, k)).is_identity(p.labels[k]):
                break
            if p.edges[n - 1 - k] != bar(e):
                break
            if not self.G(self.vertex_of(p, n - k)).is_identity(p.labels[n - k]):
                break
            k += 1
        y = self.vertex_of(p, k)
        core = Path(y, p.edges[k:n - k], p.labels[k:n - k + 1])
        return T.path_to(y), core

    def _peelable(self, core):
        n = len(core.edges)
        if n < 2:
            return None
        e1, en = core.edges[0], core.edges[-1]
        if e1 != bar(en):
            return None
        B = self.G(core.start)
        return self.mono[en].preimage(B.mul(core.labels[-1], core.labels[0]))

    def is_cyclically_reduced(self, T, p):
        if not self.is_reduced(p):
            return False
        _, core = self.split_prefix(T, p)
        return self._peelable(core) is None

    def cyclically_reduce(self, T, p):
        """(p', alpha) with p' cyclically reduced and p' = alpha p alpha^-1."""
        if p.start != T.base or not self.is_loop(p):
            raise GraphError("cyclic reduction needs a loop at the base vertex")
        alpha = self.identity_path(T.base)
        cur = self.reduce_path(p)
        guard = 2 * len(cur.edges) + 2
        while True:
            P, core = self.split_prefix(T, cur)
            c = self._peelable(core)
            if c is None:
                return cur, alpha
            guard -= 1
            if guard < 0:
                raise RuntimeError("cyclic reduction failed to terminate")
            m = len(core.edges)
            em = core.edges[-1]
            B2 = self.G(self.o(em))
            last = B2.mul(core.labels[m - 1], self.mono[bar(em)].apply(c))
            inner = Path(self.t(core.edges[0]), core.edges[1:m - 1], core.labels[1:m - 1] + (last,))
            y2 = inner.start
            # beta runs from y2 to y: (1, e_m, g0^-1)
            By = self.G(core.start)
            beta = Path(y2, (em,), (self.G(y2).identity(), By.inv(core.labels[0])))
            P2 = T.path_to(y2)
            step = self.chain(P2, beta, self.inverse(P))
            alpha = self.reduce_path(self.concat(step, alpha))
            cur = self.reduce_path(self.chain(P2, inner, self.inverse(P2)))

    # -- vertex embeddings and generators --------------------------------
    def vertex_embed(self, T, v, g):
        if v not in self.vertex_backend:
            raise GraphError(f"unknown vertex {v}")
        B = self.G(v)
        if isinstance(g, str):
            g = B.parse(g)
        P = T.path_to(v)
        return self.chain(P, Path(v, (), (g,)), self.inverse(P))

    def edge_loop(self, T, e):
        """Loop at the base running through edge e."""
        P = T.path_to(self.o(e))
        Q = T.path_to(self.t(e))
        step = self.path(self.o(e), (e,))
        return self.chain(P, step, self.inverse(Q))

    def generators(self, T=None):
        """Named generating loops of pi_1(X, base): vertex generators and non-tree edges."""
        T = T or self.tree
        out = []
        for v in self.vertices:
            B = self.G(v)
            for i, name in enumerate(B.alphabet.names):
                out.append((f"{v}.{name}", self.vertex_embed(T, v, B.gen(i))))
        for i in range(len(self.edge_names)):
            e = 2 * i
            if e not in T.edges:
                out.append((self.edge_names[i], self.edge_loop(T, e)))
        return out

    # -- formatting ----------------------------------------------------
    def format_path(self, p):
        parts = [f"[{self.G(p.start).fmt(p.labels[0])}]"]
        for i, e in enumerate(p.edges):
            parts.append(self.edge_name(e))
            parts.append(f"[{self.G(self.t(e)).fmt(p.labels[i + 1])}]")
        return " ".join(parts)

    def parse_path(self, text, start=None):
        """Parse ``[g0] e1 [g1] ...``; a bare length-0 path sits at ``start``."""
        tokens = []
        i = 0
        text = text.strip()
        while i < len(text):
            ch = text[i]
            if ch.isspace():
                i += 1
            elif ch == "[":
                j = text.index("]", i)
                tokens.append(("label", text[i + 1:j]))
                i = j + 1
            else:
                j = i
                while j < len(text) and not text[j].isspace() and text[j] != "[":
                    j += 1
                tokens.append(("edge", text[i:j]))
                i = j
        edges = []
        labels = []
        expect_label = True
        for kind, val in tokens:
            if kind == "label":
                if not expect_label:
                    raise GraphError(f"two labels in a row in {text!r}")
                labels.append(val)
                expect_label = False
            else:
                if expect_label:
                    labels.append("1")
                edges.append(self.edge_index(val))
                expect_label = True
        if expect_label:
            labels.append("1")
        if edges:
            s = self.o(edges[0])
            if start is not None and start != s:
                raise GraphError(f"path starts at {s}, expected {start}")
            start = s
        start = start or self.base
        try:
            return self.path(start, edges, labels)
        except WordError as exc:
            raise GraphError(str(exc)) from None

    # -- conjugacy -----------------------------------------------------
    def hop_closure(self, v, u, path=None, max_depth=64):
        """Vertex/edge elements conjugate to u in G(v), with conjugating paths.

        Returns a list of :class:`HopState`; ``path`` (default trivial)
        prefixes every conjugator, so that ``path u path^-1 = alpha x alpha^-1``
        for every returned ``(location, x, alpha)``.
        """
        B = self.G(v)
        if B.is_identity(u):
            raise GraphError("hop closure needs a nontrivial element")
        alpha = path or self.identity_path(v)
        states = [HopState(("vertex", v), u, alpha)]
        seen = {(v, B.class_key(u))}
        frontier = [(v, u, alpha)]
        depth = 0
        while frontier:
            if depth > max_depth:
                raise HopDepthExceeded(f"hop closure exceeded depth {max_depth}")
            depth += 1
            nxt = []
            for w, g, a in frontier:
                for e in self.edges_into(w):
                    for z, h in self.mono[e].class_reps(g):
                        a2 = self.concat(a, Path(w, (bar(e),), (h, self.G(self.o(e)).identity())))
                        x = self.mono[bar(e)].apply(z)
                        states.append(HopState(("edge", e), z, self.concat(a, Path(w, (), (h,)))))
                        w2 = self.o(e)
                        key = (w2, self.G(w2).class_key(x))
                        if key in seen:
                            continue
                        seen.add(key)
                        states.append(HopState(("vertex", w2), x, a2))
                        nxt.append((w2, x, a2))
            frontier = nxt
        return states

    def pi1_conjugate(self, T, u, v, max_depth=64):
        """A loop h with u = h v h^-1, or None when u and v are not conjugate."""
        u2, au = self.cyclically_reduce(T, u)
        v2, av = self.cyclically_reduce(T, v)
        Pu, cu = self.split_prefix(T, u2)
        Pv, cv = self.split_prefix(T, v2)
        if len(cu.edges) != len(cv.edges):
            return None
        if not cu.edges:
            w = self._elliptic(cu, cv, Pu, Pv, max_depth)
        else:
            w = self._hyperbolic(cu, cv, Pu, Pv)
        if w is None:
            return None
        h = self.reduce_path(self.chain(self.inverse(au), w, av))
        if not self.verify_conjugate(u, v, h):
            raise AssertionError("conjugator failed verification")
        return h

    def _elliptic(self, cu, cv, Pu, Pv, max_depth):
        yu, gu = cu.start, cu.labels[0]
        yv, gv = cv.start, cv.labels[0]
        Bu, Bv = self.G(yu), self.G(yv)
        if Bu.is_identity(gu) or Bv.is_identity(gv):
            if Bu.is_identity(gu) and Bv.is_identity(gv):
                return self.identity_path(Pu.start)
            return None
        if yu == yv:
            k = Bu.conjugate(gu, gv)
            if k is not None:
                return self.chain(Pu, Path(yu, (), (k,)), self.inverse(Pv))
        key = Bv.class_key(gv)
        for st in self.hop_closure(yu, gu, Pu, max_depth):
            kind, w = st.location
            if kind == "vertex" and w == yv and self.G(w).class_key(st.element) == key:
                k = Bv.conjugate(st.element, gv)
                return self.chain(st.path, Path(yv, (), (k,)), self.inverse(Pv))
        return None

    def _hyperbolic(self, cu, cv, Pu, Pv):
        n = len(cu.edges)
        Bu = self.G(cu.start)
        Bv = self.G(cv.start)
        l0, m0 = cu.labels[0], cv.labels[0]
        L = list(cu.labels[1:])
        L[-1] = Bu.mul(L[-1], l0)
        M = list(cv.labels[1:])
        M[-1] = Bv.mul(M[-1], m0)
        for r in range(n):
            fe = cv.edges[r:] + cv.edges[:r]
            if fe != cu.edges:
                continue
            Mr = M[r:] + M[:r]
            c1 = self._solve_cyclic(cu.edges, L, Mr)
            if c1 is None:
                continue
            d = self.mono[bar(cu.edges[0])].apply(c1)
            rho = Path(cv.start, cv.edges[:r], (Bv.identity(),) + tuple(M[:r]))
            return self.chain(Pu, Path(cu.start, (), (Bu.mul(l0, d),)), self.inverse(rho),
                              Path(cv.start, (), (Bv.inv(m0),)), self.inverse(Pv))
        return None

    def _solve_cyclic(self, edges, L, Mr):
        """c1 with phi_{e~_{i+1}}(c_{i+1}) = l_i^-1 phi_{e_i}(c_i) m_i and c_{n+1} = c_1."""
        n = len(edges)
        S1 = self.Ge(edges[0])
        branches = []
        for s in range(S1.order):
            p = S1.k
            I = lat.identity(p)
            branches.append(((s, (0,) * p, I), (s, (0,) * p, I), p))
        for i in range(n):
            e = edges[i]
            nxt = edges[(i + 1) % n]
            phi, psi = self.mono[e], self.mono[bar(nxt)]
            D = self.G(self.t(e))
            li_inv, mi = D.inv(L[i]), Mr[i]
            new = []
            for first, (cs, coff, cM), p in branches:
                def fn(w, cs=cs, coff=coff, cM=cM):
                    z = _aff(coff, cM, w)
                    return D.mul(D.mul(li_inv, phi.apply((z, cs))), mi)
                if p == 0 or not hasattr(D, "linearize") or not hasattr(psi, "sigma"):
                    if p:
                        raise CapabilityMissing(f"cyclic conjugacy system through a {D.kind} vertex")
                    c = psi.preimage(fn(()))
                    if c is not None:
                        new.append((first, (c[1], c[0], ()), 0))
                    continue
                sl, q, P = D.linearize(fn, p)
                S2 = psi.src
                for s2 in range(len(psi.sigma)):
                    if psi.sigma[s2] != sl:
                        continue
                    ys = psi.slice_img[s2][0]
                    A = tuple(tuple(P[r]) + tuple(-b for b in psi.B[r]) for r in range(D.k))
                    rhs = tuple(a - b for a, b in zip(ys, q))
                    if D.k:
                        sol = lat.solve(A, rhs)
                    else:
                        sol = ((0,) * (p + S2.k), lat.identity(p + S2.k))
                    if sol is None:
                        continue
                    x0, K = sol
                    p2 = len(K)
                    Kt = lat.transpose(K, p + S2.k) if K else tuple(() for _ in range(p + S2.k))
                    w0, Kw = x0[:p], Kt[:p]
                    z0, Kz = x0[p:], Kt[p:]
                    fs, foff, fM = first
                    foff2 = tuple(a + b for a, b in zip(foff, lat.matvec(fM, w0))) if p else foff
                    fM2 = lat.matmul(fM, Kw) if p and p2 else tuple(() for _ in range(len(foff)))
                    new.append(((fs, foff2, fM2), (s2, z0, Kz if p2 else tuple(() for _ in range(S2.k))), p2))
            branches = new
            if not branches:
                return None
        for (fs, foff, fM), (cs, coff, cM), p in branches:
            if fs != cs:
                continue
            if p == 0:
                if tuple(foff) == tuple(coff):
                    return (tuple(foff), fs)
                continue
            A = tuple(tuple(a - b for a, b in zip(r1, r2)) for r1, r2 in zip(cM, fM))
            rhs = tuple(a - b for a, b in zip(foff, coff))
            if not A:
                return (tuple(foff), fs)
            sol = lat.solve(A, rhs)
            if sol is not None:
                return (_aff(foff, fM, sol[0]), fs)
        return None


def _aff(off, M, w):
    if not w:
        return tuple(off)
    return tuple(a + b for a, b in zip(off, lat.matvec(M, w)))


@dataclass(frozen=True)
class HopState:
    location: tuple  # ("vertex", v) or ("edge", e)
    element: object
    path: Path


class MaximalTree:
    def __init__(self, X, base, parent):
        self.X = X
        self.base = base
        self.parent = parent
        self.edges = set()
        for v, e in parent.items():
            if e is not None:
                self.edges.update((e, bar(e)))
        self._paths = {}

    def path_to(self, v):
        """Tree path (1, e1, 1, ..., ek, 1) from the base to v."""
        if v not in self._paths:
            edges = []
            w = v
            while self.parent[w] is not None:
                e = self.parent[w]
                edges.append(e)
                w = self.X.o(e)
            self._paths[v] = self.X.path(self.base, tuple(reversed(edges)))
        return self._paths[v]

    def distance(self, v):
        return len(self.path_to(v).edges)

    def pair_count(self):
        return len(self.edges) // 2


def _small_ball(B, r):
    """Normal forms of words of length <= r in the generators of B."""
    gens = [B.gen(i) for i in range(len(B.alphabet))]
    gens += [B.inv(g) for g in gens]
    seen = {B.identity()}
    frontier = [B.identity()]
    for _ in range(r):
        nxt = []
        for x in frontier:
            for g in gens:
                y = B.mul(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return list(seen)


# -- module-level operations ---------------------------------------------


def validate(X):
    return X.validate()


def concat(X, p, q):
    return X.concat(p, q)


def reduce_path(X, p):
    return X.reduce_path(p)


def is_cyclically_reduced(X, T, p):
    return X.is_cyclically_reduced(T, p)


def cyclically_reduce(X, T, p):
    return X.cyclically_reduce(T, p)


def maximal_tree(X):
    return X.maximal_tree()


def vertex_embed(X, T, v, g):
    return X.vertex_embed(T, v, g)


def loop_is_identity(X, p):
    return X.loop_is_identity(p)


def pi1_conjugate(X, T, u, v):
    return X.pi1_conjugate(T, u, v)


def hop_closure(X, v, u, max_depth=64):
    return X.hop_closure(v, u, max_depth=max_depth)


def random_loop(X, rng, length, label_radius=2, T=None):
    """A random loop at the base: tree-path walk with random labels.

    Labels are drawn from small balls of the vertex groups and, half the
    time, from the incoming edge image, so that reductions actually occur.
    """
    T = T or X.tree
    v = X.base
    edges = []
    labels = [_random_label(X, v, rng, label_radius, None)]
    for _ in range(length):
        outs = [e for e in range(X.nedges) if X.o(e) == v]
        if not outs:
            break
        e = rng.choice(outs)
        edges.append(e)
        v = X.t(e)
        labels.append(_random_label(X, v, rng, label_radius, e))
    p = Path(X.base, tuple(edges), tuple(labels))
    back = X.inverse(T.path_to(v))
    return X.concat(p, back)


def _random_label(X, v, rng, radius, e):
    B = X.G(v)
    if e is not None and rng.random() < 0.5:
        src = X.mono[e].src
        n = rng.randint(0, radius)
        z = src.identity()
        for _ in range(n):
            g = src.gen(rng.randrange(len(src.alphabet))) if len(src.alphabet) else src.identity()
            z = src.mul(z, g if rng.random() < 0.5 else src.inv(g))
        return X.mono[e].apply(z)
    x = B.identity()
    for _ in range(rng.randint(0, radius)):
        if not len(B.alphabet):
            break
        g = B.gen(rng.randrange(len(B.alphabet)))
        x = B.mul(x, g if rng.random() < 0.5 else B.inv(g))
    return x

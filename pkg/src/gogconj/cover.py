"""The orientation double cover of a graph of groups.

Vertices with a nontrivial orientation character (``VM-``) get one lift
``v+`` whose group is the orientation kernel; the others (``VM+``) get two
copies ``v+`` and ``v-``.  Edges whose image reverses orientation (``EM-``)
lift once, the others twice.  ``mu(e)`` are the twist elements making the
covering squares commute, and :func:`p_sharp` maps paths of the cover down.
"""

from dataclasses import dataclass, field

from . import lattice as lat
from .backends import AffineGroup, AffineHom, BackendError, CapabilityMissing, make_backend, make_hom
from .gog import GraphError, GraphOfGroups, Path, _small_ball, bar


class CoverError(ValueError):
    pass


class _Identity:
    def __init__(self, src, dst):
        self.src, self.dst = src, dst

    def apply(self, x):
        return x

    def preimage(self, y):
        return y


def clone(B):
    """A fresh backend of the same kind and parameters."""
    return make_backend(B.kind, **dict(B.params))


def kernel_backend(B, omega):
    """Closed form of ker(omega) with its inclusion into B.

    ``omega`` maps a normal form to +1 or -1.  Returns ``(K, incl)`` where
    ``incl`` is an :class:`AffineHom` from K onto the kernel.
    """
    if not isinstance(B, AffineGroup):
        raise CapabilityMissing(f"orientation kernels of {B.kind} groups")
    k = B.k
    units = [tuple(1 if i == j else 0 for j in range(k)) for i in range(k)]
    # translation sublattice of even vectors
    odd = [u for u in units if omega((u, 0)) == -1]
    if odd:
        o = odd[0]
        gens = [tuple(2 * x for x in o)]
        for u in units:
            gens.append(u if omega((u, 0)) == 1 else tuple(a - b for a, b in zip(u, o)))
        Q = lat.hnf(gens, k)
    else:
        Q = tuple(units)
    # section offsets s_f with omega(s_f, f) = 1
    section = {}
    for f in range(B.order):
        if omega((B._zero, f)) == 1:
            section[f] = B._zero
        elif odd:
            section[f] = odd[0]
    fs = sorted(section)
    if len(Q) == k and not odd and len(fs) == B.order:
        raise CoverError("orientation character is trivial on this group")

    def coords(x):
        c = lat.express(x, Q) if Q else ()
        if c is None:
            raise AssertionError("vector outside the kernel lattice")
        # express() gives coefficients for the Hermite rows
        return c

    if len(fs) == 1:
        K = make_backend("free_abelian", rank=k) if k else make_backend("trivial")
    else:
        s1 = section[1]
        A1 = B.A[1]
        # action and cocycle in the new coordinates
        A1q = lat.transpose([coords(lat.matvec(A1, row)) for row in Q], k)
        c11 = coords(tuple(a + b + c for a, b, c in zip(s1, lat.matvec(A1, s1), B.c(1, 1))))
        params = {}
        if B.kind == "z_plus_z2":
            params["p"] = c11[0]
        K = make_backend(B.kind, **params)
        if tuple(map(tuple, K.A[1])) != tuple(map(tuple, A1q)) or K.c(1, 1) != tuple(c11):
            raise CapabilityMissing(f"orientation kernel of {B.kind} is not of the same kind")
    images = []
    for j in range(len(K.alphabet)):
        y, f = K.gen(j)
        x = tuple(section[fs[f]])
        for c, row in zip(y, Q):
            x = tuple(a + c * b for a, b in zip(x, row))
        images.append((x, fs[f]))
    names = [B.fmt(x).replace(" ", "") for x in images]
    if len(set(names)) == len(names) and not any("^" in n or n == "1" for n in names):
        params = {k2: v for k2, v in K.params.items() if k2 != "gens"}
        K = make_backend(K.kind, gens=",".join(names), **params)
    return K, AffineHom(K, B, images)


@dataclass
class Cover:
    M: GraphOfGroups
    N: GraphOfGroups
    vm_minus: set
    em_minus: set  # M edge indices
    mu_vertex: dict  # v -> mu(v) in G(v), v in VM-
    p_vertex: dict = field(default_factory=dict)  # N vertex -> M vertex
    p_edge: dict = field(default_factory=dict)  # N edge index -> M edge index
    lift_edge: dict = field(default_factory=dict)  # (M edge, sign) -> N edge index
    pv: dict = field(default_factory=dict)  # N vertex -> map H(v) -> G(p(v))
    pe: dict = field(default_factory=dict)  # N edge pair -> map H(e) -> G(p(e))
    mu: dict = field(default_factory=dict)  # N edge index -> mu(e) in G(t(p(e)))
    slide: dict = field(default_factory=dict)  # M edge in EM- -> reversing edge element
    cache: dict = field(default_factory=dict, repr=False)

    @property
    def base(self):
        return self.M.base + "+"

    def is_orientation_reversing(self, v, g):
        return v in self.vm_minus and self.M.omega(v, g) == -1


def _check_marking(M):
    if not any(not om.is_trivial() for om in M.orientation.values()):
        raise CoverError("orientable input: every orientation character is trivial")
    for v, om in M.orientation.items():
        B = M.G(v)
        sample = _small_ball(B, 2) if isinstance(B, AffineGroup) else [B.gen(i) for i in range(len(B.alphabet))]
        for x in sample:
            for y in sample:
                if M.omega(v, B.mul(x, y)) != M.omega(v, x) * M.omega(v, y):
                    raise CoverError(f"orientation of {v} is not a homomorphism")
    for e in range(0, M.nedges, 2):
        E = M.Ge(e)
        for i in range(len(E.alphabet)):
            z = E.gen(i)
            a = M.omega(M.t(e), M.mono[e].apply(z))
            b = M.omega(M.o(e), M.mono[bar(e)].apply(z))
            if a != b:
                raise CoverError(f"edge {M.edge_names[e // 2]}: orientation differs on its two sides")


def build_orientation_cover(M):
    """Construct the orientation double cover N of M with its covering data."""
    _check_marking(M)
    vm_minus = {v for v in M.vertices if v in M.orientation and not M.orientation[v].is_trivial()}
    em_minus = set()
    slide = {}
    for e in range(M.nedges):
        E = M.Ge(e)
        for i in range(len(E.alphabet)):
            if M.omega(M.t(e), M.mono[e].apply(E.gen(i))) == -1:
                em_minus.add(e)
                slide.setdefault(e, E.gen(i))
                break
    mu_vertex = {}
    for v in M.vertices:
        if v in vm_minus:
            om = M.orientation[v]
            i = om.values.index(-1)
            mu_vertex[v] = M.G(v).gen(i)
    N = GraphOfGroups()
    C = Cover(M, N, vm_minus, em_minus, mu_vertex, slide=slide)
    for v in M.vertices:
        B = M.G(v)
        if v in vm_minus:
            K, incl = kernel_backend(B, lambda x, v=v: M.omega(v, x))
            N.add_vertex(v + "+", K, M.seifert[v])
            C.pv[v + "+"] = incl
            C.p_vertex[v + "+"] = v
        else:
            for s in "+-":
                H = clone(B)
                N.add_vertex(v + s, H, M.seifert[v])
                C.pv[v + s] = _Identity(H, B)
                C.p_vertex[v + s] = v
    N.base = M.base + "+"

    def end(v, s):
        return v + "+" if (s == "+" or v in vm_minus) else v + "-"

    def mu_of(e, s):
        if s == "-" and M.t(e) in vm_minus:
            return mu_vertex[M.t(e)]
        return M.G(M.t(e)).identity()

    for i, name in enumerate(M.edge_names):
        e = 2 * i
        signs = "+" if e in em_minus else "+-"
        for s in signs:
            E = M.Ge(e)
            if e in em_minus:
                H, incl = kernel_backend(E, lambda z, e=e: M.omega(M.t(e), M.mono[e].apply(z)))
            else:
                H = clone(E)
                incl = _Identity(H, E)
            ne = N.add_edge(name + s, end(M.o(e), s), end(M.t(e), s), H)
            C.pe[ne // 2] = incl
            for ee, nee in ((e, ne), (bar(e), bar(ne))):
                C.p_edge[nee] = ee
                C.lift_edge[(ee, s)] = nee
                mu = mu_of(ee, s)
                C.mu[nee] = mu
                D = M.G(M.t(ee))
                tgt = C.pv[N.t(nee)]
                images = []
                for j in range(len(H.alphabet)):
                    y = D.conj(mu, M.mono[ee].apply(incl.apply(H.gen(j))))
                    x = tgt.preimage(y)
                    if x is None:
                        raise CoverError(f"edge {name}{s}: twisted image leaves the kernel")
                    images.append(x)
                try:
                    hom = make_hom(H, N.G(N.t(nee)), images)
                except BackendError as exc:
                    raise CoverError(f"edge {name}{s}: {exc}") from None
                N.set_mono(nee, hom, [N.G(N.t(nee)).nf_word(x) for x in images])
    problems = N.validate()
    if problems:
        raise CoverError("cover failed validation: " + "; ".join(problems))
    return C


def p_vertex_map(C, v, h):
    return C.pv[v].apply(h)


def p_sharp(C, path):
    """Image in M of a path of N."""
    M, N = C.M, C.N
    n = len(path.edges)
    labels = []
    for i in range(n + 1):
        v = N.vertex_of(path, i)
        pv = C.p_vertex[v]
        D = M.G(pv)
        g = C.pv[v].apply(path.labels[i])
        if i > 0:
            g = D.mul(C.mu[path.edges[i - 1]], g)
        if i < n:
            g = D.mul(g, D.inv(C.mu[bar(path.edges[i])]))
        labels.append(g)
    return Path(C.p_vertex[path.start], tuple(C.p_edge[e] for e in path.edges), tuple(labels))


def lift_loop(C, gamma):
    """An N-loop at x+ mapping onto gamma, or None when gamma is not in H.

    Left to right: a label in the kernel crosses by e+, otherwise by e-
    after absorbing mu; across an orientation-reversing edge (only e+
    exists) a reversing edge element is slid to the next label instead.
    """
    M, N = C.M, C.N
    if gamma.start != M.base or M.end(gamma) != M.base:
        raise GraphError("lift_loop needs a loop at the base vertex")
    cur = gamma.start + "+"
    w = gamma.labels[0]
    edges, labels = [], []
    for i, e in enumerate(gamma.edges):
        v = M.vertex_of(gamma, i)
        D = M.G(v)
        nxt = gamma.labels[i + 1]
        if v not in C.vm_minus:
            s = cur[-1]
        elif M.omega(v, w) == 1:
            s = "+"
        elif e in C.em_minus:
            c = C.slide[e]
            w = D.mul(w, M.mono[bar(e)].apply(c))
            nxt = M.G(M.t(e)).mul(M.G(M.t(e)).inv(M.mono[e].apply(c)), nxt)
            s = "+"
        else:
            s = "-"
        ne = C.lift_edge[(e, s)]
        h = C.pv[cur].preimage(D.mul(w, C.mu[bar(ne)]))
        if h is None:
            raise AssertionError("lift label left the kernel")
        edges.append(ne)
        labels.append(h)
        cur = N.t(ne)
        T = M.G(M.t(e))
        w = T.mul(T.inv(C.mu[ne]), nxt)
    if cur != gamma.start + "+":
        return None
    h = C.pv[cur].preimage(w) if M.omega(M.base, w) == 1 else None
    if h is None:
        return None
    labels.append(h)
    return Path(gamma.start + "+", tuple(edges), tuple(labels))


def in_h(C, gamma):
    """Membership of an M-loop in the orientation-preserving subgroup."""
    return lift_loop(C, gamma) is not None


def parity(C, gamma):
    """Product of the orientation characters of the labels of gamma."""
    s = 1
    for i, g in enumerate(gamma.labels):
        s *= C.M.omega(C.M.vertex_of(gamma, i), g)
    return s


def reversing_loop(C, T=None):
    """A fixed loop of G outside H: mu of the first reversing vertex, embedded."""
    M = C.M
    T = T or M.tree
    v = M.base if M.base in C.vm_minus else next(v for v in M.vertices if v in C.vm_minus)
    return M.vertex_embed(T, v, C.mu_vertex[v])


def describe(C):
    """Comment block recording the covering data."""
    M, N = C.M, C.N
    lines = ["# p: cover of the marked graph, base " + N.base]
    for v in N.vertices:
        B = N.G(v)
        imgs = " ".join(f"{g}->{M.G(C.p_vertex[v]).fmt(C.pv[v].apply(B.gen(i))).replace(' ', '.')}"
                        for i, g in enumerate(B.alphabet.names))
        lines.append(f"# p: vertex {v} -> {C.p_vertex[v]} {imgs}".rstrip())
    for e in range(0, N.nedges, 2):
        for ee in (e, e + 1):
            mu = M.G(M.t(C.p_edge[ee])).fmt(C.mu[ee])
            lines.append(f"# p: edge {N.edge_name(ee)} -> {M.edge_name(C.p_edge[ee])} mu={mu.replace(' ', '.')}")
    for v, m in C.mu_vertex.items():
        lines.append(f"# p: mu({v})={M.G(v).fmt(m).replace(' ', '.')}")
    return "\n".join(lines) + "\n"

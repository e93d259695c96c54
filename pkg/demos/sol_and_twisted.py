"""
Sol mapping tori and twisted conjugacy
======================================

Z^2 extended by an Anosov matrix theta.  Twisted conjugacy in Z^2
(v = theta(g) + u - g) is ordinary conjugacy of t^-1 u and t^-1 v in
the mapping torus.
"""

from gogconj.backends import SolBundle, make_backend
from gogconj.conjalg import twisted_conjugate

theta = ((2, 1), (1, 1))
S = SolBundle(theta)

# fiber elements are conjugate exactly along theta-orbits
x = ((1, 0), 0)
for y in [((2, 1), 0), ((5, 3), 0), ((0, 1), 0)]:
    h = S.conjugate(y, x)
    print(S.fmt(y), "~", S.fmt(x), ":", "no" if h is None else "h = " + S.fmt(h))

# the centralizer of a fiber element is the whole fiber
print("centralizer of a:", S.centralizer(x).note)

B = make_backend("free_abelian", rank=2, gens="a,b")
for M in [theta, ((3, 1), (2, 1))]:
    print("theta =", M)
    for u, v in [("a", "b"), ("a", "a a b"), ("1", "a")]:
        g = twisted_conjugate(B, M, B.parse(u), B.parse(v))
        print(f"  {u} ~ {v}:", "no" if g is None else "g = " + B.fmt(g))

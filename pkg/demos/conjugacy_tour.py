"""
Deciding conjugacy
==================

A walk through the decision procedure on the bundled graphs.  Each
verdict carries a trail of the branches taken and, for yes answers, a
conjugator h with u = h v h^-1 that has been checked by the word problem.
"""

from gogconj import corpus, oracle
from gogconj.conjalg import centralizer_in_H, conjugate_in_G, cover_of

cases = [
    ("klein", "[t]", "[b b t]"),
    ("klein", "[b]", "[b^-1]"),
    ("klein", "[t]", "[b t]"),
    ("flat", "[t]", "[t b]"),
    ("p2", "[t]", "[a a t]"),
    ("p2", "[t]", "[a t]"),
    ("kleinedge", "[a b t]", "[a b^3 t]"),
    ("seifert2", "[a t] f [t] f~ [t a^-1]", "[t] f [t] f~ [t]"),
    ("seifert2", "[t] f [t] f~ [t]", "[t] f [t^-1] f~ [t]"),
]

for name, a, b in cases:
    M = corpus(name)
    C = cover_of(M)
    u, v = M.parse_path(a), M.parse_path(b)
    V = conjugate_in_G(C, u, v)
    answer = "yes, h = " + M.format_path(V.witness) if V.conjugate else "no"
    print(f"{name:9s} {a} ~ {b}: {answer}")
    print("          trail:", " > ".join(V.trail))
    # the brute-force oracle can confirm a yes or fail to find one up to a radius
    h = oracle.brute_conjugate(M, u, v, 6)
    print("          oracle at radius 6:", "found" if h is not None else "none")

# centralizers of squares steer the last stage of the procedure
for name, w in [("sol", "[a]"), ("klein", "[b]"), ("kleinedge", "[a]")]:
    C = cover_of(corpus(name))
    cls = centralizer_in_H(C, C.M.parse_path(w))
    print(f"centralizer of {w} in {name}: {cls.kind} {cls.note}".rstrip())

"""
The orientation double cover
============================

The orientation character marks which vertex-group elements reverse
orientation.  Its kernel H has index two and is the fundamental group of
a doubled graph of groups N.
"""

from gogconj import corpus, emit
from gogconj.cover import build_orientation_cover, describe, lift_loop, p_sharp

M = corpus("flat")
C = build_orientation_cover(M)

# both vertices reverse orientation, so each has one lift; the torus edge
# preserves it, so it has two lifts e+ and e-
print(describe(C) + emit(C.N))

# loops of even parity lift to N; p_sharp maps the lift back onto the loop
for text in ["[t] e [t] e~ [1]", "[t]", "[a b]"]:
    g = M.parse_path(text)
    l = lift_loop(C, g)
    if l is None:
        print(f"{text:22s} not in H")
        continue
    back = p_sharp(C, l)
    same = M.loop_is_identity(M.concat(back, M.inverse(g)))
    print(f"{text:22s} lifts to {C.N.format_path(l)}  round trip ok: {same}")

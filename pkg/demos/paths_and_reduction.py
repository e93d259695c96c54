"""
Paths in a graph of groups
==========================

Elements of the fundamental group are loops that alternate vertex-group
elements and edges.  Reduction removes backtracks through edge groups.
"""

import random

from gogconj import corpus, gog

# two Moebius-circle groups glued along a torus
X = corpus("flat")
print("vertices:", X.vertices, "edges:", X.edge_names, "base:", X.base)

# a loop written in the file syntax; [..] holds words, e~ is the reversed edge
p = X.parse_path("[a] e [t] e~ [a^-1] e [1] e~ [t]")
print("loop:      ", X.format_path(p))

# e [1] e~ is a backtrack; t at v2 lies outside the edge group and stays
r = X.reduce_path(p)
print("reduced:   ", X.format_path(r), "length", len(r.edges))

# every elimination order ends at the same length
rng = random.Random(1)
for order in ("stack", "left", "right", "random"):
    print(f"  {order:6s} ->", len(X.reduce_path(p, order=order, rng=rng).edges))

# cyclic reduction also returns the conjugator alpha with c = alpha p alpha^-1
q = X.parse_path("[t] e [1] e~ [t]")
c, alpha = X.cyclically_reduce(X.tree, q)
print("cyclic:    ", X.format_path(c), "via", X.format_path(alpha))
print("identity?  ", X.loop_is_identity(X.parse_path("[t t a^-1]")))

# random loops are useful for quick experiments
for _ in range(3):
    w = gog.random_loop(X, rng, 4)
    print("random:", X.format_path(w), "->", X.format_path(X.reduce_path(w)))

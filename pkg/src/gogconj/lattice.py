"""Exact integer lattice algebra on Python ints.

Vectors are tuples of ints, matrices are tuples of row tuples.  Everything
here is exact; there is no floating point anywhere.
"""


def _neg(v):
    return tuple(-x for x in v)


def _axpy(a, x, y):
    # y + a*x
    return tuple(yi + a * xi for xi, yi in zip(x, y))


def echelon(rows):
    """Row echelon form with a unimodular transform.

    Returns ``(E, T, pivots)`` with ``T @ rows == E``.  The nonzero rows of
    ``E`` come first, have strictly increasing positive pivots, and the
    entries above each pivot are reduced into ``[0, pivot)`` (Hermite form).
    The trailing rows of ``T`` span the left kernel of ``rows``.
    """
    rows = [tuple(r) for r in rows]
    m = len(rows)
    n = len(rows[0]) if rows else 0
    E = list(rows)
    T = [tuple(1 if i == j else 0 for j in range(m)) for i in range(m)]
    pivots = []
    r = 0
    for col in range(n):
        if r == m:
            break
        # Euclid on column entries below r
        while True:
            nz = [i for i in range(r, m) if E[i][col] != 0]
            if not nz:
                break
            i0 = min(nz, key=lambda i: abs(E[i][col]))
            E[r], E[i0] = E[i0], E[r]
            T[r], T[i0] = T[i0], T[r]
            done = True
            for i in range(r + 1, m):
                if E[i][col]:
                    q = E[i][col] // E[r][col]
                    E[i] = _axpy(-q, E[r], E[i])
                    T[i] = _axpy(-q, T[r], T[i])
                    if E[i][col]:
                        done = False
            if done:
                break
        if E[r][col] == 0:
            continue
        if E[r][col] < 0:
            E[r] = _neg(E[r])
            T[r] = _neg(T[r])
        p = E[r][col]
        for i in range(r):
            q = E[i][col] // p
            if q:
                E[i] = _axpy(-q, E[r], E[i])
                T[i] = _axpy(-q, T[r], T[i])
        pivots.append(col)
        r += 1
    return E, T, pivots


def hnf(gens, dim):
    """Hermite basis (tuple of rows) of the lattice spanned by ``gens``."""
    gens = [tuple(g) for g in gens if any(g)]
    if not gens:
        return ()
    E, _, pivots = echelon(gens)
    return tuple(E[: len(pivots)])


def _pivot(row):
    for i, x in enumerate(row):
        if x:
            return i
    raise ValueError("zero row in basis")


def reduce_mod(v, basis):
    """Canonical representative of ``v`` modulo a lattice in Hermite form."""
    v = tuple(v)
    for row in basis:
        p = _pivot(row)
        q = v[p] // row[p]
        if q:
            v = _axpy(-q, row, v)
    return v


def in_lattice(v, basis):
    return not any(reduce_mod(v, basis))


def express(v, basis):
    """Integer coefficients c with sum c_i basis_i == v, or None."""
    v = tuple(v)
    coeffs = []
    for row in basis:
        p = _pivot(row)
        if v[p] % row[p]:
            return None
        q = v[p] // row[p]
        coeffs.append(q)
        v = _axpy(-q, row, v)
    if any(v):
        return None
    return tuple(coeffs)


def transpose(M, ncols=None):
    if not M:
        return tuple(() for _ in range(ncols or 0))
    return tuple(zip(*M))


def solve(A, b):
    """Integer solutions of ``A x = b``.

    ``A`` is an m x n matrix (rows).  Returns ``(x0, kernel)`` where every
    solution is ``x0`` plus an integer combination of ``kernel`` (a basis of
    the integer kernel in Hermite form), or ``None`` when there is no
    integer solution.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    b = tuple(b)
    if n == 0:
        return ((), ()) if not any(b) else None
    cols = [tuple(A[i][j] for i in range(m)) for j in range(n)]
    E, T, pivots = echelon(cols)
    r = len(pivots)
    y = []
    res = b
    for i in range(r):
        p = pivots[i]
        if res[p] % E[i][p]:
            return None
        q = res[p] // E[i][p]
        y.append(q)
        res = _axpy(-q, E[i], res)
    if any(res):
        return None
    x0 = tuple([0] * n)
    for q, t in zip(y, T):
        x0 = _axpy(q, t, x0)
    kernel = hnf(T[r:], n)
    x0 = reduce_mod(x0, kernel)
    return x0, kernel


def matvec(M, v):
    return tuple(sum(a * b for a, b in zip(row, v)) for row in M)


def matmul(A, B):
    Bt = transpose(B)
    return tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in Bt) for row in A)


def identity(k):
    return tuple(tuple(1 if i == j else 0 for j in range(k)) for i in range(k))


def det2(M):
    return M[0][0] * M[1][1] - M[0][1] * M[1][0]


def intersect(L1, L2, dim):
    """Hermite basis of the intersection of two lattices."""
    if not L1 or not L2:
        return ()
    # x = sum a_i L1_i = sum b_j L2_j  <=>  [L1; -L2]^T (a, b) = 0
    A = transpose(tuple(L1) + tuple(tuple(-x for x in r) for r in L2))
    sol = solve(A, (0,) * dim)
    _, ker = sol
    out = []
    for k in ker:
        a = k[: len(L1)]
        v = (0,) * dim
        for c, row in zip(a, L1):
            v = _axpy(c, row, v)
        out.append(v)
    return hnf(out, dim)


def l1norm(v):
    return sum(abs(x) for x in v)

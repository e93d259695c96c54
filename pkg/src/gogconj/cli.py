"""Command-line entry points.

Every command prints ``key=value`` lines.  Exit status is 0 when a query
was decided (either way), 1 on input errors and 3 when the input lies
outside what the algorithms support.
"""

import argparse
import random
import sys

from . import conjalg, oracle
from .backends import BackendError, CapabilityMissing, make_backend
from .cover import CoverError, build_orientation_cover, describe, lift_loop
from .gog import GraphError, HopDepthExceeded
from .gogfile import GogFileError, emit, load
from .words import WordError

EXIT_OK, EXIT_INPUT, EXIT_UNSUPPORTED = 0, 1, 3


def _q(s):
    return f'"{s}"' if (" " in s or not s) else s


def _out(**kv):
    for k, v in kv.items():
        print(f"{k.replace('_', '-')}={v}")


def _loop(X, text):
    p = X.parse_path(text)
    if not X.is_loop(p, X.base):
        raise GraphError(f"{text!r} is not a loop at the base vertex {X.base}")
    return p


def cmd_validate(a):
    X = load(a.file)
    _out(valid="yes", vertices=len(X.vertices), edges=len(X.edge_names), base=X.base)


def cmd_reduce(a):
    X = load(a.file)
    p = X.parse_path(a.path, a.start)
    r = X.reduce_path(p, order=a.order, rng=random.Random(a.seed))
    _out(path=_q(X.format_path(r)), length=len(r.edges))


def cmd_cyc_reduce(a):
    X = load(a.file)
    p = _loop(X, a.path)
    r, alpha = X.cyclically_reduce(X.tree, p)
    _out(path=_q(X.format_path(r)), length=len(r.edges), conjugator=_q(X.format_path(alpha)))


def cmd_wp(a):
    X = load(a.file)
    p = X.parse_path(a.path, a.start)
    if not X.is_loop(p):
        raise GraphError("the word problem is posed for closed paths")
    _out(identity="yes" if X.loop_is_identity(p) else "no")


def cmd_member_h(a):
    X = load(a.file)
    C = build_orientation_cover(X)
    p = _loop(X, a.path)
    _out(member="yes" if lift_loop(C, p) is not None else "no")


def cmd_lift(a):
    X = load(a.file)
    C = build_orientation_cover(X)
    l = lift_loop(C, _loop(X, a.path))
    if l is None:
        _out(member="no")
    else:
        _out(member="yes", lift=_q(C.N.format_path(l)))


def cmd_cover(a):
    X = load(a.file)
    C = build_orientation_cover(X)
    text = describe(C) + emit(C.N)
    if a.output:
        with open(a.output, "w") as fh:
            fh.write(text)
        _out(written=a.output, vertices=len(C.N.vertices), edges=len(C.N.edge_names))
    else:
        sys.stdout.write(text)


def cmd_conj(a):
    X = load(a.file)
    C = build_orientation_cover(X)
    u, v = _loop(X, a.u), _loop(X, a.v)
    V = conjalg.conjugate_in_G(C, u, v, a.max_depth)
    kv = {"verdict": "yes" if V.conjugate else "no"}
    if V.conjugate:
        kv["witness"] = _q(X.format_path(V.witness))
    kv["trail"] = ",".join(V.trail)
    _out(**kv)


def cmd_centralizer(a):
    X = load(a.file)
    C = build_orientation_cover(X)
    cls = conjalg.centralizer_in_H(C, _loop(X, a.path), a.max_depth)
    kv = {"class": cls.kind}
    if cls.vertex is not None:
        kv["vertex"] = cls.vertex
    if cls.edge is not None:
        kv["edge"] = X.edge_name(cls.edge)
    if cls.path is not None:
        kv["conjugator"] = _q(X.format_path(cls.path))
    if cls.note:
        kv["note"] = _q(cls.note)
    _out(**kv)


def cmd_oracle_conj(a):
    X = load(a.file)
    u, v = _loop(X, a.u), _loop(X, a.v)
    h = oracle.brute_conjugate(X, u, v, a.radius)
    if h is None:
        _out(oracle="none-within-radius", radius=a.radius)
    else:
        _out(oracle="found", radius=a.radius, witness=_q(X.format_path(X.reduce_path(h))))


def cmd_twisted(a):
    theta = [int(x) for x in a.theta.split(",")]
    if len(theta) != 4:
        raise BackendError("--theta needs four entries a,b,c,d")
    theta = ((theta[0], theta[1]), (theta[2], theta[3]))
    B = make_backend("free_abelian", rank=2, gens="a,b")
    u, v = B.parse(a.u), B.parse(a.v)
    g = conjalg.twisted_conjugate(B, theta, u, v)
    if g is None:
        _out(verdict="no")
    else:
        _out(verdict="yes", g=_q(B.fmt(g)))


def build_parser():
    ap = argparse.ArgumentParser(prog="gogconj", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, fn, helptext, *args):
        p = sub.add_parser(name, help=helptext)
        p.set_defaults(fn=fn)
        for a in args:
            if a == "file":
                p.add_argument("file", help="graph-of-groups file")
            elif a == "path":
                p.add_argument("path", help='path such as "[g0] e1 [g1]"')
            elif a == "uv":
                p.add_argument("u")
                p.add_argument("v")
            elif a == "start":
                p.add_argument("--start", help="start vertex of a length-0 path (default: base)")
            elif a == "depth":
                p.add_argument("--max-depth", type=int, default=64, help="hop-closure depth bound")
        return p

    cmd("validate", cmd_validate, "parse and validate a file", "file")
    p = cmd("reduce", cmd_reduce, "reduce a path", "file", "path", "start")
    p.add_argument("--order", choices=["stack", "left", "right", "random"], default="stack")
    p.add_argument("--seed", type=int)
    cmd("cyc-reduce", cmd_cyc_reduce, "cyclically reduce a loop", "file", "path")
    cmd("wp", cmd_wp, "word problem for a closed path", "file", "path", "start")
    cmd("member-h", cmd_member_h, "membership in the orientation-preserving subgroup", "file", "path")
    cmd("lift", cmd_lift, "lift a loop to the orientation cover", "file", "path")
    p = cmd("cover", cmd_cover, "emit the orientation cover", "file")
    p.add_argument("-o", "--output", help="write the cover file here")
    cmd("conj", cmd_conj, "decide conjugacy of two loops", "file", "uv", "depth")
    cmd("centralizer", cmd_centralizer, "classify the centralizer of a loop in H", "file", "path", "depth")
    p = cmd("oracle-conj", cmd_oracle_conj, "brute-force conjugator search", "file", "uv")
    p.add_argument("--radius", type=int, default=6)
    p = sub.add_parser("twisted", help="twisted conjugacy in Z^2 (generators a, b)")
    p.set_defaults(fn=cmd_twisted)
    p.add_argument("--theta", required=True, help="matrix entries a,b,c,d")
    p.add_argument("u")
    p.add_argument("v")
    return ap


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.fn(args)
    except (CapabilityMissing, conjalg.OutsideHypotheses, HopDepthExceeded) as exc:
        print(f"error={_q(str(exc))}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (GogFileError, GraphError, CoverError, BackendError, WordError, ValueError, OSError) as exc:
        print(f"error={_q(str(exc))}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main():
    sys.exit(run())

"""Reading and writing graph-of-groups files.

Grammar (one record per line, ``#`` starts a comment)::

    vertex NAME kind=KIND [KEY=VALUE ...] [seifert=true|false]
    edge NAME from=V1 to=V2 kind=KIND [KEY=VALUE ...]
    mono NAME+ GEN=WORD ...      # phi_e into G(to)
    mono NAME- GEN=WORD ...      # phi_e~ into G(from)
    orient V: GEN=+1|-1 ...
    base V

Words containing spaces are double-quoted (``x1="a b^-1"``).
"""

import shlex

from .backends import BackendError, make_backend, make_hom
from .gog import GraphError, GraphOfGroups
from .words import WordError


class GogFileError(ValueError):
    pass


def _fields(tokens, lineno):
    out = {}
    for tok in tokens:
        key, eq, val = tok.partition("=")
        if not eq or not key:
            raise GogFileError(f"line {lineno}: expected KEY=VALUE, got {tok!r}")
        if key in out:
            raise GogFileError(f"line {lineno}: repeated key {key!r}")
        out[key] = val
    return out


def _backend(fields, lineno):
    kind = fields.pop("kind", None)
    if kind is None:
        raise GogFileError(f"line {lineno}: missing kind=")
    try:
        return make_backend(kind, **fields)
    except BackendError as exc:
        raise GogFileError(f"line {lineno}: {exc}") from None


def parse(text):
    """Parse file text into a validated :class:`GraphOfGroups`."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    X = GraphOfGroups()
    monos = {}
    base = None
    edge_line = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            tokens = shlex.split(line)
        except ValueError as exc:
            raise GogFileError(f"line {lineno}: {exc}") from None
        rec, args = tokens[0], tokens[1:]
        try:
            if rec == "vertex":
                if not args:
                    raise GogFileError(f"line {lineno}: vertex needs a name")
                f = _fields(args[1:], lineno)
                seif = f.pop("seifert", "false")
                if seif not in ("true", "false"):
                    raise GogFileError(f"line {lineno}: seifert must be true or false")
                X.add_vertex(args[0], _backend(f, lineno), seif == "true")
            elif rec == "edge":
                if not args:
                    raise GogFileError(f"line {lineno}: edge needs a name")
                f = _fields(args[1:], lineno)
                src, dst = f.pop("from", None), f.pop("to", None)
                if src is None or dst is None:
                    raise GogFileError(f"line {lineno}: edge needs from= and to=")
                X.add_edge(args[0], src, dst, _backend(f, lineno))
                edge_line[args[0]] = lineno
            elif rec == "mono":
                if not args or args[0][-1:] not in ("+", "-"):
                    raise GogFileError(f"line {lineno}: mono needs NAME+ or NAME-")
                name, sign = args[0][:-1], args[0][-1]
                if (name, sign) in monos:
                    raise GogFileError(f"line {lineno}: repeated mono {args[0]}")
                monos[(name, sign)] = (_fields(args[1:], lineno), lineno)
            elif rec == "orient":
                if not args or not args[0].endswith(":"):
                    raise GogFileError(f"line {lineno}: expected 'orient V: gen=+1|-1 ...'")
                v = args[0][:-1]
                if v not in X.vertex_backend:
                    raise GogFileError(f"line {lineno}: unknown vertex {v}")
                vals = {}
                for k, val in _fields(args[1:], lineno).items():
                    if val not in ("+1", "-1", "1"):
                        raise GogFileError(f"line {lineno}: orientation values are +1 or -1")
                    vals[k] = int(val)
                X.set_orientation(v, vals)
            elif rec == "base":
                if len(args) != 1:
                    raise GogFileError(f"line {lineno}: base takes one vertex")
                if base is not None:
                    raise GogFileError(f"line {lineno}: more than one base record")
                base = args[0]
            else:
                raise GogFileError(f"line {lineno}: unknown record {rec!r}")
        except (GraphError, WordError) as exc:
            raise GogFileError(f"line {lineno}: {exc}") from None
    for (name, sign), (f, lineno) in monos.items():
        if name not in X.edge_names:
            raise GogFileError(f"line {lineno}: mono for unknown edge {name}")
        e = X.edge_index(name) + (sign == "-")
        src, dst = X.Ge(e), X.G(X.t(e))
        words = []
        try:
            for gname in src.alphabet.names:
                if gname not in f:
                    raise GogFileError(f"line {lineno}: mono {name}{sign} misses generator {gname}")
                words.append(dst.alphabet.parse(f.pop(gname)))
            if f:
                raise GogFileError(f"line {lineno}: unknown edge generators {sorted(f)}")
            hom = make_hom(src, dst, [dst.normalize(w) for w in words])
        except (WordError, BackendError) as exc:
            raise GogFileError(f"line {lineno}: mono {name}{sign}: {exc}") from None
        X.set_mono(e, hom, words)
    if base is not None:
        if base not in X.vertex_backend:
            raise GogFileError(f"base vertex {base} is not declared")
        X.base = base
    problems = X.validate()
    if problems:
        raise GogFileError("; ".join(problems))
    return X


def _q(word):
    s = str(word)
    return f'"{s}"' if " " in s else s


def _params(B):
    return "".join(f" {k}={v}" for k, v in B.params.items())


def emit(X):
    """Canonical text of X; ``parse(emit(X))`` rebuilds the same graph."""
    lines = []
    for v in X.vertices:
        B = X.G(v)
        seif = " seifert=true" if X.seifert[v] else ""
        lines.append(f"vertex {v} kind={B.kind}{_params(B)}{seif}")
    for i, name in enumerate(X.edge_names):
        e = 2 * i
        E = X.Ge(e)
        lines.append(f"edge {name} from={X.o(e)} to={X.t(e)} kind={E.kind}{_params(E)}")
        for ee, sign in ((e, "+"), (e + 1, "-")):
            words = X.mono_words.get(ee)
            hom = X.mono[ee]
            if words is None:
                words = [hom.dst.nf_word(y) for y in hom.images]
            gens = " ".join(f"{g}={_q(w)}" for g, w in zip(E.alphabet.names, words))
            lines.append(f"mono {name}{sign} {gens}".rstrip())
    for v in X.vertices:
        om = X.orientation.get(v)
        if om is not None and not om.is_trivial():
            vals = " ".join(f"{g}=-1" for g, s in zip(om.alphabet.names, om.values) if s == -1)
            lines.append(f"orient {v}: {vals}")
    lines.append(f"base {X.base}")
    return "\n".join(lines) + "\n"


def strip_comments(text):
    """Lines of text without comments and blank lines, whitespace collapsed."""
    out = []
    for raw in text.splitlines():
        line = " ".join(raw.split("#", 1)[0].split())
        if line:
            out.append(line)
    return "\n".join(out) + "\n"


def load(path):
    with open(path, "rb") as fh:
        return parse(fh.read())

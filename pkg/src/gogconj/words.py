"""Alphabets, words and the index-2 orientation machinery on words."""

from dataclasses import dataclass
from itertools import count

_alphabet_ids = count()


class WordError(ValueError):
    pass


class Alphabet:
    """A finite ordered set of generator names for one group."""

    def __init__(self, names, label=None):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise WordError(f"duplicate generator names in {self.names}")
        self.uid = next(_alphabet_ids)
        self.label = label or "alphabet%d" % self.uid
        self._index = {n: i for i, n in enumerate(self.names)}

    def __len__(self):
        return len(self.names)

    def __repr__(self):
        return f"Alphabet({self.label}: {' '.join(self.names)})"

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise WordError(f"unknown generator {name!r} in {self!r}") from None

    def gen(self, name):
        return Word(self, ((self.index(name), 1),))

    def letter_str(self, letter):
        i, s = letter
        return self.names[i] if s == 1 else self.names[i] + "^-1"

    def parse(self, text):
        """Parse ``a b^-1 t``; ``1`` or an empty string is the identity.

        ``a^3`` and ``a^-2`` are accepted as shorthand for repeated letters.
        """
        letters = []
        for tok in text.split():
            if tok == "1":
                continue
            name, _, exp = tok.partition("^")
            if exp:
                try:
                    e = int(exp)
                except ValueError:
                    raise WordError(f"bad exponent in {tok!r}") from None
            else:
                e = 1
            i = self.index(name)
            letters.extend([(i, 1 if e > 0 else -1)] * abs(e))
        return Word(self, tuple(letters))


@dataclass(frozen=True)
class Word:
    alphabet: Alphabet
    letters: tuple = ()

    def __post_init__(self):
        n = len(self.alphabet)
        for i, s in self.letters:
            if not (0 <= i < n) or s not in (1, -1):
                raise WordError(f"bad letter {(i, s)} for {self.alphabet!r}")

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        if not self.letters:
            return "1"
        return " ".join(self.alphabet.letter_str(l) for l in self.letters)

    def _check(self, other):
        if other.alphabet is not self.alphabet:
            raise WordError("mixed alphabets")

    def __mul__(self, other):
        self._check(other)
        return Word(self.alphabet, self.letters + other.letters)

    def inverse(self):
        return Word(self.alphabet, tuple((i, -s) for i, s in reversed(self.letters)))


def identity(alphabet):
    return Word(alphabet, ())


def free_reduce(w):
    """Cancel adjacent ``g g^-1`` pairs until none remain (one stack pass)."""
    out = []
    for i, s in w.letters:
        if out and out[-1] == (i, -s):
            out.pop()
        else:
            out.append((i, s))
    return Word(w.alphabet, tuple(out))


@dataclass(frozen=True)
class OrientationCharacter:
    """A map generators -> {+1, -1}; extended to inverses by w(g^-1) = w(g)."""

    alphabet: Alphabet
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.alphabet):
            raise WordError("character must be defined on every generator")
        if any(v not in (1, -1) for v in self.values):
            raise WordError("character values must be +1 or -1")

    @classmethod
    def from_dict(cls, alphabet, mapping):
        vals = [1] * len(alphabet)
        for name, v in mapping.items():
            vals[alphabet.index(name)] = v
        return cls(alphabet, tuple(vals))

    def is_trivial(self):
        return all(v == 1 for v in self.values)

    def __call__(self, i):
        return self.values[i]


def character_parity(omega, w):
    if omega.alphabet is not w.alphabet:
        raise WordError("character and word live on different alphabets")
    p = 1
    for i, _ in w.letters:
        p *= omega.values[i]
    return p


class Index2Alphabet:
    """Generators of ker(omega), registered lazily as they get emitted.

    Each symbol is a short word over the ambient alphabet of one of the
    forms ``s``, ``s' s''`` or ``s' s s'^-1``.  A symbol whose expansion is
    the inverse of a registered one is emitted as that symbol's inverse.
    """

    def __init__(self, omega):
        self.omega = omega
        self.ambient = omega.alphabet
        self.expansions = []
        self._lookup = {}

    def __len__(self):
        return len(self.expansions)

    def symbol(self, letters):
        letters = tuple(letters)
        if letters in self._lookup:
            return (self._lookup[letters], 1)
        inv = tuple((i, -s) for i, s in reversed(letters))
        if inv in self._lookup:
            return (self._lookup[inv], -1)
        self._lookup[letters] = len(self.expansions)
        self.expansions.append(letters)
        return (len(self.expansions) - 1, 1)

    def symbol_name(self, k):
        letters = self.expansions[k]
        strs = [self.ambient.letter_str(l) for l in letters]
        # reversing pairs print glued, conjugates spaced
        sep = "" if len(letters) == 2 else " "
        return sep.join(strs)

    def format(self, sword):
        if not sword:
            return "1"
        parts = []
        for k, s in sword:
            parts.append("[" + self.symbol_name(k) + "]" + ("" if s == 1 else "^-1"))
        return "".join(parts)

    def expand(self, sword):
        out = []
        for k, s in sword:
            letters = self.expansions[k]
            if s == -1:
                letters = tuple((i, -e) for i, e in reversed(letters))
            out.extend(letters)
        return Word(self.ambient, tuple(out))


def rewrite_into_index2_alphabet(omega, w, target=None):
    """Rewrite an even-parity word over the kernel generators.

    One left-to-right pass with a single pending reversing letter:
    a preserving letter ``x`` is emitted as ``[x]`` (or ``[y x y^-1]`` when
    ``y`` is pending), a reversing letter is pushed, or closes the pending
    one into ``[y y2]``.  Returns ``(symbols, target)`` where ``symbols`` is
    a tuple of ``(symbol index, sign)`` over ``target``.
    """
    if target is None:
        target = Index2Alphabet(omega)
    if character_parity(omega, w) != 1:
        raise WordError(f"{w} is not in the subgroup: odd orientation parity")
    out = []
    pending = None
    for letter in w.letters:
        i, s = letter
        if omega.values[i] == 1:
            if pending is None:
                out.append(target.symbol((letter,)))
            else:
                y = pending
                out.append(target.symbol((y, letter, (y[0], -y[1]))))
        elif pending is None:
            pending = letter
        else:
            out.append(target.symbol((pending, letter)))
            pending = None
    # parity was checked, so the stack is empty here
    assert pending is None
    return tuple(out), target

"""Words of free Boolean groups and bit-vector linear algebra over GF(2).

A reduced word of the free Boolean group B(X) is a finite subset of X; the
group operation is symmetric difference and every element is its own
inverse.  Atoms are natural numbers.  Abstract point spaces keep a
:class:`AtomRegistry` mapping names to ids.

Bit-vectors are plain Python ints (bit ``j`` is coordinate ``j``) carried
alongside an explicit dimension where one matters.  The textual form used in
JSON is a binary string whose ``j``-th character is coordinate ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator, Mapping, Sequence

from freebool.errors import ValidationError


@dataclass(frozen=True, order=True)
class Word:
    """A reduced word: the sorted, duplicate-free tuple of its atoms."""

    support: tuple[int, ...] = ()

    def __post_init__(self):
        s = self.support
        if any(a < 0 for a in s):
            raise ValidationError(f"atom ids must be natural numbers: {s}")
        if any(s[i] >= s[i + 1] for i in range(len(s) - 1)):
            object.__setattr__(self, "support", tuple(sorted(set(s))))

    @classmethod
    def of(cls, atoms: Iterable[int]) -> "Word":
        """Build a word from atoms, each occurrence toggling membership."""
        acc: set[int] = set()
        for a in atoms:
            acc ^= {int(a)}
        return cls(tuple(sorted(acc)))

    def __xor__(self, other: "Word") -> "Word":
        return sym_diff(self, other)

    def __len__(self) -> int:
        return len(self.support)

    def __iter__(self) -> Iterator[int]:
        return iter(self.support)

    def __contains__(self, atom: object) -> bool:
        return atom in set(self.support)

    def __bool__(self) -> bool:
        return bool(self.support)

    @property
    def max(self) -> int:
        """Largest atom; ``-1`` for the empty word."""
        return self.support[-1] if self.support else -1

    @property
    def min(self) -> int | None:
        return self.support[0] if self.support else None

    def is_initial_segment_of(self, other: "Word") -> bool:
        """``self`` is an initial segment of ``other`` in the order of omega."""
        n = len(self.support)
        return other.support[:n] == self.support

    def __repr__(self) -> str:
        return "{" + ", ".join(map(str, self.support)) + "}"


EMPTY = Word()


def sym_diff(a: Word, b: Word) -> Word:
    return Word(tuple(sorted(set(a.support).symmetric_difference(b.support))))


def word_length(g: Word) -> int:
    return len(g.support)


def parity(g: Word) -> str:
    return "even" if len(g.support) % 2 == 0 else "odd"


class AtomRegistry:
    """Bidirectional map between point names and atom ids."""

    def __init__(self, names: Iterable[str] = ()):
        self._ids: dict[str, int] = {}
        self._names: list[str] = []
        for n in names:
            self.add(n)

    def add(self, name: str) -> int:
        if name in self._ids:
            raise ValidationError(f"duplicate point name {name!r}")
        self._ids[name] = len(self._names)
        self._names.append(name)
        return self._ids[name]

    def id(self, name: str) -> int:
        try:
            return self._ids[name]
        except KeyError:
            raise ValidationError(f"unknown point {name!r}") from None

    def name(self, atom: int) -> str:
        return self._names[atom]

    def word(self, names: Iterable[str]) -> Word:
        return Word.of(self.id(n) for n in names)

    def names(self, g: Word) -> list[str]:
        return [self._names[a] for a in g.support]

    def __contains__(self, name: object) -> bool:
        return name in self._ids

    def __len__(self) -> int:
        return len(self._names)


# --- bit-vectors -------------------------------------------------------------


def parse_bits(text: str) -> tuple[int, int]:
    """Parse a binary string into ``(value, dimension)``."""
    if any(c not in "01" for c in text):
        raise ValidationError(f"not a bit string: {text!r}")
    return sum(1 << j for j, c in enumerate(text) if c == "1"), len(text)


def format_bits(v: int, dim: int) -> str:
    if v >> dim:
        raise ValidationError(f"vector {v:b} does not fit dimension {dim}")
    return "".join("1" if v >> j & 1 else "0" for j in range(dim))


def extend_hom(f: Mapping[int, int], g: Word, dim: int | None = None) -> int:
    """Evaluate the homomorphic extension of ``f`` at ``g`` (XOR of images).

    ``dim`` bounds the images; vectors wider than ``dim`` are rejected.
    """
    for atom in g.support:
        if atom not in f:
            raise ValidationError(f"map undefined at atom {atom}")
    if dim is not None:
        for atom, v in f.items():
            if v < 0 or v >> dim:
                raise ValidationError(f"image of atom {atom} exceeds dimension {dim}")
    return reduce(lambda acc, a: acc ^ f[a], g.support, 0)


class Echelon:
    """Incremental GF(2) elimination keyed by leading (highest) bit.

    Each stored row remembers which inserted vectors it combines, so
    membership queries come with a certificate.
    """

    def __init__(self, dim: int | None = None):
        self.dim = dim
        self.rows: dict[int, tuple[int, int]] = {}  # pivot bit -> (row, combo mask)
        self._count = 0

    def _check(self, v: int) -> None:
        if v < 0 or (self.dim is not None and v >> self.dim):
            raise ValidationError(f"vector does not fit dimension {self.dim}")

    def reduce(self, v: int) -> tuple[int, int]:
        """Return ``(residue, combo)``: v XOR the rows flagged in ``combo``.

        The residue has no bit set at any pivot position, so it is the
        canonical (smallest) representative of ``v`` modulo the span.
        """
        self._check(v)
        combo = 0
        for pivot in sorted(self.rows, reverse=True):
            if v >> pivot & 1:
                row, mask = self.rows[pivot]
                v ^= row
                combo ^= mask
        return v, combo

    def add(self, v: int) -> bool:
        """Insert ``v``; return False when it is already in the span."""
        residue, combo = self.reduce(v)
        idx = self._count
        self._count += 1
        if residue == 0:
            return False
        self.rows[residue.bit_length() - 1] = (residue, combo ^ (1 << idx))
        return True

    def contains(self, v: int) -> bool:
        return self.reduce(v)[0] == 0

    @property
    def rank(self) -> int:
        return len(self.rows)


def rank(vectors: Iterable[int]) -> int:
    e = Echelon()
    for v in vectors:
        e.add(v)
    return e.rank


def span_membership(basis: Sequence[int], v: int, dim: int) -> tuple[bool, list[int]]:
    """Decide ``v`` in span(basis) over GF(2).

    Returns ``(True, indices)`` where the basis vectors at ``indices`` XOR to
    ``v``, or ``(False, [])``.
    """
    e = Echelon(dim)
    for b in basis:
        e.add(b)
    residue, combo = e.reduce(v)
    if residue:
        return False, []
    return True, [i for i in range(len(basis)) if combo >> i & 1]

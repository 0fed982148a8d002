"""Graev seminorms on free Boolean groups over finite pseudometric spaces.

The Graev extension of a pseudometric ``d`` on ``X`` to ``B(X)`` assigns to
a word the cheapest way of writing it as a sum of pairs ``x + y`` weighted
by ``d(x, y)``.  Because the triangle inequality lets chains ``x+z, z+y`` be
shortcut to ``x+y``, the optimum is a minimum-weight perfect matching on
the letters of the reduced word, padded by the basepoint when the length is
odd.

Two flavors are supported:

``graev-basepoint``
    a distinguished point ``*`` of the space plays the zero element.
``markov``
    no basepoint; an isolated zero at distance 1 from every point is
    adjoined.  Point distances are capped at 2 so the triangle inequality
    survives.  Odd words get norm 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Iterable, Sequence

from freebool.errors import ValidationError, Verdict, VerificationFailure
from freebool.matching import enumerate_perfect_matchings, min_perfect_matching
from freebool.words import AtomRegistry, Word

GRAEV = "graev-basepoint"
MARKOV = "markov"
FLAVORS = (GRAEV, MARKOV)

BRUTEFORCE_LIMIT = 10


def as_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction or ``"p/q"`` string (never a float)."""
    if isinstance(value, float):
        raise ValidationError(f"floating point value {value!r} is not exact; use 'p/q'")
    if isinstance(value, bool):
        raise ValidationError(f"not a rational: {value!r}")
    try:
        return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError):
        raise ValidationError(f"not a rational: {value!r}") from None


def format_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


class PseudometricSpace:
    """Finite point set with an exact distance table.

    Points get atom ids ``0..n-1`` in the order given.  The basepoint, when
    present, is the extra node ``n``; words never contain it.
    """

    def __init__(
        self,
        points: Sequence[str],
        distances: dict[tuple[str, str], Fraction],
        basepoint: str | None = None,
        flavor: str = GRAEV,
    ):
        if flavor not in FLAVORS:
            raise ValidationError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")
        if flavor == GRAEV and basepoint is None:
            raise ValidationError("graev-basepoint flavor needs a basepoint")
        if flavor == MARKOV and basepoint is not None:
            raise ValidationError("markov flavor adjoins its own zero; drop the basepoint")
        self.registry = AtomRegistry(points)
        self.points = list(points)
        self.basepoint = basepoint
        self.flavor = flavor
        if basepoint is not None and basepoint in self.registry:
            raise ValidationError(f"basepoint {basepoint!r} is also listed as a point")
        self.node_names = self.points + ([basepoint] if basepoint is not None else [])
        index = {name: i for i, name in enumerate(self.node_names)}
        n = len(self.node_names)
        table: list[list[Fraction | None]] = [[None] * n for _ in range(n)]
        self.asymmetric: list[tuple[str, str]] = []
        for (a, b), value in distances.items():
            if a not in index or b not in index:
                raise ValidationError(f"distance entry for unknown point(s) {a!r}, {b!r}")
            i, j = index[a], index[b]
            q = as_fraction(value)
            for x, y in ((i, j), (j, i)):
                if table[x][y] is not None and table[x][y] != q:
                    self.asymmetric.append((a, b))
                table[x][y] = q
        self._raw = table
        self.size = len(self.points)
        # index of the zero node: the basepoint, or the adjoined markov zero
        self.star = self.size
        self._table: list[list[Fraction]] | None = None

    # -- table access ------------------------------------------------------

    def missing_pairs(self) -> list[tuple[str, str]]:
        n = len(self.node_names)
        return [
            (self.node_names[i], self.node_names[j])
            for i in range(n)
            for j in range(i + 1, n)
            if self._raw[i][j] is None
        ]

    def table(self) -> list[list[Fraction]]:
        """Effective distances over points plus the zero node.

        For the markov flavor the zero node is the adjoined isolated point
        and point distances are capped at 2.
        """
        if self._table is None:
            missing = self.missing_pairs()
            if missing:
                raise ValidationError(f"distance table incomplete; missing pairs {missing}")
            n = len(self.node_names)
            raw = [[self._raw[i][j] if i != j else (self._raw[i][j] or Fraction(0)) for j in range(n)]
                   for i in range(n)]
            if self.flavor == MARKOV:
                two = Fraction(2)
                t = [[min(raw[i][j], two) for j in range(n)] + [Fraction(1)] for i in range(n)]
                t.append([Fraction(1)] * n + [Fraction(0)])
                self._table = t
            else:
                self._table = raw
        return self._table

    def d(self, i: int, j: int) -> Fraction:
        return self.table()[i][j]

    def dist(self, a: str, b: str) -> Fraction:
        names = self.node_names
        return self.d(names.index(a), names.index(b))

    def word(self, names: Iterable[str]) -> Word:
        return self.registry.word(names)

    def with_distances(self, table: Sequence[Sequence[Fraction]]) -> "PseudometricSpace":
        """Same points, basepoint and flavor with a replacement node table."""
        n = len(self.node_names)
        entries = {
            (self.node_names[i], self.node_names[j]): table[i][j]
            for i in range(n)
            for j in range(i + 1, n)
        }
        return PseudometricSpace(self.points, entries, self.basepoint, self.flavor)

    def scaled(self, factor: Fraction) -> "PseudometricSpace":
        n = len(self.node_names)
        t = self.table()
        return self.with_distances([[t[i][j] * factor for j in range(n)] for i in range(n)])

    def normalized(self) -> "PseudometricSpace":
        """Rescale so every distance is at most 1/2 (a precondition of the majorant)."""
        n = len(self.node_names)
        t = self.table()
        top = max((t[i][j] for i in range(n) for j in range(n)), default=Fraction(0))
        if top == 0:
            return self
        return self.scaled(Fraction(1, 2) / top)

    def __repr__(self) -> str:
        return f"PseudometricSpace({self.points!r}, basepoint={self.basepoint!r}, flavor={self.flavor!r})"


@dataclass
class MetricReport:
    ok: bool
    violation: tuple[str, str, str] | None = None
    message: str = ""


def validate_pseudometric(space: PseudometricSpace) -> MetricReport:
    """Check nonnegativity, zero diagonal, symmetry and all triangle inequalities.

    A triangle violation is reported as ``(x, y, z)`` with
    ``d(x, z) > d(x, y) + d(y, z)``.
    """
    missing = space.missing_pairs()
    if missing:
        raise ValidationError(f"distance table incomplete; missing pairs {missing}")
    names = space.node_names
    n = len(names)
    raw = space._raw
    if space.asymmetric:
        a, b = space.asymmetric[0]
        return MetricReport(False, (a, b, a), f"asymmetric entries for {a!r}, {b!r}")
    for i in range(n):
        if raw[i][i] not in (None, 0):
            return MetricReport(False, (names[i], names[i], names[i]), f"d({names[i]},{names[i]}) != 0")
    t = [[raw[i][j] if i != j else Fraction(0) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if t[i][j] < 0:
                return MetricReport(False, (names[i], names[j], names[j]), "negative distance")
    for x in range(n):
        for z in range(x + 1, n):
            for y in range(n):
                if y in (x, z):
                    continue
                if t[x][z] > t[x][y] + t[y][z]:
                    return MetricReport(
                        False,
                        (names[x], names[y], names[z]),
                        f"d({names[x]},{names[z]}) = {t[x][z]} > {t[x][y] + t[y][z]}",
                    )
    return MetricReport(True)


def _check_word(g: Word, space: PseudometricSpace) -> None:
    for a in g.support:
        if a >= space.size:
            raise ValidationError(f"atom {a} is not a point of the space")


def _letters(g: Word, space: PseudometricSpace) -> list[int]:
    letters = list(g.support)
    if len(letters) % 2:
        letters.append(space.star)
    return letters


def graev_norm(g: Word, space: PseudometricSpace, *, method: str = "auto") -> Fraction:
    """Exact Graev seminorm of ``g``."""
    _check_word(g, space)
    if not g:
        return Fraction(0)
    if space.flavor == MARKOV and len(g) % 2:
        return Fraction(1)
    letters = _letters(g, space)
    t = space.table()
    cost, _ = min_perfect_matching(len(letters), lambda i, j: t[letters[i]][letters[j]], method=method)
    return cost


def graev_pairing(g: Word, space: PseudometricSpace) -> list[tuple[int, int]]:
    """An optimal pairing of the letters of ``g`` (node ids; ``space.star`` pads)."""
    _check_word(g, space)
    if space.flavor == MARKOV and len(g) % 2:
        return []
    letters = _letters(g, space)
    t = space.table()
    _, pairs = min_perfect_matching(len(letters), lambda i, j: t[letters[i]][letters[j]])
    return [(letters[i], letters[j]) for i, j in pairs]


@dataclass
class BruteForceResult:
    value: Fraction
    matchings: int
    augmented: dict[int, Fraction] = field(default_factory=dict)


def _walk_tables(t: Sequence[Sequence[int]], depth: int) -> list[list[list[int]]]:
    """``w[k][u][v]``: cheapest walk from ``u`` to ``v`` through exactly ``k`` intermediate nodes."""
    n = len(t)
    tables = [[list(row) for row in t]]
    for _ in range(depth):
        prev = tables[-1]
        tables.append([[min(prev[u][z] + t[z][v] for z in range(n)) for v in range(n)] for u in range(n)])
    return tables


def graev_norm_bruteforce(g: Word, space: PseudometricSpace, *, augment: int = 2) -> BruteForceResult:
    """Graev norm by enumerating every perfect matching of the letters.

    As a cross-check it also minimizes over representations augmented by up
    to ``augment`` cancelling pairs ``z + z`` (``z`` any node, including the
    zero node); none may beat the plain minimum.  A cancelling pair either
    matches with itself, which changes nothing, or splices into a matched
    pair ``u, v`` as a walk ``u, z, v``; so each matching is scored with the
    best way to spend at most ``augment`` walk stops over its pairs.
    """
    _check_word(g, space)
    if len(g) > BRUTEFORCE_LIMIT:
        raise ValidationError(f"brute force limited to {BRUTEFORCE_LIMIT} letters, got {len(g)}")
    if space.flavor == MARKOV and len(g) % 2:
        return BruteForceResult(Fraction(1), 0)
    letters = _letters(g, space)
    exact = space.table()
    # integer arithmetic on the table scaled by the common denominator
    scale = lcm(*(q.denominator for row in exact for q in row)) if exact else 1
    t = [[int(q * scale) for q in row] for row in exact]
    walks = _walk_tables(t, augment)
    count = 0
    best: int | None = None
    spent: list[int | None] = [None] * (augment + 1)
    for m in enumerate_perfect_matchings(len(letters)):
        count += 1
        pairs = [(letters[i], letters[j]) for i, j in m]
        cost = sum(t[u][v] for u, v in pairs)
        if best is None or cost < best:
            best = cost
        # budget[k]: cheapest total using at most k stops across the pairs seen so far
        budget = [0] * (augment + 1)
        for u, v in pairs:
            budget = [
                min(budget[k - s] + walks[s][u][v] for s in range(k + 1))
                for k in range(augment + 1)
            ]
        for k in range(augment + 1):
            if spent[k] is None or budget[k] < spent[k]:
                spent[k] = budget[k]
    value = Fraction(best if best is not None else 0, scale)
    result = BruteForceResult(value, count)
    for c in range(1, augment + 1):
        lowest = min(value, Fraction(spent[c], scale)) if spent[c] is not None else value
        result.augmented[c] = lowest
        if lowest < value:
            raise VerificationFailure(
                f"augmented representation beats the reduced matching ({lowest} < {value})",
                counterexample=g,
            )
    return result


def graev_dist(g: Word, h: Word, space: PseudometricSpace) -> Fraction:
    return graev_norm(g ^ h, space)


# -- non-Archimedean majorant ----------------------------------------------


def _components(n: int, joined: Callable[[int, int], bool]) -> list[int]:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if joined(i, j):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    return [find(i) for i in range(n)]


def nonarch_majorant(space: PseudometricSpace) -> PseudometricSpace:
    """Dyadic ultrametric ``rho >= d`` on the nodes of ``space``.

    ``rho(x, y) = 2**-m`` where ``m`` is the largest level ``k`` at which
    ``x`` and ``y`` share a component of the graph ``d < 2**-k / (n-1)``;
    ``rho = 1`` when they are split already at level 0 and ``rho = 0`` when
    they are never split.  Requires all distances below 1.
    """
    t = [row[: len(space.node_names)] for row in space.table()[: len(space.node_names)]]
    n = len(t)
    if n < 2:
        raise ValidationError("majorant needs at least two nodes")
    for i in range(n):
        for j in range(n):
            if t[i][j] >= 1:
                raise ValidationError(
                    f"distance {t[i][j]} >= 1 between {space.node_names[i]!r} and "
                    f"{space.node_names[j]!r}; normalize the space first"
                )
    zero = _components(n, lambda i, j: t[i][j] == 0)
    rho = [[Fraction(0)] * n for _ in range(n)]
    level_of: dict[tuple[int, int], int] = {}
    k = 0
    # components only shrink with k and reach the zero-distance components
    # once the threshold drops below the least positive distance
    while True:
        threshold = Fraction(1, 2**k) / (n - 1)
        comp = _components(n, lambda i, j: t[i][j] < threshold)
        for i in range(n):
            for j in range(i + 1, n):
                if comp[i] == comp[j]:
                    level_of[(i, j)] = k
        if comp == zero:
            break
        k += 1
    for i in range(n):
        for j in range(i + 1, n):
            if zero[i] == zero[j]:
                value = Fraction(0)
            elif (i, j) in level_of:
                value = Fraction(1, 2 ** level_of[(i, j)])
            else:
                value = Fraction(1)
            rho[i][j] = rho[j][i] = value
    return space.with_distances(rho)


def is_dyadic(q: Fraction) -> bool:
    den = q.denominator
    return den & (den - 1) == 0


# -- neighborhoods of zero ---------------------------------------------------


@dataclass(frozen=True)
class LetterNorm:
    """Pseudometric on a filter space given by letter weights.

    ``d(x, y) = r(x) + r(y)`` for distinct atoms and ``d(*, x) = r(x)``.
    """

    r: Callable[[int], Fraction]
    description: str = "r"

    def weight(self, g: Word) -> Fraction:
        return sum((Fraction(self.r(x)) for x in g.support), Fraction(0))

    def space(self, atoms: Iterable[int]) -> PseudometricSpace:
        atoms = sorted(set(atoms))
        names = [str(a) for a in atoms]
        entries: dict[tuple[str, str], Fraction] = {}
        for a, b in itertools.combinations(atoms, 2):
            entries[(str(a), str(b))] = Fraction(self.r(a)) + Fraction(self.r(b))
        for a in atoms:
            entries[("*", str(a))] = Fraction(self.r(a))
        return PseudometricSpace(names, entries, basepoint="*", flavor=GRAEV)

    @classmethod
    def reciprocal(cls, scale: Fraction = Fraction(1), shift: int = 0) -> "LetterNorm":
        """``r(x) = scale / (x + shift)``."""

        def r(x: int) -> Fraction:
            if x + shift <= 0:
                raise ValidationError(f"letter weight undefined at {x}")
            return Fraction(scale) / (x + shift)

        desc = f"{format_fraction(Fraction(scale))}/(x+{shift})" if shift else f"{format_fraction(Fraction(scale))}/x"
        return cls(r, desc)


def in_U_d(g: Word, metric: PseudometricSpace | LetterNorm) -> bool:
    """Membership of ``g`` in the unit ball of the Graev seminorm."""
    if isinstance(metric, LetterNorm):
        return metric.weight(g) < 1
    return graev_norm(g, metric) < 1


@dataclass(frozen=True)
class DisjointCover:
    """A partition of a finite atom set into nonempty blocks."""

    blocks: tuple[frozenset[int], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for b in self.blocks:
            if not b:
                raise ValidationError("cover blocks must be nonempty")
            if seen & b:
                raise ValidationError(f"cover blocks overlap at {sorted(seen & b)}")
            seen |= b

    @classmethod
    def of(cls, blocks: Iterable[Iterable[int]]) -> "DisjointCover":
        return cls(tuple(frozenset(b) for b in blocks))

    @property
    def points(self) -> frozenset[int]:
        return frozenset().union(*self.blocks)

    def block_of(self, atom: int) -> int:
        for k, b in enumerate(self.blocks):
            if atom in b:
                return k
        raise ValidationError(f"atom {atom} lies outside every block")


@dataclass
class GammaDecision:
    verdict: Verdict
    pairs: list[tuple[int, int, int | None]] = field(default_factory=list)  # (slot, x, y); y None = basepoint
    cancelled: tuple[int, ...] = ()
    note: str = ""

    def __bool__(self) -> bool:
        return self.verdict is Verdict.YES


def in_U_Gamma(
    g: Word,
    covers: Sequence[DisjointCover],
    cancel_depth: int = 2,
    basepoint: int | None = None,
) -> GammaDecision:
    """Is ``g`` in ``U(c_1) + ... + U(c_n)`` for the given finite cover prefix?

    ``U(c)`` consists of the sums ``x + y`` of two points in a common block
    of ``c``.  A representation may use extra letters ``z`` that occur twice
    and cancel; at most ``cancel_depth`` such pairs are tried.  With
    ``basepoint`` set, that atom is the zero of the group, so a pair
    ``x + basepoint`` contributes the single letter ``x``.

    The verdict is YES with a representation, NO when the search was
    exhaustive for this prefix, or UNKNOWN when ``cancel_depth`` cut it short.
    Longer prefixes can only add elements.
    """
    if not covers:
        raise ValidationError("at least one cover is required")
    pts = covers[0].points
    for c in covers[1:]:
        if c.points != pts:
            raise ValidationError("all covers must partition the same point set")
    for a in g.support:
        if a not in pts:
            raise ValidationError(f"atom {a} lies outside every block")
    if basepoint is not None and basepoint in g.support:
        raise ValidationError("the basepoint is the zero element and cannot be a letter")
    if not g:
        return GammaDecision(Verdict.YES, note="empty sum")
    n = len(covers)
    block = [{a: k for k, b in enumerate(c.blocks) for a in b} for c in covers]
    letters_needed = len(g)
    max_cancel = max(0, (2 * n - letters_needed) // 2)
    if letters_needed > 2 * n:
        return GammaDecision(Verdict.NO, note=f"{letters_needed} letters exceed the {2 * n} a {n}-cover prefix can produce")
    candidates = sorted(pts - ({basepoint} if basepoint is not None else set()))

    def solve(letters: tuple[int, ...]) -> list[tuple[int, int, int | None]] | None:
        memo: dict[tuple[tuple[int, ...], int], bool] = {}
        plan: dict[tuple[tuple[int, ...], int], tuple[int, int | None, tuple[int, ...]]] = {}

        def rec(rest: tuple[int, ...], used: int) -> bool:
            key = (rest, used)
            if key in memo:
                return memo[key]
            ok = False
            if not rest:
                ok = True
            else:
                x, others = rest[0], rest[1:]
                for slot in range(n):
                    if used >> slot & 1:
                        continue
                    bx = block[slot][x]
                    options: list[tuple[int | None, tuple[int, ...]]] = []
                    if basepoint is not None and block[slot].get(basepoint) == bx:
                        options.append((None, others))
                    tried: set[int] = set()
                    for k, y in enumerate(others):
                        if y in tried or block[slot][y] != bx:
                            continue
                        tried.add(y)
                        options.append((y, others[:k] + others[k + 1:]))
                    for y, remaining in options:
                        if rec(remaining, used | (1 << slot)):
                            plan[key] = (slot, y, remaining)
                            ok = True
                            break
                    if ok:
                        break
            memo[key] = ok
            return ok

        start = (tuple(sorted(letters)), 0)
        if not rec(*start):
            return None
        out = []
        key = start
        while key[0]:
            slot, y, remaining = plan[key]
            out.append((slot, key[0][0], y))
            key = (remaining, key[1] | (1 << slot))
        return out

    depth = min(cancel_depth, max_cancel)
    for c in range(depth + 1):
        for extra in itertools.combinations_with_replacement(candidates, c):
            letters = tuple(g.support) + tuple(z for z in extra for _ in (0, 1))
            found = solve(letters)
            if found is not None:
                return GammaDecision(Verdict.YES, found, tuple(extra))
    if cancel_depth >= max_cancel:
        return GammaDecision(Verdict.NO, note=f"exhaustive for the given {n}-cover prefix")
    return GammaDecision(
        Verdict.UNKNOWN,
        note=f"undecided at given prefix: searched {cancel_depth} of up to {max_cancel} cancelling pairs",
    )


def coset_signature(g: Word, cover: DisjointCover) -> int:
    """Per-block parity of the letters of ``g`` as a bit-vector (bit k = block k)."""
    sig = 0
    for a in g.support:
        sig ^= 1 << cover.block_of(a)
    return sig


def in_linear_subgroup(g: Word, cover: DisjointCover) -> bool:
    """Membership in the subgroup generated by ``U(cover)``: every block holds an even number of letters."""
    return coset_signature(g, cover) == 0

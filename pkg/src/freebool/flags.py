"""Basis constructions in finite Boolean groups GF(2)^n.

Two algorithms:

* :func:`flag_adapted_basis` rearranges a basis so that it is adapted to a
  descending chain of subspaces, by sifting each vector down a refinement
  of the chain to one-dimensional steps.
* :func:`norm_greedy_basis` replaces each basis vector by a minimum-norm
  word containing it; :func:`verify_greedy_bounds` checks the letter and
  separation bounds such bases satisfy.

Vectors are ints (bit ``j`` is coordinate ``j``).
"""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from freebool.errors import ValidationError, VerificationFailure
from freebool.words import Echelon, rank, span_membership

TRIANGLE_FULL_LIMIT = 8
TABLE_LIMIT = 16


def _span_echelon(vectors: Sequence[int], dim: int) -> Echelon:
    e = Echelon(dim)
    for v in vectors:
        e.add(v)
    return e


def _reduced_basis(e: Echelon) -> list[int]:
    """Fully reduced echelon basis of the span, sorted by pivot."""
    rows = {p: r for p, (r, _) in e.rows.items()}
    for p in sorted(rows):
        for q in rows:
            if q != p and rows[q] >> p & 1:
                rows[q] ^= rows[p]
    return [rows[p] for p in sorted(rows)]


@dataclass
class Flag:
    """Strictly descending chain ``G_0 > G_1 > ... > G_k = 0`` in GF(2)^dim."""

    dim: int
    chain: list[list[int]]
    ranks: list[int] = field(init=False)

    def __post_init__(self):
        if not self.chain:
            raise ValidationError("a flag needs at least one subspace")
        self.ranks = [rank(level) for level in self.chain]
        if self.ranks[-1] != 0:
            raise ValidationError("the last subspace of a flag must be trivial")
        for i in range(len(self.chain) - 1):
            big = _span_echelon(self.chain[i], self.dim)
            for v in self.chain[i + 1]:
                if not big.contains(v):
                    raise ValidationError(f"level {i + 1} is not contained in level {i}")
            if self.ranks[i + 1] >= self.ranks[i]:
                raise ValidationError(f"inclusion of level {i + 1} in level {i} is not strict")

    def refine(self) -> list[int]:
        """Representatives ``h_0, h_1, ...``: ``H_a`` is spanned by ``h_a, h_(a+1), ...``.

        Each quotient ``G_i / G_(i+1)`` contributes the fully reduced
        representatives of its basis modulo ``G_(i+1)``.
        """
        reps: list[int] = []
        for i in range(len(self.chain) - 2, -1, -1):
            lower = _span_echelon(self.chain[i + 1], self.dim)
            quotient = Echelon(self.dim)
            for v in self.chain[i]:
                residue, _ = lower.reduce(v)
                if residue:
                    quotient.add(residue)
            block = [lower.reduce(q)[0] for q in _reduced_basis(quotient)]
            reps = block + reps
        return reps

    def level_of(self, v: int) -> int:
        """Largest ``i`` with ``v`` in ``G_i``."""
        best = -1
        for i, level in enumerate(self.chain):
            if _span_echelon(level, self.dim).contains(v):
                best = i
        return best


@dataclass
class AdaptedBasis:
    vectors: list[int]
    slots: list[int]  # refined-chain index a with e' in H_a minus H_(a+1)
    levels: list[int]  # flag level of each vector
    refined: list[int]


def _slot(v: int, suffixes: list[Echelon]) -> int:
    slot = -1
    for a, e in enumerate(suffixes):
        if e.contains(v):
            slot = a
        else:
            break
    return slot


def flag_adapted_basis(flag: Flag, input_basis: Sequence[int]) -> AdaptedBasis:
    """Sift ``input_basis`` into a basis adapted to ``flag``.

    Each vector moves down the refined chain: when its slot is taken it
    absorbs the occupant and falls to a strictly deeper slot.
    """
    refined = flag.refine()
    n = len(refined)
    top = _span_echelon(flag.chain[0], flag.dim)
    if len(input_basis) != n:
        raise ValidationError(f"expected {n} basis vectors, got {len(input_basis)}")
    check = Echelon(flag.dim)
    for v in input_basis:
        if not top.contains(v):
            raise ValidationError(f"vector {v:b} lies outside G_0")
        if not check.add(v):
            raise ValidationError(f"input is not a basis: {v:b} depends on earlier vectors")
    # suffixes[a] spans H_a
    suffixes = [_span_echelon(refined[a:], flag.dim) for a in range(n)]
    occupant: dict[int, int] = {}
    out: list[int] = []
    slots: list[int] = []
    for v in input_basis:
        a = _slot(v, suffixes)
        while a in occupant:
            v ^= occupant[a]
            nxt = _slot(v, suffixes)
            assert nxt > a, "sifting must descend"
            a = nxt
        occupant[a] = v
        out.append(v)
        slots.append(a)
    assert len(occupant) == n, "unoccupied slot at finite dimension"
    levels = [flag.level_of(v) for v in out]
    return AdaptedBasis(out, slots, levels, refined)


@dataclass
class FlagReport:
    star: bool
    prefix_spans: bool
    level_spans: bool
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.star and self.prefix_spans and self.level_spans


def check_adapted(flag: Flag, input_basis: Sequence[int], result: AdaptedBasis) -> FlagReport:
    """Rank certificates for an adapted basis."""
    fails: list[str] = []
    n = len(result.refined)
    suffixes = [_span_echelon(result.refined[a:], flag.dim) for a in range(n)] + [Echelon(flag.dim)]
    star = True
    for v, a in zip(result.vectors, result.slots):
        if not (suffixes[a].contains(v) and not suffixes[a + 1].contains(v)):
            star = False
            fails.append(f"{v:b} not in H_{a} minus H_{a + 1}")
    prefix = True
    for k in range(1, len(input_basis) + 1):
        a, b = input_basis[:k], result.vectors[:k]
        if not (rank(a) == rank(b) == rank(list(a) + list(b))):
            prefix = False
            fails.append(f"prefix span differs at {k}")
    level = True
    for i, gens in enumerate(flag.chain):
        chosen = [v for v, lv in zip(result.vectors, result.levels) if lv >= i]
        if not (rank(chosen) == flag.ranks[i] == rank(list(chosen) + list(gens))):
            level = False
            fails.append(f"level {i} not spanned by its basis vectors")
    return FlagReport(star, prefix, level, fails)


def random_flag(rng: random.Random, dim: int, length: int | None = None) -> Flag:
    """Random strict chain of random subspaces ending at 0."""
    basis = _random_basis(rng, dim)
    steps = length if length is not None else rng.randint(1, dim)
    cuts = sorted(rng.sample(range(1, dim), min(steps - 1, dim - 1))) if dim > 1 else []
    dims = [dim] + [dim - c for c in cuts] + [0]
    dims = sorted(set(dims), reverse=True)
    return Flag(dim, [basis[dim - d:] for d in dims])


def _random_basis(rng: random.Random, dim: int) -> list[int]:
    e = Echelon(dim)
    out: list[int] = []
    while len(out) < dim:
        v = rng.getrandbits(dim)
        if v and e.add(v):
            out.append(v)
    return out


def random_basis(rng: random.Random, dim: int) -> list[int]:
    return _random_basis(rng, dim)


# -- norms -------------------------------------------------------------------


class NormOracle:
    """A norm on GF(2)^dim, stored as a full table."""

    def __init__(self, dim: int, values: Mapping[int, Fraction] | Callable[[int], Fraction], *, validate: bool = True):
        if dim > TABLE_LIMIT:
            raise ValidationError(f"tabulated norms support dimension <= {TABLE_LIMIT}")
        self.dim = dim
        get = values.__getitem__ if isinstance(values, Mapping) else values
        try:
            self.table = [Fraction(get(v)) for v in range(1 << dim)]
        except KeyError as exc:
            raise ValidationError(f"norm undefined at {exc.args[0]:b}") from None
        if validate:
            self.validate()

    def __call__(self, v: int) -> Fraction:
        return self.table[v]

    def validate(self) -> None:
        """Raise :class:`VerificationFailure` with a witness pair on any axiom violation."""
        t = self.table
        if t[0] != 0:
            raise VerificationFailure("norm of zero is not 0", (0, 0))
        for v in range(1, len(t)):
            if t[v] <= 0:
                raise VerificationFailure(f"norm of {v:b} is not positive", (v, 0))
        # full triangle check at small dimension, generator steps otherwise
        others = range(len(t)) if self.dim <= TRIANGLE_FULL_LIMIT else [1 << j for j in range(self.dim)]
        for g in range(len(t)):
            for h in others:
                if t[g ^ h] > t[g] + t[h]:
                    raise VerificationFailure(f"triangle inequality fails at ({g:b}, {h:b})", (g, h))


def cayley_norm(dim: int, generators: Sequence[tuple[int, Fraction]]) -> NormOracle:
    """Word norm: cheapest way to write each element from weighted generators."""
    size = 1 << dim
    best: list[Fraction | None] = [None] * size
    best[0] = Fraction(0)
    heap: list[tuple[Fraction, int]] = [(Fraction(0), 0)]
    done = [False] * size
    while heap:
        c, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        for g, w in generators:
            u, cu = v ^ g, c + w
            if best[u] is None or cu < best[u]:
                best[u] = cu
                heapq.heappush(heap, (cu, u))
    if any(b is None for b in best):
        raise ValidationError("generators do not span the group")
    return NormOracle(dim, lambda v: best[v], validate=False)


def random_norm(rng: random.Random, dim: int, extra: int | None = None, denominator: int = 12) -> NormOracle:
    """Cayley-graph norm from a random basis plus extra random generators."""
    gens = [(v, Fraction(rng.randint(1, 8 * denominator), denominator)) for v in _random_basis(rng, dim)]
    for _ in range(dim if extra is None else extra):
        v = rng.getrandbits(dim) or 1
        gens.append((v, Fraction(rng.randint(1, 8 * denominator), denominator)))
    return cayley_norm(dim, gens)


@dataclass
class GreedyBasis:
    vectors: list[int]
    letters: list[tuple[int, ...]]  # indices of e'_i (and the new e_k) used by each e'_k


def norm_greedy_basis(norm: NormOracle, basis: Sequence[int]) -> GreedyBasis:
    """``e'_1 = e_1``; ``e'_(k+1)`` is a least-norm word in ``e'_1..e'_k, e_(k+1)`` using ``e_(k+1)``.

    Ties go to the lexicographically least sorted letter tuple.
    """
    e = Echelon(norm.dim)
    for v in basis:
        if v >> norm.dim or not e.add(v):
            raise ValidationError(f"input is not a basis: {v:b}")
    out: list[int] = []
    letters: list[tuple[int, ...]] = []
    for k, new in enumerate(basis):
        best: tuple[Fraction, tuple[int, ...], int] | None = None
        for r in range(k + 1):
            for combo in itertools.combinations(range(k), r):
                v = new
                for i in combo:
                    v ^= out[i]
                key = (norm(v), combo + (k,), v)
                if best is None or key[:2] < best[:2]:
                    best = key
        assert best is not None
        out.append(best[2])
        letters.append(best[1])
    return GreedyBasis(out, letters)


@dataclass
class BoundsReport:
    n: int
    words: int
    letter_ratio: Fraction | None  # max of |e'_(i_(n-k))| / (2^k |w|); must be <= 1
    separation_ratio: Fraction | None  # min of |w + w'| / d over distinct length-n pairs; must be >= 1
    closedness_ratio: Fraction | None  # same over shorter w'; must be >= 1

    @property
    def ok(self) -> bool:
        return (
            (self.letter_ratio is None or self.letter_ratio <= 1)
            and (self.separation_ratio is None or self.separation_ratio >= 1)
            and (self.closedness_ratio is None or self.closedness_ratio >= 1)
        )


def _combine(vectors: Sequence[int], idx: Sequence[int]) -> int:
    v = 0
    for i in idx:
        v ^= vectors[i]
    return v


def verify_greedy_bounds(basis: Sequence[int], norm: NormOracle, n: int) -> BoundsReport:
    """Check the letter bound and the separation bounds on words of length exactly ``n``.

    Raises :class:`VerificationFailure` with the offending pair on a violation.
    """
    dim = len(basis)
    if n < 0 or n > dim:
        raise ValidationError(f"word length must lie in 0..{dim}")
    if n == 0:
        return BoundsReport(0, 1, None, None, None)
    words = list(itertools.combinations(range(dim), n))
    shorter = [c for r in range(n) for c in itertools.combinations(range(dim), r)]
    letter = sep = closed = None
    for idx in words:
        w = _combine(basis, idx)
        nw = norm(w)
        for k in range(n):
            ratio = norm(basis[idx[n - 1 - k]]) / (2**k * nw)
            if ratio > 1:
                raise VerificationFailure(f"letter bound fails for word {idx} at k={k}", (idx, k))
            letter = ratio if letter is None or ratio > letter else letter
        d = min(norm(basis[i]) for i in idx) / Fraction(2 ** (2 * n))
        for other in words:
            if other == idx:
                continue
            ratio = norm(w ^ _combine(basis, other)) / d
            if ratio < 1:
                raise VerificationFailure(f"separation bound fails for {idx}, {other}", (idx, other))
            sep = ratio if sep is None or ratio < sep else sep
        for other in shorter:
            ratio = norm(w ^ _combine(basis, other)) / d
            if ratio < 1:
                raise VerificationFailure(f"closedness bound fails for {idx}, {other}", (idx, other))
            closed = ratio if closed is None or ratio < closed else closed
    return BoundsReport(n, len(words), letter, sep, closed)


def greedy_certificates(original: Sequence[int], greedy: GreedyBasis, dim: int) -> list[list[int]]:
    """Express each original vector in the greedy basis (span certificates)."""
    out = []
    for v in original:
        ok, idx = span_membership(greedy.vectors, v, dim)
        if not ok:
            raise VerificationFailure(f"{v:b} is not spanned by the greedy basis", v)
        out.append(idx)
    return out

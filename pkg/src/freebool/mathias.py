"""Mathias and Laver neighborhoods of the empty word in [omega]^<omega.

Words are :class:`~freebool.words.Word` values read as increasing finite
sequences.  All topological comparisons are exhaustive over a bounded
universe (maximum element, maximum length) and are reported as such.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Mapping

from freebool.errors import SearchExhausted, Undecided, ValidationError, Verdict
from freebool.graev import LetterNorm
from freebool.omega import Family, RepFilter, RepSet, filter_contains
from freebool.words import Word


@dataclass(frozen=True)
class MathiasCondition:
    s: Word
    A: RepSet

    def __post_init__(self):
        if self.A.is_finite():
            raise ValidationError(f"condition set {self.A} is finite")
        if self.s.max >= self.A.min():
            raise ValidationError(f"stem {self.s} does not lie below min A = {self.A.min()}")


def mathias_leq(c1: MathiasCondition, c2: MathiasCondition) -> bool:
    """``c1`` extends ``c2``."""
    tail = Word(tuple(x for x in c1.s.support if x not in c2.s))
    return (
        c2.s.is_initial_segment_of(c1.s)
        and c1.A.issubset(c2.A)
        and all(x in c2.A for x in tail)
    )


def in_basic_open(t: Word, s: Word, A: RepSet) -> bool:
    """``t`` lies in the Mathias neighborhood ``[s, A]``."""
    first = A.min()
    if first is not None and s.max >= first:
        raise ValidationError(f"stem {s} does not lie below min A = {first}")
    if not s.is_initial_segment_of(t):
        return False
    return all(x in A for x in t.support[len(s):])


# -- Laver neighborhoods -----------------------------------------------------


class LaverNbhd:
    """A Laver neighborhood of the empty word.

    ``A(s)`` comes from ``table`` when ``s`` is listed there, otherwise from
    the default rule ``family(len(s) + shift)`` restricted above ``max s``.
    Without a default, lookups outside the table raise :class:`Undecided`.
    """

    def __init__(
        self,
        table: Mapping[Word, RepSet] | None = None,
        default: Family | None = None,
        shift: int = 0,
        description: str = "",
    ):
        self.table = dict(table or {})
        self.default = default
        self.shift = shift
        for s, A in self.table.items():
            first = A.min()
            if first is not None and first <= s.max:
                raise ValidationError(f"A({s}) has an element {first} not above max s")
        self.description = description or self._describe()
        self._cache: dict[Word, RepSet] = {}
        self._succ: dict[tuple[int, int], RepSet] = {}

    def _describe(self) -> str:
        parts = [f"A({s})={A}" for s, A in self.table.items()]
        if self.default is not None:
            idx = "|s|" + (f"+{self.shift}" if self.shift else "")
            parts.append(f"default {self.default.description} at {idx}, above max s")
        return "; ".join(parts) or "empty"

    @classmethod
    def from_mathias(cls, A: RepSet) -> "LaverNbhd":
        """The Mathias neighborhood ``[empty, A]`` as ``A(u) = A - [0, max u]``."""
        from freebool.omega import ConstantFamily

        return cls(default=ConstantFamily(A), description=f"[{{}}, {A}]")

    def A(self, s: Word) -> RepSet:
        hit = self._cache.get(s)
        if hit is not None:
            return hit
        if s in self.table:
            out = self.table[s]
        elif self.default is not None:
            out = self.default(len(s) + self.shift).above(s.max)
        else:
            raise Undecided(f"A({s}) is not described")
        self._cache[s] = out
        return out

    def successors(self, s: Word) -> RepSet:
        """``{n > max s : s + {n} in U}`` for ``s`` in U."""
        if s in self.table or self.default is None:
            return self.A(s).above(s.max)
        key = (len(s), s.max)
        hit = self._succ.get(key)
        if hit is None:
            hit = self._succ[key] = self.default(len(s) + self.shift).above(s.max)
        return hit

    def words(self, max_elt: int, max_len: int | None = None) -> Iterator[Word]:
        """Every member with support in ``[0, max_elt]`` (depth-first)."""
        limit = max_len if max_len is not None else max_elt + 1

        def rec(s: tuple[int, ...]) -> Iterator[Word]:
            w = Word(s)
            yield w
            if len(s) >= limit:
                return
            nxt = self.successors(w)
            for n in range((s[-1] + 1) if s else 0, max_elt + 1):
                if n in nxt:
                    yield from rec(s + (n,))

        yield from rec(())


def in_laver_nbhd(t: Word, U: LaverNbhd) -> bool:
    seq = t.support
    return all(seq[i] in U.A(Word(seq[:i])) for i in range(len(seq)))


# -- Laver trees ---------------------------------------------------------------


@dataclass
class LaverTreeApprox:
    nodes: frozenset[tuple[int, ...]]
    stem: tuple[int, ...]
    succ_spec: dict[tuple[int, ...], RepSet] = field(default_factory=dict)


@dataclass
class TreeCheck:
    ok: bool
    node: tuple[int, ...] | None = None
    reason: str = ""


def laver_tree_check(p: LaverTreeApprox, F: RepFilter, depth: int = 8) -> TreeCheck:
    if p.stem not in p.nodes:
        return TreeCheck(False, p.stem, "stem is not a node")
    for t in sorted(p.nodes, key=lambda x: (len(x), x)):
        if any(t[i] >= t[i + 1] for i in range(len(t) - 1)):
            return TreeCheck(False, t, "node is not increasing")
        if t and t[:-1] not in p.nodes:
            return TreeCheck(False, t, "prefix missing (tree is not prefix-closed)")
        k = min(len(t), len(p.stem))
        if t[:k] != p.stem[:k]:
            return TreeCheck(False, t, "node is incomparable with the stem")
        if len(t) >= len(p.stem):
            spec = p.succ_spec.get(t)
            if spec is None:
                return TreeCheck(False, t, "no successor set above the stem")
            answer = filter_contains(F, spec, depth)
            if answer.verdict is not Verdict.YES:
                return TreeCheck(False, t, f"successor set {spec} not certified in the filter ({answer.verdict.value})")
            for child in p.nodes:
                if len(child) == len(t) + 1 and child[:-1] == t and child[-1] not in spec:
                    return TreeCheck(False, child, "child outside its parent's successor set")
    return TreeCheck(True)


# -- refinement of a Laver neighborhood to a Mathias one ----------------------


@dataclass
class RefinementResult:
    D: list[int]
    passed: bool
    checked: int
    counterexample: Word | None = None
    oracle_sets: list[str] = field(default_factory=list)
    note: str = ""


def thinned_sets(U: LaverNbhd, top: int) -> list[RepSet]:
    """``A_i``, ``i <= top``: intersection of the successor sets of members with ``max s <= i``."""
    by_max: dict[int, set[RepSet]] = {}
    for s in U.words(top):
        by_max.setdefault(s.max, set()).add(U.successors(s))
    out = []
    acc = RepSet.omega()
    for A in by_max.get(-1, ()):
        acc = acc & A
    for i in range(top + 1):
        for A in sorted(by_max.get(i, ()), key=str):
            acc = acc & A
        out.append(acc)
    return out


def laver_to_mathias(
    U: LaverNbhd,
    F: RepFilter,
    check_max: int,
    check_len: int,
    *,
    depth: int = 8,
) -> RefinementResult:
    """Refine ``U`` to ``[empty, D]`` with ``D`` a diagonal intersection of the ``A_i``.

    ``F`` acts as the oracle: an ``A_i`` certified in ``F`` is used as is;
    otherwise the oracle only knows ``{j > i}`` intersected with a canonical
    set of ``F``.  Every subset of ``D`` of length ``<= check_len`` is then
    checked against ``U``.
    """
    exact = thinned_sets(U, check_max)
    canonical = F.canonical(depth if F.schema is not None else 0)
    oracle: list[RepSet] = []
    labels = []
    for i, A in enumerate(exact):
        if filter_contains(F, A, depth).verdict is Verdict.YES:
            oracle.append(A)
            labels.append("exact")
        else:
            oracle.append(canonical.above(i))
            labels.append("oracle")
    pool = oracle[0]
    D: list[int] = []
    nxt = pool.min()
    while nxt is not None and nxt <= check_max:
        D.append(nxt)
        pool = pool & oracle[nxt]
        nxt = pool.next_above(nxt)
    checked = 0
    for k in range(check_len + 1):
        for combo in itertools.combinations(D, k):
            checked += 1
            w = Word(combo)
            if not in_laver_nbhd(w, U):
                return RefinementResult(D, False, checked, counterexample=w, oracle_sets=labels,
                                        note="[empty, D] leaves U")
    return RefinementResult(D, True, checked, oracle_sets=labels,
                            note=f"verified up to max {check_max}, length {check_len}")


# -- closure probe ---------------------------------------------------------------


@dataclass
class ProbeReport:
    in_U: list[Word]
    in_U_prime: list[Word]
    exterior: list[tuple[Word, RepSet]]
    limit_witnesses: list[tuple[int, int] | None]
    separators_verified: bool

    @property
    def empty_is_limit(self) -> bool:
        return all(w is not None for w in self.limit_witnesses)


def _in_union(t: Word, family: Family) -> bool:
    i = t.min
    return i is not None and all(x in family(i) for x in t.support[1:])


def closure_probe(family: Family, F: RepFilter, max_elt: int, max_len: int, depth: int = 4) -> ProbeReport:
    """Classify bounded words against ``U = union of [{i}, A_i]`` and ``U' = U + {empty}``.

    Each exterior word ``t`` gets the separator ``[t, A_(min t) above max t]``,
    whose bounded extensions are re-checked to avoid ``U``.
    """
    for i in range(max_elt + 1):
        first = family(i).min()
        if first is not None and first <= i:
            raise ValidationError(f"min A_{i} = {first} is not above {i}")
    in_U, in_U_prime, exterior = [], [], []
    members: set[Word] = set()
    for k in range(max_len + 1):
        for combo in itertools.combinations(range(max_elt + 1), k):
            t = Word(combo)
            if not t:
                in_U_prime.append(t)
            elif _in_union(t, family):
                in_U.append(t)
                members.add(t)
            else:
                exterior.append((t, family(t.min).above(t.max)))
    ok = True
    for t, sep in exterior:
        room = [x for x in range(t.max + 1, max_elt + 1) if x in sep]
        for k in range(max_len - len(t) + 1):
            for extra in itertools.combinations(room, k):
                u = Word(t.support + extra)
                if u in members or not in_basic_open(u, t, sep):
                    ok = False
    witnesses: list[tuple[int, int] | None] = []
    levels = range(depth + 1) if F.schema is not None else range(1)
    for k in levels:
        C = F.canonical(k)
        found = None
        for i in C.take(64):
            j = (C & family(i)).next_above(i)
            if j is not None:
                found = (i, j)
                break
        witnesses.append(found)
    return ProbeReport(in_U, in_U_prime, exterior, witnesses, ok)


# -- witness in the unit ball -------------------------------------------------------


@dataclass
class UdWitness:
    word: Word
    n: int
    m: int
    rows: list[int]
    columns: list[int]
    total: Fraction


class _Grid:
    """``x(k, i)``: the ``i``-th element (from 0) of ``A_k - A_(k+1)``."""

    def __init__(self, schema: Family, budget: int):
        self.schema, self.budget = schema, budget
        self.rows: dict[int, list[int]] = {}
        self._cursor: dict[int, int] = {}

    def __call__(self, k: int, i: int) -> int:
        row = self.rows.setdefault(k, [])
        if len(row) <= i:
            diff = self.schema(k) - self.schema(k + 1)
            if diff.is_finite():
                raise ValidationError(f"A_{k} - A_{k + 1} is finite")
            n = row[-1] if row else -1
            while len(row) <= i:
                n = diff.next_above(n)
                if n is None or n > self.budget:
                    raise SearchExhausted(f"row {k} exceeds search budget {self.budget}", self.budget)
                row.append(n)
        return row[i]


def verify_Ud_witness(w: UdWitness, r: LetterNorm, grid: Callable[[int, int], int] | None = None) -> bool:
    """Index pattern ``n < i_1 < ... < i_n < j_1 < ... < j_n < m`` and weight below 1."""
    chain = [w.n, *w.rows, *w.columns, w.m]
    ordered = all(a < b for a, b in zip(chain, chain[1:]))
    if grid is not None:
        expected = {grid(w.n, w.m)} | {grid(i, j) for i, j in zip(w.rows, w.columns)}
        if expected != set(w.word.support):
            return False
    return ordered and len(w.word) == w.n + 1 and r.weight(w.word) < 1


def witness_in_Ud(schema: Family, r: LetterNorm, n: int, *, budget: int = 1 << 16) -> UdWitness:
    """Build ``g = {x(n, m), x(i_1, j_1), ..., x(i_n, j_n)}`` with ``r``-weight below 1.

    Rows ``i_k`` are taken greedily above ``n``; each column ``j_k`` is the
    least admissible index with ``r(x) < 1/(2n)``, and ``m`` the least
    admissible index with ``r(x) < 1/2`` (``< 1`` when ``n = 0``).
    """
    if n < 0:
        raise ValidationError("n must be a natural number")
    grid = _Grid(schema, budget)
    small = Fraction(1, 2 * n) if n else Fraction(1)
    rows = list(range(n + 1, 2 * n + 1))
    columns: list[int] = []
    last = rows[-1] if rows else n
    for i in rows:
        j = last + 1
        while Fraction(r.r(grid(i, j))) >= small:
            j += 1
        columns.append(j)
        last = j
    head = Fraction(1, 2) if n else Fraction(1)
    m = last + 1
    while Fraction(r.r(grid(n, m))) >= head:
        m += 1
    word = Word.of([grid(n, m)] + [grid(i, j) for i, j in zip(rows, columns)])
    out = UdWitness(word, n, m, rows, columns, r.weight(word))
    if not verify_Ud_witness(out, r, grid):
        raise SearchExhausted("constructed word failed re-verification", budget)
    return out


__all__ = [
    "LaverNbhd",
    "LaverTreeApprox",
    "MathiasCondition",
    "ProbeReport",
    "RefinementResult",
    "TreeCheck",
    "UdWitness",
    "closure_probe",
    "in_basic_open",
    "in_laver_nbhd",
    "laver_to_mathias",
    "laver_tree_check",
    "mathias_leq",
    "thinned_sets",
    "verify_Ud_witness",
    "witness_in_Ud",
]

"""Eventually periodic subsets of omega, indexed families, and filters.

A :class:`RepSet` is a bit string ``prefix`` followed by ``period`` repeated
forever.  Every Boolean operation, inclusion test and finiteness question is
decidable on this representation, which is what makes filter membership
decidable for filters generated by finitely many such sets plus the cofinite
sets.

Filters may also carry a *schema*: an indexed family ``A_0, A_1, ...`` of
generators (for instance the multiples of ``2**n``).  Membership is then
semi-decidable by intersecting a finite prefix of the schema; negative
answers are only given when the schema supplies a stability certificate
(:meth:`Family.stable_depth`).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from math import gcd, lcm
from typing import Callable, Iterable, Iterator, Sequence

from freebool.errors import SearchExhausted, ValidationError, Verdict

MAX_PERIOD = 1 << 16


def _primitive_root(word: str) -> str:
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and word[:p] * (n // p) == word:
            return word[:p]
    return word


@dataclass(frozen=True)
class RepSet:
    """Eventually periodic subset of omega in canonical form.

    ``n`` is a member iff ``prefix[n]`` is ``"1"`` (for ``n < len(prefix)``)
    or ``period[(n - len(prefix)) % len(period)]`` is ``"1"``.  The canonical
    form has a primitive period and the shortest possible prefix.
    """

    prefix: str = ""
    period: str = "0"

    def __post_init__(self):
        if not self.period:
            raise ValidationError("RepSet period must be nonempty")
        if set(self.prefix + self.period) - {"0", "1"}:
            raise ValidationError(f"RepSet bits must be 0/1: {self.prefix!r}:{self.period!r}")
        prefix, period = self.prefix, _primitive_root(self.period)
        while prefix and prefix[-1] == period[-1]:
            period = period[-1] + period[:-1]
            prefix = prefix[:-1]
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", period)

    # -- constructors --------------------------------------------------------

    @classmethod
    def omega(cls) -> "RepSet":
        return cls("", "1")

    @classmethod
    def empty(cls) -> "RepSet":
        return cls("", "0")

    @classmethod
    def finite(cls, elements: Iterable[int]) -> "RepSet":
        elems = set(elements)
        if any(e < 0 for e in elems):
            raise ValidationError("elements of omega are nonnegative")
        top = max(elems, default=-1)
        return cls("".join("1" if n in elems else "0" for n in range(top + 1)), "0")

    @classmethod
    def cofinite_minus(cls, elements: Iterable[int]) -> "RepSet":
        return ~cls.finite(elements)

    @classmethod
    def residue(cls, modulus: int, r: int = 0) -> "RepSet":
        """``{n : n = r (mod modulus)}``."""
        if modulus < 1:
            raise ValidationError("modulus must be positive")
        if modulus > MAX_PERIOD:
            raise SearchExhausted(f"period {modulus} exceeds limit {MAX_PERIOD}", MAX_PERIOD)
        r %= modulus
        return cls("", "".join("1" if k == r else "0" for k in range(modulus)))

    @classmethod
    def multiples(cls, k: int) -> "RepSet":
        return cls.residue(k, 0)

    @classmethod
    def greater_than(cls, n: int) -> "RepSet":
        """``{j : j > n}`` (``n`` may be ``-1``)."""
        return cls("0" * (n + 1), "1")

    @classmethod
    def parse(cls, text: str) -> "RepSet":
        return parse_repset(text)

    # -- queries -------------------------------------------------------------

    def __contains__(self, n: object) -> bool:
        if not isinstance(n, int) or n < 0:
            return False
        if n < len(self.prefix):
            return self.prefix[n] == "1"
        return self.period[(n - len(self.prefix)) % len(self.period)] == "1"

    def is_finite(self) -> bool:
        return "1" not in self.period

    def is_cofinite(self) -> bool:
        return "0" not in self.period

    def is_empty(self) -> bool:
        return self.is_finite() and "1" not in self.prefix

    def is_infinite(self) -> bool:
        return not self.is_finite()

    def issubset(self, other: "RepSet") -> bool:
        return (self - other).is_empty()

    def __le__(self, other: "RepSet") -> bool:  # type: ignore[override]
        return self.issubset(other)

    def almost_subset(self, other: "RepSet") -> bool:
        """``self`` minus ``other`` is finite."""
        return (self - other).is_finite()

    def elements(self, start: int = 0) -> Iterator[int]:
        """Members ``>= start`` in increasing order (possibly infinite)."""
        if self.is_finite():
            yield from (k for k in range(start, len(self.prefix)) if self.prefix[k] == "1")
            return
        n = start
        while True:
            if n in self:
                yield n
            n += 1

    def next_above(self, n: int) -> int | None:
        """Least member strictly greater than ``n``, or None."""
        k = max(n + 1, 0)
        end = max(len(self.prefix), k) + len(self.period)
        for j in range(k, end):
            if j in self:
                return j
        return None

    def min(self) -> int | None:
        return self.next_above(-1)

    def take(self, count: int, start: int = 0) -> list[int]:
        return list(itertools.islice(self.elements(start), count))

    def upto(self, bound: int) -> list[int]:
        """Members ``<= bound``."""
        return [n for n in range(bound + 1) if n in self]

    def finite_elements(self) -> list[int]:
        if not self.is_finite():
            raise ValidationError("set is infinite")
        return [k for k, c in enumerate(self.prefix) if c == "1"]

    def count(self) -> int | None:
        """Cardinality, or None when infinite."""
        return len(self.finite_elements()) if self.is_finite() else None

    # -- algebra -------------------------------------------------------------

    def _bits(self, length: int, period: int) -> str:
        return "".join("1" if n in self else "0" for n in range(length + period))

    def _combine(self, other: "RepSet", op: Callable[[bool, bool], bool]) -> "RepSet":
        plen = max(len(self.prefix), len(other.prefix))
        per = lcm(len(self.period), len(other.period))
        if per > MAX_PERIOD:
            raise SearchExhausted(f"aligned period {per} exceeds limit {MAX_PERIOD}", MAX_PERIOD)
        a, b = self._bits(plen, per), other._bits(plen, per)
        bits = "".join("1" if op(x == "1", y == "1") else "0" for x, y in zip(a, b))
        return RepSet(bits[:plen], bits[plen:])

    def __and__(self, other: "RepSet") -> "RepSet":
        return self._combine(other, lambda x, y: x and y)

    def __or__(self, other: "RepSet") -> "RepSet":
        return self._combine(other, lambda x, y: x or y)

    def __sub__(self, other: "RepSet") -> "RepSet":
        return self._combine(other, lambda x, y: x and not y)

    def __xor__(self, other: "RepSet") -> "RepSet":
        return self._combine(other, lambda x, y: x != y)

    def __invert__(self) -> "RepSet":
        flip = str.maketrans("01", "10")
        return RepSet(self.prefix.translate(flip), self.period.translate(flip))

    def above(self, n: int) -> "RepSet":
        """Members strictly greater than ``n``."""
        return self & RepSet.greater_than(n)

    def __str__(self) -> str:
        return f"{self.prefix}:{self.period}"


def intersect_all(sets: Iterable[RepSet]) -> RepSet:
    out = RepSet.omega()
    for s in sets:
        out = out & s
    return out


_LITERAL = re.compile(r"^([01]*):([01]+)$")
_LIST = re.compile(r"^\[\s*(\d+(?:\s*,\s*\d+)*)?\s*\]$")


def _parse_list(text: str) -> list[int]:
    m = _LIST.match(text.strip())
    if not m:
        raise ValidationError(f"expected a list like [0,2], got {text!r}")
    return [int(x) for x in m.group(1).split(",")] if m.group(1) else []


def parse_repset(text: str) -> RepSet:
    """Parse the RepSet literal syntax.

    ``prefix:period`` bit strings (``":10"`` is the evens), named sets
    ``omega``, ``empty``, ``evens``, ``odds``, ``mult:k``, ``mult:k+r``,
    ``gt:n``, ``ge:n``, ``finite:[..]``, ``cofinite-minus:[..]``, the suffix
    forms ``X>n`` and ``X>=n``, and ``&``-separated intersections.
    """
    text = text.strip()
    if not text:
        raise ValidationError("empty RepSet literal")
    if "&" in text:
        return intersect_all(parse_repset(part) for part in text.split("&"))
    m = _LITERAL.match(text)
    if m:
        return RepSet(m.group(1), m.group(2))
    named = {
        "omega": RepSet.omega,
        "empty": RepSet.empty,
        "evens": lambda: RepSet.multiples(2),
        "odds": lambda: RepSet.residue(2, 1),
    }
    if text in named:
        return named[text]()
    m = re.match(r"^mult:(\d+)(?:\+(\d+))?$", text)
    if m:
        return RepSet.residue(int(m.group(1)), int(m.group(2) or 0))
    m = re.match(r"^(gt|ge):(-?\d+)$", text)
    if m:
        n = int(m.group(2))
        return RepSet.greater_than(n if m.group(1) == "gt" else n - 1)
    if text.startswith("finite:"):
        return RepSet.finite(_parse_list(text[len("finite:"):]))
    if text.startswith("cofinite-minus:"):
        return RepSet.cofinite_minus(_parse_list(text[len("cofinite-minus:"):]))
    m = re.match(r"^(.+?)(>=|>)(\d+)$", text)
    if m:
        n = int(m.group(3))
        return parse_repset(m.group(1)).above(n if m.group(2) == ">" else n - 1)
    raise ValidationError(f"cannot parse RepSet literal {text!r}")


# -- indexed families ----------------------------------------------------------


def _prime_part(q: int, b: int) -> int:
    """Largest divisor of ``q`` built from primes dividing ``b``."""
    part = 1
    g = gcd(q, b)
    while g > 1:
        part *= g
        q //= g
        g = gcd(q, b)
    return part


class Family:
    """An indexed family ``i -> A_i`` of eventually periodic sets.

    ``stable_depth(q)`` returns a depth ``K`` such that for every eventually
    periodic ``S`` with period dividing ``q`` the questions "is ``S & A_k``
    infinite" and "is ``S & (A_k - A_(k+1))`` infinite" have the same answer
    for all ``k >= K``; None when no such bound is known.
    """

    description = "family"
    decreasing = False

    def __call__(self, i: int) -> RepSet:
        raise NotImplementedError

    def stable_depth(self, q: int) -> int | None:
        return None

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Family) and other.description == self.description

    def __hash__(self) -> int:
        return hash(self.description)

    def __repr__(self) -> str:
        return f"Family({self.description!r})"


class ConstantFamily(Family):
    decreasing = True

    def __init__(self, base: RepSet):
        self.base = base
        self.description = f"const:{base}"

    def __call__(self, i: int) -> RepSet:
        return self.base

    def stable_depth(self, q: int) -> int:
        return 0


class ThresholdFamily(Family):
    """``A_i = base & {j > slope*i + offset}``."""

    def __init__(self, slope: int, offset: int = 0, base: RepSet | None = None, label: str | None = None):
        self.slope, self.offset = slope, offset
        self.base = base if base is not None else RepSet.omega()
        self.decreasing = slope >= 0
        self.description = label or f"{self.base}&j>{slope}i+{offset}"

    def __call__(self, i: int) -> RepSet:
        return self.base.above(self.slope * i + self.offset)

    def stable_depth(self, q: int) -> int:
        # each A_i differs from base by a finite set
        return 0


class PowerFamily(Family):
    """``A_i`` = multiples of ``base**i``."""

    decreasing = True

    def __init__(self, base: int):
        if base < 2:
            raise ValidationError("power family base must be at least 2")
        self.base = base
        self.description = f"mult:{base}^i"

    def __call__(self, i: int) -> RepSet:
        return RepSet.multiples(self.base**i)

    def stable_depth(self, q: int) -> int:
        # mod q = q1*q2 (q1 built from primes of base, q2 coprime to it) the
        # residues of A_k, and of A_k - A_(k+1), are {r : q1 | r} once q1 | base**k
        q1 = _prime_part(q, self.base)
        k = 0
        while (self.base**k) % q1:
            k += 1
        return k


class IntervalFamily(Family):
    """``C_n = [w*n, w*n + w)``; a partition of omega into blocks of width ``w``."""

    def __init__(self, width: int):
        if width < 1:
            raise ValidationError("block width must be positive")
        self.width = width
        self.description = f"blocks:{width}"

    def __call__(self, i: int) -> RepSet:
        return RepSet.finite(range(self.width * i, self.width * (i + 1)))


class TableFamily(Family):
    """Explicit sets for the first indices, then a default family."""

    def __init__(self, table: Sequence[RepSet], default: Family):
        self.table = list(table)
        self.default = default
        self.decreasing = False
        self.description = "table:[" + ",".join(map(str, self.table)) + "]+" + default.description

    def __call__(self, i: int) -> RepSet:
        return self.table[i] if i < len(self.table) else self.default(i)

    def stable_depth(self, q: int) -> int | None:
        inner = self.default.stable_depth(q)
        return None if inner is None else max(len(self.table), inner)


def parse_family(spec) -> Family:
    """Parse a family from a string or a ``{"table": [...], "default": ...}`` document.

    Strings: ``j>2i``, ``j>i+3`` (thresholds), ``X>i`` (``X`` a RepSet
    literal, thresholded at ``i``), ``mult:b^i``, ``blocks:w``, or a RepSet
    literal for a constant family.
    """
    if isinstance(spec, dict):
        if "table" not in spec:
            raise ValidationError("family document needs a 'table' entry")
        default = parse_family(spec.get("default", "omega"))
        return TableFamily([parse_repset(t) for t in spec["table"]], default)
    if not isinstance(spec, str):
        raise ValidationError(f"cannot parse family {spec!r}")
    text = spec.replace(" ", "")
    m = re.match(r"^j>(\d*)i([+-]\d+)?$", text)
    if m:
        slope = int(m.group(1)) if m.group(1) else 1
        return ThresholdFamily(slope, int(m.group(2) or 0), label=text)
    m = re.match(r"^mult:(\d+)\^i$", text)
    if m:
        return PowerFamily(int(m.group(1)))
    m = re.match(r"^blocks:(\d+)$", text)
    if m:
        return IntervalFamily(int(m.group(1)))
    m = re.match(r"^(.+)>i$", text)
    if m:
        return ThresholdFamily(1, 0, base=parse_repset(m.group(1)), label=text)
    return ConstantFamily(parse_repset(text))


# -- filters -------------------------------------------------------------------


@dataclass(frozen=True)
class RepFilter:
    """Filter on omega generated by sets, an optional schema, and the cofinite sets."""

    generators: tuple[RepSet, ...] = ()
    schema: Family | None = None

    def __post_init__(self):
        for g in self.generators:
            if g.is_finite():
                raise ValidationError(f"generator {g} is finite; the filter would not be free")
        if not self.base.is_infinite():
            raise ValidationError("generators have finite intersection; the filter is improper")

    @classmethod
    def frechet(cls) -> "RepFilter":
        return cls()

    @classmethod
    def generated_by(cls, *sets: RepSet | str, schema: Family | None = None) -> "RepFilter":
        return cls(tuple(parse_repset(s) if isinstance(s, str) else s for s in sets), schema)

    @property
    def base(self) -> RepSet:
        return intersect_all(self.generators)

    def canonical(self, depth: int) -> RepSet:
        """Intersection of the generators and the first ``depth`` schema sets."""
        out = self.base
        if self.schema is not None:
            for i in range(depth):
                out = out & self.schema(i)
        return out

    def describe(self) -> str:
        parts = [str(g) for g in self.generators] or ["frechet"]
        if self.schema is not None:
            parts.append(self.schema.description)
        return " + ".join(parts)


@dataclass
class FilterAnswer:
    verdict: Verdict
    depth: int
    note: str = ""

    def __bool__(self) -> bool:
        return self.verdict is Verdict.YES


def filter_contains(F: RepFilter, A: RepSet, depth: int = 8) -> FilterAnswer:
    """Decide ``A`` in ``F`` using at most ``depth`` schema generators.

    YES when some canonical intersection is almost contained in ``A``.  NO
    is returned only with a certificate: for schema-free filters the answer
    is exact; with a decreasing schema the refutation must have been checked
    at the schema's stability depth.  UNKNOWN otherwise.
    """
    if F.schema is None:
        rest = F.base - A
        if rest.is_finite():
            return FilterAnswer(Verdict.YES, 0, f"exceptions {rest.finite_elements()}")
        return FilterAnswer(Verdict.NO, 0, f"generators minus A is infinite ({rest})")
    for k in range(depth + 1):
        rest = F.canonical(k) - A
        if rest.is_finite():
            return FilterAnswer(Verdict.YES, k, f"exceptions {rest.finite_elements()}")
    if F.schema.decreasing:
        outside = F.base - A
        stable = F.schema.stable_depth(len(outside.period))
        if stable is not None and depth - 1 >= stable:
            return FilterAnswer(
                Verdict.NO,
                depth,
                f"generators minus A meet every schema set infinitely (stable from index {stable})",
            )
    return FilterAnswer(Verdict.UNKNOWN, depth, "no inclusion found and no refutation certificate")


# -- selective combinatorics ----------------------------------------------------


def _fits(period_a: int, period_b: int) -> None:
    if lcm(period_a, period_b) > MAX_PERIOD:
        raise SearchExhausted(f"aligned period exceeds limit {MAX_PERIOD}", MAX_PERIOD)


def diagonal_intersection(
    family: Family,
    count: int,
    *,
    start: int | None = 0,
    within: RepSet | None = None,
    search_bound: int = 1 << 20,
) -> list[int]:
    """Greedy diagonal intersection ``d_0 < d_1 < ...`` of ``family``.

    ``d_(k+1)`` is the least ``j > d_k`` in ``within`` and in every
    ``A_(d_i)``, ``i <= k``; thus ``j`` lies in ``A_i`` whenever ``i < j``
    are both emitted.  ``start=None`` starts at ``min(within)``.
    """
    pool = within if within is not None else RepSet.omega()
    if start is None:
        first = pool.min()
        if first is None:
            raise SearchExhausted("base set is empty", search_bound)
    else:
        first = start
    out = [first]
    current = pool
    while len(out) < count:
        a = family(out[-1])
        _fits(len(current.period), len(a.period))
        current = current & a
        nxt = current.next_above(out[-1])
        if nxt is None or nxt > search_bound:
            raise SearchExhausted(
                f"diagonal intersection has no element above {out[-1]} within {search_bound}",
                search_bound,
            )
        out.append(nxt)
    return out[:count]


@dataclass
class GreedyResult:
    values: list[int]

    @property
    def range(self) -> frozenset[int]:
        return frozenset(self.values)


def greedy_function(family: Family, length: int, *, start: int = 0, search_bound: int = 1 << 20) -> GreedyResult:
    """``f(0) = start``, ``f(n+1) = min {j > f(n) : j in A_(f(n))}``."""
    values = [start]
    while len(values) < length:
        nxt = family(values[-1]).next_above(values[-1])
        if nxt is None or nxt > search_bound:
            raise SearchExhausted(f"no continuation above {values[-1]} within {search_bound}", search_bound)
        values.append(nxt)
    return GreedyResult(values[:length])


def periodic_overapproximation(values: Sequence[int], period: int) -> RepSet:
    """Smallest set containing ``values[0]`` and the residues mod ``period`` of the later values.

    Only the emitted values are covered; nothing is claimed about later ones.
    """
    if not values:
        return RepSet.empty()
    head = values[0]
    residues = {v % period for v in values[1:]}
    tail = RepSet("0" * (head + 1), "".join("1" if (head + 1 + k) % period in residues else "0" for k in range(period)))
    return tail | RepSet.finite([head])


@dataclass
class SelectiveResult:
    found: bool
    mode: str
    witness: RepSet | None = None
    sequence: list[int] = field(default_factory=list)
    bound: int = 0
    note: str = ""


def selective_witness(
    F: RepFilter,
    family: Family,
    mode: str,
    bound: int = 64,
    depth: int = 4,
) -> SelectiveResult:
    """Search canonical filter sets for a selector or a transversal.

    ``selector``: ``family`` is a partition ``{C_n}`` with no cell in ``F``;
    looks for ``A`` in ``F`` meeting each of the first ``bound`` cells once.
    ``transversal``: ``family`` are sets of ``F``; looks for ``A`` in ``F``
    whose increasing enumeration has ``a_n`` in ``A_n`` for ``n < bound``.
    A negative result only reports the exhausted bound.
    """
    candidates = [F.canonical(k) for k in range(depth + 1 if F.schema is not None else 1)]
    if mode == "selector":
        cells = [family(n) for n in range(bound)]
        seen: dict[int, int] = {}
        for n, cell in enumerate(cells):
            if cell.is_infinite():
                members = cell.upto(bound)
            else:
                members = cell.finite_elements()
            for j in members:
                if j in seen:
                    raise ValidationError(f"cells {seen[j]} and {n} overlap at {j}")
                seen[j] = n
            if cell.is_infinite():
                for other in cells[n + 1:]:
                    if not (cell & other).is_empty():
                        raise ValidationError(f"cell {n} overlaps a later cell")
        uncovered = [j for j in range(bound) if j not in seen]
        if uncovered:
            raise ValidationError(f"not a partition within bound: {uncovered[:5]} lie in no examined cell")
        for n, cell in enumerate(cells):
            if filter_contains(F, cell, depth).verdict is Verdict.YES:
                raise ValidationError(f"cell {n} belongs to the filter")
        for cand in candidates:
            if all((cand & cell).count() == 1 for cell in cells):
                return SelectiveResult(True, mode, witness=cand, bound=bound, note=f"meets each of {bound} cells once")
        return SelectiveResult(False, mode, bound=bound, note="no canonical candidate selects within bound")
    if mode == "transversal":
        for cand in candidates:
            seq = cand.take(bound)
            if len(seq) == bound and all(a in family(n) for n, a in enumerate(seq)):
                return SelectiveResult(True, mode, witness=cand, sequence=seq, bound=bound,
                                       note=f"a_n in A_n checked for n < {bound}")
        return SelectiveResult(False, mode, bound=bound, note="no canonical candidate is a transversal within bound")
    raise ValidationError(f"unknown mode {mode!r}; expected 'selector' or 'transversal'")


@dataclass
class PseudoResult:
    verdict: str  # "found", "refuted" or "unknown"
    witness: RepSet | None = None
    certified: bool = False
    failures: dict[int, int] = field(default_factory=dict)  # candidate index -> failing family index
    note: str = ""


def pseudointersection_check(F: RepFilter, family: Family, depth: int = 6) -> PseudoResult:
    """Look for a pseudointersection of ``family`` inside ``F``.

    The family is made decreasing by intersecting prefixes, ``B_n = A_0 &
    ... & A_n``.  Candidates are the canonical sets of ``F``; a set of ``F``
    is a pseudointersection iff some canonical set is, so failure of every
    candidate refutes.  Candidates beyond ``depth`` are covered only by a
    stability certificate when ``family`` is the filter's own schema.
    """
    prefix: list[RepSet] = []
    acc = RepSet.omega()
    for n in range(depth + 2):
        acc = acc & family(n)
        prefix.append(acc)
    n_candidates = depth + 2 if F.schema is not None else 1
    failures: dict[int, int] = {}
    for k in range(n_candidates):
        cand = F.canonical(k)
        bad = next((n for n, b in enumerate(prefix) if not cand.almost_subset(b)), None)
        if bad is None:
            stable = family.stable_depth(len((cand - prefix[-1]).period))
            certified = family.decreasing and stable is not None and stable <= depth
            return PseudoResult(
                "found",
                cand,
                certified=certified,
                failures=failures,
                note=("for every n" if certified else f"checked n <= {depth + 1}"),
            )
        failures[k] = bad
    if F.schema is None:
        return PseudoResult("refuted", failures=failures, certified=True,
                            note="the generators' intersection is the only candidate up to finite sets")
    schema = F.schema
    if family == schema and schema.decreasing:
        stable = schema.stable_depth(len(F.base.period))
        last = F.canonical(depth + 1) - schema(depth + 1)
        if stable is not None and stable <= depth and last.is_infinite():
            return PseudoResult(
                "refuted",
                failures=failures,
                certified=True,
                note=f"C_k minus A_(k+1) is infinite for every k (stable from {stable})",
            )
    return PseudoResult("unknown", failures=failures, note=f"every candidate up to {depth + 1} fails")

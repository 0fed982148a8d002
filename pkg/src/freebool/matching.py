"""Exact minimum-weight perfect matching on small complete graphs.

Weights are exact rationals (:class:`fractions.Fraction`).  Vertices are
``0..n-1`` and the weight function is any symmetric callable.

Three routes are provided:

* :func:`min_perfect_matching` -- the production solver.  Subset dynamic
  programming for up to :data:`DP_LIMIT` vertices; above that, Edmonds'
  blossom algorithm from networkx on weights scaled to integers (so the
  solver never sees a float).
* :func:`enumerate_perfect_matchings` -- plain enumeration of all
  ``(n-1)!!`` matchings, used as an independent oracle.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Callable, Iterator

from freebool.errors import ValidationError

Weight = Callable[[int, int], Fraction]

DP_LIMIT = 18


def double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def enumerate_perfect_matchings(n: int) -> Iterator[list[tuple[int, int]]]:
    """Yield every perfect matching of ``0..n-1`` (``n`` even)."""
    if n % 2:
        raise ValidationError("perfect matchings need an even vertex count")

    def rec(rest: tuple[int, ...]) -> Iterator[list[tuple[int, int]]]:
        if not rest:
            yield []
            return
        first, others = rest[0], rest[1:]
        for k, partner in enumerate(others):
            remaining = others[:k] + others[k + 1:]
            for tail in rec(remaining):
                yield [(first, partner)] + tail

    yield from rec(tuple(range(n)))


def _dp_matching(n: int, w: Weight) -> tuple[Fraction, list[tuple[int, int]]]:
    table = [[w(i, j) if i != j else Fraction(0) for j in range(n)] for i in range(n)]
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def best(mask: int) -> tuple[Fraction, int]:
        # mask = set of still-unmatched vertices; returns (cost, partner of lowest)
        if mask == 0:
            return Fraction(0), -1
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        top: tuple[Fraction, int] | None = None
        m = rest
        while m:
            j = (m & -m).bit_length() - 1
            m &= m - 1
            cost = table[i][j] + best(rest & ~(1 << j))[0]
            if top is None or cost < top[0]:
                top = (cost, j)
        assert top is not None
        return top

    pairs = []
    mask = full
    total = best(full)[0]
    while mask:
        i = (mask & -mask).bit_length() - 1
        j = best(mask)[1]
        pairs.append((i, j))
        mask &= ~((1 << i) | (1 << j))
    best.cache_clear()
    return total, pairs


def _blossom_matching(n: int, w: Weight) -> tuple[Fraction, list[tuple[int, int]]]:
    import networkx as nx

    weights = {(i, j): Fraction(w(i, j)) for i in range(n) for j in range(i + 1, n)}
    scale = lcm(*(q.denominator for q in weights.values())) if weights else 1
    ints = {e: int(q * scale) for e, q in weights.items()}
    ceiling = max(ints.values(), default=0) + 1
    g = nx.Graph()
    for (i, j), c in ints.items():
        # maximising (ceiling - c) over maximum-cardinality matchings
        g.add_edge(i, j, weight=ceiling - c)
    mate = nx.max_weight_matching(g, maxcardinality=True)
    pairs = sorted(tuple(sorted(e)) for e in mate)
    if 2 * len(pairs) != n:
        raise ValidationError("blossom solver returned an imperfect matching")
    total = sum((weights[p] for p in pairs), Fraction(0))
    return total, pairs


def min_perfect_matching(n: int, w: Weight, *, method: str = "auto") -> tuple[Fraction, list[tuple[int, int]]]:
    """Minimum total weight of a perfect matching of ``0..n-1``.

    Returns ``(cost, pairs)``.  ``method`` is ``"auto"``, ``"dp"`` or
    ``"blossom"``.
    """
    if n % 2:
        raise ValidationError("perfect matchings need an even vertex count")
    if n == 0:
        return Fraction(0), []
    if method == "auto":
        method = "dp" if n <= DP_LIMIT else "blossom"
    if method == "dp":
        return _dp_matching(n, w)
    if method == "blossom":
        return _blossom_matching(n, w)
    raise ValidationError(f"unknown matching method {method!r}")

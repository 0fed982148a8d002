"""Random exact pseudometric spaces for tests."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from freebool.graev import GRAEV, MARKOV, PseudometricSpace


def random_pseudometric(rng: random.Random, names: list[str], denominator: int = 12, zero_rate: float = 0.1):
    """Shortest-path closure of random nonnegative edge weights."""
    n = len(names)
    d = [[Fraction(0)] * n for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        w = Fraction(0) if rng.random() < zero_rate else Fraction(rng.randint(1, 3 * denominator), denominator)
        d[i][j] = d[j][i] = w
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return d


def random_space(rng: random.Random, size: int, flavor: str = GRAEV, **kw) -> PseudometricSpace:
    points = [f"p{i}" for i in range(size)]
    nodes = points + (["*"] if flavor == GRAEV else [])
    d = random_pseudometric(rng, nodes, **kw)
    entries = {(nodes[i], nodes[j]): d[i][j] for i, j in itertools.combinations(range(len(nodes)), 2)}
    return PseudometricSpace(points, entries, basepoint="*" if flavor == GRAEV else None, flavor=flavor)


def spec_space(flavor: str = GRAEV) -> PseudometricSpace:
    """Three points with d(a,b)=1/4, d(a,c)=d(b,c)=1/2 and distance 1 to the basepoint."""
    q = Fraction
    entries = {("a", "b"): q(1, 4), ("a", "c"): q(1, 2), ("b", "c"): q(1, 2)}
    if flavor == GRAEV:
        entries.update({("*", "a"): q(1), ("*", "b"): q(1), ("*", "c"): q(1)})
        return PseudometricSpace(["a", "b", "c"], entries, basepoint="*")
    return PseudometricSpace(["a", "b", "c"], entries, flavor=MARKOV)

"""Finite symmetric pair colorings and their combinatorial analysis.

A coloring assigns to every unordered pair from {0..n-1} a color below
theta.  The module provides monochromatic-set search, the finite
disjoint-family coloring check (every color realized between some
order-separated pair of family members), the color-restriction transform,
and deterministic generators.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import BudgetError, PreconditionError
from .rng import XorShift64


@dataclass(frozen=True)
class Coloring:
    """Symmetric coloring of pairs from {0..n-1} with colors below theta.

    Stored sparsely: `pairs` maps (i, j) with i < j to a color; anything
    absent has color `default`.
    """

    n: int
    theta: int
    pairs: dict = field(default_factory=dict)
    default: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("ground set size must be non-negative")
        if self.theta < 1:
            raise ValueError("need at least one color")
        if not (0 <= self.default < self.theta):
            raise ValueError("default color out of range")
        for (i, j), c in self.pairs.items():
            if not (0 <= i < j < self.n):
                raise ValueError(f"bad pair ({i}, {j})")
            if not (0 <= c < self.theta):
                raise ValueError(f"color {c} out of range for pair ({i}, {j})")

    def get(self, i: int, j: int) -> int:
        if i == j:
            raise ValueError("coloring has no diagonal entries")
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise ValueError(f"pair ({i}, {j}) outside ground set")
        key = (i, j) if i < j else (j, i)
        return self.pairs.get(key, self.default)

    def covers_levels(self, levels) -> bool:
        return all(0 <= x < self.n for x in levels)


def make_coloring(n: int, theta: int, entries=None, default: int = 0) -> Coloring:
    table = {}
    for i, j, c in entries or []:
        key = (i, j) if i < j else (j, i)
        table[key] = c
    return Coloring(n=n, theta=theta, pairs=table, default=default)


def find_homogeneous(c: Coloring, m: int):
    """Lexicographically least m-subset on which c is constant, or None.

    Backtracking clique-style search: extend the current partial set with
    ascending candidates, fixing the color once two elements are chosen and
    pruning branches that cannot reach size m.
    """
    if m > c.n:
        raise PreconditionError("homogeneous set larger than ground set")
    if m <= 1:
        return set(range(m))

    def extend(chosen, color, start):
        if len(chosen) == m:
            return list(chosen)
        for v in range(start, c.n):
            if c.n - v < m - len(chosen):
                break
            if color is None:
                if len(chosen) == 1:
                    col = c.get(chosen[0], v)
                    got = extend(chosen + [v], col, v + 1)
                else:
                    got = extend(chosen + [v], None, v + 1)
                if got is not None:
                    return got
            else:
                if all(c.get(u, v) == color for u in chosen):
                    got = extend(chosen + [v], color, v + 1)
                    if got is not None:
                        return got
        return None

    found = extend([], None, 0)
    return set(found) if found is not None else None


def _disjoint_families(ground: int, mu: int, chi: int):
    """All families of mu pairwise-disjoint nonempty subsets of {0..ground-1},
    each of size < chi, enumerated in colex-ish deterministic order."""
    cells = []
    for size in range(1, chi):
        cells.extend(itertools.combinations(range(ground), size))
    cells.sort(key=lambda s: (sorted(s), len(s)))

    def rec(start, picked):
        if len(picked) == mu:
            yield list(picked)
            return
        for idx in range(start, len(cells)):
            cand = cells[idx]
            if all(set(cand).isdisjoint(p) for p in picked):
                picked.append(cand)
                yield from rec(idx + 1, picked)
                picked.pop()

    yield from rec(0, [])


def check_pr1_finite(c: Coloring, mu: int, chi: int, budget: int | None = None):
    """Check the finite disjoint-family coloring property.

    True iff for every family A of mu pairwise-disjoint nonempty subsets of
    {0..n-1} of size < chi and every color g < theta there are a, b in A
    with max(a) < min(b) and c constant equal to g on all pairs between
    a and b.  Returns (True, None) or (False, (family, color)).

    Brute force; the family enumeration is exponential, so an optional node
    budget makes worst cases interruptible (BudgetError with progress).
    """
    if mu < 1 or mu > c.n:
        raise PreconditionError("family size out of range")
    if chi < 2:
        raise PreconditionError("need blocks of size at least 1 (chi >= 2)")
    nodes = 0
    for family in _disjoint_families(c.n, mu, chi):
        nodes += 1
        if budget is not None and nodes > budget:
            raise BudgetError(
                f"family budget {budget} exceeded", progress={"families_checked": nodes - 1}
            )
        for color in range(c.theta):
            hit = False
            for a, b in itertools.permutations(family, 2):
                if max(a) < min(b) and all(
                    c.get(x, y) == color for x in a for y in b
                ):
                    hit = True
                    break
            if not hit:
                return False, ([list(s) for s in family], color)
    return True, None


def restrict_colors(c: Coloring, theta_prime: int) -> Coloring:
    """Collapse colors >= theta_prime to 0, keeping the rest."""
    if not (1 <= theta_prime <= c.theta):
        raise PreconditionError("theta_prime out of range")
    table = {}
    for key, col in c.pairs.items():
        table[key] = col if col < theta_prime else 0
    default = c.default if c.default < theta_prime else 0
    return Coloring(n=c.n, theta=theta_prime, pairs=table, default=default)


def generate(kind: str, n: int, theta: int, *, color: int = 0, seed: int = 0,
             permutation=None) -> Coloring:
    """Deterministic coloring generators.

    kind = "constant": every pair gets `color`.
    kind = "random": seeded xorshift64, each pair uniform below theta.
    kind = "order_disagreement": two colors; a pair {i, j} with i < j gets 1
    exactly when the permutation ranks them in the opposite order.
    """
    if kind == "constant":
        if not (0 <= color < theta):
            raise PreconditionError(f"color {color} out of range")
        return Coloring(n=n, theta=theta, pairs={}, default=color)
    if kind == "random":
        rng = XorShift64(seed)
        table = {}
        for i in range(n):
            for j in range(i + 1, n):
                table[(i, j)] = rng.below(theta)
        return Coloring(n=n, theta=theta, pairs=table, default=0)
    if kind == "order_disagreement":
        if permutation is None or sorted(permutation) != list(range(n)):
            raise PreconditionError("need a permutation of {0..n-1}")
        if theta != 2:
            raise PreconditionError("order_disagreement is a 2-coloring")
        table = {}
        for i in range(n):
            for j in range(i + 1, n):
                if permutation[i] > permutation[j]:
                    table[(i, j)] = 1
        return Coloring(n=n, theta=2, pairs=table, default=0)
    raise PreconditionError(f"unknown generator kind {kind!r}")

"""Finite structures over leveled parameter-tree signatures.

Two signature variants are supported.  Both have an object sort O and one
parameter sort per level; the "tree" variant additionally carries one
projection f_(a,b) from level b down to level a for every a <= b, and the
"plain" variant has only the connection maps p_a from objects to level a.
Functions are stored sparsely: any element without a table entry maps to
itself, which matches the off-sort behaviour the axioms force.

The module provides the universal-axiom checker, generated substructures,
embedding search, and a canonical form used for isomorphism tests and
deduplication.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import (
    MalformedStructureError,
    PreconditionError,
    SignatureMismatchError,
)

OBJ = "O"

TREE = "tree"
PLAIN = "plain"


@dataclass(frozen=True)
class Signature:
    levels: tuple
    variant: str

    def __post_init__(self):
        if self.variant not in (TREE, PLAIN):
            raise ValueError(f"unknown variant {self.variant!r}")
        lv = tuple(self.levels)
        if list(lv) != sorted(set(lv)):
            raise ValueError("levels must be strictly increasing and duplicate-free")
        if any(x < 0 for x in lv):
            raise ValueError("levels must be non-negative")
        object.__setattr__(self, "levels", lv)

    def proj_symbols(self):
        """All f_(a,b) symbols with a < b (f_(a,a) is identity, never stored)."""
        if self.variant != TREE:
            return []
        return [("f", a, b) for a, b in itertools.combinations(self.levels, 2)]

    def conn_symbols(self):
        return [("p", a) for a in self.levels]

    def symbols(self):
        return self.proj_symbols() + self.conn_symbols()


def sig(levels, variant=TREE) -> Signature:
    return Signature(levels=tuple(levels), variant=variant)


@dataclass(frozen=True)
class FinStructure:
    """A finite structure: domain, sort map, and sparse function tables.

    sort maps every domain element to OBJ, a level (int), or None.
    funs maps a symbol ("p", a) or ("f", a, b) to a sparse table; table
    entries equal to the identity are normalized away at construction.
    """

    signature: Signature
    domain: frozenset
    sort: dict
    funs: dict

    def __post_init__(self):
        dom = frozenset(self.domain)
        object.__setattr__(self, "domain", dom)
        if set(self.sort) != dom:
            raise MalformedStructureError("sort map must cover exactly the domain")
        levels = set(self.signature.levels)
        for x, s in self.sort.items():
            if s is not None and s != OBJ and s not in levels:
                raise MalformedStructureError(f"element {x} has sort {s!r} outside the signature")
        symbols = set(self.signature.symbols())
        cleaned = {}
        for sym, table in self.funs.items():
            if sym not in symbols:
                raise MalformedStructureError(f"function symbol {sym!r} not in the signature")
            entries = {}
            for x, y in table.items():
                if x not in dom or y not in dom:
                    raise MalformedStructureError(
                        f"table for {sym!r} maps {x} -> {y} outside the domain"
                    )
                if x != y:
                    entries[x] = y
            if entries:
                cleaned[sym] = entries
        object.__setattr__(self, "funs", cleaned)

    def apply(self, symbol, x):
        """Function application with the identity default."""
        if x not in self.domain:
            raise MalformedStructureError(f"element {x} not in the domain")
        return self.funs.get(symbol, {}).get(x, x)

    def of_sort(self, s):
        return sorted(x for x in self.domain if self.sort[x] == s)

    def objects(self):
        return self.of_sort(OBJ)

    def size(self):
        return len(self.domain)

    def fresh_id(self):
        return max(self.domain, default=-1) + 1


def make_structure(signature: Signature, sort: dict, funs: dict | None = None) -> FinStructure:
    return FinStructure(
        signature=signature,
        domain=frozenset(sort),
        sort=dict(sort),
        funs={sym: dict(tab) for sym, tab in (funs or {}).items()},
    )


def empty_structure(signature: Signature) -> FinStructure:
    return make_structure(signature, {}, {})


@dataclass(frozen=True)
class Violation:
    axiom: int
    elements: tuple
    reason: str


@dataclass(frozen=True)
class AxiomReport:
    ok: bool
    violations: tuple

    def __bool__(self):
        return self.ok


def check_axioms(M: FinStructure, coloring=None) -> AxiomReport:
    """Check the universal axioms of the leveled-structure theory.

    Tree variant: sort disjointness is structural (axiom 1); axiom 2 covers
    the projection targets, functoriality over every level triple, and the
    identity of f_(a,a); axiom 3 covers the connection maps; axiom 4, for
    every level pair {a, b} colored 0, requires an object connected at both
    levels to connect along a projection fiber: f_(a,b)(p_b(z)) = p_a(z).

    Plain variant: connections are total on objects (every object must
    connect at every level) and axiom 4 is vacuous.  The coloring is
    ignored for plain structures and required for tree structures.
    """
    lv = M.signature.levels
    tree = M.signature.variant == TREE
    if tree:
        if coloring is None and len(lv) >= 2:
            raise PreconditionError("tree-variant axiom check needs a coloring")
        if coloring is not None and not coloring.covers_levels(lv):
            raise PreconditionError("coloring does not cover the structure's levels")
    violations = []

    if tree:
        for a, b in itertools.combinations(lv, 2):
            symbol = ("f", a, b)
            for x in sorted(M.domain):
                y = M.apply(symbol, x)
                if M.sort[x] == b:
                    if M.sort[y] != a:
                        violations.append(Violation(2, (x, y), f"f_({a},{b})({x}) = {y} not in level {a}"))
                else:
                    if y != x:
                        violations.append(Violation(2, (x, y), f"f_({a},{b}) must fix {x} off level {b}"))
        for a, b, c in itertools.combinations(lv, 3):
            for x in M.of_sort(c):
                direct = M.apply(("f", a, c), x)
                composed = M.apply(("f", a, b), M.apply(("f", b, c), x))
                if direct != composed:
                    violations.append(Violation(
                        2, (x, direct, composed),
                        f"f_({a},{c})({x}) = {direct} but f_({a},{b})(f_({b},{c})({x})) = {composed}",
                    ))

    for a in lv:
        symbol = ("p", a)
        for x in sorted(M.domain):
            y = M.apply(symbol, x)
            if M.sort[x] != OBJ:
                if y != x:
                    violations.append(Violation(3, (x, y), f"p_{a} must fix non-object {x}"))
            else:
                if tree:
                    if y != x and M.sort[y] != a:
                        violations.append(Violation(3, (x, y), f"p_{a}({x}) = {y} not in level {a}"))
                else:
                    if M.sort.get(y) != a:
                        violations.append(Violation(3, (x, y), f"p_{a}({x}) = {y} must land in level {a}"))

    if tree and coloring is not None:
        for a, b in itertools.combinations(lv, 2):
            if coloring.get(a, b) != 0:
                continue
            for z in M.objects():
                pa = M.apply(("p", a), z)
                pb = M.apply(("p", b), z)
                if pa == z or pb == z:
                    continue
                if M.apply(("f", a, b), pb) != pa:
                    violations.append(Violation(
                        4, (z, pa, pb),
                        f"object {z} connects to {pa} (level {a}) and {pb} (level {b}) "
                        f"but f_({a},{b})({pb}) != {pa} while {{{a},{b}}} has color 0",
                    ))

    return AxiomReport(ok=not violations, violations=tuple(violations))


def generated_substructure(M: FinStructure, S) -> FinStructure:
    """Closure of S under all function symbols, with restricted data.

    The closure is the true fixpoint; note that for tree signatures a single
    object can force a full ancestor chain per level, so the closure of n
    generators can exceed (|levels|+1)*n.
    """
    S = set(S)
    if not S <= M.domain:
        raise PreconditionError("generators must lie in the domain")
    symbols = M.signature.symbols()
    closure = set(S)
    frontier = sorted(S)
    while frontier:
        nxt = []
        for x in frontier:
            for symbol in symbols:
                y = M.apply(symbol, x)
                if y not in closure:
                    closure.add(y)
                    nxt.append(y)
        frontier = sorted(nxt)
    return restrict(M, closure)


def restrict(M: FinStructure, subset) -> FinStructure:
    """Restriction of M to a function-closed subset of its domain."""
    subset = set(subset)
    if not subset <= M.domain:
        raise PreconditionError("restriction set must lie in the domain")
    funs = {}
    for symbol, table in M.funs.items():
        entries = {x: y for x, y in table.items() if x in subset}
        for x, y in entries.items():
            if y not in subset:
                raise PreconditionError(f"restriction set not closed: {symbol!r}({x}) = {y}")
        if entries:
            funs[symbol] = entries
    return make_structure(
        M.signature, {x: M.sort[x] for x in subset}, funs
    )


def reduct(M: FinStructure, levels) -> FinStructure:
    """Reduct to the sub-signature on the given levels.

    Elements sorted at a dropped level become unnamed; tables of dropped
    symbols are forgotten.
    """
    lv = tuple(sorted(set(levels)))
    if not set(lv) <= set(M.signature.levels):
        raise PreconditionError("reduct levels must be a subset of the signature's")
    new_sig = Signature(levels=lv, variant=M.signature.variant)
    keep = set(new_sig.symbols())
    sort = {
        x: (s if s == OBJ or s in set(lv) else None) if s is not None else None
        for x, s in M.sort.items()
    }
    funs = {sym: dict(tab) for sym, tab in M.funs.items() if sym in keep}
    return make_structure(new_sig, sort, funs)


def is_substructure(A: FinStructure, B: FinStructure) -> bool:
    """A is a substructure of B: same signature, domain included, sorts
    agree, and A is closed under B's functions with the same values."""
    if A.signature != B.signature:
        return False
    if not A.domain <= B.domain:
        return False
    for x in A.domain:
        if A.sort[x] != B.sort[x]:
            return False
    for symbol in A.signature.symbols():
        for x in A.domain:
            y = B.apply(symbol, x)
            if y not in A.domain or A.apply(symbol, x) != y:
                return False
    return True


def is_embedding(A: FinStructure, B: FinStructure, mapping: dict) -> bool:
    """mapping is a total injective sort-preserving map commuting with all
    function symbols."""
    if A.signature != B.signature:
        return False
    if set(mapping) != set(A.domain):
        return False
    if len(set(mapping.values())) != len(mapping):
        return False
    for x, y in mapping.items():
        if y not in B.domain or A.sort[x] != B.sort[y]:
            return False
    for symbol in A.signature.symbols():
        for x in A.domain:
            if mapping[A.apply(symbol, x)] != B.apply(symbol, mapping[x]):
                return False
    return True


def _sort_counts(M: FinStructure):
    counts = {}
    for x in M.domain:
        s = M.sort[x]
        counts[s] = counts.get(s, 0) + 1
    return counts


def iter_embeddings(A: FinStructure, B: FinStructure, partial: dict | None = None):
    """Yield every embedding A -> B extending `partial`, in lexicographic
    order over A's elements listed ascending (candidates tried ascending).

    Backtracking with sort-count pruning; the first yielded map is the one
    `find_embedding` returns.
    """
    if A.signature != B.signature:
        raise SignatureMismatchError("embedding search needs a shared signature")
    partial = dict(partial or {})
    for x, y in partial.items():
        if x not in A.domain or y not in B.domain:
            raise PreconditionError("partial map outside the domains")
        if A.sort[x] != B.sort[y]:
            raise PreconditionError("partial map does not respect sorts")
    if len(set(partial.values())) != len(partial):
        raise PreconditionError("partial map not injective")

    counts_a = _sort_counts(A)
    counts_b = _sort_counts(B)
    for s, k in counts_a.items():
        if counts_b.get(s, 0) < k:
            return

    symbols = A.signature.symbols()
    order = sorted(A.domain)

    def consistent(assign, x, y):
        for symbol in symbols:
            fx = A.apply(symbol, x)
            if fx in assign and assign[fx] != B.apply(symbol, y):
                return False
            if fx == x and B.apply(symbol, y) != y:
                return False
            for x2, y2 in assign.items():
                if A.apply(symbol, x2) == x and B.apply(symbol, y2) != y:
                    return False
        return True

    def rec(i, assign, used):
        if i == len(order):
            yield dict(assign)
            return
        x = order[i]
        if x in assign:
            yield from rec(i + 1, assign, used)
            return
        for y in sorted(B.domain):
            if y in used or B.sort[y] != A.sort[x]:
                continue
            if not consistent(assign, x, y):
                continue
            assign[x] = y
            used.add(y)
            yield from rec(i + 1, assign, used)
            del assign[x]
            used.discard(y)

    used0 = set(partial.values())
    yield from rec(0, dict(partial), used0)


def find_embedding(A: FinStructure, B: FinStructure, partial: dict | None = None):
    """First embedding A -> B extending `partial` (ties broken by ascending
    element identifier), or None."""
    for mapping in iter_embeddings(A, B, partial):
        return mapping
    return None


def are_isomorphic(A: FinStructure, B: FinStructure) -> bool:
    if A.signature != B.signature or len(A.domain) != len(B.domain):
        return False
    if _sort_counts(A) != _sort_counts(B):
        return False
    return canonical_code(A) == canonical_code(B)


def _refine(M: FinStructure, colors: dict) -> dict:
    """Iterated refinement by function images and preimage multisets."""
    symbols = M.signature.symbols()
    while True:
        signature_of = {}
        for x in M.domain:
            images = tuple(colors[M.apply(symbol, x)] for symbol in symbols)
            preimages = []
            for symbol in symbols:
                hits = sorted(colors[y] for y in M.domain if M.apply(symbol, y) == x and y != x)
                preimages.append(tuple(hits))
            signature_of[x] = (colors[x], images, tuple(preimages))
        ranked = sorted(set(signature_of.values()))
        new = {x: ranked.index(signature_of[x]) for x in M.domain}
        if new == colors:
            return colors
        colors = new


def _initial_colors(M: FinStructure, marks: dict | None):
    sort_key = {}
    for x in M.domain:
        s = M.sort[x]
        if s == OBJ:
            k = (0, 0)
        elif s is None:
            k = (2, 0)
        else:
            k = (1, s)
        sort_key[x] = (k, (marks or {}).get(x, 0))
    ranked = sorted(set(sort_key.values()))
    return {x: ranked.index(sort_key[x]) for x in M.domain}


def _code_for_labeling(M: FinStructure, label: dict, marks: dict | None) -> tuple:
    n = len(M.domain)
    ordered = sorted(M.domain, key=lambda e: label[e])
    sorts = tuple(
        M.sort[x] if M.sort[x] == OBJ or M.sort[x] is None else ("P", M.sort[x])
        for x in ordered
    )
    marked = tuple((marks or {}).get(x, 0) for x in ordered)
    entries = []
    for symbol in M.signature.symbols():
        table = M.funs.get(symbol, {})
        for x, y in table.items():
            entries.append((symbol, label[x], label[y]))
    return (M.signature.variant, M.signature.levels, n, sorts, marked, tuple(sorted(entries)))


def canonical_code(M: FinStructure, marks: dict | None = None) -> str:
    """Canonical form string: iterated refinement then lexicographic
    backtracking over ambiguous cells.  Two structures are isomorphic (with
    matching marks) iff their codes are equal."""
    if not M.domain:
        return repr((M.signature.variant, M.signature.levels, 0, (), (), ()))
    colors = _refine(M, _initial_colors(M, marks))

    best = [None]

    def cells_of(colors):
        cells = {}
        for x, c in colors.items():
            cells.setdefault(c, []).append(x)
        return [sorted(v) for _, v in sorted(cells.items())]

    def rec(colors):
        cells = cells_of(colors)
        split = next((cell for cell in cells if len(cell) > 1), None)
        if split is None:
            label = {}
            for rank, cell in enumerate(cells):
                label[cell[0]] = rank
            code = _code_for_labeling(M, label, marks)
            if best[0] is None or code < best[0]:
                best[0] = code
            return
        pivot_color = colors[split[0]]
        for x in split:
            branched = dict(colors)
            for y in branched:
                if branched[y] > pivot_color or (branched[y] == pivot_color and y != x):
                    branched[y] += 1
            branched[x] = pivot_color
            rec(_refine(M, branched))

    rec(colors)
    return repr(best[0])

"""Independent brute-force oracles for the test suite.

These deliberately re-derive answers by unpruned enumeration so the main
implementations can be checked against them.  The consistency oracle
enumerates every candidate witness in the generated-extension space, with
no literal propagation: candidates are fully built first and only then
tested (axiom check plus direct literal evaluation).
"""

import itertools

from treebench.colorings import Coloring
from treebench.qftypes import merge_ambient
from treebench.structures import OBJ, TREE, check_axioms, make_structure


def _eval_literal_direct(lit, E, g, tup, kind):
    """Direct term evaluation; written independently of the engine's slot
    machinery."""

    def f_apply(a, b, x):
        if a == b:
            return x
        return E.funs.get(("f", a, b), {}).get(x, x)

    def p_apply(a, x):
        return E.funs.get(("p", a), {}).get(x, x)

    if lit.shape == "p_self":
        return p_apply(lit.levels[0], g) == g
    if lit.shape == "p_eq":
        return p_apply(lit.levels[0], g) == tup[lit.param]
    if lit.shape == "fp_eq":
        a, b = lit.levels
        return f_apply(a, b, p_apply(b, g)) == tup[lit.param]
    if lit.shape == "fpfp":
        d, a, b = lit.levels
        return f_apply(d, a, p_apply(a, g)) == f_apply(d, b, p_apply(b, g))
    if lit.shape == "f_eq":
        return f_apply(lit.levels[0], kind, g) == tup[lit.param]
    raise ValueError(lit.shape)


def consistent_bruteforce(instances, coloring):
    """Unpruned exhaustive consistency check up to the shared size bound.

    Enumerates the sort of the realizer, every value of every connection
    and projection slot (existing elements, the realizer itself where the
    signature permits, or fresh elements with their own slots), builds each
    complete candidate, and tests it whole.
    """
    instances = list(instances)
    kinds = {inst.kind for inst in instances}
    if len(kinds) > 1:
        return False
    kind = kinds.pop()
    ambient = merge_ambient(instances)
    assert check_axioms(ambient, coloring).ok, "oracle precondition: ambient must be valid"
    levels = ambient.signature.levels
    tree = ambient.signature.variant == TREE
    cap = (len(levels) + 1) * (ambient.size() + 1)
    g = max(ambient.domain, default=-1) + 1

    base_sorts = dict(ambient.sort)
    base_sorts[g] = kind

    def initial_slots():
        if kind == OBJ:
            return [(("p", lv), g, True) for lv in levels]
        if tree:
            return [(("f", d, kind), g, False) for d in levels if d < kind]
        return []

    found = [False]

    def complete(sorts, entries):
        tables = {sym: dict(table) for sym, table in ambient.funs.items()}
        for (sym, x), y in entries.items():
            if x != y:
                tables.setdefault(sym, {})[x] = y
        try:
            E = make_structure(ambient.signature, sorts, tables)
        except Exception:
            return
        for sym, table in ambient.funs.items():
            for x, y in table.items():
                if E.funs.get(sym, {}).get(x, x) != y:
                    return
        if not check_axioms(E, coloring).ok:
            return
        for inst in instances:
            for lit in inst.literals:
                if _eval_literal_direct(lit, E, g, inst.param_tuple, inst.kind) != lit.sign:
                    return
        found[0] = True

    def rec(sorts, entries, queue, next_id):
        if found[0]:
            return
        if not queue:
            complete(sorts, entries)
            return
        (sym, elem, self_ok), rest = queue[0], queue[1:]
        target = sym[1]
        options = []
        if self_ok:
            options.append(elem)
        options.extend(x for x in sorted(sorts) if sorts[x] == target and x != elem)
        fresh_allowed = len(sorts) < cap
        for y in options:
            entries[(sym, elem)] = y
            rec(sorts, entries, rest, next_id)
            del entries[(sym, elem)]
            if found[0]:
                return
        if fresh_allowed:
            u = next_id
            sorts[u] = target
            entries[(sym, elem)] = u
            extra = [(("f", d, target), u, False) for d in levels if d < target] if tree else []
            rec(sorts, entries, rest + extra, next_id + 1)
            del entries[(sym, elem)]
            del sorts[u]

    rec(dict(base_sorts), {}, initial_slots(), g + 1)
    return found[0]


def homogeneous_bruteforce(c: Coloring, m: int):
    """All m-subsets, lexicographic, constant-color test by direct scan."""
    for combo in itertools.combinations(range(c.n), m):
        colors = {c.get(i, j) for i, j in itertools.combinations(combo, 2)}
        if len(colors) <= 1:
            return set(combo)
    return None


def delta_bruteforce(family, m):
    """All m-subfamilies in combination order; returns (indices, root) or None."""
    sets = [frozenset(s) for s in family]
    for combo in itertools.combinations(range(len(sets)), m):
        inters = {sets[i] & sets[j] for i, j in itertools.combinations(combo, 2)}
        if len(inters) == 1:
            return combo, inters.pop()
    return None


def pr1_bruteforce(c: Coloring, mu: int, chi: int):
    """Unpruned family scan for the disjoint-family coloring property."""
    cells = []
    for size in range(1, chi):
        cells.extend(itertools.combinations(range(c.n), size))
    for family in itertools.combinations(cells, mu):
        if any(set(a) & set(b) for a, b in itertools.combinations(family, 2)):
            continue
        for color in range(c.theta):
            good = False
            for a, b in itertools.permutations(family, 2):
                if max(a) < min(b) and all(c.get(x, y) == color for x in a for y in b):
                    good = True
                    break
            if not good:
                return False
    return True

"""Formula patterns over finite structures: construction, verification,
sunflower extraction, and coloring-homogeneity analysis.

A pattern is a tree (kinds "cdt" and "sct") or rectangular array (kind
"inp") of parameter tuples together with one formula shape per level.
Shape rows are atomic equations in one of three forms:

    "p"        p_a(x) = y                  levels (a,)
    "fp"       (f_(b0,b1) . p_b1)(x) = y   levels (b0, b1)
    "fp_root"  (f_(g,b) . p_b)(x) = y      levels (g, b)

plus "type" rows carrying a full literal template.  Verification reduces
every consistency condition to the bounded realizer search in qftypes.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import (
    BudgetError,
    MalformedPatternError,
    PreconditionError,
    UnsupportedShapeError,
)
from .qftypes import Literal, TypeInstance, is_consistent
from .rng import XorShift64
from .structures import (
    OBJ,
    PLAIN,
    TREE,
    FinStructure,
    Signature,
    generated_substructure,
    make_structure,
)

SHAPES = ("p", "fp", "fp_root", "type")


@dataclass(frozen=True)
class PatternRow:
    shape: str
    levels: tuple               # formula level arguments
    level_set: tuple            # the language the row's formula lives in
    bound: int                  # the row/sibling family is bound-inconsistent
    template: tuple | None = None  # for "type" rows: (kind, levels, literals)

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise UnsupportedShapeError(f"unknown row shape {self.shape!r}")
        arity = {"p": 1, "fp": 2, "fp_root": 2}
        if self.shape != "type":
            if len(self.levels) != arity[self.shape]:
                raise MalformedPatternError(f"{self.shape} rows take {arity[self.shape]} levels")
            if not set(self.levels) <= set(self.level_set):
                raise MalformedPatternError("row formula levels must lie in its level set")
            if self.shape in ("fp", "fp_root") and not self.levels[0] < self.levels[1]:
                raise MalformedPatternError("projection rows need increasing levels")
        else:
            if self.template is None:
                raise MalformedPatternError("type rows need a literal template")
        if self.bound < 2:
            raise MalformedPatternError("inconsistency bounds start at 2")


@dataclass(frozen=True)
class Pattern:
    kind: str                   # cdt | inp | sct
    height: int                 # tree height, or number of array rows
    branching: int              # tree branching, or number of array columns
    rows: tuple
    params: dict = field(default_factory=dict)  # address -> tuple of element ids

    def __post_init__(self):
        if self.kind not in ("cdt", "inp", "sct"):
            raise MalformedPatternError(f"unknown pattern kind {self.kind!r}")
        if self.height < 1 or self.branching < 1:
            raise MalformedPatternError("patterns need positive height and branching")
        if len(self.rows) != self.height:
            raise MalformedPatternError("need exactly one row per level")
        for addr in self.addresses():
            if addr not in self.params:
                raise MalformedPatternError(f"missing parameters at address {addr}")

    def addresses(self):
        if self.kind == "inp":
            return [(a, i) for a in range(self.height) for i in range(self.branching)]
        out = []
        for depth in range(1, self.height + 1):
            out.extend(itertools.product(range(self.branching), repeat=depth))
        return out

    def row_at(self, addr) -> PatternRow:
        idx = addr[0] if self.kind == "inp" else len(addr) - 1
        return self.rows[idx]


def row_instance(pattern: Pattern, M: FinStructure, addr) -> TypeInstance:
    """Instantiate the row formula at the given address.

    The instance's parameter structure is the full generated closure of the
    address tuple inside M, so joint consistency questions over several
    addresses always have a well-formed ambient structure.
    """
    row = pattern.row_at(addr)
    if addr not in pattern.params:
        raise MalformedPatternError(f"missing parameters at address {addr}")
    tup = tuple(pattern.params[addr])
    if not set(tup) <= M.domain:
        raise MalformedPatternError(f"parameters at {addr} are not elements of the structure")
    closure = generated_substructure(M, set(tup))
    full = tup + tuple(sorted(closure.domain - set(tup)))
    if row.shape == "p":
        (a,) = row.levels
        lits = (Literal("p_eq", (a,), 0, True),)
        kind = OBJ
    elif row.shape == "fp":
        b0, b1 = row.levels
        lits = (Literal("fp_eq", (b0, b1), 0, True),)
        kind = OBJ
    elif row.shape == "fp_root":
        g, b = row.levels
        lits = (Literal("fp_eq", (g, b), 0, True),)
        kind = OBJ
    else:
        kind, lv, lits = row.template
        if any(l.param is not None and l.param >= len(tup) for l in lits):
            raise MalformedPatternError("template references a position beyond the tuple")
        return TypeInstance(kind=kind, levels=tuple(lv), params=closure,
                            param_tuple=full, literals=tuple(lits))
    return TypeInstance(kind=kind, levels=tuple(row.level_set), params=closure,
                        param_tuple=full, literals=lits)


@dataclass(frozen=True)
class CheckResult:
    name: str
    addresses: tuple
    expect_consistent: bool
    consistent: bool

    @property
    def ok(self):
        return self.consistent == self.expect_consistent


@dataclass(frozen=True)
class PatternReport:
    kind: str
    mode: str
    checks: tuple

    @property
    def ok(self):
        return all(c.ok for c in self.checks)


def _pattern_checks(pattern: Pattern):
    """The (name, addresses, expectation) triples a verification must run,
    in deterministic order."""
    checks = []
    b = pattern.branching
    h = pattern.height
    if pattern.kind in ("cdt", "sct"):
        for leaf in itertools.product(range(b), repeat=h):
            addrs = tuple(leaf[:i] for i in range(1, h + 1))
            checks.append(("path", addrs, True))
        for depth in range(h):
            n = pattern.rows[depth].bound
            for parent in itertools.product(range(b), repeat=depth):
                family = [parent + (i,) for i in range(b)]
                for combo in itertools.combinations(family, n):
                    checks.append(("sibling-family", tuple(combo), False))
        if pattern.kind == "sct":
            addrs = pattern.addresses()
            for x, y in itertools.combinations(addrs, 2):
                if x[: len(y)] != y and y[: len(x)] != x:
                    checks.append(("incomparable", (x, y), False))
    else:
        for a in range(h):
            n = pattern.rows[a].bound
            family = [(a, i) for i in range(b)]
            for combo in itertools.combinations(family, n):
                checks.append(("row-family", tuple(combo), False))
    return checks


def _inp_path_checks(pattern: Pattern, mode: str, sample_size, seed: int):
    h, b = pattern.height, pattern.branching
    if mode == "exhaustive":
        choices = itertools.product(range(b), repeat=h)
    else:
        rng = XorShift64(seed)
        choices = [tuple(rng.below(b) for _ in range(h)) for _ in range(sample_size)]
    out = []
    for choice in choices:
        addrs = tuple((a, choice[a]) for a in range(h))
        out.append(("column-choice", addrs, True))
    return out


def verify_pattern(pattern: Pattern, M: FinStructure, coloring, mode: str = "exhaustive",
                   sample_size: int | None = None, seed: int = 0,
                   jobs: int = 1) -> PatternReport:
    """Check every defining condition of the pattern at finite scale.

    cdt: every root-to-leaf path is jointly consistent and every sibling
    family is bound-inconsistent.  inp: every column choice (exhaustive or
    a seeded sample) is consistent and every row is bound-inconsistent.
    sct: paths are consistent and every incomparable address pair is
    inconsistent.
    """
    if mode not in ("exhaustive", "sample"):
        raise PreconditionError(f"unknown verification mode {mode!r}")
    if mode == "sample" and (sample_size is None or sample_size < 1):
        raise PreconditionError("sample mode needs a positive sample size")
    checks = _pattern_checks(pattern)
    if pattern.kind == "inp":
        checks = _inp_path_checks(pattern, mode, sample_size, seed) + checks
    cache = {}

    def instance(addr):
        if addr not in cache:
            cache[addr] = row_instance(pattern, M, addr)
        return cache[addr]

    for _, addrs, _ in checks:
        for addr in addrs:
            instance(addr)

    def run(check):
        name, addrs, expect = check
        got = is_consistent([instance(a) for a in addrs], coloring)
        return CheckResult(name=name, addresses=addrs,
                           expect_consistent=expect, consistent=got)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = tuple(pool.map(run, checks))
    else:
        results = tuple(run(c) for c in checks)
    mode_label = mode if mode == "exhaustive" else f"sample:{sample_size}"
    return PatternReport(kind=pattern.kind, mode=mode_label, checks=results)


def build_canonical_tree_model(h: int, b: int, coloring):
    """The b-branching height-h tree structure with one object per leaf.

    Nodes at depth a are level-a parameters; projections send a node to its
    depth-a prefix; the object attached to leaf t connects to every prefix
    of t.  The result satisfies the axioms for every coloring, because all
    of an object's connections lie along one path.
    """
    if h < 1 or b < 2:
        raise PreconditionError("need height >= 1 and branching >= 2")
    if coloring is not None and not coloring.covers_levels(range(h + 1)):
        raise PreconditionError("coloring must cover levels 0..h")
    signature = Signature(levels=tuple(range(h + 1)), variant=TREE)
    node_id = {}
    counter = 0
    for depth in range(h + 1):
        for node in itertools.product(range(b), repeat=depth):
            node_id[node] = counter
            counter += 1
    sort = {node_id[n]: len(n) for n in node_id}
    funs = {}
    for node, idx in node_id.items():
        depth = len(node)
        for a in range(depth):
            funs.setdefault(("f", a, depth), {})[idx] = node_id[node[:a]]
    leaves = [n for n in node_id if len(n) == h]
    obj_id = {}
    for leaf in sorted(leaves):
        sort[counter] = OBJ
        obj_id[leaf] = counter
        for a in range(h + 1):
            funs.setdefault(("p", a), {})[counter] = node_id[leaf[:a]]
        counter += 1
    M = make_structure(signature, sort, funs)
    rows = tuple(
        PatternRow(shape="p", levels=(depth,), level_set=(depth,), bound=2)
        for depth in range(1, h + 1)
    )
    params = {}
    for node, idx in node_id.items():
        if 1 <= len(node) <= h:
            params[node] = (idx,)
    pattern = Pattern(kind="cdt", height=h, branching=b, rows=rows, params=params)
    return M, pattern


def build_plain_inp_model(rows: int, cols: int, materialize: bool = True,
                          object_cap: int = 4096, element_cap: int = 8192):
    """Plain-variant array model: cols parameters per level and, when
    materialized, one object per choice function realizing its column."""
    if rows < 2 or cols < 2:
        raise PreconditionError("an array pattern needs at least 2 rows and 2 columns")
    n_objects = cols ** rows if materialize else 0
    if n_objects > object_cap:
        raise BudgetError(f"{n_objects} objects exceed the cap {object_cap}")
    if rows * cols + n_objects > element_cap:
        raise BudgetError("total element count exceeds the cap")
    signature = Signature(levels=tuple(range(rows)), variant=PLAIN)
    sort = {}
    funs = {}
    pid = {}
    counter = 0
    for a in range(rows):
        for i in range(cols):
            pid[(a, i)] = counter
            sort[counter] = a
            counter += 1
    if materialize:
        for choice in itertools.product(range(cols), repeat=rows):
            sort[counter] = OBJ
            for a in range(rows):
                funs.setdefault(("p", a), {})[counter] = pid[(a, choice[a])]
            counter += 1
    M = make_structure(signature, sort, funs)
    row_specs = tuple(
        PatternRow(shape="p", levels=(a,), level_set=(a,), bound=2) for a in range(rows)
    )
    params = {(a, i): (pid[(a, i)],) for a in range(rows) for i in range(cols)}
    pattern = Pattern(kind="inp", height=rows, branching=cols, rows=row_specs, params=params)
    return M, pattern


def plant_tree_inp_params(rows: int, cols: int):
    """Tree-variant array parameters with fully unrelated ancestor chains.

    Each array entry is a level-a parameter whose ancestors at every lower
    level are dedicated fresh elements, so no two entries are projection
    related.  No objects are materialized; the structure passes the axioms
    under every coloring, and whether an object can realize a column is
    decided by the consistency search.
    """
    if rows < 2 or cols < 2:
        raise PreconditionError("an array pattern needs at least 2 rows and 2 columns")
    signature = Signature(levels=tuple(range(rows)), variant=TREE)
    sort = {}
    funs = {}
    counter = 0
    pid = {}
    for a in range(rows):
        for i in range(cols):
            pid[(a, i)] = counter
            sort[counter] = a
            counter += 1
            chain = {}
            for d in range(a - 1, -1, -1):
                chain[d] = counter
                sort[counter] = d
                counter += 1
            for d in range(a):
                funs.setdefault(("f", d, a), {})[pid[(a, i)]] = chain[d]
            for d1, d2 in itertools.combinations(range(a), 2):
                funs.setdefault(("f", d1, d2), {})[chain[d2]] = chain[d1]
    M = make_structure(signature, sort, funs)
    row_specs = tuple(
        PatternRow(shape="p", levels=(a,), level_set=(a,), bound=2) for a in range(rows)
    )
    params = {(a, i): (pid[(a, i)],) for a in range(rows) for i in range(cols)}
    pattern = Pattern(kind="inp", height=rows, branching=cols, rows=row_specs, params=params)
    return M, pattern


@dataclass(frozen=True)
class DeltaSystem:
    root: frozenset
    indices: tuple
    petals: tuple

    def as_dict(self):
        return {
            "root": sorted(self.root),
            "indices": list(self.indices),
            "petals": [sorted(p) for p in self.petals],
        }


def _is_delta(sets, root=None):
    inter = None
    for x, y in itertools.combinations(sets, 2):
        r = x & y
        if inter is None:
            inter = r
        elif r != inter:
            return None
    if inter is None:
        inter = frozenset() if root is None else root
    return inter


def _order_petals(root, indices, petals):
    """Reorder a sunflower so petals are separated intervals above the
    root; None when no such order exists (empty petals never qualify)."""
    if any(not p for p in petals):
        return None
    paired = sorted(zip(indices, petals), key=lambda ip: min(ip[1]))
    if root and max(root) >= min(paired[0][1]):
        return None
    for (_, p), (_, q) in zip(paired, paired[1:]):
        if max(p) >= min(q):
            return None
    return tuple(i for i, _ in paired), tuple(p for _, p in paired)


EXACT_LIMIT = 20


def find_delta_system(family, m: int, ordered: bool = False):
    """A size-m subfamily with common pairwise intersection, or None.

    Exact (complete) search for families of up to 20 sets; larger families
    fall back to a greedy scan over the most frequent pairwise-intersection
    candidates, which may miss solutions.  With `ordered`, the petals must
    additionally be separated intervals above the root.
    """
    if m < 2:
        raise PreconditionError("a sunflower needs at least two petals")
    sets = [frozenset(s) for s in family]
    if len(sets) < m:
        return None
    def attempt(combo):
        chosen = [sets[i] for i in combo]
        root = _is_delta(chosen)
        if root is None:
            return None
        petals = tuple(s - root for s in chosen)
        if ordered:
            reordered = _order_petals(root, combo, petals)
            if reordered is None:
                return None
            return DeltaSystem(root=root, indices=reordered[0], petals=reordered[1])
        return DeltaSystem(root=root, indices=tuple(combo), petals=petals)

    if len(sets) <= EXACT_LIMIT:
        for combo in itertools.combinations(range(len(sets)), m):
            system = attempt(combo)
            if system is not None:
                return system
        return None
    counts = {}
    for x, y in itertools.combinations(sets, 2):
        counts[x & y] = counts.get(x & y, 0) + 1
    candidates = sorted(counts, key=lambda r: (-counts[r], sorted(r)))
    for root in candidates:
        picked = []
        for idx, s in enumerate(sets):
            if not s >= root:
                continue
            if all(s & sets[j] == root for j in picked):
                picked.append(idx)
        if len(picked) >= m:
            for combo in itertools.combinations(picked, m):
                system = attempt(combo)
                if system is not None:
                    return system
    return None


@dataclass(frozen=True)
class ExtractResult:
    homogeneous: bool
    color: int | None = None
    levels: tuple | None = None
    offending_pair: tuple | None = None
    offending_rows: tuple | None = None
    offending_cols: tuple | None = None
    inconsistency_confirmed: bool | None = None


def _row_case(row: PatternRow, root):
    if row.shape == "p":
        (a,) = row.levels
        if a in root:
            raise UnsupportedShapeError("connection row at a root level is not classifiable")
        return 1, a
    if row.shape == "fp":
        b0, b1 = row.levels
        if b0 in root or b1 in root:
            raise UnsupportedShapeError("petal projection row touches the root")
        return 2, b1
    if row.shape == "fp_root":
        g, b = row.levels
        if g not in root or b in root:
            raise UnsupportedShapeError("root projection row needs root source and petal target")
        return 3, b
    raise UnsupportedShapeError("general type rows are outside the case analysis")


def extract_homogeneous_from_inp(pattern: Pattern, M: FinStructure, coloring):
    """From a rectified array pattern, produce a level set on which the
    coloring is constantly 1, or the offending level pair.

    Rows are classified by their formula shape; the majority case survives
    (ties resolved toward the connection case, then the petal projection
    case), each surviving row designates one level, and the designated set
    is verified to be pairwise 1-colored.  On failure the first offending
    pair is returned together with the column pair whose instances the
    consistency search rejects, which contradicts the pattern's validity.
    """
    if pattern.kind != "inp":
        raise PreconditionError("homogeneity extraction applies to array patterns")
    system = find_delta_system([set(r.level_set) for r in pattern.rows],
                               m=len(pattern.rows), ordered=True)
    if system is None or system.indices != tuple(range(len(pattern.rows))):
        raise PreconditionError(
            "pattern is not rectified: level sets form no ordered sunflower in row order"
        )
    root = system.root
    cases = []
    for row in pattern.rows:
        cases.append(_row_case(row, root))

    tally = {}
    for case, _ in cases:
        tally[case] = tally.get(case, 0) + 1
    majority = max(sorted(tally), key=lambda c: (tally[c], -c))
    survivors = [i for i, (case, _) in enumerate(cases) if case == majority]
    if majority == 3:
        by_g = {}
        for i in survivors:
            g = pattern.rows[i].levels[0]
            by_g.setdefault(g, []).append(i)
        best_g = max(sorted(by_g), key=lambda g: (len(by_g[g]), -g))
        survivors = by_g[best_g]

    designated = {i: cases[i][1] for i in survivors}
    levels = sorted(set(designated.values()))
    for la, lb in itertools.combinations(levels, 2):
        if coloring.get(la, lb) == 1:
            continue
        rows_ab = (min(i for i in survivors if designated[i] == la),
                   min(i for i in survivors if designated[i] == lb))
        for k, kp in itertools.product(range(pattern.branching), repeat=2):
            insts = [row_instance(pattern, M, (rows_ab[0], k)),
                     row_instance(pattern, M, (rows_ab[1], kp))]
            if not is_consistent(insts, coloring):
                return ExtractResult(
                    homogeneous=False, offending_pair=(la, lb),
                    offending_rows=rows_ab, offending_cols=(k, kp),
                    inconsistency_confirmed=True,
                )
        return ExtractResult(
            homogeneous=False, offending_pair=(la, lb),
            offending_rows=rows_ab, offending_cols=None,
            inconsistency_confirmed=False,
        )
    return ExtractResult(homogeneous=True, color=1, levels=tuple(levels))


def check_linked_family(coloring, family) -> bool:
    """True iff every pair of family members (in index order) admits a
    0-colored cross pair of elements: the weak linkedness that a strong
    coloring witness rules out."""
    sets = [sorted(set(s)) for s in family]
    for x, y in itertools.combinations(range(len(sets)), 2):
        if set(sets[x]) & set(sets[y]):
            raise PreconditionError("family members must be pairwise disjoint")
    for i, j in itertools.combinations(range(len(sets)), 2):
        if not any(coloring.get(xi, zj) == 0 for xi in sets[i] for zj in sets[j]):
            return False
    return True

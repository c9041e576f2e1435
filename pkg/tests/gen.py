"""Seeded random generators of valid structures and derived inputs.

Everything is driven by the workbench's own xorshift generator so test
runs are reproducible.  Structures are built valid by construction
(ancestor chains inherited from parents, connection sets repaired against
the coloring) and then asserted against the axiom checker.
"""

import itertools

from treebench.colorings import Coloring, generate
from treebench.qftypes import classify_type
from treebench.rng import XorShift64
from treebench.structures import (
    OBJ,
    PLAIN,
    TREE,
    Signature,
    check_axioms,
    generated_substructure,
    make_structure,
    reduct,
)


def random_coloring(rng: XorShift64, n: int, theta: int = 2) -> Coloring:
    table = {}
    for i in range(n):
        for j in range(i + 1, n):
            table[(i, j)] = rng.below(theta)
    return Coloring(n=n, theta=theta, pairs=table, default=0)


class StructureBuilder:
    """Incremental valid-structure builder over a fixed signature."""

    def __init__(self, signature: Signature, coloring: Coloring | None):
        self.sig = signature
        self.coloring = coloring
        self.sort = {}
        self.funs = {}
        self.anc = {}  # param -> {lower level -> ancestor}
        self.next_id = 0

    def _fresh(self, s):
        x = self.next_id
        self.next_id += 1
        self.sort[x] = s
        return x

    def pool(self, level):
        return sorted(x for x, s in self.sort.items() if s == level)

    def add_param(self, rng: XorShift64, level, attach_prob_pct=60):
        """New parameter at the level; tree chains are inherited from a
        randomly chosen parent at the next lower level, or freshly built."""
        x = self._fresh(level)
        if self.sig.variant == PLAIN:
            return x
        chain = {}
        below = [d for d in self.sig.levels if d < level]
        if below:
            d = max(below)
            parent = None
            pool = self.pool(d)
            if pool and rng.below(100) < attach_prob_pct:
                parent = rng.choice(pool)
            else:
                parent = self.add_param(rng, d, attach_prob_pct)
            chain[d] = parent
            chain.update(self.anc.get(parent, {}))
        self.anc[x] = chain
        for d, y in chain.items():
            self.funs.setdefault(("f", d, level), {})[x] = y
        return x

    def add_object(self, rng: XorShift64, connect_prob_pct=70):
        """New object with a random axiom-respecting connection set.

        Processing levels top-down, a 0-colored pair forces any lower
        connection onto the higher target's ancestor; conflicting forcings
        drop the lower connection instead (tree connections are partial).
        """
        o = self._fresh(OBJ)
        forced = {}
        dropped = set()
        for g in sorted(self.sig.levels, reverse=True):
            if g in dropped:
                continue
            if self.sig.variant == TREE and rng.below(100) >= connect_prob_pct:
                continue
            if g in forced:
                target = forced[g]
            else:
                pool = self.pool(g)
                target = rng.choice(pool + [None]) if pool else None
                if target is None:
                    target = self.add_param(rng, g)
            self.funs.setdefault(("p", g), {})[o] = target
            if self.sig.variant == TREE and self.coloring is not None:
                for d in self.sig.levels:
                    if d < g and self.coloring.get(d, g) == 0:
                        want = self.anc[target].get(d)
                        if d in forced and forced[d] != want:
                            dropped.add(d)
                        elif want is not None:
                            forced[d] = want
        return o

    def build(self):
        M = make_structure(self.sig, dict(self.sort), self.funs)
        report = check_axioms(M, self.coloring)
        assert report.ok, f"generator produced an invalid structure: {report.violations[:2]}"
        return M


def random_structure(rng: XorShift64, levels, variant=TREE, coloring=None,
                     n_params=4, n_objects=2):
    signature = Signature(levels=tuple(sorted(levels)), variant=variant)
    builder = StructureBuilder(signature, coloring)
    for _ in range(n_params):
        if signature.levels:
            builder.add_param(rng, rng.choice(signature.levels))
    for _ in range(n_objects):
        builder.add_object(rng)
    return builder.build()


def random_instance(rng: XorShift64, M, w, coloring, max_params=3):
    """A classified complete type of a random eligible element of M over a
    random closure-closed tuple."""
    red = reduct(M, w)
    eligible = sorted(
        x for x in M.domain if red.sort[x] == OBJ or red.sort[x] in w
    )
    if not eligible:
        return None
    for _ in range(20):
        b = rng.choice(eligible)
        others = sorted(M.domain - {b})
        if not others:
            return None
        picked = set()
        for _ in range(rng.below(max_params) + 1):
            picked.add(rng.choice(others))
        closure = generated_substructure(red, picked).domain
        if b in closure:
            continue
        return classify_type(M, b, tuple(sorted(closure)), levels=w)
    return None


def random_instance_pair(seed: int, max_levels: int = 3, max_ambient: int = 4):
    """A seeded (instances, coloring) pair over a shared small level set,
    classified inside one random valid model; ambient size capped."""
    rng = XorShift64(seed)
    n_levels = rng.below(max_levels) + 1
    levels = tuple(range(n_levels))
    coloring = random_coloring(rng, n_levels if n_levels > 1 else 2)
    for attempt in range(50):
        M = random_structure(rng, levels, variant=TREE, coloring=coloring,
                             n_params=rng.below(3) + 1, n_objects=rng.below(2) + 1)
        i1 = random_instance(rng, M, levels, coloring)
        i2 = random_instance(rng, M, levels, coloring)
        if i1 is None or i2 is None:
            continue
        joint = set(i1.params.domain) | set(i2.params.domain)
        if len(joint) > max_ambient:
            continue
        return [i1, i2], coloring
    raise AssertionError(f"no instance pair for seed {seed}")

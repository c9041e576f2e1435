"""Quantifier-free 1-types in normal form and bounded consistency search.

A type instance records the sort of the free variable (object or one
parameter level), the finite level set its literals speak about, a
closure-closed parameter tuple living in an ambient structure fragment,
and a conjunction of literals drawn from a fixed menu:

  object kinds:   (p_g(x) = x)^t            "p_self"
                  (p_g(x) = (a)_l)^t        "p_eq"
                  ((f_gd . p_d)(x) = (a)_l)^t       "fp_eq"   (g < d)
                  ((f_dg . p_g)(x) = (f_dg' . p_g')(x))^t     "fpfp" (d <= g < g')
  parameter kind: (f_g,b(x) = (a)_l)^t      "f_eq"    (g < b = the kind level)

Inequalities x != (a)_l are implicit: a realizer is always a fresh element.

`classify_type` produces the complete instance of an element over a tuple
inside a model; `is_consistent` decides whether a finite set of instances
admits a common fresh realizer in some axiom-satisfying extension of the
instances' joint parameter structure, searching sort assignments and
function tables of boundedly many fresh elements with literal
propagation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import (
    PreconditionError,
    SignatureMismatchError,
    UnsupportedCaseError,
)
from .structures import (
    OBJ,
    PLAIN,
    TREE,
    FinStructure,
    Signature,
    check_axioms,
    generated_substructure,
    make_structure,
    reduct,
    restrict,
)

SELF = "self"  # marker value: the slot maps the realizer to itself


@dataclass(frozen=True)
class Literal:
    shape: str          # p_self | p_eq | fp_eq | fpfp | f_eq
    levels: tuple       # shape-specific level arguments
    param: int | None   # position into the parameter tuple, if any
    sign: bool

    def __post_init__(self):
        arity = {"p_self": 1, "p_eq": 1, "fp_eq": 2, "fpfp": 3, "f_eq": 1}
        if self.shape not in arity:
            raise ValueError(f"unknown literal shape {self.shape!r}")
        if len(self.levels) != arity[self.shape]:
            raise ValueError(f"{self.shape} takes {arity[self.shape]} level(s)")
        needs_param = self.shape in ("p_eq", "fp_eq", "f_eq")
        if needs_param != (self.param is not None):
            raise ValueError(f"{self.shape} parameter reference mismatch")


@dataclass(frozen=True)
class TypeInstance:
    kind: object        # OBJ or a level (int)
    levels: tuple       # the level set the literals live over
    params: FinStructure
    param_tuple: tuple
    literals: tuple

    def __post_init__(self):
        if self.kind != OBJ and self.kind not in self.levels:
            raise ValueError("parameter kind must name a level of the instance")
        if not set(self.param_tuple) <= self.params.domain:
            raise ValueError("parameter tuple must lie in the parameter structure")
        for lit in self.literals:
            if lit.param is not None and not (0 <= lit.param < len(self.param_tuple)):
                raise ValueError("literal references a missing tuple position")
            for lv in lit.levels:
                if lv not in self.levels:
                    raise ValueError(f"literal level {lv} outside the instance's level set")

    def variant(self):
        return self.params.signature.variant


def classify_type(M: FinStructure, b, a, levels=None) -> TypeInstance:
    """Complete normal-form type of b over the closure-closed tuple a in M.

    `levels` selects the sub-signature the type speaks about (defaults to
    all of M's levels).  b must be an object or a parameter at one of those
    levels and must not lie in a (the normal form covers non-algebraic
    types only).
    """
    w = tuple(sorted(set(levels))) if levels is not None else M.signature.levels
    if not set(w) <= set(M.signature.levels):
        raise PreconditionError("requested levels exceed the model's")
    Mred = reduct(M, w)
    if b not in M.domain:
        raise PreconditionError(f"element {b} not in the model")
    a = tuple(a)
    if b in a:
        raise UnsupportedCaseError("algebraic type: the element is one of the parameters")
    sort_b = Mred.sort[b]
    if sort_b is None:
        raise UnsupportedCaseError("element carries no sort over the requested levels")
    if sort_b != OBJ and sort_b not in w:
        raise UnsupportedCaseError(f"element's level {sort_b} is outside the requested levels")
    if generated_substructure(Mred, set(a)).domain != set(a):
        raise PreconditionError("parameter tuple is not closure-closed")

    params = restrict(Mred, set(a))
    tree = M.signature.variant == TREE
    lits = []
    if sort_b == OBJ:
        for g in w:
            lits.append(Literal("p_self", (g,), None, Mred.apply(("p", g), b) == b))
        for g in w:
            for l, elem in enumerate(a):
                if Mred.sort[elem] == g:
                    lits.append(Literal("p_eq", (g,), l, Mred.apply(("p", g), b) == elem))
        if tree:
            for g, d in itertools.combinations(w, 2):
                val = Mred.apply(("f", g, d), Mred.apply(("p", d), b))
                for l, elem in enumerate(a):
                    if Mred.sort[elem] == g:
                        lits.append(Literal("fp_eq", (g, d), l, val == elem))
            for d in w:
                for g, gp in itertools.combinations([x for x in w if x >= d], 2):
                    lhs = Mred.apply(("f", d, g), Mred.apply(("p", g), b))
                    rhs = Mred.apply(("f", d, gp), Mred.apply(("p", gp), b))
                    lits.append(Literal("fpfp", (d, g, gp), None, lhs == rhs))
    else:
        if tree:
            for g in w:
                if g >= sort_b:
                    continue
                val = Mred.apply(("f", g, sort_b), b)
                for l, elem in enumerate(a):
                    if Mred.sort[elem] == g:
                        lits.append(Literal("f_eq", (g,), l, val == elem))
    return TypeInstance(kind=sort_b, levels=w, params=params,
                        param_tuple=a, literals=tuple(lits))


def instance_holds(inst: TypeInstance, M: FinStructure, b) -> bool:
    """Evaluate every literal of the instance at b inside M (self-soundness
    checks and tests)."""
    if M.sort[b] != inst.kind:
        return False
    if b in inst.param_tuple:
        return False
    for lit in inst.literals:
        if _eval_literal(lit, M, b, inst.param_tuple, inst.kind) != lit.sign:
            return False
    return True


def _eval_literal(lit: Literal, M: FinStructure, g, tup, kind):
    if lit.shape == "p_self":
        (gl,) = lit.levels
        return M.apply(("p", gl), g) == g
    if lit.shape == "p_eq":
        (gl,) = lit.levels
        return M.apply(("p", gl), g) == tup[lit.param]
    if lit.shape == "fp_eq":
        gl, dl = lit.levels
        return M.apply(("f", gl, dl), M.apply(("p", dl), g)) == tup[lit.param]
    if lit.shape == "fpfp":
        d, gl, gp = lit.levels
        lhs = M.apply(("f", d, gl), M.apply(("p", gl), g)) if d < gl else M.apply(("p", gl), g)
        rhs = M.apply(("f", d, gp), M.apply(("p", gp), g)) if d < gp else M.apply(("p", gp), g)
        return lhs == rhs
    if lit.shape == "f_eq":
        (gl,) = lit.levels
        return M.apply(("f", gl, kind), g) == tup[lit.param]
    raise ValueError(lit.shape)


def merge_ambient(instances) -> FinStructure:
    """Union of the instances' parameter structures as one structure over
    the union signature.  Raises PreconditionError when the fragments
    disagree on shared elements."""
    variants = {inst.variant() for inst in instances}
    if len(variants) != 1:
        raise SignatureMismatchError("instances mix signature variants")
    variant = variants.pop()
    levels = sorted(
        set().union(*[inst.levels for inst in instances])
        | set().union(*[inst.params.signature.levels for inst in instances])
    )
    signature = Signature(levels=tuple(levels), variant=variant)
    sort = {}
    funs = {}
    for inst in instances:
        for x in inst.params.domain:
            s = inst.params.sort[x]
            if x in sort and sort[x] != s:
                raise PreconditionError(f"instances disagree on the sort of element {x}")
            sort[x] = s
        for symbol, table in inst.params.funs.items():
            merged = funs.setdefault(symbol, {})
            for x, y in table.items():
                if x in merged and merged[x] != y:
                    raise PreconditionError(f"instances disagree at {symbol!r}({x})")
                merged[x] = y
    return make_structure(signature, sort, funs)


class _Search:
    """Bounded witness search: one fresh realizer plus fresh parameter
    elements up to the size cap, slots filled depth-first in a fixed order
    with literal checks pruning as soon as a term resolves."""

    def __init__(self, ambient: FinStructure, kind, literal_bundles, coloring, cap):
        self.sig = ambient.signature
        self.tree = self.sig.variant == TREE
        self.levels = self.sig.levels
        self.coloring = coloring
        self.cap = cap
        self.sorts = dict(ambient.sort)
        self.tables = {sym: dict(tab) for sym, tab in ambient.funs.items()}
        self.g = max(ambient.domain, default=-1) + 1
        self.sorts[self.g] = kind
        self.kind = kind
        self.bundles = literal_bundles  # list of (literals, param_tuple)
        self.next_id = self.g + 1
        self.slots = {}       # (sym, elem) -> value | None
        self.optional = set() # slots where SELF is allowed

        if kind == OBJ:
            if self.tree:
                mentioned = set()
                for lits, _ in literal_bundles:
                    for lit in lits:
                        if lit.shape in ("p_self", "p_eq"):
                            mentioned.add(lit.levels[0])
                        elif lit.shape == "fp_eq":
                            mentioned.add(lit.levels[1])
                        elif lit.shape == "fpfp":
                            mentioned.update(lit.levels[1:])
                for g in sorted(mentioned):
                    self.slots[(("p", g), self.g)] = None
                    self.optional.add((("p", g), self.g))
            else:
                for g in self.levels:
                    self.slots[(("p", g), self.g)] = None
        else:
            if self.tree:
                for d in self.levels:
                    if d < kind:
                        self.slots[(("f", d, kind), self.g)] = None

    def value(self, sym, x):
        """Current value of sym at x: a concrete element, SELF-resolved, or
        None when it depends on an unfilled slot."""
        key = (sym, x)
        if key in self.slots:
            v = self.slots[key]
            if v is None:
                return None
            return x if v == SELF else v
        return self.tables.get(sym, {}).get(x, x)

    def term(self, lit, tup):
        """Resolve the literal's (lhs, rhs) terms; None when undetermined."""
        if lit.shape == "p_self":
            (g,) = lit.levels
            v = self.value(("p", g), self.g)
            return (v, self.g) if v is not None else None
        if lit.shape == "p_eq":
            (g,) = lit.levels
            v = self.value(("p", g), self.g)
            return (v, tup[lit.param]) if v is not None else None
        if lit.shape == "fp_eq":
            g, d = lit.levels
            v = self.value(("p", d), self.g)
            if v is None:
                return None
            w = self.value(("f", g, d), v)
            return (w, tup[lit.param]) if w is not None else None
        if lit.shape == "fpfp":
            d, g, gp = lit.levels

            def side(lv):
                v = self.value(("p", lv), self.g)
                if v is None:
                    return None
                return self.value(("f", d, lv), v) if d < lv else v

            lhs = side(g)
            rhs = side(gp)
            if lhs is None or rhs is None:
                return None
            return (lhs, rhs)
        if lit.shape == "f_eq":
            (g,) = lit.levels
            v = self.value(("f", g, self.kind), self.g)
            return (v, tup[lit.param]) if v is not None else None
        raise ValueError(lit.shape)

    def literals_ok(self):
        for lits, tup in self.bundles:
            for lit in lits:
                resolved = self.term(lit, tup)
                if resolved is not None and (resolved[0] == resolved[1]) != lit.sign:
                    return False
        return True

    def axiom4_ok(self):
        if not self.tree or self.kind != OBJ or self.coloring is None:
            return True
        for d, g in itertools.combinations(self.levels, 2):
            if self.coloring.get(d, g) != 0:
                continue
            vd = self.value(("p", d), self.g)
            vg = self.value(("p", g), self.g)
            if vd in (None, self.g) or vg in (None, self.g):
                continue
            link = self.value(("f", d, g), vg)
            if link is not None and link != vd:
                return False
        return True

    def existing_of_sort(self, s):
        return sorted(x for x, sx in self.sorts.items() if sx == s)

    def candidates(self, key):
        sym, _ = key
        target = sym[1]  # ("p", g) or ("f", d, b): value sort is the first level arg
        vals = []
        if key in self.optional:
            vals.append(SELF)
        vals.extend(self.existing_of_sort(target))
        if len(self.sorts) < self.cap:
            vals.append("fresh")
        return vals

    def run(self):
        order = sorted(self.slots, key=lambda key: (key[1], key[0]))
        return self._dfs(order)

    def _dfs(self, order):
        pending = [key for key in order if self.slots[key] is None]
        if not pending:
            return self.finish()
        key = pending[0]
        (sym, elem) = key
        for cand in self.candidates(key):
            created = None
            if cand == "fresh":
                created = self.next_id
                self.next_id += 1
                self.sorts[created] = sym[1]
                value = created
                if self.tree:
                    for d in self.levels:
                        if d < sym[1]:
                            self.slots[(("f", d, sym[1]), created)] = None
            else:
                value = cand
            self.slots[key] = value if value != SELF else SELF
            if self.literals_ok() and self.axiom4_ok():
                new_order = sorted(self.slots, key=lambda k: (k[1], k[0]))
                if self._dfs(new_order):
                    return True
            self.slots[key] = None
            if created is not None:
                del self.sorts[created]
                if self.tree:
                    for d in self.levels:
                        if d < sym[1]:
                            self.slots.pop((("f", d, sym[1]), created), None)
                self.next_id -= 1
        return False

    def finish(self):
        if not self.literals_ok() or not self.axiom4_ok():
            return False
        tables = {sym: dict(tab) for sym, tab in self.tables.items()}
        for (sym, elem), val in self.slots.items():
            concrete = elem if val == SELF else val
            if concrete != elem:
                tables.setdefault(sym, {})[elem] = concrete
        E = make_structure(self.sig, dict(self.sorts), tables)
        report = check_axioms(E, self.coloring)
        return report.ok


def is_consistent(instances, coloring) -> bool:
    """Decide whether the instances admit a common fresh realizer.

    True iff there is a structure over the union of the instances' level
    sets, of size at most (|levels|+1) * (|ambient|+1), containing the
    joint parameter structure and a fresh element satisfying every literal
    of every instance, and passing the axiom check under the coloring.

    The joint parameter structure itself must pass the axiom check; if it
    does not, the instances were not taken in a common model and a
    PreconditionError is raised.
    """
    instances = list(instances)
    if not instances:
        raise PreconditionError("need at least one instance")
    kinds = {inst.kind for inst in instances}
    if len(kinds) > 1:
        return False  # sorts are pairwise disjoint, no element has two
    kind = kinds.pop()

    ambient = merge_ambient(instances)
    if ambient.signature.variant == TREE and len(ambient.signature.levels) >= 1:
        if coloring is None:
            raise PreconditionError("tree-variant consistency needs a coloring")
        if not coloring.covers_levels(ambient.signature.levels):
            raise PreconditionError("coloring does not cover the instances' levels")
    report = check_axioms(ambient, coloring)
    if not report.ok:
        raise PreconditionError(
            "joint parameter structure fails the axioms: "
            + "; ".join(v.reason for v in report.violations[:3])
        )
    if kind != OBJ and kind not in ambient.signature.levels:
        raise PreconditionError("parameter kind outside the joint level set")

    cap = (len(ambient.signature.levels) + 1) * (ambient.size() + 1)
    bundles = [(inst.literals, inst.param_tuple) for inst in instances]
    search = _Search(ambient, kind, bundles, coloring, cap)
    return search.run()


def explain_inconsistency(instances, coloring):
    """Best-effort human-readable reason after is_consistent returns False.

    Detects the two canonical obstructions: a single-valued connection
    asserted twice with different targets, and a 0-colored level pair whose
    forced projection equation fails in the ambient structure.
    """
    instances = list(instances)
    kinds = {inst.kind for inst in instances}
    if len(kinds) > 1:
        return "instances assert different sorts for the realizer"
    positives = []
    for inst in instances:
        for lit in inst.literals:
            if lit.shape == "p_eq" and lit.sign:
                positives.append((lit.levels[0], inst.param_tuple[lit.param]))
    ambient = merge_ambient(instances)
    for (g1, a1), (g2, a2) in itertools.combinations(sorted(set(positives)), 2):
        if g1 == g2 and a1 != a2:
            return (f"p_{g1} is single-valued but is asserted to equal "
                    f"both {a1} and {a2}")
        if g1 != g2 and coloring is not None and coloring.get(g1, g2) == 0:
            lo, hi, alo, ahi = (g1, g2, a1, a2) if g1 < g2 else (g2, g1, a2, a1)
            actual = ambient.apply(("f", lo, hi), ahi)
            if actual != alo:
                return (f"pair {{{lo},{hi}}} has color 0, forcing "
                        f"f_({lo},{hi})({ahi}) = {alo}, but it equals {actual}")
    return None

"""The three explicit amalgam constructions over leveled signatures.

free_amalgam glues two extensions of a common substructure with union
interpretations and no identifications.  extend_reduct solves the
one-new-level extension problem: given an embedding of A into B over the
smaller signature and a structure C generated by A over the signature with
one extra level, it produces D generated by B together with an extension
of the embedding.  two_type_amalgam realizes two one-sided extensions of a
common base by a single tuple, padding the cross-level projections with
formal fiber elements; it is licensed exactly when every cross pair of
levels carries color 1.
"""

from __future__ import annotations

import itertools

from .errors import (
    HypothesisError,
    OverlapError,
    PreconditionError,
    SignatureMismatchError,
    TypeMismatchError,
    UnsupportedCaseError,
)
from .structures import (
    OBJ,
    TREE,
    FinStructure,
    Signature,
    generated_substructure,
    is_embedding,
    is_substructure,
    make_structure,
    reduct,
    restrict,
)


def free_amalgam(A: FinStructure, B: FinStructure, C: FinStructure) -> FinStructure:
    """Union of B and C over the common substructure A.

    Preconditions: all three share a signature, A is a substructure of both
    B and C, and B and C overlap exactly in A's elements.
    """
    if not (A.signature == B.signature == C.signature):
        raise SignatureMismatchError("free amalgam needs a shared signature")
    if B.domain & C.domain != A.domain:
        raise OverlapError("B and C must overlap exactly in A")
    if not is_substructure(A, B) or not is_substructure(A, C):
        raise PreconditionError("A must be a substructure of both sides")
    sort = {}
    for x in B.domain | C.domain:
        sort[x] = B.sort[x] if x in B.domain else C.sort[x]
    funs = {}
    for symbol in A.signature.symbols():
        table = {}
        table.update(B.funs.get(symbol, {}))
        table.update(C.funs.get(symbol, {}))
        if table:
            funs[symbol] = table
    return make_structure(A.signature, sort, funs)


def extend_reduct(A: FinStructure, B: FinStructure, pi: dict, C: FinStructure, gamma: int):
    """Extend an embedding pi: A -> B over one extra level gamma.

    C must extend A by new elements only at the new level, all generated
    from A.  Returns (D, pi_tilde) where D is generated by B over the
    larger signature and pi_tilde: C -> D extends pi, acting as the
    identity on the new level wherever identifiers permit.

    The projection from the new level's next level up is padded with one
    formal fiber element per element of that level of B not hit from C.
    """
    if A.signature.variant != TREE:
        raise UnsupportedCaseError("reduct extension is defined for the tree variant")
    if A.signature != B.signature:
        raise SignatureMismatchError("A and B must share a signature")
    w = A.signature.levels
    if gamma in w:
        raise PreconditionError(f"level {gamma} is already in the signature")
    v = tuple(sorted(set(w) | {gamma}))
    if C.signature != Signature(levels=v, variant=TREE):
        raise SignatureMismatchError("C must live over the signature extended by the new level")
    if not is_embedding(A, B, pi):
        raise PreconditionError("pi is not an embedding")

    if not A.domain <= C.domain:
        raise PreconditionError("C must contain A")
    for x in A.domain:
        if C.sort[x] != A.sort[x]:
            raise PreconditionError(f"C changes the sort of base element {x}")
    new_elems = sorted(C.domain - A.domain)
    for x in new_elems:
        if C.sort[x] != gamma:
            raise PreconditionError(f"new element {x} of C lies outside the new level")
    for symbol in A.signature.symbols():
        for x in A.domain:
            if C.apply(symbol, x) != A.apply(symbol, x):
                raise PreconditionError("C does not extend A over the base signature")
    if generated_substructure(C, A.domain).domain != C.domain:
        raise PreconditionError("C must be generated by A")

    above = [a for a in w if a > gamma]
    alpha_star = min(above) if above else None

    # Relabel C's new elements into D, keeping identifiers when free.
    next_id = max(itertools.chain(B.domain, C.domain, [-1])) + 1
    lab = {}
    for c in new_elems:
        if c in B.domain:
            lab[c] = next_id
            next_id += 1
        else:
            lab[c] = c

    star_sources = []
    if alpha_star is not None:
        hit = {pi[c] for c in A.of_sort(alpha_star)}
        star_sources = [d for d in B.of_sort(alpha_star) if d not in hit]
    star = {}
    for d in star_sources:
        star[d] = next_id
        next_id += 1

    sort = {x: B.sort[x] for x in B.domain}
    for c in new_elems:
        sort[lab[c]] = gamma
    for d in star_sources:
        sort[star[d]] = gamma

    def tilde(x):
        return lab[x] if x in lab else pi[x]

    funs = {symbol: dict(table) for symbol, table in B.funs.items()}

    def put(symbol, x, y):
        if x != y:
            funs.setdefault(symbol, {})[x] = y

    if alpha_star is not None:
        f_new = ("f", gamma, alpha_star)
        for c in A.of_sort(alpha_star):
            put(f_new, pi[c], tilde(C.apply(f_new, c)))
        for d in star_sources:
            put(f_new, d, star[d])
        # projections from levels above alpha_star are forced by composition
        for a in above:
            if a == alpha_star:
                continue
            up = ("f", alpha_star, a)
            for x in B.of_sort(a):
                mid = B.apply(up, x)
                put(("f", gamma, a), x, funs.get(f_new, {}).get(mid, mid))

    for b in w:
        if b >= gamma:
            continue
        symbol = ("f", b, gamma)
        for c in new_elems:
            put(symbol, lab[c], pi[C.apply(symbol, c)])
        if alpha_star is not None:
            down = ("f", b, alpha_star)
            for d in star_sources:
                put(symbol, star[d], B.apply(down, d))

    p_gamma = ("p", gamma)
    for c in A.of_sort(OBJ):
        y = C.apply(p_gamma, c)
        if y != c:
            put(p_gamma, pi[c], tilde(y))

    D = make_structure(Signature(levels=v, variant=TREE), sort, funs)
    pi_tilde = dict(pi)
    for c in new_elems:
        pi_tilde[c] = lab[c]
    return D, pi_tilde


def induced_generated_iso(S: FinStructure, T: FinStructure, base: dict):
    """Extend `base` along generated closures and verify it is an
    isomorphism between the substructure generated by base's keys in S and
    the one generated by its values in T.  Returns the total map or raises
    TypeMismatchError."""
    if S.signature != T.signature:
        raise SignatureMismatchError("isomorphism check needs a shared signature")
    gen_s = generated_substructure(S, set(base))
    gen_t = generated_substructure(T, set(base.values()))
    mapping = dict(base)
    frontier = sorted(base)
    while frontier:
        nxt = []
        for x in frontier:
            for symbol in S.signature.symbols():
                fx = S.apply(symbol, x)
                fy = T.apply(symbol, mapping[x])
                if fx in mapping:
                    if mapping[fx] != fy:
                        raise TypeMismatchError(
                            f"map conflict at {symbol!r}({x}): {mapping[fx]} vs {fy}"
                        )
                else:
                    mapping[fx] = fy
                    nxt.append(fx)
        frontier = sorted(nxt)
    if set(mapping) != gen_s.domain or set(mapping.values()) != gen_t.domain:
        raise TypeMismatchError("generated closures do not correspond")
    if not is_embedding(gen_s, restrict(T, gen_t.domain), mapping):
        raise TypeMismatchError("induced map is not an isomorphism")
    return mapping


def two_type_amalgam(A: FinStructure, B: FinStructure, d: tuple, C: FinStructure,
                     e: tuple, coloring):
    """Realize a w-side extension (B, d) and a w'-side extension (C, e) of A
    by one tuple g over the union signature.

    Hypothesis: with v the intersection of the level sets, every a in v,
    b in w\\v, c in w'\\v satisfy a < b < c and the coloring gives every
    (b, c) pair color 1.  The designated tuples must induce an isomorphism
    over A between the structures they generate over the intersection
    signature.  Returns (D, g).
    """
    if any(s.variant != TREE for s in (A.signature, B.signature, C.signature)):
        raise UnsupportedCaseError("the two-sided amalgam is defined for the tree variant")
    w = B.signature.levels
    wp = C.signature.levels
    union = tuple(sorted(set(w) | set(wp)))
    if A.signature.levels != union:
        raise SignatureMismatchError("A must live over the union of the two level sets")
    v = tuple(sorted(set(w) & set(wp)))
    mid = [x for x in w if x not in v]
    top = [x for x in wp if x not in v]

    for a, b in itertools.product(v, mid + top):
        if not a < b:
            raise HypothesisError(f"root level {a} not below side level {b}")
    for b, c in itertools.product(mid, top):
        if not b < c:
            raise HypothesisError(f"side levels {b} and {c} are not ordered")
        if coloring.get(b, c) != 1:
            raise HypothesisError(f"pair {{{b},{c}}} has color 0; the amalgam is not licensed")

    if len(d) != len(e):
        raise PreconditionError("designated tuples must have equal length")
    if not set(d) <= B.domain or not set(e) <= C.domain:
        raise PreconditionError("designated tuples must lie in their structures")

    def side_matches(side: FinStructure, tup, levels, name):
        red = reduct(A, levels)
        if not A.domain <= side.domain:
            raise PreconditionError(f"{name} must contain A")
        for x in A.domain:
            if side.sort[x] != red.sort[x]:
                raise PreconditionError(f"{name} changes the sort of base element {x}")
        for symbol in red.signature.symbols():
            for x in A.domain:
                if side.apply(symbol, x) != red.apply(symbol, x):
                    raise PreconditionError(f"{name} does not extend A over its reduct")
        if generated_substructure(side, A.domain | set(tup)).domain != side.domain:
            raise PreconditionError(f"{name} must be generated by its tuple over A")

    side_matches(B, d, w, "the first side")
    side_matches(C, e, wp, "the second side")

    base = {x: x for x in A.domain}
    for di, ei in zip(d, e):
        if (di in A.domain or ei in A.domain) and di != ei:
            raise TypeMismatchError("tuple entries inside A must correspond identically")
        if di in base and base[di] != ei:
            raise TypeMismatchError("designated tuple is not single-valued over the intersection")
        base[di] = ei
    iso_v = induced_generated_iso(reduct(B, v), reduct(C, v), base)

    # Build D: A keeps its identifiers, tuple entries get shared fresh ids,
    # the intersection-generated parts are identified along iso_v, and the
    # remaining elements of each side get fresh copies.
    next_id = max(itertools.chain(A.domain, B.domain, C.domain, [-1])) + 1
    phi_b = {x: x for x in A.domain}
    g = []
    for di in d:
        if di not in phi_b:
            phi_b[di] = next_id
            next_id += 1
        g.append(phi_b[di])
    for x in sorted(B.domain - set(phi_b)):
        phi_b[x] = next_id
        next_id += 1

    inv_iso = {y: x for x, y in iso_v.items()}
    phi_c = {x: x for x in A.domain}
    for di, ei in zip(d, e):
        phi_c[ei] = phi_b[di]
    for y in sorted(C.domain - set(phi_c)):
        if y in inv_iso:
            phi_c[y] = phi_b[inv_iso[y]]
        else:
            phi_c[y] = next_id
            next_id += 1

    union_sig = Signature(levels=union, variant=TREE)
    sort = {x: A.sort[x] for x in A.domain}
    for x in sorted(B.domain - A.domain):
        tgt = phi_b[x]
        if B.sort[x] is not None:
            sort[tgt] = B.sort[x]
        else:
            sort.setdefault(tgt, None)
    for y in sorted(C.domain - A.domain):
        tgt = phi_c[y]
        if C.sort[y] is not None:
            prev = sort.get(tgt)
            if prev is not None and prev != C.sort[y]:
                raise TypeMismatchError(f"sides disagree on the sort of shared element {tgt}")
            sort[tgt] = C.sort[y]
        else:
            sort.setdefault(tgt, None)

    funs = {}

    def put(symbol, x, y):
        if x == y:
            return
        table = funs.setdefault(symbol, {})
        if x in table and table[x] != y:
            raise TypeMismatchError(f"sides disagree at {symbol!r}({x})")
        table[x] = y

    for symbol in B.signature.symbols():
        for x in B.domain:
            put(symbol, phi_b[x], phi_b[B.apply(symbol, x)])
    for symbol in C.signature.symbols():
        for y in C.domain:
            put(symbol, phi_c[y], phi_c[C.apply(symbol, y)])
    # A's own cross-pair projection data survives into D
    for symbol in union_sig.symbols():
        if symbol[0] == "f" and symbol[1] in mid and symbol[2] in top:
            for x, y in A.funs.get(symbol, {}).items():
                put(symbol, x, y)

    # Formal fiber padding for the cross projections onto the new side.
    gamma = min(top) if top else None
    if gamma is not None and mid:
        new_gamma = sorted(phi_c[y] for y in C.of_sort(gamma) if y not in A.domain)
        stars = {}
        for a in mid:
            for cval in new_gamma:
                stars[(a, cval)] = next_id
                sort[next_id] = a
                next_id += 1
        for a in mid:
            for cval in new_gamma:
                put(("f", a, gamma), cval, stars[(a, cval)])
            # higher new-side levels compose through gamma
            for bp in top:
                if bp == gamma:
                    continue
                fg = ("f", gamma, bp)
                for y in C.of_sort(bp):
                    tgt = phi_c[y]
                    mid_val = funs.get(fg, {}).get(tgt, tgt)
                    down = funs.get(("f", a, gamma), {}).get(mid_val, mid_val)
                    put(("f", a, bp), tgt, down)
            # root levels see the fiber elements through gamma
            for xi in v:
                fxg = ("f", xi, gamma)
                for cval in new_gamma:
                    put(("f", xi, a), stars[(a, cval)],
                        funs.get(fxg, {}).get(cval, cval))
        for a1, a2 in itertools.combinations(mid, 2):
            for cval in new_gamma:
                put(("f", a1, a2), stars[(a2, cval)], stars[(a1, cval)])

    D = make_structure(union_sig, sort, funs)
    return D, tuple(g)

"""Budgeted approximation of the homogeneous limit by a finite structure
with the extension property up to a size cap.

The builder enumerates every isomorphism type of extension problem (a
structure C of bounded size with a proper substructure B) and every
embedding of B into the current structure, and resolves each by free
amalgamation unless it is already realized.  It repeats passes until one
makes no change (completeness certified) or the domain budget is hit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .amalgam import free_amalgam
from .errors import PreconditionError
from .structures import (
    OBJ,
    TREE,
    FinStructure,
    Signature,
    canonical_code,
    check_axioms,
    empty_structure,
    find_embedding,
    is_embedding,
    is_substructure,
    iter_embeddings,
    make_structure,
    restrict,
)


@dataclass(frozen=True)
class ExtensionProblem:
    base: FinStructure      # B
    extension: FinStructure  # C, a structure with base as substructure
    anchor: dict            # embedding of base into the ambient structure


@dataclass(frozen=True)
class GenericResult:
    structure: FinStructure
    complete: bool
    passes: int
    problems_seen: int
    realized: int


def resolve_extension(M: FinStructure, problem: ExtensionProblem, coloring) -> FinStructure:
    """Grow M so the problem's extension embeds compatibly with its anchor.

    If an embedding of the extension already exists over the anchor, M is
    returned unchanged; otherwise a fresh copy of the extension is glued
    onto the anchor image by free amalgamation.
    """
    B, C = problem.base, problem.extension
    if B.signature != C.signature or B.signature != M.signature:
        raise PreconditionError("problem and ambient structure must share a signature")
    if not is_substructure(B, C):
        raise PreconditionError("the problem's base must be a substructure of its extension")
    anchor = dict(problem.anchor)
    if not is_embedding(B, M, anchor):
        raise PreconditionError("anchor is not an embedding into the ambient structure")
    glue_image = set(anchor.values())
    if find_embedding(C, M, partial=anchor) is not None:
        return M
    glue = restrict(M, glue_image)
    fresh = max(itertools.chain(M.domain, C.domain, [-1])) + 1
    relabel = {}
    for x in sorted(C.domain):
        if x in B.domain:
            relabel[x] = anchor[x]
        else:
            relabel[x] = fresh
            fresh += 1
    sort = {relabel[x]: C.sort[x] for x in C.domain}
    funs = {}
    for symbol, table in C.funs.items():
        funs[symbol] = {relabel[x]: relabel[y] for x, y in table.items()}
    C_copy = make_structure(C.signature, sort, funs)
    return free_amalgam(glue, M, C_copy)


def _closed(M: FinStructure, subset) -> bool:
    return all(
        M.apply(symbol, x) in subset for symbol in M.signature.symbols() for x in subset
    )


def _sort_options(signature: Signature):
    return [OBJ] + list(signature.levels) + [None]


def enumerate_structures(signature: Signature, coloring, max_size: int):
    """All isomorphism types of axiom-satisfying structures up to max_size,
    in deterministic order (size, then canonical code)."""
    seen = set()
    out = []
    for n in range(max_size + 1):
        domain = list(range(n))
        sized = []
        for sorts in itertools.product(_sort_options(signature), repeat=n):
            sort = dict(zip(domain, sorts))
            slots = []
            dead = False
            if signature.variant == TREE:
                for a, b in itertools.combinations(signature.levels, 2):
                    targets = [x for x in domain if sort[x] == a]
                    for x in domain:
                        if sort[x] == b:
                            if not targets:
                                dead = True
                                break
                            slots.append((("f", a, b), x, targets))
                    if dead:
                        break
                if not dead:
                    for g in signature.levels:
                        targets = [x for x in domain if sort[x] == g]
                        for x in domain:
                            if sort[x] == OBJ:
                                slots.append((("p", g), x, [x] + targets))
            else:
                for g in signature.levels:
                    targets = [x for x in domain if sort[x] == g]
                    for x in domain:
                        if sort[x] == OBJ:
                            if not targets:
                                dead = True
                                break
                            slots.append((("p", g), x, targets))
                    if dead:
                        break
            if dead:
                continue
            for values in itertools.product(*[vals for _, _, vals in slots]):
                funs = {}
                for (symbol, x, _), y in zip(slots, values):
                    if x != y:
                        funs.setdefault(symbol, {})[x] = y
                try:
                    candidate = make_structure(signature, sort, funs)
                except Exception:
                    continue
                if not check_axioms(candidate, coloring).ok:
                    continue
                code = canonical_code(candidate)
                if code not in seen:
                    seen.add(code)
                    sized.append((code, candidate))
        sized.sort(key=lambda pair: pair[0])
        out.extend(candidate for _, candidate in sized)
    return out


def enumerate_problems(signature: Signature, coloring, size_cap: int):
    """All isomorphism types of extension problems (B a proper substructure
    of C, |C| <= cap), deduplicated by the marked canonical code of C with
    B's elements distinguished."""
    problems = []
    seen = set()
    for C in enumerate_structures(signature, coloring, size_cap):
        if not C.domain:
            continue
        elems = sorted(C.domain)
        for r in range(len(elems)):
            for subset in itertools.combinations(elems, r):
                subset = set(subset)
                if not _closed(C, subset):
                    continue
                code = canonical_code(C, marks={x: 1 for x in subset})
                if code in seen:
                    continue
                seen.add(code)
                problems.append((restrict(C, subset), C, code))
    problems.sort(key=lambda bc: (bc[1].size(), canonical_code(bc[1]), bc[2]))
    return [(B, C) for B, C, _ in problems]


def build_generic(signature: Signature, coloring, problem_size_cap: int,
                  domain_cap: int) -> GenericResult:
    """Fixpoint of extension-problem resolution under a domain budget.

    Returns the grown structure plus a completeness flag: True iff some
    full pass found every problem of size up to the cap already realized
    at every anchor.
    """
    if problem_size_cap < 0:
        raise PreconditionError("the problem size cap must be non-negative")
    problems = enumerate_problems(signature, coloring, problem_size_cap)
    M = empty_structure(signature)
    passes = 0
    realized = 0
    problems_seen = 0
    while True:
        passes += 1
        changed = False
        pass_realized = 0
        pass_seen = 0
        for B, C in problems:
            anchors = list(iter_embeddings(B, M))
            for anchor in anchors:
                pass_seen += 1
                if find_embedding(C, M, partial=anchor) is not None:
                    pass_realized += 1
                    continue
                grown = resolve_extension(M, ExtensionProblem(B, C, anchor), coloring)
                if grown.size() > domain_cap:
                    return GenericResult(structure=M, complete=False, passes=passes,
                                         problems_seen=pass_seen, realized=pass_realized)
                M = grown
                changed = True
                pass_realized += 1
        problems_seen = pass_seen
        realized = pass_realized
        if not changed:
            return GenericResult(structure=M, complete=True, passes=passes,
                                 problems_seen=problems_seen, realized=realized)

"""JSON file formats for structures, colorings, type instances, patterns,
and machine reports.

All writers emit canonical JSON (sorted keys, two-space indent, trailing
newline) so identical values serialize to identical bytes.  All readers
reject unknown keys.
"""

from __future__ import annotations

import json

from .colorings import Coloring
from .errors import FormatError
from .patterns import Pattern, PatternRow
from .qftypes import Literal, TypeInstance
from .structures import OBJ, FinStructure, Signature, make_structure

_LITERAL_ARITY = {"p_self": 1, "p_eq": 2, "fp_eq": 3, "fpfp": 3, "f_eq": 2}
_LITERAL_LEVELS = {"p_self": 1, "p_eq": 1, "fp_eq": 2, "fpfp": 3, "f_eq": 1}


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def read_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def _expect_keys(obj, required, optional=(), what="object"):
    if not isinstance(obj, dict):
        raise FormatError(f"{what} must be a JSON object")
    keys = set(obj)
    missing = set(required) - keys
    if missing:
        raise FormatError(f"{what} is missing keys: {sorted(missing)}")
    unknown = keys - set(required) - set(optional)
    if unknown:
        raise FormatError(f"{what} has unknown keys: {sorted(unknown)}")


def _sort_to_text(s):
    if s == OBJ:
        return "O"
    if s is None:
        return "none"
    return f"P{s}"


def _sort_from_text(text):
    if text == "O":
        return OBJ
    if text == "none":
        return None
    if isinstance(text, str) and text.startswith("P") and text[1:].isdigit():
        return int(text[1:])
    raise FormatError(f"bad sort value {text!r}")


def _symbol_to_text(symbol):
    if symbol[0] == "p":
        return f"p_{symbol[1]}"
    return f"f_{symbol[1]}_{symbol[2]}"


def _symbol_from_text(text):
    parts = text.split("_")
    if parts[0] == "p" and len(parts) == 2 and parts[1].isdigit():
        return ("p", int(parts[1]))
    if parts[0] == "f" and len(parts) == 3 and parts[1].isdigit() and parts[2].isdigit():
        return ("f", int(parts[1]), int(parts[2]))
    raise FormatError(f"bad function symbol key {text!r}")


def structure_to_obj(M: FinStructure) -> dict:
    funs = {}
    for symbol in sorted(M.funs):
        table = M.funs[symbol]
        funs[_symbol_to_text(symbol)] = {str(x): table[x] for x in sorted(table)}
    return {
        "variant": M.signature.variant,
        "levels": list(M.signature.levels),
        "domain": sorted(M.domain),
        "sort": {str(x): _sort_to_text(M.sort[x]) for x in sorted(M.domain)},
        "funs": funs,
    }


def structure_from_obj(obj, what="structure") -> FinStructure:
    _expect_keys(obj, ("variant", "levels", "domain", "sort", "funs"), what=what)
    if obj["variant"] not in ("tree", "plain"):
        raise FormatError(f"{what}: variant must be 'tree' or 'plain'")
    if not isinstance(obj["levels"], list) or not all(isinstance(x, int) for x in obj["levels"]):
        raise FormatError(f"{what}: levels must be an array of integers")
    signature = Signature(levels=tuple(sorted(set(obj["levels"]))), variant=obj["variant"])
    if sorted(set(obj["levels"])) != sorted(obj["levels"]):
        raise FormatError(f"{what}: duplicate levels")
    domain = obj["domain"]
    if not isinstance(domain, list) or not all(isinstance(x, int) for x in domain):
        raise FormatError(f"{what}: domain must be an array of integers")
    if len(set(domain)) != len(domain):
        raise FormatError(f"{what}: duplicate domain elements")
    sort_obj = obj["sort"]
    if not isinstance(sort_obj, dict):
        raise FormatError(f"{what}: sort must be an object")
    sort = {}
    for key, value in sort_obj.items():
        try:
            elem = int(key)
        except ValueError:
            raise FormatError(f"{what}: sort key {key!r} is not an element id") from None
        sort[elem] = _sort_from_text(value)
    if set(sort) != set(domain):
        raise FormatError(f"{what}: sort map must cover exactly the domain")
    funs = {}
    if not isinstance(obj["funs"], dict):
        raise FormatError(f"{what}: funs must be an object")
    for sym_text, table_obj in obj["funs"].items():
        symbol = _symbol_from_text(sym_text)
        if not isinstance(table_obj, dict):
            raise FormatError(f"{what}: table for {sym_text} must be an object")
        table = {}
        for key, value in table_obj.items():
            try:
                x = int(key)
            except ValueError:
                raise FormatError(f"{what}: table key {key!r} is not an element id") from None
            if not isinstance(value, int):
                raise FormatError(f"{what}: table value {value!r} is not an element id")
            table[x] = value
        if symbol[0] == "f" and symbol[1] == symbol[2]:
            bad = {x: y for x, y in table.items() if x != y}
            if bad:
                raise FormatError(
                    f"{what}: {sym_text} must be the identity; non-identity entries {bad}"
                )
            continue
        if symbol[0] == "f" and symbol[1] > symbol[2]:
            raise FormatError(f"{what}: projection key {sym_text} must have increasing levels")
        lv = set(signature.levels)
        used = {symbol[1]} if symbol[0] == "p" else {symbol[1], symbol[2]}
        if not used <= lv:
            raise FormatError(f"{what}: symbol {sym_text} uses levels outside the signature")
        if table:
            funs[symbol] = table
    return make_structure(signature, sort, funs)


def coloring_to_obj(c: Coloring) -> dict:
    return {
        "n": c.n,
        "theta": c.theta,
        "pairs": [[i, j, c.pairs[(i, j)]] for i, j in sorted(c.pairs)],
        "default": c.default,
    }


def coloring_from_obj(obj, what="coloring") -> Coloring:
    _expect_keys(obj, ("n", "theta", "pairs"), optional=("default",), what=what)
    if not isinstance(obj["n"], int) or not isinstance(obj["theta"], int):
        raise FormatError(f"{what}: n and theta must be integers")
    pairs = {}
    if not isinstance(obj["pairs"], list):
        raise FormatError(f"{what}: pairs must be an array")
    for row in obj["pairs"]:
        if not (isinstance(row, list) and len(row) == 3 and all(isinstance(v, int) for v in row)):
            raise FormatError(f"{what}: each pair entry must be [i, j, color]")
        i, j, col = row
        if i == j:
            raise FormatError(f"{what}: no diagonal entries allowed")
        key = (i, j) if i < j else (j, i)
        if key in pairs and pairs[key] != col:
            raise FormatError(f"{what}: conflicting colors for pair {key}")
        pairs[key] = col
    default = obj.get("default", 0)
    try:
        return Coloring(n=obj["n"], theta=obj["theta"], pairs=pairs, default=default)
    except ValueError as exc:
        raise FormatError(f"{what}: {exc}") from exc


def _kind_to_text(kind):
    return "O" if kind == OBJ else kind


def _kind_from_text(value):
    if value == "O":
        return OBJ
    if isinstance(value, int):
        return value
    raise FormatError(f"bad kind {value!r}")


def literal_to_obj(lit: Literal) -> dict:
    indices = list(lit.levels)
    if lit.param is not None:
        indices.append(lit.param)
    return {"shape": lit.shape, "indices": indices, "sign": lit.sign}


def literal_from_obj(obj, what="literal") -> Literal:
    _expect_keys(obj, ("shape", "indices", "sign"), what=what)
    shape = obj["shape"]
    if shape not in _LITERAL_ARITY:
        raise FormatError(f"{what}: unknown shape {shape!r}")
    indices = obj["indices"]
    if not (isinstance(indices, list) and all(isinstance(v, int) for v in indices)):
        raise FormatError(f"{what}: indices must be an array of integers")
    if len(indices) != _LITERAL_ARITY[shape]:
        raise FormatError(f"{what}: {shape} takes {_LITERAL_ARITY[shape]} indices")
    if not isinstance(obj["sign"], bool):
        raise FormatError(f"{what}: sign must be a boolean")
    n_levels = _LITERAL_LEVELS[shape]
    levels = tuple(indices[:n_levels])
    param = indices[n_levels] if len(indices) > n_levels else None
    try:
        return Literal(shape=shape, levels=levels, param=param, sign=obj["sign"])
    except ValueError as exc:
        raise FormatError(f"{what}: {exc}") from exc


def instance_to_obj(inst: TypeInstance) -> dict:
    return {
        "kind": _kind_to_text(inst.kind),
        "level_set": list(inst.levels),
        "params": structure_to_obj(inst.params),
        "tuple": list(inst.param_tuple),
        "literals": [literal_to_obj(l) for l in inst.literals],
    }


def instance_from_obj(obj, what="type instance") -> TypeInstance:
    _expect_keys(obj, ("kind", "level_set", "params", "tuple", "literals"), what=what)
    kind = _kind_from_text(obj["kind"])
    if not (isinstance(obj["level_set"], list) and all(isinstance(v, int) for v in obj["level_set"])):
        raise FormatError(f"{what}: level_set must be an array of integers")
    params = structure_from_obj(obj["params"], what=f"{what} params")
    if not (isinstance(obj["tuple"], list) and all(isinstance(v, int) for v in obj["tuple"])):
        raise FormatError(f"{what}: tuple must be an array of element ids")
    literals = tuple(literal_from_obj(l, what=f"{what} literal") for l in obj["literals"])
    try:
        return TypeInstance(
            kind=kind,
            levels=tuple(sorted(set(obj["level_set"]))),
            params=params,
            param_tuple=tuple(obj["tuple"]),
            literals=literals,
        )
    except ValueError as exc:
        raise FormatError(f"{what}: {exc}") from exc


def _address_to_text(kind, addr):
    if kind == "inp":
        return f"{addr[0]},{addr[1]}"
    return ".".join(str(x) for x in addr)


def _address_from_text(kind, text):
    try:
        if kind == "inp":
            a, i = text.split(",")
            return (int(a), int(i))
        return tuple(int(x) for x in text.split("."))
    except ValueError:
        raise FormatError(f"bad pattern address {text!r}") from None


def row_to_obj(row: PatternRow) -> dict:
    obj = {
        "shape": row.shape,
        "levels": list(row.levels),
        "level_set": list(row.level_set),
        "bound": row.bound,
    }
    if row.template is not None:
        kind, levels, literals = row.template
        obj["template"] = {
            "kind": _kind_to_text(kind),
            "level_set": list(levels),
            "literals": [literal_to_obj(l) for l in literals],
        }
    return obj


def row_from_obj(obj, what="pattern row") -> PatternRow:
    _expect_keys(obj, ("shape", "levels", "level_set", "bound"), optional=("template",), what=what)
    template = None
    if "template" in obj:
        tpl = obj["template"]
        _expect_keys(tpl, ("kind", "level_set", "literals"), what=f"{what} template")
        template = (
            _kind_from_text(tpl["kind"]),
            tuple(tpl["level_set"]),
            tuple(literal_from_obj(l) for l in tpl["literals"]),
        )
    try:
        return PatternRow(
            shape=obj["shape"],
            levels=tuple(obj["levels"]),
            level_set=tuple(obj["level_set"]),
            bound=obj["bound"],
            template=template,
        )
    except Exception as exc:
        raise FormatError(f"{what}: {exc}") from exc


def pattern_to_obj(pattern: Pattern, structure: FinStructure | None = None) -> dict:
    obj = {
        "kind": pattern.kind,
        "height": pattern.height,
        "branching": pattern.branching,
        "rows": [row_to_obj(r) for r in pattern.rows],
        "params": {
            _address_to_text(pattern.kind, addr): list(tup)
            for addr, tup in sorted(pattern.params.items())
        },
    }
    if structure is not None:
        obj["structure"] = structure_to_obj(structure)
    return obj


def pattern_from_obj(obj, what="pattern"):
    """Returns (Pattern, FinStructure | None, structure_file | None)."""
    _expect_keys(obj, ("kind", "height", "branching", "rows", "params"),
                 optional=("structure",), what=what)
    kind = obj["kind"]
    if kind not in ("cdt", "inp", "sct"):
        raise FormatError(f"{what}: unknown kind {kind!r}")
    rows = tuple(row_from_obj(r, what=f"{what} row") for r in obj["rows"])
    params = {}
    if not isinstance(obj["params"], dict):
        raise FormatError(f"{what}: params must be an object")
    for text, tup in obj["params"].items():
        if not (isinstance(tup, list) and all(isinstance(v, int) for v in tup)):
            raise FormatError(f"{what}: parameter tuples must be arrays of element ids")
        params[_address_from_text(kind, text)] = tuple(tup)
    structure = None
    structure_file = None
    if "structure" in obj:
        inner = obj["structure"]
        if isinstance(inner, dict) and set(inner) == {"file"}:
            structure_file = inner["file"]
        else:
            structure = structure_from_obj(inner, what=f"{what} structure")
    try:
        pattern = Pattern(kind=kind, height=obj["height"], branching=obj["branching"],
                          rows=rows, params=params)
    except Exception as exc:
        raise FormatError(f"{what}: {exc}") from exc
    return pattern, structure, structure_file


def sets_from_obj(obj, what="set family"):
    if not isinstance(obj, list):
        raise FormatError(f"{what}: must be a JSON array of arrays")
    out = []
    for row in obj:
        if not (isinstance(row, list) and all(isinstance(v, int) for v in row)):
            raise FormatError(f"{what}: each member must be an array of integers")
        out.append(set(row))
    return out

"""treebench: a desk-scale workbench for leveled parameter-tree structures.

Finite structures over two signature variants, the universal-axiom
checker, explicit amalgam constructions, a budgeted generic-model
builder, a bounded quantifier-free consistency oracle, formula-pattern
construction and verification, sunflower extraction, and pair-coloring
combinatorics, all behind a deterministic CLI.
"""

__version__ = "0.1.0"

from .colorings import Coloring, check_pr1_finite, find_homogeneous, generate, restrict_colors
from .structures import (
    OBJ,
    PLAIN,
    TREE,
    AxiomReport,
    FinStructure,
    Signature,
    check_axioms,
    find_embedding,
    generated_substructure,
)
from .amalgam import extend_reduct, free_amalgam, two_type_amalgam
from .generic import ExtensionProblem, build_generic, resolve_extension
from .qftypes import Literal, TypeInstance, classify_type, is_consistent
from .patterns import (
    DeltaSystem,
    Pattern,
    PatternRow,
    build_canonical_tree_model,
    build_plain_inp_model,
    check_linked_family,
    extract_homogeneous_from_inp,
    find_delta_system,
    plant_tree_inp_params,
    verify_pattern,
)

__all__ = [
    "OBJ", "PLAIN", "TREE", "__version__",
    "AxiomReport", "Coloring", "DeltaSystem", "ExtensionProblem", "FinStructure",
    "Literal", "Pattern", "PatternRow", "Signature", "TypeInstance",
    "build_canonical_tree_model", "build_generic", "build_plain_inp_model",
    "check_axioms", "check_linked_family", "check_pr1_finite", "classify_type",
    "extend_reduct", "extract_homogeneous_from_inp", "find_delta_system",
    "find_embedding", "find_homogeneous", "free_amalgam", "generate",
    "generated_substructure", "is_consistent", "plant_tree_inp_params",
    "resolve_extension", "restrict_colors", "two_type_amalgam", "verify_pattern",
]

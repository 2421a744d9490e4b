"""Grounded semantics over finite and lazily presented argumentation frameworks."""

from .constructions import (
    af_from_finite_tree,
    af_from_tree,
    baumann_spanring,
    disjoint_union,
    disjoint_union_with_embedding,
    materialize_spec,
    ordinal_target_af,
    parse_generator_spec,
)
from .core import (
    AttackerFamily,
    AttackerSpec,
    FiniteAF,
    IndexMap,
    LazyAF,
    format_apx,
    format_dot,
    materialize,
    pair,
    parse_apx,
    spot_check_attacker_spec,
    unpair,
)
from .grounded import (
    GroundedResult,
    StageFamily,
    SymbolicStageMap,
    VerificationReport,
    grounded_finite,
    grounding_ordinal_of,
    omega_approximation,
    stages_finite,
    verify_symbolic_stages,
)
from .ordinals import (
    NEVER,
    OMEGA,
    ONE,
    ZERO,
    AffineOrdinalExpr,
    Ordinal,
    compare,
    format_ordinal,
    fundamental_sequence,
    is_limit,
    omega_power,
    parse_ordinal,
    sup,
)
from .rank_analysis import (
    build_Ta,
    build_TS,
    largest_self_defending,
    rank_stage_bridge_check,
    ta_rank,
    ts_path_exists,
    witness_path,
)
from .trees import (
    FiniteTree,
    LazyTree,
    bounded_path_search,
    build_tree_of_rank,
    check_declared_ranks,
    rank_finite,
    tree_from_json,
    tree_to_json,
    truncate_tree,
)

__all__ = [
    "AffineOrdinalExpr", "AttackerFamily", "AttackerSpec", "FiniteAF",
    "FiniteTree", "GroundedResult", "IndexMap", "LazyAF", "LazyTree",
    "NEVER", "OMEGA", "ONE", "Ordinal", "StageFamily", "SymbolicStageMap",
    "VerificationReport", "ZERO",
    "af_from_finite_tree", "af_from_tree", "baumann_spanring",
    "bounded_path_search", "build_Ta", "build_TS", "build_tree_of_rank",
    "check_declared_ranks", "compare", "disjoint_union",
    "disjoint_union_with_embedding", "format_apx", "format_dot",
    "format_ordinal", "fundamental_sequence", "grounded_finite",
    "grounding_ordinal_of", "is_limit", "largest_self_defending",
    "materialize", "materialize_spec", "omega_approximation", "omega_power",
    "ordinal_target_af", "pair", "parse_apx", "parse_generator_spec",
    "parse_ordinal", "rank_finite", "rank_stage_bridge_check",
    "spot_check_attacker_spec", "stages_finite", "sup", "ta_rank",
    "tree_from_json", "tree_to_json", "truncate_tree", "ts_path_exists",
    "unpair", "verify_symbolic_stages", "witness_path",
]

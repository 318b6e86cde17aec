"""Distance-preserving and distance-increasing maps from ternary words to permutations."""
from .compose import compose, compose_p91, compose_p130, compose_u, compose_v
from .core import IndexSet, Permutation, TernaryWord, hamming_distance, project_out, swap_values
from .mapping import Mapping
from .pa import A3Table, PermutationArray, TernaryCode, bound, build_code, build_pa
from .recursion import certify_base, extend_once, extend_to
from .registry import resolve_mapping
from .search import SearchProblem, search
from .tables import (ConstraintSet, MappingTable, builtin_constraints, builtin_table,
                     check_constraints, load_table)
from .verify import Exhaustive, Sampled, Stratified, VerificationJob, verify, verify_pa

__version__ = "0.1.0"

__all__ = [
    "A3Table", "ConstraintSet", "Exhaustive", "IndexSet", "Mapping", "MappingTable", "Permutation",
    "PermutationArray", "Sampled", "SearchProblem", "Stratified", "TernaryCode", "TernaryWord",
    "VerificationJob", "bound", "build_code", "build_pa", "builtin_constraints", "builtin_table",
    "certify_base", "check_constraints", "compose", "compose_p91", "compose_p130", "compose_u",
    "compose_v", "extend_once", "extend_to", "hamming_distance", "load_table", "project_out",
    "resolve_mapping", "search", "swap_values", "verify", "verify_pa",
]

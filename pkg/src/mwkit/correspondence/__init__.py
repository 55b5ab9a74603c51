"""Sampled C*-correspondences over C(K) and conjugacy certificates."""

from .certificate import (ConjugacyCertificate, CoverSet, Isomorphism, PermutationField,
                          RefutationReport, VerificationReport, WMatrix, best_matching,
                          build_V, extract_conjugacy, isometry_residual, permutation_field,
                          refute_certificate, verify_isomorphism, w_matrix)
from .decide import (Decision, decide_iso_totally_disconnected, identity_refutation,
                     stable_under_refinement)
from .elements import AlgebraElement, CorrElement, SampleGrid
from .maps import AddressMap, AffinePointMap, identity_vertex_map
from .ops import inner_product, left_action, right_action, tensor

__all__ = [
    "AddressMap", "AffinePointMap", "AlgebraElement", "ConjugacyCertificate", "CorrElement",
    "CoverSet", "Decision", "Isomorphism", "PermutationField", "RefutationReport",
    "SampleGrid", "VerificationReport", "WMatrix", "best_matching", "build_V",
    "decide_iso_totally_disconnected", "extract_conjugacy", "identity_refutation",
    "identity_vertex_map", "inner_product", "isometry_residual", "left_action",
    "permutation_field", "refute_certificate", "right_action", "stable_under_refinement",
    "tensor", "verify_isomorphism", "w_matrix",
]

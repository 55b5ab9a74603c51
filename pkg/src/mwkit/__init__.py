"""Computational toolkit for Mauldin-Williams graph systems."""

from .attractor import InvariantList, chaos_game, hutchinson_step, solve_invariant_list
from .geometry import Box, TaggedBoxSet, TaggedPointCloud, hausdorff_distance, min_separation
from .graph_core import DirectedGraph, Edge, path_metric, paths_of_length, validate_graph
from .mw_graph import (AffineContraction, AffineMap, MWGraph, apply_edge, fixed_point,
                       global_ratio, validate_mw)
from .structure import (Bump, DisconnectednessReport, Verdict, aperiodicity_witness,
                        classify_disconnected, find_unfixed_point)
from .symbolic import address_of, coding_map, cylinder, intertwine_residual

__version__ = "0.1.0"

__all__ = [
    "AffineContraction", "AffineMap", "Box", "Bump", "DirectedGraph", "DisconnectednessReport",
    "Edge", "InvariantList", "MWGraph", "TaggedBoxSet", "TaggedPointCloud", "Verdict",
    "address_of", "aperiodicity_witness", "apply_edge", "chaos_game", "classify_disconnected",
    "coding_map", "cylinder", "find_unfixed_point", "fixed_point", "global_ratio",
    "hausdorff_distance", "hutchinson_step", "intertwine_residual", "min_separation",
    "path_metric", "paths_of_length", "solve_invariant_list", "validate_graph", "validate_mw",
]

"""Randomized (2k-1)-spanners for edge streams: a single-pass builder with
amortized constant work per edge and a StreamSort builder with constant-record
working state, plus exact-distance verification."""

from .core import Edge, SamplingHierarchy, build_sampling_hierarchy, is_sampled_cluster
from .incremental import (
    SpannerState,
    WeightOrderError,
    build_from_sorted_weighted_stream,
    new_state,
    run_single_pass,
    run_sorted_weighted,
)
from .graph_io import EdgeStream, gen_complete, gen_gnp, gen_grid, read_edge_stream, sort_by_weight
from . import streamsort

__all__ = [
    "Edge", "SamplingHierarchy", "build_sampling_hierarchy", "is_sampled_cluster",
    "SpannerState", "WeightOrderError", "build_from_sorted_weighted_stream", "new_state",
    "run_single_pass", "run_sorted_weighted", "EdgeStream", "gen_complete", "gen_gnp",
    "gen_grid", "read_edge_stream", "sort_by_weight", "streamsort",
]

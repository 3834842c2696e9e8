"""Divergence detection between provenance traces of workflow runs."""

from .delta import DeltaGraph, DeltaKind, DeltaNode, SyncRegistry, add_delta, is_delta_stop, merge_deltas
from .model import (
    ActivityNode,
    DataKind,
    DataNode,
    GenBy,
    ProvenanceTrace,
    TraceError,
    Used,
    Violation,
    content_hash,
    up_d,
    up_s,
    validate,
    workflow_inputs,
    workflow_outputs,
)
from .pdiff import ADiff, DiffStats, FindNodeResult, a_diff, diff_runs, find_node, mismatch_records, pdiff
from .traceio import export_delta_graphml, parse_trace, read_trace, serialize_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "ADiff",
    "ActivityNode",
    "DataKind",
    "DataNode",
    "DeltaGraph",
    "DeltaKind",
    "DeltaNode",
    "DiffStats",
    "FindNodeResult",
    "GenBy",
    "ProvenanceTrace",
    "SyncRegistry",
    "TraceError",
    "Used",
    "Violation",
    "a_diff",
    "add_delta",
    "content_hash",
    "diff_runs",
    "export_delta_graphml",
    "find_node",
    "is_delta_stop",
    "merge_deltas",
    "mismatch_records",
    "parse_trace",
    "pdiff",
    "read_trace",
    "serialize_trace",
    "up_d",
    "up_s",
    "validate",
    "workflow_inputs",
    "workflow_outputs",
    "write_trace",
]

"""Trace serialization and delta-graph export."""

from __future__ import annotations

import io
import json
from typing import TYPE_CHECKING

import networkx as nx

from .model import ActivityNode, DataKind, DataNode, GenBy, ProvenanceTrace, Used, validate

if TYPE_CHECKING:
    from .delta import DeltaGraph

FORMAT = "provdelta-trace/1"


class TraceSyntaxError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class TraceSemanticError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid trace: " + "; ".join(str(v) for v in self.violations))


def _require(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise TraceSyntaxError(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise TraceSyntaxError(f"{where}: field {key!r} has wrong type")
    return value


def _optional_str(obj: dict, key: str, where: str):
    value = obj.get(key)
    if value is not None and not isinstance(value, str):
        raise TraceSyntaxError(f"{where}: field {key!r} must be a string")
    return value


def load_document(text: str | bytes) -> ProvenanceTrace:
    """Build a trace from the JSON document without validating it."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise TraceSyntaxError(f"not UTF-8: {exc.reason} at byte {exc.start}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TraceSyntaxError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict):
        raise TraceSyntaxError("top level must be an object")
    fmt = _require(doc, "format", str, "document")
    if fmt != FORMAT:
        raise TraceSyntaxError(f"unsupported format {fmt!r}")
    run_id = _require(doc, "runId", str, "document")
    nodes = _require(doc, "nodes", list, "document")
    edges = _require(doc, "edges", list, "document")

    data_nodes, activities = [], []
    for i, rec in enumerate(nodes):
        where = f"nodes[{i}]"
        if not isinstance(rec, dict):
            raise TraceSyntaxError(f"{where}: expected object")
        node_id = _require(rec, "id", str, where)
        node_type = _require(rec, "type", str, where)
        if node_type == "data":
            kind = _require(rec, "kind", str, where)
            try:
                kind = DataKind(kind)
            except ValueError:
                raise TraceSyntaxError(f"{where}: unknown data kind {kind!r}") from None
            data_nodes.append(
                DataNode(
                    id=node_id,
                    kind=kind,
                    hash=_require(rec, "hash", str, where),
                    mime_type=_optional_str(rec, "mimeType", where),
                    content_ref=_optional_str(rec, "contentRef", where),
                )
            )
        elif node_type == "activity":
            in_ports = _require(rec, "inPorts", list, where)
            out_ports = _require(rec, "outPorts", list, where)
            if not all(isinstance(p, str) for p in in_ports + out_ports):
                raise TraceSyntaxError(f"{where}: port names must be strings")
            activities.append(
                ActivityNode(
                    id=node_id,
                    service_id=_require(rec, "serviceId", str, where),
                    service_version=_require(rec, "serviceVersion", str, where),
                    in_ports=tuple(in_ports),
                    out_ports=tuple(out_ports),
                )
            )
        else:
            raise TraceSyntaxError(f"{where}: unknown node type {node_type!r}")

    used, gen_by = [], []
    for i, rec in enumerate(edges):
        where = f"edges[{i}]"
        if not isinstance(rec, dict):
            raise TraceSyntaxError(f"{where}: expected object")
        rel = _require(rec, "rel", str, where)
        activity = _require(rec, "activity", str, where)
        data = _require(rec, "data", str, where)
        port = _require(rec, "port", str, where)
        if rel == "used":
            used.append(Used(activity, port, data))
        elif rel == "genBy":
            gen_by.append(GenBy(data, activity, port))
        else:
            raise TraceSyntaxError(f"{where}: unknown relation {rel!r}")

    return ProvenanceTrace(
        run_id=run_id,
        data_nodes=tuple(data_nodes),
        activity_nodes=tuple(activities),
        used=frozenset(used),
        gen_by=frozenset(gen_by),
    )


def parse_trace(text: str | bytes) -> ProvenanceTrace:
    """Parse and validate a trace document.

    Raises:
        TraceSyntaxError: malformed JSON or schema mismatch (position-annotated
            where the JSON decoder reports one).
        TraceSemanticError: the document parses but violates trace invariants.
    """
    trace = load_document(text)
    violations = validate(trace)
    if violations:
        raise TraceSemanticError(violations)
    return trace


def trace_to_document(trace: ProvenanceTrace) -> dict:
    nodes = []
    for n in trace.data_nodes:
        rec = {"id": n.id, "type": "data", "kind": n.kind.value, "hash": n.hash}
        if n.mime_type is not None:
            rec["mimeType"] = n.mime_type
        if n.content_ref is not None:
            rec["contentRef"] = n.content_ref
        nodes.append(rec)
    for a in trace.activity_nodes:
        nodes.append(
            {
                "id": a.id,
                "type": "activity",
                "serviceId": a.service_id,
                "serviceVersion": a.service_version,
                "inPorts": list(a.in_ports),
                "outPorts": list(a.out_ports),
            }
        )
    nodes.sort(key=lambda r: r["id"])
    edges = [{"rel": "used", "activity": u.activity, "data": u.data, "port": u.port} for u in trace.used]
    edges += [
        {"rel": "genBy", "activity": g.activity, "data": g.data, "port": g.port} for g in trace.gen_by
    ]
    edges.sort(key=lambda e: (e["activity"], e["rel"], e["port"], e["data"]))
    return {"format": FORMAT, "runId": trace.run_id, "nodes": nodes, "edges": edges}


def serialize_trace(trace: ProvenanceTrace) -> bytes:
    """Canonical UTF-8 encoding: equal traces give byte-identical output."""
    text = json.dumps(trace_to_document(trace), indent=2, sort_keys=True, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def read_trace(path) -> ProvenanceTrace:
    with open(path, "rb") as fh:
        return parse_trace(fh.read())


def write_trace(trace: ProvenanceTrace, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_trace(trace))


# -- GraphML -------------------------------------------------------------

GRAPHML_KEYS = ("kind", "left", "right", "leftFragment", "rightFragment", "syncService")


def delta_to_networkx(delta: DeltaGraph) -> nx.DiGraph:
    g = nx.DiGraph()
    for node in delta.nodes:
        attrs = {"kind": node.kind.value, "left": node.left_label, "right": node.right_label}
        if node.left_fragment is not None:
            attrs["leftFragment"] = " ".join(node.left_fragment)
            attrs["rightFragment"] = " ".join(node.right_fragment or ())
        if node.sync_service is not None:
            attrs["syncService"] = node.sync_service
        g.add_node(f"n{node.index}", **attrs)
    for parent, child in delta.edges:
        g.add_edge(f"n{parent}", f"n{child}")
    return g


def export_delta_graphml(delta: DeltaGraph) -> bytes:
    """GraphML 1.0 document with one node per delta node."""
    buf = io.BytesIO()
    nx.write_graphml(delta_to_networkx(delta), buf, encoding="utf-8", prettyprint=True)
    return buf.getvalue()

import json

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from provdelta.pdiff import diff_runs
from provdelta.traceio import (
    GRAPHML_KEYS,
    TraceSemanticError,
    TraceSyntaxError,
    export_delta_graphml,
    parse_trace,
    serialize_trace,
)

from conftest import data_path, simulated_context

FIXTURES = ["input_change_a.json", "input_change_b.json", "evolved_a.json", "evolved_b.json", "unrelated_a.json", "unrelated_b.json"]


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_bytes_round_trip(name):
    raw = data_path(name).read_bytes()
    trace = parse_trace(raw)
    assert serialize_trace(trace) == raw
    assert parse_trace(serialize_trace(trace)) == trace


def test_serialization_ignores_input_order(evolved):
    left, _ = evolved
    doc = json.loads(serialize_trace(left))
    doc["nodes"].reverse()
    doc["edges"].reverse()
    assert serialize_trace(parse_trace(json.dumps(doc))) == serialize_trace(left)


def test_syntax_error_reports_position():
    with pytest.raises(TraceSyntaxError) as err:
        parse_trace('{\n  "format": "provdelta-trace/1",\n  "runId": oops\n}')
    assert err.value.line == 3


@pytest.mark.parametrize(
    "doc, fragment",
    [
        ([], "top level"),
        ({"format": "other/1", "runId": "r", "nodes": [], "edges": []}, "unsupported format"),
        ({"format": "provdelta-trace/1", "nodes": [], "edges": []}, "runId"),
        ({"format": "provdelta-trace/1", "runId": "r", "nodes": [{"id": "x", "type": "blob"}], "edges": []}, "node type"),
        ({"format": "provdelta-trace/1", "runId": "r", "nodes": [], "edges": [{"rel": "wasDerivedFrom", "activity": "a", "data": "d", "port": "p"}]}, "relation"),
    ],
)
def test_schema_errors(doc, fragment):
    with pytest.raises(TraceSyntaxError, match=fragment):
        parse_trace(json.dumps(doc))


def test_semantic_error_lists_violations(input_change):
    doc = json.loads(serialize_trace(input_change[0]))
    doc["edges"] = [e for e in doc["edges"] if not (e["rel"] == "used" and e["activity"] == "S4")]
    with pytest.raises(TraceSemanticError) as err:
        parse_trace(json.dumps(doc))
    assert any(v.invariant == "input-port-binding" for v in err.value.violations)


def test_graphml_export_carries_delta(evolved):
    delta = diff_runs(*evolved).delta
    g = nx.read_graphml(__import__("io").BytesIO(export_delta_graphml(delta)))
    assert g.number_of_nodes() == len(delta) and g.number_of_edges() == len(delta.edges)
    kinds = nx.get_node_attributes(g, "kind")
    assert sorted(kinds.values()).count("fragmentPair") == 2
    assert set().union(*(g.nodes[n].keys() for n in g)) <= set(GRAPHML_KEYS)
    syncs = {g.nodes[n].get("syncService") for n in g if kinds[n] == "fragmentPair"}
    assert syncs == {"S0"}


def test_graphml_is_deterministic(evolved):
    assert export_delta_graphml(diff_runs(*evolved).delta) == export_delta_graphml(diff_runs(*evolved).delta)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_simulated_round_trip(seed):
    _, ctx = simulated_context(seed)
    trace = ctx.run().trace
    raw = serialize_trace(trace)
    assert parse_trace(raw) == trace
    assert serialize_trace(parse_trace(raw)) == raw

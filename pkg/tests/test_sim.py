import json

import pytest
from hypothesis import given, settings, strategies as st

from provdelta.model import validate
from provdelta.pdiff import diff_runs
from provdelta.sim import (
    Element,
    EvolutionOp,
    ExecutionContext,
    OracleLimitError,
    ScenarioClass,
    SpecError,
    TaskBehavior,
    apply_evolution,
    brute_force_delta,
    bump_engine,
    bump_version,
    change_input,
    classify_changes,
    classify_scenario,
    delete_service,
    insert_service,
    load_scenario,
    mutate_external_state,
    random_op,
    replace_service,
    scenario_from_dict,
    scenario_to_dict,
    workflow_from_dict,
    workflow_to_dict,
)

from conftest import data_path, simulated_context


def five_step_scenario():
    return load_scenario(data_path("input_change_scenario.json"))


def test_five_step_execution_shape():
    run = five_step_scenario().base.run()
    t = run.trace
    assert len(t.activity_nodes) == 5
    assert {d.id for d in t.workflow_inputs()} == {"in:d1", "in:d2", "in:d3"}
    assert [d.id for d in t.workflow_outputs()] == ["d:S4.o0"]
    assert validate(t) == []
    for d in t.data_nodes:
        assert d.persisted == (d.content_ref is not None)
        if d.persisted:
            assert d.content_ref in run.contents


def test_pass_through_task_propagates_input():
    w = workflow_from_dict(
        {"tasks": [{"id": "T", "serviceId": "copy", "inPorts": ["p0"], "outPorts": ["o0"]}], "inputs": {"x": "T.p0"}}
    )
    t = ExecutionContext.initial(w).run().trace
    assert len(t.activity_nodes) == 1
    assert [u.data for u in t.used] == ["in:x"]


def test_repeat_execution_identical():
    ctx = five_step_scenario().base
    assert ctx.run("r").trace == ctx.run("r").trace


def test_input_change_scenario_against_shipped_expectation():
    s = five_step_scenario()
    a, b = s.run()
    expected = json.loads(data_path("input_change_expected.json").read_text())
    assert expected["scenario"] == s.classify().value == "dataEvolution"
    assert sorted([l, r] for l, r in brute_force_delta(a.trace, b.trace)) == expected["mismatches"]
    # the d1 branch stays clean
    assert not any("S0" in l or "d1" in l for l, _ in expected["mismatches"])


def test_apply_evolution_moves_one_index():
    ctx = five_step_scenario().base
    ops = [bump_version("S2"), change_input("d2", "z\n"), replace_service("S1", "S5"), bump_engine()]
    for op in ops:
        nxt = apply_evolution(ctx, op)
        moved = [e for e in Element if nxt.indices[e] != ctx.indices[e]]
        assert moved == [op.element()]
        assert nxt.indices[op.element()] == ctx.time and nxt.time == ctx.time + 1
        assert all(v < nxt.time for v in nxt.indices.values())
        ctx = nxt


def test_bump_version_on_s2():
    ctx = apply_evolution(five_step_scenario().base, bump_version("S2"))
    s2 = ctx.run().trace.activity("a:S2")
    assert (s2.service_id, s2.service_version) == ("S2", "2")


def test_insert_service_before_s3():
    ctx = apply_evolution(five_step_scenario().base, insert_service("S2.o0->S3.p0", "S3p", "S3'"))
    t = ctx.run().trace
    assert t.up_d(t.up_s("a:S3", "p0")).service_id == "S3'"
    assert validate(t) == []


def test_delete_service_rewires():
    ctx = apply_evolution(five_step_scenario().base, delete_service("S1"))
    t = ctx.run().trace
    assert t.up_s("a:S2", "p1").id == "in:d2"


@pytest.mark.parametrize(
    "op",
    [
        replace_service("nope", "X"),
        insert_service("S0.o0->S3.p0", "N", "X"),
        insert_service("S2.o0->S3.p0", "S1", "X"),
        delete_service("S2"),
        delete_service("S4"),
        change_input("d9", "x"),
        mutate_external_state("missing"),
        EvolutionOp("bumpVersion", {}),
    ],
)
def test_invalid_ops(op):
    with pytest.raises(SpecError):
        apply_evolution(five_step_scenario().base, op)


def test_unknown_op_kind():
    with pytest.raises(SpecError):
        EvolutionOp("rename")


# independent table over every subset of the four elements
TABLE = {
    (): "repeat",
    ("W",): "methodEvolution",
    ("d",): "dataEvolution",
    ("W", "d"): "methodAndDataEvolution",
    ("ED",): "externalDecay",
    ("wfms",): "engineChange",
    ("W", "ED"): "externalDecay",
    ("ED", "d"): "externalDecay",
    ("ED", "wfms"): "externalDecay",
    ("W", "wfms"): "engineChange",
    ("d", "wfms"): "engineChange",
    ("W", "ED", "d"): "externalDecay",
    ("W", "ED", "wfms"): "externalDecay",
    ("ED", "d", "wfms"): "externalDecay",
    ("W", "d", "wfms"): "engineChange",
    ("W", "ED", "d", "wfms"): "externalDecay",
}


def test_classifier_sixteen_cases():
    assert len(TABLE) == 16
    for subset, label in TABLE.items():
        assert classify_changes(frozenset(Element(e) for e in subset)).value == label


def test_classify_contexts():
    base = five_step_scenario().base
    assert classify_scenario(base, base) is ScenarioClass.REPEAT
    data = apply_evolution(base, change_input("d2", "q\n"))
    assert classify_scenario(base, data) is ScenarioClass.DATA
    both = apply_evolution(apply_evolution(base, replace_service("S1", "S5")), bump_version("S2"))
    assert classify_scenario(base, both) is ScenarioClass.EXTERNAL_DECAY


def test_external_state_behaviour():
    w = workflow_from_dict(
        {
            "tasks": [{"id": "T", "serviceId": "db", "behavior": {"kind": "externalState", "stateKey": "k"}}],
            "inputs": {"x": "T.p0"},
        }
    )
    ctx = ExecutionContext.initial(w, external_state={"k": "v1"})
    after = apply_evolution(ctx, mutate_external_state("k"))
    assert after.external.state["k"] == "v1'"
    assert diff_runs(ctx.run().trace, after.run().trace).delta


def test_nondeterministic_depends_on_seed_only():
    w = workflow_from_dict(
        {"tasks": [{"id": "T", "serviceId": "mc", "behavior": {"kind": "nondeterministic"}}], "inputs": {"x": "T.p0"}}
    )
    a = ExecutionContext.initial(w, seed=1).run("r").trace
    assert a == ExecutionContext.initial(w, seed=1).run("r").trace
    assert a != ExecutionContext.initial(w, seed=2).run("r").trace


def test_behaviour_requires_state_key():
    with pytest.raises(SpecError):
        TaskBehavior("externalState")


@pytest.mark.parametrize(
    "doc",
    [
        {"tasks": [{"id": "T", "serviceId": "s"}]},
        {"tasks": [{"id": "T", "serviceId": "s"}], "inputs": {"x": "T.p0", "y": "T.p0"}},
        {
            "tasks": [{"id": "A", "serviceId": "a"}, {"id": "B", "serviceId": "b"}],
            "edges": [{"from": "A.o0", "to": "B.p0"}, {"from": "B.o0", "to": "A.p0"}],
        },
        {"tasks": [{"id": "T"}]},
    ],
)
def test_bad_workflows(doc):
    with pytest.raises(SpecError):
        workflow_from_dict(doc)


def test_scenario_round_trip():
    s = five_step_scenario()
    again = scenario_from_dict(json.loads(json.dumps(scenario_to_dict(s))))
    assert again.run()[0].trace == s.run()[0].trace
    assert again.ops == s.ops


def test_oracle_size_limit():
    big = ExecutionContext.initial(
        workflow_from_dict(
            {
                "tasks": [{"id": f"T{i}", "serviceId": f"s{i}"} for i in range(21)],
                "edges": [{"from": f"T{i}.o0", "to": f"T{i + 1}.p0"} for i in range(20)],
                "inputs": {"x": "T0.p0"},
            }
        )
    ).run().trace
    with pytest.raises(OracleLimitError):
        brute_force_delta(big, big)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000))
def test_repeat_gives_empty_delta(seed):
    _, ctx = simulated_context(seed, max_tasks=15)
    assert classify_scenario(ctx, ctx) is ScenarioClass.REPEAT
    assert not diff_runs(ctx.run().trace, ctx.run().trace).delta
    assert brute_force_delta(ctx.run().trace, ctx.run().trace) == set()


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000))
def test_random_ops_keep_specs_valid(seed):
    rng, ctx = simulated_context(seed, p_external=0.3)
    after = apply_evolution(ctx, random_op(rng, ctx))
    after.workflow.check()
    assert validate(after.run().trace) == []
    assert workflow_from_dict(workflow_to_dict(after.workflow)) == after.workflow

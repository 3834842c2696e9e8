"""Seeded random workflows and evolution ops for property testing."""

from __future__ import annotations

import random
from typing import Optional

from .evolution import (
    EvolutionOp,
    ExecutionContext,
    bump_version,
    change_input,
    delete_service,
    insert_service,
    mutate_external_state,
    replace_service,
)
from .workflow import BehaviorKind, Edge, Endpoint, TaskBehavior, TaskSpec, WorkflowSpec


def random_workflow(
    rng: random.Random,
    n_tasks: int,
    max_fan_in: int = 3,
    max_outputs: int = 2,
    p_new_input: float = 0.25,
    p_external: float = 0.0,
    name: str = "wf",
) -> tuple[WorkflowSpec, dict[str, str]]:
    """A random DAG of ``n_tasks`` tasks with distinct services.

    Returns the spec and the external state its externalState tasks read.
    Every unconsumed output port is bound as a workflow output.
    """
    if n_tasks < 1:
        raise ValueError("need at least one task")
    tasks, edges = [], []
    inputs: dict[str, list[Endpoint]] = {}
    state: dict[str, str] = {}
    available: list[Endpoint] = []
    for k in range(n_tasks):
        tid = f"T{k:02d}"
        fan_in = rng.randint(1, max_fan_in)
        n_out = rng.randint(1, max_outputs)
        in_ports = tuple(f"p{i}" for i in range(fan_in))
        out_ports = tuple(f"o{i}" for i in range(n_out))
        behavior = TaskBehavior()
        if rng.random() < p_external:
            key = f"state{k}"
            state[key] = f"v{rng.randint(0, 999)}"
            behavior = TaskBehavior(BehaviorKind.EXTERNAL, key)
        tasks.append(TaskSpec(tid, f"svc{k:02d}", "1", in_ports, out_ports, behavior))
        for p in in_ports:
            target = Endpoint(tid, p)
            if not available or rng.random() < p_new_input:
                iname = f"x{len(inputs)}" if not inputs or rng.random() < 0.7 else rng.choice(sorted(inputs))
                inputs.setdefault(iname, []).append(target)
            else:
                edges.append(Edge(rng.choice(available), target))
        available.extend(Endpoint(tid, o) for o in out_ports)
    consumed = {e.source for e in edges}
    outputs = {ep: f"out{i}" for i, ep in enumerate(ep for ep in available if ep not in consumed)}
    spec = WorkflowSpec(name, tuple(tasks), tuple(edges), {k: tuple(v) for k, v in inputs.items()}, outputs)
    spec.check()
    return spec, state


def random_op(rng: random.Random, ctx: ExecutionContext, allow: Optional[tuple[str, ...]] = None) -> EvolutionOp:
    """A random op valid for ``ctx``. Engine bumps are excluded by default
    since they leave traces unchanged."""
    w = ctx.workflow
    kinds = list(allow or ("replaceService", "insertService", "deleteService", "bumpVersion", "changeInput"))
    if ctx.external.state and allow is None:
        kinds.append("mutateExternalState")
    deletable = [
        t.id
        for t in w.tasks
        if len(t.in_ports) == 1 and not any(ep.task == t.id for ep in w.output_bindings)
    ]
    if not deletable and "deleteService" in kinds:
        kinds.remove("deleteService")
    kind = rng.choice(kinds)
    if kind == "replaceService":
        return replace_service(rng.choice(w.task_ids), f"svcR{rng.randint(0, 9999):04d}")
    if kind == "insertService":
        links = [f"{e.source}->{e.target}" for e in w.edges]
        links += [f"input:{name}->{t}" for name, ts in w.input_bindings.items() for t in ts]
        return insert_service(rng.choice(sorted(links)), f"N{rng.randint(0, 9999):04d}", f"svcN{rng.randint(0, 9999):04d}")
    if kind == "deleteService":
        return delete_service(rng.choice(deletable))
    if kind == "bumpVersion":
        return bump_version(rng.choice(w.task_ids))
    if kind == "changeInput":
        name = rng.choice(sorted(ctx.inputs))
        return change_input(name, f"name,value\n{name},{rng.randint(0, 10**9)}\n")
    if kind == "mutateExternalState":
        return mutate_external_state(rng.choice(sorted(ctx.external.state)))
    raise ValueError(f"cannot generate {kind}")

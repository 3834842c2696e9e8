"""Versioned execution contexts, evolution operations and scenario labels.

An :class:`ExecutionContext` is the 4-tuple (W, ED, d, wfms), each element
carrying the tick at which it last changed. Every evolution op advances
exactly one of those indices and the clock.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from types import MappingProxyType
from typing import Mapping, Optional

from .workflow import (
    Edge,
    Endpoint,
    Execution,
    SpecError,
    TaskSpec,
    WorkflowSpec,
    default_input_content,
    execute,
)


class Element(str, Enum):
    WORKFLOW = "W"
    EXTERNAL = "ED"
    DATA = "d"
    ENGINE = "wfms"


@dataclass(frozen=True)
class ExternalDeps:
    """ED: external state values plus the versions services currently run at."""

    state: Mapping[str, str] = field(default_factory=dict)
    service_versions: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "state", MappingProxyType(dict(self.state)))
        object.__setattr__(self, "service_versions", MappingProxyType(dict(self.service_versions)))


@dataclass(frozen=True)
class ExecutionContext:
    workflow: WorkflowSpec
    external: ExternalDeps = ExternalDeps()
    inputs: Mapping[str, bytes] = field(default_factory=dict)
    engine_version: str = "1"
    # version index of W, ED, d, wfms: the tick of their last change
    indices: Mapping[Element, int] = field(default_factory=lambda: {e: 0 for e in Element})
    time: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "inputs", MappingProxyType(dict(self.inputs)))
        object.__setattr__(self, "indices", MappingProxyType({Element(k): v for k, v in self.indices.items()}))
        if any(v >= self.time for v in self.indices.values()):
            raise ValueError("version indices must precede the current tick")

    @classmethod
    def initial(
        cls,
        workflow: WorkflowSpec,
        inputs: Optional[Mapping[str, bytes]] = None,
        external_state: Optional[Mapping[str, str]] = None,
        seed: int = 0,
    ) -> ExecutionContext:
        """Context at tick 1 with inputs defaulting to content derived from their names."""
        workflow.check()
        data = {name: default_input_content(name) for name in workflow.input_bindings}
        data.update(inputs or {})
        return cls(workflow, ExternalDeps(external_state or {}), data, seed=seed)

    def service_version(self, task: TaskSpec) -> str:
        return self.external.service_versions.get(task.service_id, task.version)

    def run(self, run_id: Optional[str] = None) -> Execution:
        return execute(
            self.workflow,
            self.inputs,
            self.external.state,
            self.external.service_versions,
            self.seed,
            run_id or f"{self.workflow.name}@t{self.time}",
        )


def execute_workflow(ctx: ExecutionContext, run_id: Optional[str] = None) -> Execution:
    return ctx.run(run_id)


def next_version(version: str) -> str:
    return str(int(version) + 1) if version.isdigit() else f"{version}.1"


# -- operations -----------------------------------------------------------


@dataclass(frozen=True)
class EvolutionOp:
    """One controlled change. ``kind`` selects the operation; ``args`` its parameters."""

    kind: str
    args: Mapping[str, str] = field(default_factory=dict)

    KINDS = (
        "replaceService",
        "insertService",
        "deleteService",
        "bumpVersion",
        "changeInput",
        "mutateExternalState",
        "bumpEngine",
    )

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise SpecError(f"unknown evolution op {self.kind!r}")
        object.__setattr__(self, "args", MappingProxyType(dict(self.args)))

    def to_dict(self) -> dict:
        return {"op": self.kind, **self.args}

    @classmethod
    def from_dict(cls, doc: Mapping) -> EvolutionOp:
        doc = dict(doc)
        kind = doc.pop("op", None)
        if kind is None:
            raise SpecError("evolution op without 'op'")
        return cls(kind, {k: str(v) for k, v in doc.items()})

    def element(self) -> Element:
        return {
            "replaceService": Element.WORKFLOW,
            "insertService": Element.WORKFLOW,
            "deleteService": Element.WORKFLOW,
            "bumpVersion": Element.EXTERNAL,
            "changeInput": Element.DATA,
            "mutateExternalState": Element.EXTERNAL,
            "bumpEngine": Element.ENGINE,
        }[self.kind]


def replace_service(task: str, service_id: str) -> EvolutionOp:
    return EvolutionOp("replaceService", {"task": task, "serviceId": service_id})


def insert_service(edge: str, task: str, service_id: str) -> EvolutionOp:
    """``edge`` is ``"src.port->dst.port"`` or ``"input:name->dst.port"``."""
    return EvolutionOp("insertService", {"edge": edge, "task": task, "serviceId": service_id})


def delete_service(task: str) -> EvolutionOp:
    return EvolutionOp("deleteService", {"task": task})


def bump_version(task: str) -> EvolutionOp:
    return EvolutionOp("bumpVersion", {"task": task})


def change_input(name: str, content: str) -> EvolutionOp:
    return EvolutionOp("changeInput", {"name": name, "content": content})


def mutate_external_state(key: str, value: Optional[str] = None) -> EvolutionOp:
    return EvolutionOp("mutateExternalState", {"key": key} | ({"value": value} if value is not None else {}))


def bump_engine(version: Optional[str] = None) -> EvolutionOp:
    return EvolutionOp("bumpEngine", {"version": version} if version is not None else {})


def _arg(op: EvolutionOp, name: str) -> str:
    try:
        return op.args[name]
    except KeyError:
        raise SpecError(f"{op.kind} needs argument {name!r}") from None


def _with_workflow(w: WorkflowSpec, **changes) -> WorkflowSpec:
    new = replace(w, **changes)
    new.check()
    return new


def _replace_service(w: WorkflowSpec, op: EvolutionOp) -> WorkflowSpec:
    old = w.task(_arg(op, "task"))
    new_task = replace(old, service_id=_arg(op, "serviceId"), version="1")
    tasks = tuple(new_task if t.id == old.id else t for t in w.tasks)
    return _with_workflow(w, tasks=tasks)


def _insert_service(w: WorkflowSpec, op: EvolutionOp) -> WorkflowSpec:
    src_text, sep, dst_text = _arg(op, "edge").partition("->")
    if not sep:
        raise SpecError(f"bad edge {op.args['edge']!r}; expected src->dst")
    dst = Endpoint.parse(dst_text.strip())
    src_text = src_text.strip()
    new_id = _arg(op, "task")
    if new_id in w.task_ids:
        raise SpecError(f"task {new_id!r} already exists")
    new_task = TaskSpec(new_id, _arg(op, "serviceId"), "1", ("p0",), ("o0",))
    new_in, new_out = Endpoint(new_id, "p0"), Endpoint(new_id, "o0")
    edges = list(w.edges)
    inputs = {k: list(v) for k, v in w.input_bindings.items()}
    if src_text.startswith("input:"):
        name = src_text[len("input:"):]
        if dst not in inputs.get(name, ()):
            raise SpecError(f"no binding {op.args['edge']!r}")
        inputs[name] = [t for t in inputs[name] if t != dst] + [new_in]
    else:
        old = Edge(Endpoint.parse(src_text), dst)
        if old not in edges:
            raise SpecError(f"no edge {op.args['edge']!r}")
        edges.remove(old)
        edges.append(Edge(old.source, new_in))
    edges.append(Edge(new_out, dst))
    return _with_workflow(
        w,
        tasks=w.tasks + (new_task,),
        edges=tuple(edges),
        input_bindings={k: tuple(v) for k, v in inputs.items()},
    )


def _delete_service(w: WorkflowSpec, op: EvolutionOp) -> WorkflowSpec:
    task = w.task(_arg(op, "task"))
    if len(task.in_ports) != 1:
        raise SpecError(f"can only delete single-input tasks; {task.id} has {len(task.in_ports)}")
    if any(ep.task == task.id for ep in w.output_bindings):
        raise SpecError(f"task {task.id} produces a workflow output")
    source = w.source_of(Endpoint(task.id, task.in_ports[0]))
    edges = []
    inputs = {k: [t for t in v if t.task != task.id] for k, v in w.input_bindings.items()}
    for e in w.edges:
        if e.target.task == task.id:
            continue
        if e.source.task == task.id:
            if isinstance(source, str):
                inputs[source].append(e.target)
            else:
                edges.append(Edge(source, e.target))
        else:
            edges.append(e)
    return _with_workflow(
        w,
        tasks=tuple(t for t in w.tasks if t.id != task.id),
        edges=tuple(edges),
        input_bindings={k: tuple(v) for k, v in inputs.items()},
    )


def apply_evolution(ctx: ExecutionContext, op: EvolutionOp) -> ExecutionContext:
    """Apply ``op``; exactly one version index moves to the current tick."""
    element = op.element()
    changes: dict = {}
    if op.kind == "replaceService":
        changes["workflow"] = _replace_service(ctx.workflow, op)
    elif op.kind == "insertService":
        changes["workflow"] = _insert_service(ctx.workflow, op)
    elif op.kind == "deleteService":
        changes["workflow"] = _delete_service(ctx.workflow, op)
    elif op.kind == "bumpVersion":
        task = ctx.workflow.task(_arg(op, "task"))
        versions = dict(ctx.external.service_versions)
        versions[task.service_id] = next_version(ctx.service_version(task))
        changes["external"] = ExternalDeps(ctx.external.state, versions)
    elif op.kind == "changeInput":
        name = _arg(op, "name")
        if name not in ctx.inputs:
            raise SpecError(f"unknown workflow input {name!r}")
        changes["inputs"] = {**ctx.inputs, name: _arg(op, "content").encode("utf-8")}
    elif op.kind == "mutateExternalState":
        key = _arg(op, "key")
        if key not in ctx.external.state:
            raise SpecError(f"unknown external state key {key!r}")
        value = op.args.get("value", ctx.external.state[key] + "'")
        changes["external"] = ExternalDeps({**ctx.external.state, key: value}, ctx.external.service_versions)
    else:
        changes["engine_version"] = op.args.get("version", next_version(ctx.engine_version))
    indices = dict(ctx.indices)
    indices[element] = ctx.time
    return replace(ctx, indices=indices, time=ctx.time + 1, **changes)


def apply_all(ctx: ExecutionContext, ops) -> ExecutionContext:
    for op in ops:
        ctx = apply_evolution(ctx, op)
    return ctx


# -- scenario classification ---------------------------------------------


class ScenarioClass(str, Enum):
    REPEAT = "repeat"
    METHOD = "methodEvolution"
    DATA = "dataEvolution"
    METHOD_AND_DATA = "methodAndDataEvolution"
    EXTERNAL_DECAY = "externalDecay"
    ENGINE = "engineChange"


def changed_elements(a: ExecutionContext, b: ExecutionContext) -> frozenset[Element]:
    return frozenset(e for e in Element if a.indices[e] != b.indices[e])


def classify_changes(changed: frozenset[Element]) -> ScenarioClass:
    """Label a set of changed elements.

    External dependencies dominate, then the engine; W and d are the
    experimenter-controlled axes.
    """
    if not changed:
        return ScenarioClass.REPEAT
    if Element.EXTERNAL in changed:
        return ScenarioClass.EXTERNAL_DECAY
    if Element.ENGINE in changed:
        return ScenarioClass.ENGINE
    if Element.WORKFLOW in changed and Element.DATA in changed:
        return ScenarioClass.METHOD_AND_DATA
    if Element.WORKFLOW in changed:
        return ScenarioClass.METHOD
    return ScenarioClass.DATA


def classify_scenario(a: ExecutionContext, b: ExecutionContext) -> ScenarioClass:
    return classify_changes(changed_elements(a, b))

"""Workflow specifications and their deterministic execution into traces."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from graphlib import CycleError, TopologicalSorter
from types import MappingProxyType
from typing import Mapping, Optional

from ..model import (
    ActivityNode,
    DataKind,
    DataNode,
    GenBy,
    ProvenanceTrace,
    Used,
    content_hash,
)

OUTPUT_MIME = "text/csv"


class SpecError(ValueError):
    pass


class BehaviorKind(str, Enum):
    DETERMINISTIC = "deterministicHash"
    NONDETERMINISTIC = "nondeterministic"
    EXTERNAL = "externalState"


@dataclass(frozen=True)
class TaskBehavior:
    kind: BehaviorKind = BehaviorKind.DETERMINISTIC
    state_key: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", BehaviorKind(self.kind))
        if (self.kind is BehaviorKind.EXTERNAL) != (self.state_key is not None):
            raise SpecError("state_key is required for, and only for, externalState behaviour")


@dataclass(frozen=True)
class TaskSpec:
    id: str
    service_id: str
    version: str = "1"
    in_ports: tuple[str, ...] = ("p0",)
    out_ports: tuple[str, ...] = ("o0",)
    behavior: TaskBehavior = TaskBehavior()

    def __post_init__(self):
        object.__setattr__(self, "in_ports", tuple(sorted(self.in_ports)))
        object.__setattr__(self, "out_ports", tuple(sorted(self.out_ports)))
        if not self.out_ports:
            raise SpecError(f"task {self.id} has no output ports")


@dataclass(frozen=True, order=True)
class Endpoint:
    task: str
    port: str

    @classmethod
    def parse(cls, text: str) -> Endpoint:
        task, sep, port = text.rpartition(".")
        if not sep or not task or not port:
            raise SpecError(f"bad endpoint {text!r}; expected task.port")
        return cls(task, port)

    def __str__(self):
        return f"{self.task}.{self.port}"


@dataclass(frozen=True, order=True)
class Edge:
    source: Endpoint
    target: Endpoint


@dataclass(frozen=True)
class WorkflowSpec:
    """W = (T, E) plus input and output bindings."""

    name: str
    tasks: tuple[TaskSpec, ...]
    edges: tuple[Edge, ...] = ()
    input_bindings: Mapping[str, tuple[Endpoint, ...]] = field(default_factory=dict)
    output_bindings: Mapping[Endpoint, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(sorted(self.tasks, key=lambda t: t.id)))
        object.__setattr__(self, "edges", tuple(sorted(set(self.edges))))
        inputs = {k: tuple(sorted(v)) for k, v in sorted(self.input_bindings.items())}
        object.__setattr__(self, "input_bindings", MappingProxyType(inputs))
        object.__setattr__(self, "output_bindings", MappingProxyType(dict(sorted(self.output_bindings.items()))))

    def task(self, task_id: str) -> TaskSpec:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise SpecError(f"unknown task {task_id!r}")

    @property
    def task_ids(self) -> list[str]:
        return [t.id for t in self.tasks]

    def source_of(self, target: Endpoint):
        """What feeds an input port: an :class:`Endpoint` or an input name."""
        for e in self.edges:
            if e.target == target:
                return e.source
        for name, targets in self.input_bindings.items():
            if target in targets:
                return name
        return None

    def check(self) -> None:
        """Raise :class:`SpecError` unless every input port has exactly one source and W is a DAG."""
        ids = self.task_ids
        if len(set(ids)) != len(ids):
            raise SpecError("duplicate task ids")
        feeds: dict[Endpoint, int] = {}
        for e in self.edges:
            self._check_endpoint(e.source, output=True)
            self._check_endpoint(e.target, output=False)
            feeds[e.target] = feeds.get(e.target, 0) + 1
        for name, targets in self.input_bindings.items():
            for t in targets:
                self._check_endpoint(t, output=False)
                feeds[t] = feeds.get(t, 0) + 1
        for ep in self.output_bindings:
            self._check_endpoint(ep, output=True)
        for t in self.tasks:
            for p in t.in_ports:
                n = feeds.get(Endpoint(t.id, p), 0)
                if n != 1:
                    raise SpecError(f"input port {t.id}.{p} has {n} sources; expected 1")
        self.topological_order()

    def _check_endpoint(self, ep: Endpoint, output: bool) -> None:
        task = self.task(ep.task)
        ports = task.out_ports if output else task.in_ports
        if ep.port not in ports:
            raise SpecError(f"{ep} is not an {'output' if output else 'input'} port")

    def topological_order(self) -> list[str]:
        graph = {t.id: set() for t in self.tasks}
        for e in self.edges:
            graph[e.target.task].add(e.source.task)
        try:
            return list(TopologicalSorter(graph).static_order())
        except CycleError as exc:
            raise SpecError(f"workflow has a cycle: {exc.args[1]}") from None

    def upstream(self, task_id: str) -> set[str]:
        """Tasks feeding ``task_id``, transitively (exclusive)."""
        out, stack = set(), [task_id]
        while stack:
            cur = stack.pop()
            for e in self.edges:
                if e.target.task == cur and e.source.task not in out:
                    out.add(e.source.task)
                    stack.append(e.source.task)
        return out

    def downstream(self, task_id: str) -> set[str]:
        out, stack = set(), [task_id]
        while stack:
            cur = stack.pop()
            for e in self.edges:
                if e.source.task == cur and e.target.task not in out:
                    out.add(e.target.task)
                    stack.append(e.target.task)
        return out


def activity_id(task_id: str) -> str:
    return f"a:{task_id}"


def data_id(ep: Endpoint) -> str:
    return f"d:{ep.task}.{ep.port}"


def input_id(name: str) -> str:
    return f"in:{name}"


def content_ref(content: bytes) -> str:
    return f"content/{content_hash(content)}.csv"


def default_input_content(name: str) -> bytes:
    return f"name,value\n{name},{int(hashlib.md5(name.encode()).hexdigest()[:8], 16)}\n".encode()


def _digest(*parts) -> str:
    h = hashlib.md5()
    for p in parts:
        h.update(str(p).encode("utf-8"))
        h.update(b"\x1f")
    return h.hexdigest()


@dataclass
class Execution:
    trace: ProvenanceTrace
    # contentRef -> bytes for every persisted data node
    contents: dict[str, bytes]


def execute(
    workflow: WorkflowSpec,
    inputs: Mapping[str, bytes],
    external_state: Mapping[str, str] | None = None,
    service_versions: Mapping[str, str] | None = None,
    seed: int = 0,
    run_id: Optional[str] = None,
) -> Execution:
    """Run ``workflow`` symbolically and record its provenance.

    Intermediate outputs are digests of (service, version, port, input
    hashes); workflow inputs and outputs carry real CSV bytes.
    """
    workflow.check()
    external_state = external_state or {}
    service_versions = service_versions or {}
    contents: dict[str, bytes] = {}
    data: dict[str, DataNode] = {}
    activities: list[ActivityNode] = []
    used: set[Used] = set()
    gen_by: set[GenBy] = set()

    consumed = {e.source for e in workflow.edges}

    def persisted(node_id: str, content: bytes) -> DataNode:
        ref = content_ref(content)
        contents[ref] = content
        return DataNode(node_id, DataKind.PERSISTED, content_hash(content), OUTPUT_MIME, ref)

    for name, targets in workflow.input_bindings.items():
        if not targets:
            continue
        if name not in inputs:
            raise SpecError(f"no content for workflow input {name!r}")
        data[input_id(name)] = persisted(input_id(name), inputs[name])

    for task_id in workflow.topological_order():
        task = workflow.task(task_id)
        version = service_versions.get(task.service_id, task.version)
        aid = activity_id(task_id)
        in_hashes = []
        for port in task.in_ports:
            src = workflow.source_of(Endpoint(task_id, port))
            did = input_id(src) if isinstance(src, str) else data_id(src)
            used.add(Used(aid, port, did))
            in_hashes.append(f"{port}={data[did].hash}")
        extra = ()
        if task.behavior.kind is BehaviorKind.NONDETERMINISTIC:
            extra = ("seed", seed)
        elif task.behavior.kind is BehaviorKind.EXTERNAL:
            if task.behavior.state_key not in external_state:
                raise SpecError(f"task {task_id} needs external state {task.behavior.state_key!r}")
            extra = ("state", external_state[task.behavior.state_key])
        for port in task.out_ports:
            ep = Endpoint(task_id, port)
            digest = _digest(task.service_id, version, port, *in_hashes, *extra)
            did = data_id(ep)
            if ep in consumed:
                data[did] = DataNode(did, DataKind.TRANSIENT, digest)
            else:
                name = workflow.output_bindings.get(ep, str(ep))
                data[did] = persisted(did, f"output,digest\n{name},{digest}\n".encode())
            gen_by.add(GenBy(did, aid, port))
        activities.append(ActivityNode(aid, task.service_id, version, task.in_ports, task.out_ports))

    trace = ProvenanceTrace(
        run_id or f"{workflow.name}-run",
        tuple(data.values()),
        tuple(activities),
        frozenset(used),
        frozenset(gen_by),
    )
    return Execution(trace, contents)


# -- JSON form ------------------------------------------------------------


def workflow_to_dict(w: WorkflowSpec) -> dict:
    def task_dict(t: TaskSpec) -> dict:
        out = {
            "id": t.id,
            "serviceId": t.service_id,
            "version": t.version,
            "inPorts": list(t.in_ports),
            "outPorts": list(t.out_ports),
        }
        if t.behavior != TaskBehavior():
            b = {"kind": t.behavior.kind.value}
            if t.behavior.state_key is not None:
                b["stateKey"] = t.behavior.state_key
            out["behavior"] = b
        return out

    return {
        "name": w.name,
        "tasks": [task_dict(t) for t in w.tasks],
        "edges": [{"from": str(e.source), "to": str(e.target)} for e in w.edges],
        "inputs": {k: [str(t) for t in v] for k, v in w.input_bindings.items()},
        "outputs": {str(k): v for k, v in w.output_bindings.items()},
    }


def workflow_from_dict(doc: Mapping) -> WorkflowSpec:
    try:
        tasks = []
        for t in doc["tasks"]:
            b = t.get("behavior") or {}
            tasks.append(
                TaskSpec(
                    t["id"],
                    t["serviceId"],
                    str(t.get("version", "1")),
                    tuple(t.get("inPorts", ("p0",))),
                    tuple(t.get("outPorts", ("o0",))),
                    TaskBehavior(b.get("kind", BehaviorKind.DETERMINISTIC), b.get("stateKey")),
                )
            )
        edges = [Edge(Endpoint.parse(e["from"]), Endpoint.parse(e["to"])) for e in doc.get("edges", ())]
        inputs = {
            k: tuple(Endpoint.parse(x) for x in ([v] if isinstance(v, str) else v))
            for k, v in doc.get("inputs", {}).items()
        }
        outputs = {Endpoint.parse(k): v for k, v in doc.get("outputs", {}).items()}
        w = WorkflowSpec(doc.get("name", "workflow"), tuple(tasks), tuple(edges), inputs, outputs)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"malformed workflow: {exc!r}") from exc
    w.check()
    return w

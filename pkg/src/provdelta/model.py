"""Provenance trace data model.

A trace is a bipartite DAG of data and activity nodes linked by two ported
relations: ``used(activity, port, data)`` and ``genBy(data, activity, port)``.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Optional


class TraceError(Exception):
    """Raised when a traversal hits a structurally invalid point in a trace."""


class Direction(str, Enum):
    INPUT = "input"
    OUTPUT = "output"


class DataKind(str, Enum):
    PERSISTED = "persisted"
    TRANSIENT = "transient"


@dataclass(frozen=True, order=True)
class Port:
    name: str
    direction: Direction = Direction.INPUT


_HEX32 = re.compile(r"^[0-9a-f]{32}$")


def content_hash(content: bytes) -> str:
    """MD5 digest of ``content`` as 32 lowercase hex characters."""
    return hashlib.md5(content).hexdigest()


@dataclass(frozen=True)
class DataNode:
    id: str
    kind: DataKind
    hash: str
    mime_type: Optional[str] = None
    content_ref: Optional[str] = None

    @property
    def persisted(self) -> bool:
        return self.kind is DataKind.PERSISTED


@dataclass(frozen=True)
class ActivityNode:
    id: str
    service_id: str
    service_version: str
    in_ports: tuple[str, ...] = ()
    out_ports: tuple[str, ...] = ()

    def __post_init__(self):
        # canonical port order; traversal relies on it
        object.__setattr__(self, "in_ports", tuple(sorted(self.in_ports)))
        object.__setattr__(self, "out_ports", tuple(sorted(self.out_ports)))

    @property
    def input_ports(self) -> tuple[Port, ...]:
        return tuple(Port(p, Direction.INPUT) for p in self.in_ports)

    @property
    def output_ports(self) -> tuple[Port, ...]:
        return tuple(Port(p, Direction.OUTPUT) for p in self.out_ports)


def _version_key(token: str):
    parts = str(token).split(".")
    return tuple((0, int(p), "") if p.isdigit() else (1, 0, p) for p in parts)


def compare_versions(a: str, b: str) -> int:
    """Total order on version tokens: -1, 0 or 1.

    Integers compare numerically; otherwise dotted components are compared
    left to right, numeric components before alphanumeric ones.
    """
    if a == b:
        return 0
    try:
        ia, ib = int(a), int(b)
    except ValueError:
        ka, kb = _version_key(a), _version_key(b)
        if ka == kb:
            return (a > b) - (a < b)
        return (ka > kb) - (ka < kb)
    return (ia > ib) - (ia < ib)


@dataclass(frozen=True)
class Used:
    activity: str
    port: str
    data: str


@dataclass(frozen=True)
class GenBy:
    data: str
    activity: str
    port: str


@dataclass(frozen=True)
class Violation:
    invariant: str
    ids: tuple[str, ...]
    message: str = ""

    def __str__(self):
        return f"{self.invariant}: {', '.join(self.ids)}" + (
            f" ({self.message})" if self.message else ""
        )


@dataclass(frozen=True, eq=False)
class ProvenanceTrace:
    """One workflow run. Immutable; lookup indexes are built lazily."""

    run_id: str
    data_nodes: tuple[DataNode, ...] = ()
    activity_nodes: tuple[ActivityNode, ...] = ()
    used: frozenset[Used] = field(default_factory=frozenset)
    gen_by: frozenset[GenBy] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "data_nodes", tuple(sorted(self.data_nodes, key=lambda n: n.id)))
        object.__setattr__(
            self, "activity_nodes", tuple(sorted(self.activity_nodes, key=lambda n: n.id))
        )
        object.__setattr__(self, "used", frozenset(self.used))
        object.__setattr__(self, "gen_by", frozenset(self.gen_by))

    def __eq__(self, other):
        if not isinstance(other, ProvenanceTrace):
            return NotImplemented
        return (
            self.run_id == other.run_id
            and self.data_nodes == other.data_nodes
            and self.activity_nodes == other.activity_nodes
            and self.used == other.used
            and self.gen_by == other.gen_by
        )

    def __hash__(self):
        return hash((self.run_id, self.data_nodes, self.activity_nodes))

    # -- indexes -----------------------------------------------------------

    @cached_property
    def _data(self) -> dict[str, DataNode]:
        return {n.id: n for n in self.data_nodes}

    @cached_property
    def _activities(self) -> dict[str, ActivityNode]:
        return {n.id: n for n in self.activity_nodes}

    @cached_property
    def _producer(self) -> dict[str, GenBy]:
        out: dict[str, GenBy] = {}
        for g in sorted(self.gen_by, key=lambda g: (g.data, g.activity, g.port)):
            out.setdefault(g.data, g)
        return out

    @cached_property
    def _inputs_of(self) -> dict[tuple[str, str], str]:
        out: dict[tuple[str, str], str] = {}
        for u in sorted(self.used, key=lambda u: (u.activity, u.port, u.data)):
            out.setdefault((u.activity, u.port), u.data)
        return out

    @cached_property
    def _consumers(self) -> dict[str, list[Used]]:
        out: dict[str, list[Used]] = {}
        for u in sorted(self.used, key=lambda u: (u.port, u.activity)):
            out.setdefault(u.data, []).append(u)
        return out

    @cached_property
    def _outputs_of(self) -> dict[tuple[str, str], str]:
        return {(g.activity, g.port): g.data for g in self.gen_by}

    def data(self, node_id: str) -> DataNode:
        return self._data[node_id]

    def activity(self, node_id: str) -> ActivityNode:
        return self._activities[node_id]

    def node(self, node_id: str) -> DataNode | ActivityNode:
        if node_id in self._data:
            return self._data[node_id]
        return self._activities[node_id]

    def __contains__(self, node) -> bool:
        node_id = node if isinstance(node, str) else node.id
        return node_id in self._data or node_id in self._activities

    def producer_port(self, data_id: str) -> Optional[str]:
        g = self._producer.get(data_id)
        return g.port if g else None

    def consumers(self, data_id: str) -> list[Used]:
        return self._consumers.get(data_id, [])

    def output_of(self, activity_id: str, port: str) -> Optional[DataNode]:
        data_id = self._outputs_of.get((activity_id, port))
        return self._data[data_id] if data_id else None

    # -- single-step upward traversal -------------------------------------

    def up_d(self, d: DataNode | str) -> Optional[ActivityNode]:
        """Activity that generated ``d``; ``None`` for a workflow input."""
        node = self._data[d if isinstance(d, str) else d.id]
        g = self._producer.get(node.id)
        if g is None:
            if node.kind is DataKind.TRANSIENT:
                raise TraceError(f"transient data {node.id!r} has no generating activity")
            return None
        return self._activities[g.activity]

    def up_s(self, a: ActivityNode | str, port: Port | str) -> DataNode:
        """Data node consumed by ``a`` on input ``port``."""
        activity_id = a if isinstance(a, str) else a.id
        name = port.name if isinstance(port, Port) else port
        data_id = self._inputs_of.get((activity_id, name))
        if data_id is None:
            raise TraceError(f"activity {activity_id!r} has no input on port {name!r}")
        return self._data[data_id]

    def activity_parents(self, a: ActivityNode | str) -> list[tuple[str, ActivityNode]]:
        """Producers of ``a``'s inputs as ``(port, activity)`` in port order."""
        act = self._activities[a if isinstance(a, str) else a.id]
        out = []
        for p in act.in_ports:
            data_id = self._inputs_of.get((act.id, p))
            if data_id is None:
                continue
            g = self._producer.get(data_id)
            if g is not None:
                out.append((p, self._activities[g.activity]))
        return out

    # -- distinguished data -----------------------------------------------

    def workflow_inputs(self) -> list[DataNode]:
        produced = {g.data for g in self.gen_by}
        return [n for n in self.data_nodes if n.id not in produced]

    def workflow_outputs(self) -> list[DataNode]:
        consumed = {u.data for u in self.used}
        return [n for n in self.data_nodes if n.id not in consumed]


def workflow_inputs(trace: ProvenanceTrace) -> list[DataNode]:
    return trace.workflow_inputs()


def workflow_outputs(trace: ProvenanceTrace) -> list[DataNode]:
    return trace.workflow_outputs()


def up_d(trace: ProvenanceTrace, d: DataNode | str) -> Optional[ActivityNode]:
    return trace.up_d(d)


def up_s(trace: ProvenanceTrace, a: ActivityNode | str, p: Port | str) -> DataNode:
    return trace.up_s(a, p)


def validate(trace: ProvenanceTrace) -> list[Violation]:
    """Check every trace invariant; violations are returned, never raised."""
    out: list[Violation] = []
    data = {}
    activities = {}
    for n in trace.data_nodes:
        if n.id in data:
            out.append(Violation("unique-id", (n.id,), "duplicate data node"))
        data[n.id] = n
    for a in trace.activity_nodes:
        if a.id in activities or a.id in data:
            out.append(Violation("unique-id", (a.id,), "duplicate node id"))
        activities[a.id] = a

    for n in data.values():
        if not _HEX32.match(n.hash or ""):
            out.append(Violation("hash-format", (n.id,), "expected 32 lowercase hex chars"))
        if n.kind is DataKind.TRANSIENT and n.content_ref is not None:
            out.append(Violation("transient-content", (n.id,), "transient data carries contentRef"))
        if n.kind is DataKind.PERSISTED and not n.mime_type:
            out.append(Violation("persisted-mime", (n.id,), "persisted data lacks mimeType"))

    for a in activities.values():
        if not a.service_id:
            out.append(Violation("service-id", (a.id,), "empty serviceId"))
        for ports in (a.in_ports, a.out_ports):
            if len(set(ports)) != len(ports):
                out.append(Violation("port-unique", (a.id,), "duplicate port name"))
            if any(not p for p in ports):
                out.append(Violation("port-name", (a.id,), "empty port name"))

    # same service => same port sets
    by_service: dict[str, ActivityNode] = {}
    for a in activities.values():
        first = by_service.setdefault(a.service_id, a)
        if (first.in_ports, first.out_ports) != (a.in_ports, a.out_ports):
            out.append(
                Violation("service-ports", (first.id, a.id), f"service {a.service_id!r}")
            )

    dangling = False
    used_slots: dict[tuple[str, str], list[str]] = {}
    for u in trace.used:
        missing = [i for i, pool in ((u.activity, activities), (u.data, data)) if i not in pool]
        if missing:
            out.append(Violation("dangling-edge", tuple(missing), f"used on port {u.port!r}"))
            dangling = True
            continue
        if u.port not in activities[u.activity].in_ports:
            out.append(Violation("unknown-port", (u.activity,), f"input port {u.port!r}"))
        used_slots.setdefault((u.activity, u.port), []).append(u.data)

    gen_slots: dict[tuple[str, str], list[str]] = {}
    producers: dict[str, list[str]] = {}
    for g in trace.gen_by:
        missing = [i for i, pool in ((g.activity, activities), (g.data, data)) if i not in pool]
        if missing:
            out.append(Violation("dangling-edge", tuple(missing), f"genBy on port {g.port!r}"))
            dangling = True
            continue
        if g.port not in activities[g.activity].out_ports:
            out.append(Violation("unknown-port", (g.activity,), f"output port {g.port!r}"))
        gen_slots.setdefault((g.activity, g.port), []).append(g.data)
        producers.setdefault(g.data, []).append(g.activity)

    for d, acts in sorted(producers.items()):
        if len(acts) > 1:
            out.append(Violation("single-producer", (d, *sorted(acts))))

    for a in activities.values():
        for p in a.in_ports:
            n = len(used_slots.get((a.id, p), []))
            if n != 1:
                out.append(Violation("input-port-binding", (a.id,), f"port {p!r} bound {n} times"))
        for p in a.out_ports:
            n = len(gen_slots.get((a.id, p), []))
            if n != 1:
                out.append(Violation("output-port-binding", (a.id,), f"port {p!r} bound {n} times"))

    for n in data.values():
        if n.kind is DataKind.TRANSIENT and n.id not in producers:
            out.append(Violation("transient-input", (n.id,), "workflow input cannot be transient"))

    if not dangling:
        cycle = _find_cycle(
            list(data) + list(activities),
            [(u.data, u.activity) for u in trace.used]
            + [(g.activity, g.data) for g in trace.gen_by],
        )
        if cycle:
            out.append(Violation("acyclic", tuple(cycle)))
    return out


def _find_cycle(nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> list[str]:
    succ: dict[str, list[str]] = {n: [] for n in nodes}
    for a, b in edges:
        succ.setdefault(a, []).append(b)
    WHITE, GREY, BLACK = 0, 1, 2
    colour = {n: WHITE for n in succ}
    for start in sorted(succ):
        if colour[start] != WHITE:
            continue
        stack = [(start, iter(sorted(succ[start])))]
        path = [start]
        colour[start] = GREY
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                colour[node] = BLACK
                stack.pop()
                path.pop()
            elif colour.get(nxt, WHITE) == GREY:
                return path[path.index(nxt):]
            elif colour.get(nxt, WHITE) == WHITE:
                colour[nxt] = GREY
                stack.append((nxt, iter(sorted(succ.get(nxt, [])))))
                path.append(nxt)
    return []

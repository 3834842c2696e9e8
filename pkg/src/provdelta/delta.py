"""Delta graph: the record of mismatches found while diffing two traces."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional


class DeltaKind(str, Enum):
    DATA = "dataMismatch"
    SERVICE = "serviceMismatch"
    VERSION = "versionMismatch"
    FRAGMENT = "fragmentPair"
    ROOT = "root"


@dataclass(frozen=True)
class DeltaNode:
    """One mismatch record.

    ``left``/``right`` hold trace node ids: the two data nodes, the two
    activities, or (for fragment pairs) the activities whose service mismatch
    triggered the resynchronisation search. Fragment pairs also carry the
    skipped activity ids and, when the search succeeded, the matched pair.
    """

    kind: DeltaKind
    left: Optional[str] = None
    right: Optional[str] = None
    left_service: Optional[str] = None
    right_service: Optional[str] = None
    left_version: Optional[str] = None
    right_version: Optional[str] = None
    left_fragment: Optional[tuple[str, ...]] = None
    right_fragment: Optional[tuple[str, ...]] = None
    sync_service: Optional[str] = None
    sync_left: Optional[str] = None
    sync_right: Optional[str] = None
    index: int = -1

    @classmethod
    def data(cls, left: str, right: str) -> DeltaNode:
        return cls(DeltaKind.DATA, left, right)

    @classmethod
    def service(cls, left, right) -> DeltaNode:
        return cls(
            DeltaKind.SERVICE, left.id, right.id,
            left_service=left.service_id, right_service=right.service_id,
            left_version=left.service_version, right_version=right.service_version,
        )

    @classmethod
    def version(cls, left, right) -> DeltaNode:
        return cls(
            DeltaKind.VERSION, left.id, right.id,
            left_service=left.service_id, right_service=right.service_id,
            left_version=left.service_version, right_version=right.service_version,
        )

    @classmethod
    def fragments(
        cls,
        left_fragment: Iterable[str],
        right_fragment: Iterable[str],
        left: Optional[str] = None,
        right: Optional[str] = None,
        sync=None,
    ) -> DeltaNode:
        sync_left, sync_right, service = (None, None, None)
        if sync is not None:
            sync_left, sync_right = sync[0].id, sync[1].id
            service = sync[0].service_id
        return cls(
            DeltaKind.FRAGMENT, left, right,
            left_fragment=tuple(left_fragment), right_fragment=tuple(right_fragment),
            sync_service=service, sync_left=sync_left, sync_right=sync_right,
        )

    @property
    def synced(self) -> bool:
        return self.sync_left is not None

    @property
    def left_label(self) -> str:
        return self._label(self.left, self.left_service, self.left_version, self.left_fragment)

    @property
    def right_label(self) -> str:
        return self._label(self.right, self.right_service, self.right_version, self.right_fragment)

    def _label(self, node_id, service, version, fragment) -> str:
        if self.kind is DeltaKind.DATA:
            return node_id or ""
        if self.kind is DeltaKind.SERVICE:
            return service or ""
        if self.kind is DeltaKind.VERSION:
            return f"{service}@{version}"
        if self.kind is DeltaKind.FRAGMENT:
            return "[" + ", ".join(fragment or ()) + "]"
        return ""

    def describe(self) -> str:
        if self.kind is DeltaKind.ROOT:
            return "root"
        text = f"{self.kind.value} <{self.left_label}, {self.right_label}>"
        if self.kind is DeltaKind.FRAGMENT:
            text += f" sync={self.sync_service}" if self.synced else " no-sync"
        return text


@dataclass
class DeltaGraph:
    nodes: list[DeltaNode] = field(default_factory=list)
    edges: list[tuple[int, int]] = field(default_factory=list)
    # (joining fragment pair, registered fragment pair)
    joins: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self):
        return len(self.nodes)

    def __bool__(self):
        return bool(self.nodes)

    def __getitem__(self, index: int) -> DeltaNode:
        return self.nodes[index]

    @property
    def roots(self) -> list[int]:
        has_parent = {c for _, c in self.edges}
        return [n.index for n in self.nodes if n.index not in has_parent]

    def children(self, index: int) -> list[int]:
        return [c for p, c in self.edges if p == index]

    def parents(self, index: int) -> list[int]:
        return [p for p, c in self.edges if c == index]

    def add_node(self, element: DeltaNode) -> DeltaNode:
        node = _with_index(element, len(self.nodes))
        self.nodes.append(node)
        return node

    def add_edge(self, parent: int, child: int) -> None:
        if (parent, child) not in self.edges:
            self.edges.append((parent, child))

    def summary(self) -> dict[str, int]:
        counts = Counter(n.kind.value for n in self.nodes if n.kind is not DeltaKind.ROOT)
        return {k.value: counts.get(k.value, 0) for k in DeltaKind if k is not DeltaKind.ROOT}

    def by_kind(self, kind: DeltaKind) -> list[DeltaNode]:
        return [n for n in self.nodes if n.kind is kind]

    def is_acyclic(self) -> bool:
        indeg = Counter(c for _, c in self.edges)
        ready = [n.index for n in self.nodes if indeg[n.index] == 0]
        seen = 0
        while ready:
            n = ready.pop()
            seen += 1
            for c in self.children(n):
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        return seen == len(self.nodes)

    def share_joined_subtrees(self) -> None:
        """Point every joining fragment pair at the registered pair's children."""
        for joined, registered in self.joins:
            for child in self.children(registered):
                self.add_edge(joined, child)

    def paths(self) -> list[list[DeltaNode]]:
        """All root-to-leaf paths, in edge order."""
        out = []

        def walk(i, acc):
            kids = self.children(i)
            if not kids:
                out.append(acc + [self.nodes[i]])
            for c in kids:
                walk(c, acc + [self.nodes[i]])

        for r in self.roots:
            walk(r, [])
        return out


def _with_index(node: DeltaNode, index: int) -> DeltaNode:
    return replace(node, index=index)


class SyncRegistry:
    """Sync points found by resynchronisation, keyed by the matched activity pair."""

    def __init__(self):
        self._entries: dict[tuple[str, str], int] = {}
        self._last_joined: dict[tuple[str, str], bool] = {}

    def __contains__(self, key):
        return key in self._entries

    def __len__(self):
        return len(self._entries)

    def get(self, key) -> Optional[int]:
        return self._entries.get(key)

    def record(self, key, index: int) -> bool:
        """Register ``key`` -> ``index``; return True if it was already present."""
        if key in self._entries:
            self._last_joined[key] = True
            return True
        self._entries[key] = index
        self._last_joined[key] = False
        return False

    def joined(self, key) -> bool:
        return self._last_joined.get(key, False)

    def items(self):
        return self._entries.items()


def sync_key(node: DeltaNode) -> Optional[tuple[str, str]]:
    if node.kind is DeltaKind.FRAGMENT and node.synced:
        return (node.sync_left, node.sync_right)
    return None


def add_delta(
    delta: DeltaGraph,
    element: DeltaNode,
    attach_at: Optional[int],
    sync_registry: Optional[SyncRegistry] = None,
) -> DeltaNode:
    """Append ``element`` under ``attach_at`` (a root when ``None``).

    A fragment pair whose sync point is already registered shares the
    registered pair's upward subtree instead of growing its own.
    """
    node = delta.add_node(element)
    if attach_at is not None:
        delta.add_edge(attach_at, node.index)
    key = sync_key(node)
    if key is not None and sync_registry is not None:
        if sync_registry.record(key, node.index):
            registered = sync_registry.get(key)
            delta.joins.append((node.index, registered))
            for child in delta.children(registered):
                delta.add_edge(node.index, child)
    return node


def is_delta_stop(delta: DeltaGraph, sync_registry: SyncRegistry, last_sync) -> bool:
    """True when the latest insertion for ``last_sync`` joined an earlier branch."""
    return last_sync is not None and sync_registry.joined(last_sync)


def merge_deltas(deltas: Iterable[DeltaGraph]) -> DeltaGraph:
    """Combine deltas as siblings under a new common root.

    Empty inputs are dropped; a single survivor is returned unchanged.
    """
    survivors = [d for d in deltas if d]
    if not survivors:
        return DeltaGraph()
    if len(survivors) == 1:
        return survivors[0]
    merged = DeltaGraph()
    tops = []
    for d in survivors:
        offset = len(merged.nodes)
        for n in d.nodes:
            merged.add_node(n)
        merged.edges.extend((p + offset, c + offset) for p, c in d.edges)
        merged.joins.extend((a + offset, b + offset) for a, b in d.joins)
        tops.extend(r + offset for r in d.roots)
    root = merged.add_node(DeltaNode(DeltaKind.ROOT))
    for t in tops:
        merged.add_edge(root.index, t)
    return merged

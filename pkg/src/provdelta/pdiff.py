"""Lock-step divergence detection over two provenance traces.

Starting from a pair of workflow outputs, the traversal walks both traces
upward in step: data pair, then their producers, then the producers' inputs
port by port. Mismatches are recorded in a :class:`DeltaGraph`. A service
mismatch triggers a search for the nearest service-equal pair further up
(a sync point); the skipped activities are recorded as a fragment pair and
the traversal resumes from the sync point. A second branch arriving at an
already-used sync point shares the first branch's upward delta and stops.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from .ddiff import ComparatorRegistry, ContentLoader, data_diff
from .delta import (
    DeltaGraph,
    DeltaKind,
    DeltaNode,
    SyncRegistry,
    add_delta,
    is_delta_stop,
    merge_deltas,
    sync_key,
)
from .model import ActivityNode, DataNode, ProvenanceTrace, TraceError, validate

log = logging.getLogger(__name__)


class ADiff(str, Enum):
    SAME = "same"
    VERSION = "versionMismatch"
    SERVICE = "serviceMismatch"


def a_diff(left: ActivityNode, right: ActivityNode) -> ADiff:
    """Compare two activities by service identity, ports and version.

    Differing port sets count as a service mismatch.
    """
    if left.service_id != right.service_id or (left.in_ports, left.out_ports) != (
        right.in_ports,
        right.out_ports,
    ):
        return ADiff.SERVICE
    if left.service_version != right.service_version:
        return ADiff.VERSION
    return ADiff.SAME


@dataclass
class DiffStats:
    aligned_steps: int = 0
    findnode_calls: int = 0
    findnode_comparisons: int = 0
    # combined depth of every successful resync
    sync_depths: list[int] = field(default_factory=list)
    # (left id, right id) of every compared data or activity pair
    aligned_pairs: list[tuple[str, str]] = field(default_factory=list)

    @property
    def total_steps(self) -> int:
        return self.aligned_steps + self.findnode_comparisons

    def __iadd__(self, other: DiffStats) -> DiffStats:
        self.aligned_steps += other.aligned_steps
        self.findnode_calls += other.findnode_calls
        self.findnode_comparisons += other.findnode_comparisons
        self.sync_depths.extend(other.sync_depths)
        self.aligned_pairs.extend(other.aligned_pairs)
        return self


@dataclass(frozen=True)
class FindNodeResult:
    fragment_left: tuple[str, ...]
    fragment_right: tuple[str, ...]
    match_left: Optional[ActivityNode] = None
    match_right: Optional[ActivityNode] = None
    depth_left: Optional[int] = None
    depth_right: Optional[int] = None

    def __post_init__(self):
        if (self.match_left is None) != (self.match_right is None):
            raise ValueError("matches must be both present or both absent")

    @property
    def found(self) -> bool:
        return self.match_left is not None


def upward_bfs(trace: ProvenanceTrace, start: ActivityNode, include_start: bool = True):
    """Activities above ``start`` in breadth-first order, as ``(node, depth)``.

    Siblings are visited by (port name, node id); depth counts activity hops.
    """
    order = [(start, 0)] if include_start else []
    seen = {start.id}
    frontier = [start]
    depth = 0
    while frontier:
        depth += 1
        nxt = []
        for node in frontier:
            for _, parent in sorted(trace.activity_parents(node), key=lambda pa: (pa[0], pa[1].id)):
                if parent.id not in seen:
                    seen.add(parent.id)
                    nxt.append(parent)
                    order.append((parent, depth))
        frontier = nxt
    return order


def _strictly_above(trace: ProvenanceTrace, node: ActivityNode) -> set[str]:
    return {a.id for a, _ in upward_bfs(trace, node, include_start=False)}


def _fragment(trace: ProvenanceTrace, start: ActivityNode, sync: Optional[ActivityNode]) -> tuple[str, ...]:
    region = upward_bfs(trace, start)
    if sync is None:
        return tuple(a.id for a, _ in region)
    return tuple(a.id for a, _ in region if sync.id in _strictly_above(trace, a))


def find_node(
    trace_left: ProvenanceTrace,
    trace_right: ProvenanceTrace,
    n_left: ActivityNode,
    n_right: ActivityNode,
    stats: Optional[DiffStats] = None,
) -> FindNodeResult:
    """Search upward from a service mismatch for the nearest service-equal pair.

    Candidates are taken above one node in breadth-first order and looked up
    breadth-first from the other node (inclusive); the search then runs with
    the roles swapped. The pair with the lowest combined depth wins, ties
    broken by left depth, service id, then node ids.
    """
    stats = stats if stats is not None else DiffStats()
    stats.findnode_calls += 1
    up_left = upward_bfs(trace_left, n_left)
    up_right = upward_bfs(trace_right, n_right)

    best = None
    # both phases see pairs with depths >= 1 on each side; compare each once
    compatible: dict[tuple[str, str], bool] = {}

    def check(left: ActivityNode, right: ActivityNode) -> bool:
        key = (left.id, right.id)
        if key not in compatible:
            stats.findnode_comparisons += 1
            compatible[key] = a_diff(left, right) is not ADiff.SERVICE
        return compatible[key]

    def phase(candidates, search, candidate_is_left):
        nonlocal best
        for cand, dc in candidates:
            if dc == 0:
                continue
            if best is not None and dc > best[0][0]:
                break
            found_at = None
            for other, ds in search:
                if best is not None and dc + ds > best[0][0]:
                    break
                if found_at is not None and ds > found_at:
                    break
                left, right = (cand, other) if candidate_is_left else (other, cand)
                if not check(left, right):
                    continue
                found_at = ds
                dl, dr = (dc, ds) if candidate_is_left else (ds, dc)
                key = (dl + dr, dl, left.service_id, left.id, right.id)
                if best is None or key < best[0]:
                    best = (key, left, right, dl, dr)

    phase(up_left, up_right, True)
    phase(up_right, up_left, False)

    if best is None:
        return FindNodeResult(
            tuple(a.id for a, _ in up_left), tuple(a.id for a, _ in up_right)
        )
    _, m_left, m_right, dl, dr = best
    stats.sync_depths.append(dl + dr)
    return FindNodeResult(
        _fragment(trace_left, n_left, m_left),
        _fragment(trace_right, n_right, m_right),
        m_left,
        m_right,
        dl,
        dr,
    )


class _Frame:
    """Pending merge point: a clean activity whose input branches fan out."""

    __slots__ = ("children",)

    def __init__(self):
        self.children: list[Union[int, _Frame]] = []


Context = Union[int, _Frame]


class _Differ:
    def __init__(self, left, right, registry, load_left, load_right, stats):
        self.left = left
        self.right = right
        self.registry = registry
        self.load_left = load_left
        self.load_right = load_right
        self.stats = stats
        self.delta = DeltaGraph()
        self.syncs = SyncRegistry()
        self.visited: set[tuple[str, str, str]] = set()
        self.top = _Frame()

    def record(self, element: DeltaNode, ctx: Context) -> DeltaNode:
        if isinstance(ctx, _Frame):
            node = add_delta(self.delta, element, None, self.syncs)
            ctx.children.append(node.index)
        else:
            node = add_delta(self.delta, element, ctx, self.syncs)
        return node

    def run(self, start_left: DataNode, start_right: DataNode) -> DeltaGraph:
        stack: list[tuple[str, object, object, Context]] = [("data", start_left, start_right, self.top)]
        while stack:
            kind, nl, nr, ctx = stack.pop()
            if kind == "data":
                stack.extend(reversed(self.step_data(nl, nr, ctx)))
            else:
                stack.extend(reversed(self.step_activity(nl, nr, ctx)))
        root = self._resolve(self.top)
        self.delta.share_joined_subtrees()
        log.debug("pdiff %s/%s: %d delta nodes, root=%s", self.left.run_id, self.right.run_id, len(self.delta), root)
        return self.delta

    def _resolve(self, frame: _Frame) -> Optional[int]:
        survivors = []
        for child in frame.children:
            idx = self._resolve(child) if isinstance(child, _Frame) else child
            if idx is not None:
                survivors.append(idx)
        if not survivors:
            return None
        if len(survivors) == 1:
            return survivors[0]
        root = self.delta.add_node(DeltaNode(DeltaKind.ROOT))
        for s in survivors:
            self.delta.add_edge(root.index, s)
        return root.index

    def step_data(self, nl: DataNode, nr: DataNode, ctx: Context):
        key = ("d", nl.id, nr.id)
        if key in self.visited:
            return []
        self.visited.add(key)
        self.stats.aligned_steps += 1
        self.stats.aligned_pairs.append((key[1], key[2]))
        if data_diff(nl, nr, self.registry, self.load_left, self.load_right):
            ctx = self.record(DeltaNode.data(nl.id, nr.id), ctx).index
        al = self.left.up_d(nl)
        ar = self.right.up_d(nr)
        if al is None and ar is None:
            return []
        if al is None or ar is None:
            # one side reached a workflow input, the other keeps going
            gl = _fragment(self.left, al, None) if al else ()
            gr = _fragment(self.right, ar, None) if ar else ()
            self.record(DeltaNode.fragments(gl, gr, nl.id, nr.id), ctx)
            return []
        return [("activity", al, ar, ctx)]

    def step_activity(self, al: ActivityNode, ar: ActivityNode, ctx: Context):
        key = ("a", al.id, ar.id)
        if key in self.visited:
            return []
        self.visited.add(key)
        self.stats.aligned_steps += 1
        self.stats.aligned_pairs.append((key[1], key[2]))
        verdict = a_diff(al, ar)
        if verdict is ADiff.VERSION:
            ctx = self.record(DeltaNode.version(al, ar), ctx).index
        elif verdict is ADiff.SERVICE:
            ctx = self.record(DeltaNode.service(al, ar), ctx).index
            found = find_node(self.left, self.right, al, ar, self.stats)
            if not found.found:
                if found.fragment_left != (al.id,) or found.fragment_right != (ar.id,):
                    self.record(DeltaNode.fragments(found.fragment_left, found.fragment_right, al.id, ar.id), ctx)
                return []
            ml, mr = found.match_left, found.match_right
            fp = self.record(
                DeltaNode.fragments(found.fragment_left, found.fragment_right, al.id, ar.id, sync=(ml, mr)),
                ctx,
            )
            if is_delta_stop(self.delta, self.syncs, sync_key(fp)):
                return []
            ctx = fp.index
            sync_pair = ("a", ml.id, mr.id)
            if sync_pair in self.visited:
                return []
            self.visited.add(sync_pair)
            if a_diff(ml, mr) is ADiff.VERSION:
                ctx = self.record(DeltaNode.version(ml, mr), ctx).index
            al, ar = ml, mr
        return self._branch(al, ar, ctx)

    def _branch(self, al: ActivityNode, ar: ActivityNode, ctx: Context):
        ports = al.in_ports
        if isinstance(ctx, _Frame) and len(ports) > 1:
            frame = _Frame()
            ctx.children.append(frame)
            ctx = frame
        return [
            ("data", self.left.up_s(al, p), self.right.up_s(ar, p), ctx)
            for p in ports
        ]


def pdiff(
    trace_left: ProvenanceTrace,
    trace_right: ProvenanceTrace,
    start_left: DataNode | str,
    start_right: DataNode | str,
    registry: Optional[ComparatorRegistry] = None,
    load_left: Optional[ContentLoader] = None,
    load_right: Optional[ContentLoader] = None,
    stats: Optional[DiffStats] = None,
    check: bool = True,
) -> DeltaGraph:
    """Diff two traces from a pair of workflow outputs.

    Returns an empty delta iff no mismatch exists on the traversed closure.

    Raises:
        ValueError: a start node is not a workflow output of its trace, or a
            trace fails validation (when ``check`` is set).
    """
    if check:
        for side, trace in (("left", trace_left), ("right", trace_right)):
            problems = validate(trace)
            if problems:
                raise ValueError(f"{side} trace invalid: {problems[0]}")
    start_left = _resolve_start(trace_left, start_left, "left")
    start_right = _resolve_start(trace_right, start_right, "right")
    differ = _Differ(
        trace_left,
        trace_right,
        registry or ComparatorRegistry.default(),
        load_left,
        load_right,
        stats if stats is not None else DiffStats(),
    )
    return differ.run(start_left, start_right)


def _resolve_start(trace: ProvenanceTrace, start, side: str) -> DataNode:
    node_id = start if isinstance(start, str) else start.id
    outputs = {d.id: d for d in trace.workflow_outputs()}
    if node_id not in outputs:
        raise ValueError(f"{side} start {node_id!r} is not a workflow output")
    return outputs[node_id]


# -- whole-run diffing ----------------------------------------------------


def output_key(trace: ProvenanceTrace, d: DataNode) -> tuple[str, str]:
    """Stable name for a workflow output: producing service and output port."""
    try:
        producer = trace.up_d(d)
    except TraceError:
        producer = None
    if producer is None:
        return ("", "")
    return (producer.service_id, trace.producer_port(d.id) or "")


def pair_outputs(left: ProvenanceTrace, right: ProvenanceTrace):
    """Pair workflow outputs by name; leftovers pair in sorted order.

    Returns ``(pairs, unmatched_left, unmatched_right)``.
    """
    def keyed(trace):
        return sorted(((output_key(trace, d), d.id, d) for d in trace.workflow_outputs()), key=lambda t: t[:2])

    lk, rk = keyed(left), keyed(right)
    pairs = []
    rest_r = list(rk)
    rest_l = []
    for key, did, d in lk:
        hit = next((i for i, t in enumerate(rest_r) if t[0] == key), None)
        if hit is None:
            rest_l.append((key, did, d))
        else:
            pairs.append((d, rest_r.pop(hit)[2]))
    n = min(len(rest_l), len(rest_r))
    pairs.extend((rest_l[i][2], rest_r[i][2]) for i in range(n))
    pairs.sort(key=lambda p: (output_key(left, p[0]), p[0].id))
    return pairs, [t[2] for t in rest_l[n:]], [t[2] for t in rest_r[n:]]


def _unmatched_output(trace: ProvenanceTrace, d: DataNode) -> tuple[str, ...]:
    producer = trace.up_d(d)
    above = tuple(a.id for a, _ in upward_bfs(trace, producer)) if producer else ()
    return (d.id,) + above


@dataclass
class RunDiff:
    delta: DeltaGraph
    pairs: list[tuple[DataNode, DataNode]]
    per_output: list[DeltaGraph]
    stats: list[DiffStats]


def diff_runs(
    trace_left: ProvenanceTrace,
    trace_right: ProvenanceTrace,
    registry: Optional[ComparatorRegistry] = None,
    load_left: Optional[ContentLoader] = None,
    load_right: Optional[ContentLoader] = None,
) -> RunDiff:
    """Diff every paired output and merge the per-output deltas.

    Outputs without a counterpart become one-sided fragment pairs.
    """
    for side, trace in (("left", trace_left), ("right", trace_right)):
        problems = validate(trace)
        if problems:
            raise ValueError(f"{side} trace invalid: {problems[0]}")
    pairs, only_left, only_right = pair_outputs(trace_left, trace_right)
    deltas, all_stats = [], []
    for dl, dr in pairs:
        stats = DiffStats()
        deltas.append(
            pdiff(trace_left, trace_right, dl, dr, registry, load_left, load_right, stats, check=False)
        )
        all_stats.append(stats)
    for d in only_left:
        g = DeltaGraph()
        g.add_node(DeltaNode.fragments(_unmatched_output(trace_left, d), (), left=d.id))
        deltas.append(g)
    for d in only_right:
        g = DeltaGraph()
        g.add_node(DeltaNode.fragments((), _unmatched_output(trace_right, d), right=d.id))
        deltas.append(g)
    return RunDiff(merge_deltas(deltas), pairs, deltas, all_stats)


def mismatch_records(delta: DeltaGraph) -> set[tuple[Optional[str], Optional[str]]]:
    """Flatten a delta to node-pair records.

    Data, version and service mismatches give ``(left, right)``; fragment
    members give ``(id, None)`` or ``(None, id)``.
    """
    out: set[tuple[Optional[str], Optional[str]]] = set()
    for n in delta.nodes:
        if n.kind in (DeltaKind.DATA, DeltaKind.VERSION, DeltaKind.SERVICE):
            out.add((n.left, n.right))
        elif n.kind is DeltaKind.FRAGMENT:
            out.update((x, None) for x in n.left_fragment or ())
            out.update((None, x) for x in n.right_fragment or ())
    return out

"""Diff reports: verdicts plus text, JSON and CSV renderings."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum

from .delta import DeltaGraph, DeltaKind, DeltaNode
from .pdiff import DiffStats, RunDiff


class Verdict(str, Enum):
    IDENTICAL = "identical"
    DIVERGENT = "divergent"
    NO_SYNC = "noSyncPoint"


def is_failed_resync(node: DeltaNode) -> bool:
    """A fragment pair left by a resynchronisation search that found nothing."""
    return (
        node.kind is DeltaKind.FRAGMENT
        and not node.synced
        and bool(node.left_fragment)
        and bool(node.right_fragment)
    )


def verdict_of(delta: DeltaGraph) -> Verdict:
    if not delta:
        return Verdict.IDENTICAL
    if any(is_failed_resync(n) for n in delta.nodes):
        return Verdict.NO_SYNC
    return Verdict.DIVERGENT


EXIT_CODES = {Verdict.IDENTICAL: 0, Verdict.DIVERGENT: 1, Verdict.NO_SYNC: 1}


@dataclass
class DiffReport:
    delta: DeltaGraph
    outputs: list[tuple[str, str]] = field(default_factory=list)
    stats: list[DiffStats] = field(default_factory=list)

    @classmethod
    def from_run(cls, run: RunDiff) -> DiffReport:
        return cls(run.delta, [(l.id, r.id) for l, r in run.pairs], run.stats)

    @property
    def summary(self) -> dict[str, int]:
        return self.delta.summary()

    @property
    def verdict(self) -> Verdict:
        return verdict_of(self.delta)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "summary": self.summary,
            "outputs": [list(p) for p in self.outputs],
            "nodes": [_node_dict(n) for n in self.delta.nodes],
            "edges": [list(e) for e in self.delta.edges],
            "joins": [list(j) for j in self.delta.joins],
            "steps": [
                {"aligned": s.aligned_steps, "findNodeComparisons": s.findnode_comparisons}
                for s in self.stats
            ],
        }

    def render(self, fmt: str = "text") -> str:
        if fmt == "json":
            return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        if fmt == "csv":
            return self._csv()
        if fmt == "text":
            return self._text()
        raise ValueError(f"unknown format {fmt!r}")

    def _text(self) -> str:
        lines = [f"verdict: {self.verdict.value}"]
        for l, r in self.outputs:
            lines.append(f"output: {l} <-> {r}")
        lines.append("summary: " + " ".join(f"{k}={v}" for k, v in self.summary.items()))
        if self.delta:
            lines.append("delta:")
            lines.extend(_tree_lines(self.delta))
        return "\n".join(lines) + "\n"

    def _csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "kind", "left", "right", "parents", "syncService"])
        for n in self.delta.nodes:
            parents = " ".join(str(p) for p in sorted(self.delta.parents(n.index)))
            w.writerow([n.index, n.kind.value, n.left_label, n.right_label, parents, n.sync_service or ""])
        return buf.getvalue()


def _node_dict(n: DeltaNode) -> dict:
    out = {"index": n.index, "kind": n.kind.value}
    if n.kind is DeltaKind.ROOT:
        return out
    out["left"], out["right"] = n.left, n.right
    if n.kind in (DeltaKind.SERVICE, DeltaKind.VERSION):
        out["leftService"], out["rightService"] = n.left_service, n.right_service
        out["leftVersion"], out["rightVersion"] = n.left_version, n.right_version
    if n.kind is DeltaKind.FRAGMENT:
        out["leftFragment"] = list(n.left_fragment or ())
        out["rightFragment"] = list(n.right_fragment or ())
        out["syncService"] = n.sync_service
        out["syncLeft"], out["syncRight"] = n.sync_left, n.sync_right
    return out


def _tree_lines(delta: DeltaGraph) -> list[str]:
    lines: list[str] = []
    printed: set[int] = set()
    stack = [(r, 1) for r in reversed(delta.roots)]
    while stack:
        idx, depth = stack.pop()
        pad = "  " * depth
        node = delta[idx]
        if idx in printed:
            lines.append(f"{pad}#{idx} (shared, see above)")
            continue
        printed.add(idx)
        lines.append(f"{pad}#{idx} {node.describe()}")
        stack.extend((c, depth + 1) for c in reversed(delta.children(idx)))
    return lines

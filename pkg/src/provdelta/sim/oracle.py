"""Exhaustive ground truth for small trace pairs.

Works from the raw used/genBy relations with precomputed all-pairs upward
distances and an unordered work set, so it shares no traversal code with
the lock-step differ. Resynchronisation points are chosen by enumerating
every ancestor pair rather than by breadth-first search.
"""

from __future__ import annotations

import math
from typing import Optional

from ..model import ProvenanceTrace
from ..pdiff import pair_outputs

MAX_ACTIVITIES = 20

Record = tuple[Optional[str], Optional[str]]


class OracleLimitError(ValueError):
    pass


class _Index:
    def __init__(self, trace: ProvenanceTrace):
        self.hash = {d.id: d.hash for d in trace.data_nodes}
        self.signature = {
            a.id: (a.service_id, a.service_version, a.in_ports, a.out_ports) for a in trace.activity_nodes
        }
        self.producer = {g.data: g.activity for g in trace.gen_by}
        self.input = {(u.activity, u.port): u.data for u in trace.used}
        ids = sorted(self.signature)
        self.dist = {x: {y: math.inf for y in ids} for x in ids}
        for x in ids:
            self.dist[x][x] = 0
        for u in trace.used:
            parent = self.producer.get(u.data)
            if parent is not None:
                self.dist[u.activity][parent] = min(self.dist[u.activity][parent], 1)
        # Floyd-Warshall on activity hops
        for k in ids:
            dk = self.dist[k]
            for i in ids:
                dik = self.dist[i][k]
                if dik == math.inf:
                    continue
                di = self.dist[i]
                for j in ids:
                    if dik + dk[j] < di[j]:
                        di[j] = dik + dk[j]

    def above(self, a: str) -> list[str]:
        """Activities reachable upward from ``a``, itself included."""
        return sorted(y for y, d in self.dist[a].items() if d < math.inf)


def _compatible(sl, sr) -> bool:
    return sl[0] == sr[0] and sl[2:] == sr[2:]


def _closure(L: _Index, R: _Index, out_l: str, out_r: str) -> set[Record]:
    records: set[Record] = set()
    work = {("d", out_l, out_r)}
    seen = set()
    while work:
        item = work.pop()
        if item in seen:
            continue
        seen.add(item)
        kind, l, r = item
        if kind == "d":
            if L.hash[l] != R.hash[r]:
                records.add((l, r))
            pl, pr = L.producer.get(l), R.producer.get(r)
            if pl is None and pr is None:
                continue
            if pl is None or pr is None:
                if pl is not None:
                    records.update((x, None) for x in L.above(pl))
                if pr is not None:
                    records.update((None, y) for y in R.above(pr))
                continue
            work.add(("a", pl, pr))
            continue

        sl, sr = L.signature[l], R.signature[r]
        if _compatible(sl, sr):
            if sl[1] != sr[1]:
                records.add((l, r))
            for port in sl[2]:
                work.add(("d", L.input[(l, port)], R.input[(r, port)]))
            continue

        records.add((l, r))
        best = None
        for x in L.above(l):
            for y in R.above(r):
                if (x, y) == (l, r) or not _compatible(L.signature[x], R.signature[y]):
                    continue
                dl, dr = L.dist[l][x], R.dist[r][y]
                key = (dl + dr, dl, L.signature[x][0], x, y)
                if best is None or key < best:
                    best = key
        if best is None:
            left_all, right_all = L.above(l), R.above(r)
            if left_all != [l] or right_all != [r]:
                records.update((x, None) for x in left_all)
                records.update((None, y) for y in right_all)
            continue
        x, y = best[3], best[4]
        records.update((g, None) for g in L.above(l) if 0 < L.dist[g][x] < math.inf)
        records.update((None, g) for g in R.above(r) if 0 < R.dist[g][y] < math.inf)
        work.add(("a", x, y))
    return records


def brute_force_delta(left: ProvenanceTrace, right: ProvenanceTrace, limit: int = MAX_ACTIVITIES) -> set[Record]:
    """Mismatch records for every output pair, in the same record shape as
    :func:`provdelta.pdiff.mismatch_records`."""
    for side, t in (("left", left), ("right", right)):
        if len(t.activity_nodes) > limit:
            raise OracleLimitError(f"{side} trace has {len(t.activity_nodes)} activities; limit is {limit}")
    L, R = _Index(left), _Index(right)
    pairs, only_left, only_right = pair_outputs(left, right)
    records: set[Record] = set()
    for dl, dr in pairs:
        records |= _closure(L, R, dl.id, dr.id)
    for d in only_left:
        records.add((d.id, None))
        if d.id in L.producer:
            records.update((x, None) for x in L.above(L.producer[d.id]))
    for d in only_right:
        records.add((None, d.id))
        if d.id in R.producer:
            records.update((None, y) for y in R.above(R.producer[d.id]))
    return records

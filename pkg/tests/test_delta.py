from provdelta.delta import (
    DeltaGraph,
    DeltaKind,
    DeltaNode,
    SyncRegistry,
    add_delta,
    is_delta_stop,
    merge_deltas,
    sync_key,
)
from provdelta.model import ActivityNode

S0 = ActivityNode("S0", "S0", "1", ("p0",), ("o0",))
S = ActivityNode("S", "S", "1", ("p0",), ("o0",))
SV2 = ActivityNode("Sv2", "S", "2", ("p0",), ("o0",))


def test_add_to_empty_gives_single_root():
    g = DeltaGraph()
    add_delta(g, DeltaNode.data("x", "x'"), None)
    assert len(g) == 1 and g.roots == [0]


def test_version_under_data_is_a_path():
    g = DeltaGraph()
    top = add_delta(g, DeltaNode.data("z", "z'"), None)
    add_delta(g, DeltaNode.version(S, SV2), top.index)
    assert [[n.kind for n in p] for p in g.paths()] == [[DeltaKind.DATA, DeltaKind.VERSION]]


def test_second_sync_joins_instead_of_copying():
    g, reg = DeltaGraph(), SyncRegistry()
    first = add_delta(g, DeltaNode.fragments(["S0'"], ["S3'"], sync=(S0, S0)), None, reg)
    assert not is_delta_stop(g, reg, sync_key(first))
    above = add_delta(g, DeltaNode.version(S, SV2), first.index, reg)
    second = add_delta(g, DeltaNode.fragments(["S0'"], [], sync=(S0, S0)), None, reg)
    assert is_delta_stop(g, reg, sync_key(second))
    assert g.joins == [(second.index, first.index)]
    assert g.children(second.index) == [above.index]
    assert len(g.by_kind(DeltaKind.VERSION)) == 1
    assert g.is_acyclic()


def test_unseen_sync_does_not_stop():
    g, reg = DeltaGraph(), SyncRegistry()
    node = add_delta(g, DeltaNode.fragments(["a"], ["b"], sync=(S, SV2)), None, reg)
    assert not is_delta_stop(g, reg, sync_key(node))
    assert not is_delta_stop(g, reg, None)


def test_merge_rules():
    assert not merge_deltas([])
    one = DeltaGraph()
    one.add_node(DeltaNode.data("a", "b"))
    assert merge_deltas([DeltaGraph(), one]) is one
    two = DeltaGraph()
    n = two.add_node(DeltaNode.data("c", "d"))
    two.add_edge(n.index, two.add_node(DeltaNode.data("e", "f")).index)
    merged = merge_deltas([one, two])
    root = merged.roots
    assert len(root) == 1 and merged[root[0]].kind is DeltaKind.ROOT
    assert sorted(merged[c].left for c in merged.children(root[0])) == ["a", "c"]
    assert len(merged) == 4


def test_labels():
    assert DeltaNode.version(S, SV2).describe() == "versionMismatch <S@1, S@2>"
    frag = DeltaNode.fragments(["x", "y"], [])
    assert frag.describe() == "fragmentPair <[x, y], []> no-sync"

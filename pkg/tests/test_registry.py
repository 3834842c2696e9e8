import pytest

from provdelta.ddiff import (
    MODEL_MIME,
    ComparatorError,
    ComparatorRegistry,
    bytes_similarity,
    data_diff,
)
from provdelta.model import DataKind, DataNode, content_hash

STORE = {
    "a.csv": b"Name,Value\n1,2\n",
    "b.csv": b"name,value\n1,2\n",
    "c.csv": b"name,value\n9,9\n",
}


def node(ref, kind=DataKind.PERSISTED, mime="text/csv"):
    content = STORE.get(ref, ref.encode())
    if kind is DataKind.TRANSIENT:
        return DataNode(ref, kind, content_hash(content))
    return DataNode(ref, kind, content_hash(content), mime, ref)


def test_transient_compares_hashes():
    reg = ComparatorRegistry.default()
    t1, t2 = node("x", DataKind.TRANSIENT), node("y", DataKind.TRANSIENT)
    assert data_diff(t1, t2, reg) is True
    assert data_diff(t1, node("x", DataKind.TRANSIENT), reg) is False


def test_persisted_uses_registered_comparator():
    strict = ComparatorRegistry.default()
    loose = ComparatorRegistry.default(ignore_case=True)
    a, b = node("a.csv"), node("b.csv")
    assert data_diff(a, b, strict, STORE.__getitem__) is True
    assert data_diff(a, b, loose, STORE.__getitem__) is False
    c = node("c.csv")
    # one of two lines shared
    assert data_diff(b, c, ComparatorRegistry.default(0.5), STORE.__getitem__) is False
    assert data_diff(b, c, ComparatorRegistry.default(0.6), STORE.__getitem__) is True


def test_without_loader_falls_back_to_hash():
    reg = ComparatorRegistry.default(ignore_case=True)
    assert data_diff(node("a.csv"), node("b.csv"), reg) is True


def test_missing_content_is_comparator_error():
    with pytest.raises(ComparatorError):
        data_diff(node("a.csv"), node("zz.csv"), ComparatorRegistry.default(), STORE.__getitem__)


def test_unknown_mime_uses_fallback():
    reg = ComparatorRegistry.default()
    assert reg.lookup("image/png") is bytes_similarity
    assert reg.knows("text/csv; charset=utf-8")
    assert reg.knows(MODEL_MIME)


def test_custom_comparator_and_range_check():
    reg = ComparatorRegistry.default().with_comparator("application/x-bad", lambda a, b, o: 1.5)
    with pytest.raises(ComparatorError):
        reg.similarity(b"a", b"b", "application/x-bad")


def test_threshold_bounds():
    with pytest.raises(ValueError):
        ComparatorRegistry.default(1.5)

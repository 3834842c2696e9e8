"""Type-specific data comparison.

Comparators map two byte strings (plus an option dict) to a similarity in
[0, 1]. :class:`ComparatorRegistry` picks one by MIME type and turns the score
into the boolean mismatch test used while diffing traces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Optional

from ..model import DataNode
from .ancova import AncovaError, AncovaResult, ModelPredictions, ancova_model_diff, model_similarity
from .text import TextDiffOptions, lcs_length, text_diff
from .xml import XMLDiffError, canonicalize, xml_diff

Comparator = Callable[[bytes, bytes, Mapping], float]
ContentLoader = Callable[[str], bytes]

DEFAULT_THRESHOLD = 0.999
DEFAULT_ALPHA = 0.05
MODEL_MIME = "application/x-model-predictions+csv"


class ComparatorError(RuntimeError):
    pass


def hash_diff(hash_left: str, hash_right: str) -> bool:
    """True (mismatch) iff the digests differ."""
    return hash_left != hash_right


def bytes_similarity(left: bytes, right: bytes, options: Mapping | None = None) -> float:
    return 1.0 if left == right else 0.0


def text_similarity(left: bytes, right: bytes, options: Mapping | None = None) -> float:
    options = options or {}
    opts = TextDiffOptions(
        ignore_whitespace=bool(options.get("ignore_whitespace", False)),
        ignore_case=bool(options.get("ignore_case", False)),
    )
    return text_diff(left, right, opts)


def xml_similarity(left: bytes, right: bytes, options: Mapping | None = None) -> float:
    return xml_diff(left, right)


_BUILTINS: dict[str, Comparator] = {
    "text/plain": text_similarity,
    "text/csv": text_similarity,
    "text/tab-separated-values": text_similarity,
    "application/xml": xml_similarity,
    "text/xml": xml_similarity,
    MODEL_MIME: model_similarity,
}


@dataclass(frozen=True)
class ComparatorRegistry:
    table: Mapping[str, Comparator] = field(default_factory=lambda: dict(_BUILTINS))
    threshold: float = DEFAULT_THRESHOLD
    options: Mapping = field(default_factory=dict)
    fallback: Comparator = bytes_similarity

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        object.__setattr__(self, "table", MappingProxyType(dict(self.table)))
        object.__setattr__(self, "options", MappingProxyType(dict(self.options)))

    @classmethod
    def default(cls, threshold: float = DEFAULT_THRESHOLD, **options) -> ComparatorRegistry:
        options.setdefault("alpha", DEFAULT_ALPHA)
        return cls(threshold=threshold, options=options)

    def with_comparator(self, mime_types, comparator: Comparator) -> ComparatorRegistry:
        if isinstance(mime_types, str):
            mime_types = [mime_types]
        table = dict(self.table)
        for m in mime_types:
            table[_base_mime(m)] = comparator
        return ComparatorRegistry(table, self.threshold, self.options, self.fallback)

    def knows(self, mime_type: Optional[str]) -> bool:
        return mime_type is not None and _base_mime(mime_type) in self.table

    def lookup(self, mime_type: Optional[str]) -> Comparator:
        if mime_type is None:
            return self.fallback
        return self.table.get(_base_mime(mime_type), self.fallback)

    def similarity(self, left: bytes, right: bytes, mime_type: Optional[str]) -> float:
        score = float(self.lookup(mime_type)(left, right, self.options))
        if not 0.0 <= score <= 1.0:
            raise ComparatorError(f"comparator for {mime_type!r} returned {score}")
        return score


def _base_mime(mime: str) -> str:
    return mime.split(";", 1)[0].strip().lower()


def data_diff(
    left: DataNode,
    right: DataNode,
    registry: ComparatorRegistry,
    load_left: Optional[ContentLoader] = None,
    load_right: Optional[ContentLoader] = None,
) -> bool:
    """Boolean mismatch test for two data nodes.

    Transient or mixed pairs compare digests. Persisted pairs with loadable
    content go through the MIME-selected comparator and mismatch when the
    similarity falls below the registry threshold.
    """
    if not (left.persisted and right.persisted):
        return hash_diff(left.hash, right.hash)
    if left.hash == right.hash:
        return False
    if left.content_ref is None or right.content_ref is None or load_left is None:
        return True
    load_right = load_right or load_left
    try:
        content_left = load_left(left.content_ref)
        content_right = load_right(right.content_ref)
    except (OSError, KeyError) as exc:
        raise ComparatorError(f"cannot resolve content: {exc}") from exc
    mime = left.mime_type if left.mime_type == right.mime_type else None
    return registry.similarity(content_left, content_right, mime) < registry.threshold


__all__ = [
    "AncovaError",
    "AncovaResult",
    "Comparator",
    "ComparatorError",
    "ComparatorRegistry",
    "ContentLoader",
    "DEFAULT_ALPHA",
    "DEFAULT_THRESHOLD",
    "MODEL_MIME",
    "ModelPredictions",
    "TextDiffOptions",
    "XMLDiffError",
    "ancova_model_diff",
    "bytes_similarity",
    "canonicalize",
    "data_diff",
    "hash_diff",
    "lcs_length",
    "model_similarity",
    "text_diff",
    "text_similarity",
    "xml_diff",
    "xml_similarity",
]

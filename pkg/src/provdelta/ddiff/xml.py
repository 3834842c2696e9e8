"""Structural similarity of XML documents after canonicalisation."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Union


class XMLDiffError(ValueError):
    pass


@dataclass
class XNode:
    tag: str
    attrs: dict[str, str] = field(default_factory=dict)
    children: list[Union["XNode", str]] = field(default_factory=list)

    def size(self) -> int:
        return 1 + len(self.attrs) + sum(1 if isinstance(c, str) else c.size() for c in self.children)


def canonicalize(text: str | bytes) -> str:
    """Canonical XML (C14N 2.0) with insignificant whitespace stripped.

    Comments are dropped. Prefixes survive here; :func:`canonical_tree`
    resolves names to ``{uri}local`` so prefix choice stops mattering.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        return ET.canonicalize(xml_data=text, strip_text=True)
    except ET.ParseError as exc:
        raise XMLDiffError(f"XML parse error: {exc}") from exc


def _convert(elem: ET.Element) -> XNode:
    node = XNode(elem.tag, dict(elem.attrib))
    if elem.text and elem.text.strip():
        node.children.append(elem.text.strip())
    for child in elem:
        if not isinstance(child.tag, str):
            # comment or processing instruction
            continue
        node.children.append(_convert(child))
        if child.tail and child.tail.strip():
            node.children.append(child.tail.strip())
    return node


def canonical_tree(text: str | bytes) -> XNode:
    canon = canonicalize(text)
    try:
        return _convert(ET.fromstring(canon))
    except ET.ParseError as exc:  # pragma: no cover - canonical output always parses
        raise XMLDiffError(str(exc)) from exc


def matched_nodes(a: XNode, b: XNode) -> int:
    """Nodes matched by a top-down, order-preserving alignment.

    Two elements align only when their qualified names agree; attributes match
    on equal name and value; children are aligned by dynamic programming.
    """
    memo: dict[tuple[int, int], int] = {}

    def match(x: XNode, y: XNode) -> int:
        key = (id(x), id(y))
        if key in memo:
            return memo[key]
        if x.tag != y.tag:
            memo[key] = 0
            return 0
        score = 1 + sum(1 for k, v in x.attrs.items() if y.attrs.get(k) == v)
        score += align(x.children, y.children)
        memo[key] = score
        return score

    def pair(x, y) -> int:
        if isinstance(x, str) or isinstance(y, str):
            return int(isinstance(x, str) and isinstance(y, str) and x == y)
        return match(x, y)

    def align(xs, ys) -> int:
        if not xs or not ys:
            return 0
        prev = [0] * (len(ys) + 1)
        for x in xs:
            cur = [0]
            for j, y in enumerate(ys):
                cur.append(max(prev[j + 1], cur[j], prev[j] + pair(x, y)))
            prev = cur
        return prev[-1]

    return match(a, b)


def xml_diff(left: str | bytes, right: str | bytes) -> float:
    """Matched node count over the larger canonical tree's node count."""
    a, b = canonical_tree(left), canonical_tree(right)
    return matched_nodes(a, b) / max(a.size(), b.size())

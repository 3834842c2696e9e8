"""Line-based similarity for text and CSV files."""

from __future__ import annotations

import re
from dataclasses import dataclass

_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class TextDiffOptions:
    ignore_whitespace: bool = False
    ignore_case: bool = False


def _decode(data: str | bytes) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def normalize_lines(text: str | bytes, opts: TextDiffOptions = TextDiffOptions()) -> list[str]:
    lines = _decode(text).splitlines()
    if opts.ignore_whitespace:
        lines = [_WS.sub("", line) for line in lines]
    if opts.ignore_case:
        lines = [line.casefold() for line in lines]
    return lines


def lcs_length(a: list, b: list) -> int:
    """Length of the longest common subsequence of two sequences."""
    # common prefix/suffix never change the LCS
    lo = 0
    while lo < len(a) and lo < len(b) and a[lo] == b[lo]:
        lo += 1
    hi_a, hi_b = len(a), len(b)
    while hi_a > lo and hi_b > lo and a[hi_a - 1] == b[hi_b - 1]:
        hi_a -= 1
        hi_b -= 1
    core_a, core_b = a[lo:hi_a], b[lo:hi_b]
    fixed = lo + (len(a) - hi_a)
    if not core_a or not core_b:
        return fixed
    if len(core_b) > len(core_a):
        core_a, core_b = core_b, core_a
    prev = [0] * (len(core_b) + 1)
    for x in core_a:
        cur = [0]
        for j, y in enumerate(core_b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return fixed + prev[-1]


def text_diff(left: str | bytes, right: str | bytes, opts: TextDiffOptions = TextDiffOptions()) -> float:
    """Fraction of lines left unchanged by an LCS line alignment.

    The denominator is the longer file's line count; two empty inputs score 1.
    """
    a = normalize_lines(left, opts)
    b = normalize_lines(right, opts)
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return lcs_length(a, b) / longest

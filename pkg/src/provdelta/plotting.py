"""Figures for diff reports, rendered off-screen to files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .ddiff.ancova import AncovaResult, ModelPredictions  # noqa: E402
from .delta import DeltaGraph, DeltaKind  # noqa: E402

KIND_COLOURS = {
    DeltaKind.DATA: "#9ecae1",
    DeltaKind.SERVICE: "#fc9272",
    DeltaKind.VERSION: "#fdd49e",
    DeltaKind.FRAGMENT: "#c7e9c0",
    DeltaKind.ROOT: "#d9d9d9",
}


def _layers(delta: DeltaGraph) -> dict[int, int]:
    """Longest-path depth from a root for every node."""
    depth = {r: 0 for r in delta.roots}
    order = list(delta.roots)
    i = 0
    while i < len(order):
        n = order[i]
        i += 1
        for c in delta.children(n):
            if depth.get(c, -1) < depth[n] + 1:
                depth[c] = depth[n] + 1
                order.append(c)
    return depth


def plot_delta(delta: DeltaGraph, path) -> None:
    """Draw the delta graph bottom-up: outputs at the bottom, causes above."""
    depth = _layers(delta)
    rows: dict[int, list[int]] = {}
    for n in sorted(depth):
        rows.setdefault(depth[n], []).append(n)
    width = max((len(r) for r in rows.values()), default=1)
    fig, ax = plt.subplots(figsize=(max(4.0, 3.2 * width), max(2.5, 1.1 * (len(rows) + 1))))
    pos = {}
    for d, members in rows.items():
        for i, n in enumerate(members):
            pos[n] = ((i + 0.5) * width / len(members), d)
    for p, c in delta.edges:
        (x0, y0), (x1, y1) = pos[p], pos[c]
        ax.annotate("", (x1, y1 - 0.18), (x0, y0 + 0.18), arrowprops={"arrowstyle": "->", "color": "0.4"})
    for a, b in delta.joins:
        (x0, y0), (x1, y1) = pos[a], pos[b]
        ax.plot([x0, x1], [y0, y1], ls=":", color="tab:green")
    for n, (x, y) in pos.items():
        node = delta[n]
        label = node.kind.value if node.kind is DeltaKind.ROOT else f"{node.left_label}\n{node.right_label}"
        ax.text(
            x, y, label, ha="center", va="center", fontsize=8,
            bbox={"boxstyle": "round", "fc": KIND_COLOURS[node.kind], "ec": "0.3"},
        )
    handles = [plt.Rectangle((0, 0), 1, 1, fc=c) for c in KIND_COLOURS.values()]
    ax.legend(handles, [k.value for k in KIND_COLOURS], loc="upper left", fontsize=7, frameon=False)
    ax.set_xlim(-0.2, width + 0.2)
    ax.set_ylim(-0.8, max(rows, default=0) + 0.8)
    ax.axis("off")
    ax.set_title("delta graph" if delta else "delta graph (empty)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_model_fit(left: ModelPredictions, right: ModelPredictions, result: AncovaResult, path) -> None:
    """Scatter both models' (estimated, actual) pairs with their fitted lines."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for m, name, colour in ((left, "left", "tab:blue"), (right, "right", "tab:orange")):
        ax.scatter(m.estimated, m.actual, s=12, color=colour, alpha=0.7, label=name)
        slope, icpt = np.polyfit(m.estimated, m.actual, 1)
        xs = np.linspace(m.estimated.min(), m.estimated.max(), 2)
        ax.plot(xs, slope * xs + icpt, color=colour)
    ax.set_xlabel("estimated")
    ax.set_ylabel("actual")
    verdict = "equivalent" if result.equivalent else "different"
    ax.set_title(f"{verdict}: p(slope)={result.slope_p:.3g}, p(intercept)={result.intercept_p:.3g}", fontsize=9)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)

"""Limb extraction from rooted trees and small connected covers of a graph.

A *branch* at ``u`` is ``u`` together with one child subtree; a *limb* is
``u`` plus any subset of its branches.  ``extract_limb`` finds a limb of
size in ``(x, 2x-1]`` whose removal (keeping the anchor) leaves the tree
connected, and ``cover_sectors`` applies it repeatedly to split a graph into
at most ``k`` connected sectors of size at most ``2*floor(n/(k+1)) + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import InvalidX, NotAStar
from .graph import Graph, RootedTree, bfs_tree, build_graph, star_center


@dataclass(frozen=True)
class Limb:
    vertices: frozenset[int]
    anchor: int


@dataclass(frozen=True)
class Cover:
    sectors: tuple[frozenset[int], ...]
    anchors: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.sectors)

    def format(self) -> str:
        lines = []
        for anchor, sector in zip(self.anchors, self.sectors):
            members = " ".join(str(v) for v in sorted(sector))
            lines.append(f"anchor: {anchor} | members: {members}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "Cover":
        sectors, anchors = [], []
        for i, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                head, tail = line.split("|")
                key, anchor = head.split(":")
                key2, members = tail.split(":")
                if key.strip() != "anchor" or key2.strip() != "members":
                    raise ValueError
                anchors.append(int(anchor))
                sectors.append(frozenset(int(v) for v in members.split()))
            except ValueError:
                raise ValueError(f"line {i}: expected 'anchor: v | members: v1 v2 ...'") from None
        return cls(tuple(sectors), tuple(anchors))


@dataclass(frozen=True)
class ColorMap:
    """Per-sector vertex colours; colours run from 1 and are distinct inside a sector."""

    colors: tuple[dict[int, int], ...]

    @cached_property
    def _by_color(self) -> tuple[dict[int, int], ...]:
        return tuple({c: v for v, c in cmap.items()} for cmap in self.colors)

    @property
    def palette_size(self) -> int:
        return max((max(c.values(), default=0) for c in self.colors), default=0)

    def color_of(self, v: int) -> int:
        """Colour of ``v`` in the lowest-indexed sector containing it."""
        for cmap in self.colors:
            if v in cmap:
                return cmap[v]
        raise KeyError(v)

    def vertex_with(self, sector: int, color: int) -> int | None:
        return self._by_color[sector].get(color)


def extract_limb(tree: RootedTree, x: int) -> Limb:
    n = len(tree)
    if x < 2 or x >= n:
        raise InvalidX(f"need 2 <= x < n, got x={x}, n={n}")
    sizes = tree.subtree_sizes()
    cap = 2 * x - 1
    u = tree.root
    while True:
        if sizes[u] <= cap:
            # base case; only reachable at the root or in a child subtree of size exactly 2x-1
            return Limb(frozenset(tree.subtree(u)), u)
        kids = sorted(tree.children[u], key=lambda c: (-sizes[c], c))
        largest = kids[0]
        branch = sizes[largest] + 1
        if branch > cap:
            u = largest
            continue
        members = [u, *tree.subtree(largest)]
        if branch <= x:
            count = branch
            for c in kids[1:]:
                members.extend(tree.subtree(c))
                count += sizes[c]
                if count > x:
                    break
        return Limb(frozenset(members), u)


def figure1_tree(x: int) -> Graph:
    """Root 0 with three children, each carrying ``x-2`` leaves (``n = 3x-2``)."""
    if x < 3:
        raise InvalidX(f"figure1_tree needs x >= 3, got {x}")
    edges = [(0, 1), (0, 2), (0, 3)]
    nxt = 4
    for mid in (1, 2, 3):
        for _ in range(x - 2):
            edges.append((mid, nxt))
            nxt += 1
    return build_graph(nxt, edges, kind="figure1")


def sector_size_bound(n: int, k: int) -> int:
    return 2 * (n // (k + 1)) + 1


def cover_sectors(graph: Graph, k: int) -> Cover:
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    remaining = set(range(graph.n))
    sectors: list[frozenset[int]] = []
    anchors: list[int] = []
    while True:
        m = len(remaining)
        if k == 1:
            sectors.append(frozenset(remaining))
            anchors.append(min(remaining))
            break
        if m <= k:
            for v in sorted(remaining):
                sectors.append(frozenset([v]))
                anchors.append(v)
            break
        tree = bfs_tree(graph.adj, min(remaining), remaining)
        limb = extract_limb(tree, m // (k + 1) + 1)
        sectors.append(limb.vertices)
        anchors.append(limb.anchor)
        remaining = (remaining - limb.vertices) | {limb.anchor}
        k -= 1
    return Cover(tuple(sectors), tuple(anchors))


def star_cover(graph: Graph, k: int) -> Cover:
    """Split the leaves of a star into ``k`` balanced groups, each joined with the hub."""
    hub = star_center(graph)
    if hub is None:
        raise NotAStar(f"{graph!r} is not a star")
    leaves = [v for v in range(graph.n) if v != hub]
    q, extra = divmod(len(leaves), k)
    sectors = []
    start = 0
    for j in range(k):
        size = q + (1 if j < extra else 0)
        sectors.append(frozenset([hub, *leaves[start:start + size]]))
        start += size
    return Cover(tuple(sectors), (hub,) * k)


def color_sectors(cover: Cover, hub: int | None = None) -> ColorMap:
    """Colour each sector's vertices ``1..|sector|`` in ascending vertex order.

    With ``hub`` given (star mode) the hub takes the top colour, the size of
    the largest sector, in every sector, and the other vertices are numbered
    from 1.
    """
    top = max(len(s) for s in cover.sectors)
    colors = []
    for sector in cover.sectors:
        others = sorted(v for v in sector if v != hub)
        cmap = {v: i for i, v in enumerate(others, start=1)}
        if hub is not None and hub in sector:
            cmap[hub] = top
        colors.append(cmap)
    return ColorMap(tuple(colors))


def sector_centers(graph: Graph, cover: Cover) -> tuple[int, ...]:
    """Lowest-index center of each sector's induced subgraph."""
    out = []
    for sector in cover.sectors:
        best, best_ecc = -1, len(sector) + 1
        for s in sorted(sector):
            tree = bfs_tree(graph.adj, s, set(sector))
            depth = {s: 0}
            for v in tree.vertices[1:]:
                depth[v] = depth[tree.parent[v]] + 1
            ecc = max(depth.values())
            if ecc < best_ecc:
                best, best_ecc = s, ecc
        out.append(best)
    return tuple(out)

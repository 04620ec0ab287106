"""Undirected connected graphs, hop metrics and the standard families used in experiments.

Vertices are the integers ``0..n-1``.  Display code adds one to match the
usual ``v_1 .. v_n`` labelling.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DisconnectedGraph, InvalidEdge, InvalidSize

GRAPH_KINDS = ("path", "cycle", "star", "complete", "random_tree", "random_connected")


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    adj: tuple[tuple[int, ...], ...]
    kind: str = field(default="custom", compare=False)

    def __repr__(self) -> str:
        return f"Graph(kind={self.kind!r}, n={self.n}, m={self.edge_count})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self) -> int:
        return hash((self.n, self.adj))

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    @cached_property
    def adj_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.adj)

    @cached_property
    def distances(self) -> np.ndarray:
        return all_pairs_distances(self)

    @cached_property
    def distance_rows(self) -> list[list[int]]:
        # plain lists: indexing numpy scalars in per-turn loops is several times slower
        return self.distances.tolist()

    @cached_property
    def radius(self) -> int:
        return radius_and_centers(self, self.distances)[0]

    @cached_property
    def centers(self) -> tuple[int, ...]:
        return radius_and_centers(self, self.distances)[1]

    @cached_property
    def next_hops(self) -> list[list[int]]:
        """``next_hops[a][b]`` is the first vertex after ``a`` on a shortest path to ``b``."""
        d = self.distances
        table = []
        for a in range(self.n):
            row = [a] * self.n
            # adj is sorted, so the first qualifying neighbour has the lowest index
            for u in reversed(self.adj[a]):
                closer = np.flatnonzero(d[u] == d[a] - 1)
                for b in closer.tolist():
                    row[b] = u
            table.append(row)
        return table

    def next_hop(self, a: int, b: int) -> int:
        """First vertex after ``a`` on a shortest ``a``-``b`` path, lowest index on ties."""
        return self.next_hops[a][b]

    def shortest_path(self, a: int, b: int) -> list[int]:
        path = [a]
        while a != b:
            a = self.next_hop(a, b)
            path.append(a)
        return path


@dataclass(frozen=True)
class RootedTree:
    root: int
    parent: dict[int, int]
    children: dict[int, tuple[int, ...]]

    @property
    def vertices(self) -> list[int]:
        """Vertices in BFS order from the root."""
        out = [self.root]
        for v in out:
            out.extend(self.children[v])
        return out

    def __len__(self) -> int:
        return len(self.children)

    def subtree_sizes(self) -> dict[int, int]:
        sizes = {}
        for v in reversed(self.vertices):
            sizes[v] = 1 + sum(sizes[c] for c in self.children[v])
        return sizes

    def subtree(self, v: int) -> list[int]:
        out = [v]
        for u in out:
            out.extend(self.children[u])
        return out

    def euler_walk(self) -> list[int]:
        """Closed depth-first walk from the root visiting children in ascending order."""
        walk = [self.root]
        stack = [(self.root, iter(self.children[self.root]))]
        while stack:
            v, it = stack[-1]
            c = next(it, None)
            if c is None:
                stack.pop()
                if stack:
                    walk.append(stack[-1][0])
            else:
                walk.append(c)
                stack.append((c, iter(self.children[c])))
        return walk


def _normalize_edges(n: int, edges: Iterable[Sequence[int]]) -> list[set[int]]:
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidEdge(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
        if u == v:
            raise InvalidEdge(f"self-loop at vertex {u}")
        nbrs[u].add(v)
        nbrs[v].add(u)
    return nbrs


def _reachable(adj: Sequence[Iterable[int]], start: int) -> int:
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return len(seen)


def build_graph(n: int, edges: Iterable[Sequence[int]], kind: str = "custom") -> Graph:
    if n < 1:
        raise InvalidSize(f"graph needs at least one vertex, got n={n}")
    nbrs = _normalize_edges(n, edges)
    if _reachable(nbrs, 0) != n:
        raise DisconnectedGraph(f"graph on {n} vertices is not connected")
    return Graph(n, tuple(tuple(sorted(s)) for s in nbrs), kind)


def _prufer_tree(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    seq = rng.integers(0, n, size=n - 2).tolist()
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for v in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, v))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, v)
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return edges


def generate(kind: str, n: int, seed: int = 0) -> Graph:
    """Build a named graph family.  Random kinds are pure functions of ``(n, seed)``."""
    if n < 1:
        raise InvalidSize(f"n must be positive, got {n}")
    if kind == "path":
        edges = [(i, i + 1) for i in range(n - 1)]
    elif kind == "cycle":
        if n < 3:
            raise InvalidSize(f"cycle needs n >= 3, got {n}")
        edges = [(i, (i + 1) % n) for i in range(n)]
    elif kind == "star":
        edges = [(0, i) for i in range(1, n)]
    elif kind == "complete":
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    elif kind == "random_tree":
        edges = _prufer_tree(n, np.random.default_rng(seed))
    elif kind == "random_connected":
        rng = np.random.default_rng(seed)
        if n <= 2:
            edges = [(i, i + 1) for i in range(n - 1)]
        else:
            lo = math.log(n) / n
            p = float(rng.uniform(min(1.0, lo), min(1.0, 3 * lo)))
            iu, ju = np.triu_indices(n, 1)
            while True:
                keep = rng.random(iu.size) < p
                edges = list(zip(iu[keep].tolist(), ju[keep].tolist()))
                nbrs = _normalize_edges(n, edges)
                if _reachable(nbrs, 0) == n:
                    break
    else:
        raise ValueError(f"unknown graph kind {kind!r}; expected one of {GRAPH_KINDS}")
    return build_graph(n, edges, kind)


def all_pairs_distances(graph: Graph) -> np.ndarray:
    n = graph.n
    dist = np.full((n, n), -1, dtype=np.int32)
    adj = graph.adj
    for s in range(n):
        row = [-1] * n
        row[s] = 0
        frontier = [s]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for v in frontier:
                for u in adj[v]:
                    if row[u] < 0:
                        row[u] = d
                        nxt.append(u)
            frontier = nxt
        dist[s] = row
    return dist


def radius_and_centers(graph: Graph, dist: np.ndarray | None = None) -> tuple[int, tuple[int, ...]]:
    if dist is None:
        dist = graph.distances
    ecc = dist.max(axis=1)
    radius = int(ecc.min())
    return radius, tuple(int(v) for v in np.flatnonzero(ecc == radius))


def bfs_tree(adj: Sequence[Iterable[int]], root: int, allowed: set[int] | None = None) -> RootedTree:
    """BFS spanning tree of the (optionally induced) subgraph reachable from ``root``.

    ``adj`` lists must be sorted so that children come out in ascending order.
    """
    parent: dict[int, int] = {}
    children: dict[int, list[int]] = {root: []}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if u in children or (allowed is not None and u not in allowed):
                continue
            parent[u] = v
            children[u] = []
            children[v].append(u)
            queue.append(u)
    return RootedTree(root, parent, {v: tuple(c) for v, c in children.items()})


def rooted_spanning_tree(graph: Graph, root: int) -> RootedTree:
    if not 0 <= root < graph.n:
        raise InvalidEdge(f"root {root} outside [0, {graph.n})")
    return bfs_tree(graph.adj, root)


def tree_to_graph(tree: RootedTree, kind: str = "tree") -> Graph:
    """The tree must span vertices ``0..len(tree)-1``."""
    return build_graph(len(tree), list(tree.parent.items()), kind)


def is_tree(graph: Graph) -> bool:
    return graph.edge_count == graph.n - 1


def path_order(graph: Graph) -> list[int] | None:
    """Vertices of a path graph from its lowest-index endpoint, or None if not a path."""
    if graph.n == 1:
        return [0]
    if not is_tree(graph) or any(len(a) > 2 for a in graph.adj):
        return None
    start = min(v for v in range(graph.n) if len(graph.adj[v]) == 1)
    order = [start]
    prev = -1
    while len(order) < graph.n:
        v = order[-1]
        nxt = next(u for u in graph.adj[v] if u != prev)
        prev = v
        order.append(nxt)
    return order


def cycle_order(graph: Graph) -> list[int] | None:
    """Vertices of a cycle graph starting at 0 towards its lower neighbour, or None."""
    if graph.n < 3 or graph.edge_count != graph.n or any(len(a) != 2 for a in graph.adj):
        return None
    order = [0, graph.adj[0][0]]
    while len(order) < graph.n:
        a, b = order[-2], order[-1]
        order.append(next(u for u in graph.adj[b] if u != a))
    return order


def star_center(graph: Graph) -> int | None:
    if graph.n == 1:
        return 0
    hubs = [v for v in range(graph.n) if len(graph.adj[v]) == graph.n - 1]
    if not hubs or graph.edge_count != graph.n - 1:
        return None
    return hubs[0]


def is_complete(graph: Graph) -> bool:
    return all(len(a) == graph.n - 1 for a in graph.adj)


def read_edge_list(path: str | Path) -> Graph:
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise InvalidEdge(f"{path}: first line must be 'n m'")
    n, m = int(lines[0][0]), int(lines[0][1])
    body = lines[1:]
    if len(body) != m:
        raise InvalidEdge(f"{path}: header promises {m} edges, found {len(body)}")
    for i, parts in enumerate(body, start=2):
        if len(parts) != 2:
            raise InvalidEdge(f"{path}:{i}: expected 'u v'")
    return build_graph(n, [(int(u), int(v)) for u, v in body], kind=Path(path).stem)


def write_edge_list(graph: Graph, path: str | Path) -> None:
    edges = graph.edges()
    text = [f"{graph.n} {len(edges)}"] + [f"{u} {v}" for u, v in edges]
    Path(path).write_text("\n".join(text) + "\n")

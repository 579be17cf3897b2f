"""Minimum cycle basis of the facet-hinge graph (Horton's construction).

Each hinge has unit weight, so a loop's weight is the number of hinges it
crosses.  Candidates are generated from one breadth-first shortest-path
tree per root node and consumed in order of weight; within a weight level
they are ordered by their sorted hinge ids.  A greedy elimination over
two-element arithmetic keeps the independent ones.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

NON_PERFORATED = "non_perforated"
PERFORATED = "perforated"


@dataclass(frozen=True)
class Loop:
    id: int
    hinges: tuple  # hinge ids in traversal order
    nodes: tuple  # body ids, nodes[k] -> hinges[k] -> nodes[k+1]; nodes[-1] == nodes[0]
    directions: tuple  # +1 when hinges[k] is crossed from its P body to its Q body
    perforation: str = PERFORATED
    common_vertex: np.ndarray | None = field(default=None, compare=False)

    @property
    def crossings(self):
        return list(zip(self.hinges, self.directions))

    @property
    def weight(self):
        return len(self.hinges)

    @property
    def rows(self):
        return 3 if self.perforation == NON_PERFORATED else 6

    def reversed(self):
        """Same loop traversed the other way, starting from the same node."""
        n = len(self.hinges)
        hinges = tuple(self.hinges[(-1 - k) % n] for k in range(n))
        nodes = tuple(self.nodes[(-k) % n] for k in range(n)) + (self.nodes[0],)
        dirs = tuple(-self.directions[(-1 - k) % n] for k in range(n))
        return replace(self, hinges=hinges, nodes=nodes, directions=dirs)

    def rotated(self, start):
        """Same traversal, beginning with crossing index ``start``."""
        n = len(self.hinges)
        idx = [(start + k) % n for k in range(n)]
        return replace(self, hinges=tuple(self.hinges[i] for i in idx),
                       nodes=tuple(self.nodes[i] for i in idx) + (self.nodes[idx[0]],),
                       directions=tuple(self.directions[i] for i in idx))


@dataclass(frozen=True)
class CycleBasis:
    loops: tuple

    @property
    def L(self):
        return len(self.loops)

    @property
    def L_o(self):
        return sum(1 for lp in self.loops if lp.perforation == NON_PERFORATED)

    @property
    def L_k(self):
        return self.L - self.L_o

    @property
    def n_rows(self):
        return 3 * self.L_o + 6 * self.L_k

    @property
    def total_weight(self):
        return sum(lp.weight for lp in self.loops)

    def row_blocks(self):
        out, r = {}, 0
        for lp in self.loops:
            out[lp.id] = range(r, r + lp.rows)
            r += lp.rows
        return out


def _components(nodes, adj):
    seen, count = set(), 0
    for n in nodes:
        if n in seen:
            continue
        count += 1
        seen.add(n)
        stack = [n]
        while stack:
            x = stack.pop()
            for _, y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
    return count


def _bfs_tree(root, adj):
    dist = {root: 0}
    parent = {root: None}  # node -> (edge id, parent node)
    branch = {root: None}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for eid, y in adj[x]:
            if y in dist:
                continue
            dist[y] = dist[x] + 1
            parent[y] = (eid, x)
            branch[y] = y if x == root else branch[x]
            queue.append(y)
    return dist, parent, branch


def _path_edges(parent, x):
    out = []
    while parent[x] is not None:
        eid, x = parent[x]
        out.append(eid)
    return out


def minimum_cycle_basis_edges(nodes, edges):
    """Minimum cycle basis of an undirected multigraph with unit weights.

    ``nodes`` is an iterable of hashable ids and ``edges`` a sequence of
    ``(edge_id, u, v)`` with ``u != v``.  Returns the basis cycles as tuples
    of sorted edge ids, in selection order.
    """
    nodes = sorted(nodes)
    adj = {n: [] for n in nodes}
    for eid, u, v in edges:
        adj[u].append((eid, v))
        adj[v].append((eid, u))
    for lst in adj.values():
        lst.sort()
    dim = len(edges) - len(nodes) + _components(nodes, adj)
    if dim <= 0:
        return []

    # weights of every Horton candidate; paths are only built level by level
    trees = {}
    by_weight = {}
    for root in nodes:
        dist, parent, branch = _bfs_tree(root, adj)
        trees[root] = (parent, branch)
        for eid, x, y in edges:
            if x not in dist:
                continue
            if parent[x] is not None and parent[x][0] == eid:
                continue
            if parent[y] is not None and parent[y][0] == eid:
                continue
            if x != root and y != root and branch[x] == branch[y]:
                continue
            by_weight.setdefault(dist[x] + dist[y] + 1, []).append((root, eid, x, y))

    bit = {eid: 1 << k for k, (eid, _, _) in enumerate(edges)}
    pivots = {}  # leading bit -> reduced vector
    chosen = []
    for w in sorted(by_weight):
        level = set()
        for root, eid, x, y in by_weight[w]:
            parent, _ = trees[root]
            cyc = _path_edges(parent, x) + _path_edges(parent, y) + [eid]
            level.add(tuple(sorted(cyc)))
        for cyc in sorted(level):
            vec = 0
            for e in cyc:
                vec ^= bit[e]
            while vec:
                top = vec.bit_length() - 1
                if top not in pivots:
                    pivots[top] = vec
                    chosen.append(cyc)
                    break
                vec ^= pivots[top]
            if len(chosen) == dim:
                return chosen
    return chosen


def _order_cycle(edge_ids, graph):
    """Walk a simple cycle given as an edge set; start at its smallest node."""
    inc = {}
    for eid in edge_ids:
        e = graph.edges[eid]
        inc.setdefault(e.p, []).append(eid)
        inc.setdefault(e.q, []).append(eid)
    start = min(inc)
    node, prev = start, None
    hinges, nodes, dirs = [], [start], []
    for _ in range(len(edge_ids)):
        eid = min(x for x in inc[node] if x != prev)
        e = graph.edges[eid]
        nxt = e.other(node)
        hinges.append(eid)
        dirs.append(1 if node == e.p else -1)
        nodes.append(nxt)
        node, prev = nxt, eid
    return tuple(hinges), tuple(nodes), tuple(dirs)


def classify_loop(loop, graph):
    """Tag a loop non-perforated when all its hinge lines share an endpoint."""
    tol = graph.tolerance
    common = None
    for h in loop.hinges:
        pts = graph.edges[h].edge_vertices
        if common is None:
            common = [p for p in pts]
            continue
        common = [c for c in common if np.min(np.linalg.norm(pts - c, axis=1)) <= tol]
        if not common:
            break
    if common:
        return replace(loop, perforation=NON_PERFORATED, common_vertex=np.array(common[0]))
    return replace(loop, perforation=PERFORATED, common_vertex=None)


def minimum_cycle_basis(graph):
    """Minimum cycle basis of a :class:`~rigidfold.graph.FacetHingeGraph`."""
    cycles = minimum_cycle_basis_edges(
        graph.node_ids, [(e.id, e.p, e.q) for e in graph.edges])
    loops = []
    for k, cyc in enumerate(cycles):
        hinges, nodes, dirs = _order_cycle(cyc, graph)
        loops.append(classify_loop(Loop(k, hinges, nodes, dirs), graph))
    return CycleBasis(tuple(loops))


def bridges(graph):
    """Hinges whose removal disconnects the graph (brute force, for checks)."""
    out = []
    base = graph.n_components()
    for e in graph.edges:
        adj = {n: [] for n in graph.node_ids}
        for f in graph.edges:
            if f.id != e.id:
                adj[f.p].append((f.id, f.q))
                adj[f.q].append((f.id, f.p))
        if _components(graph.node_ids, adj) > base:
            out.append(e.id)
    return out

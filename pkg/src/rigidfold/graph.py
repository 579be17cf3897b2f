"""Facet-hinge graph: rigid bodies as nodes, revolute hinges as edges."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GraphError
from .model import HINGING, SOLDERING, apply_orientation, edge_facet_map
from .policy import DEFAULT_POLICY
from .validation import coincidence_tol, select_hinge_edge, validate_model


@dataclass(frozen=True)
class BodyNode:
    id: int
    member_facets: tuple  # ((sheet, facet), ...)


@dataclass(frozen=True)
class HingeEdge:
    id: int
    p: int  # body id on the side whose facet lists the edge as (a, b)
    q: int
    omega: np.ndarray = field(compare=False)
    point: np.ndarray = field(compare=False)
    edge_vertices: np.ndarray = field(compare=False)
    kind: str  # "intra" or "inter"
    sheet: int | None = None  # owning sheet for intra-sheet hinges
    edge_index: int | None = None  # pattern edge index, if listed
    connection: int | None = None
    facets: tuple = ()  # ((sheet, facet) on p side, (sheet, facet) on q side)
    # True when the q-side facet lists the edge in the opposite order
    phase_consistent: bool = True

    def other(self, node):
        return self.q if node == self.p else self.p


@dataclass
class FacetHingeGraph:
    nodes: list
    edges: list
    model: object  # oriented model the axes were read from
    facet_body: dict  # (sheet, facet) -> body id
    tolerance: float
    dropped: list = field(default_factory=list)  # hinges inside one body

    def __post_init__(self):
        self.adjacency = {n.id: [] for n in self.nodes}
        for e in self.edges:
            self.adjacency[e.p].append((e.id, e.q))
            self.adjacency[e.q].append((e.id, e.p))
        for lst in self.adjacency.values():
            lst.sort()
        self._node_index = {n.id: k for k, n in enumerate(self.nodes)}

    @property
    def node_ids(self):
        return [n.id for n in self.nodes]

    def node(self, nid):
        return self.nodes[self._node_index[nid]]

    def n_components(self):
        seen, count = set(), 0
        for n in self.node_ids:
            if n in seen:
                continue
            count += 1
            stack = [n]
            seen.add(n)
            while stack:
                x = stack.pop()
                for _, y in self.adjacency[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
        return count

    def cyclomatic_number(self):
        return len(self.edges) - len(self.nodes) + self.n_components()

    def root_body(self):
        return self.facet_body[(0, 0)]


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        # smallest facet id becomes the representative
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra


def _unit(v):
    n = np.linalg.norm(v)
    if n == 0:
        raise GraphError("zero-length hinge edge")
    return v / n


def build_graph(model, report=None, policy=DEFAULT_POLICY, orient=True):
    """Build the facet-hinge graph of a validated model.

    With ``orient=False`` the facet vertex orders are used exactly as
    stored; this is only useful for diagnosing orientation problems.
    """
    if report is None:
        report = validate_model(model, policy)
    if report.errors:
        codes = ", ".join(sorted(set(report.codes())))
        raise GraphError(f"model has validation errors: {codes}")
    if orient:
        model = apply_orientation(model, report.orientation_map)
    tol = coincidence_tol(model, policy)

    offsets = model.facet_offsets()
    gid = lambda ref: offsets[ref[0]] + ref[1]  # noqa: E731
    uf = _UnionFind(model.n_facets)
    for ci, c in enumerate(model.connections):
        if c.kind == SOLDERING or ci in report.auto_solder:
            uf.union(gid(c.a), gid(c.b))

    facet_body = {}
    members = {}
    for si, s in enumerate(model.sheets):
        for fi in range(len(s.facets)):
            body = uf.find(gid((si, fi)))
            facet_body[(si, fi)] = body
            members.setdefault(body, []).append((si, fi))
    nodes = [BodyNode(b, tuple(m)) for b, m in sorted(members.items())]

    edges, dropped = [], []

    def add(**kw):
        if kw["p"] == kw["q"]:
            dropped.append(kw)
            return
        edges.append(HingeEdge(id=len(edges), **kw))

    for si, s in enumerate(model.sheets):
        emap = edge_facet_map(s)
        listed = {}
        for ei, (a, b) in enumerate(s.edges):
            listed.setdefault((min(a, b), max(a, b)), ei)
        shared = [(k, u) for k, u in emap.items() if len(u) == 2 and u[0][0] != u[1][0]]
        shared.sort(key=lambda item: (0, listed[item[0]]) if item[0] in listed else (1, item[0]))
        for key, users in shared:
            (f1, d1), (f2, d2) = sorted(users)
            a, b = d1
            va, vb = s.coords[a], s.coords[b]
            add(p=facet_body[(si, f1)], q=facet_body[(si, f2)],
                omega=_unit(vb - va), point=va.copy(), edge_vertices=np.array([va, vb]),
                kind="intra", sheet=si, edge_index=listed.get(key),
                facets=((si, f1), (si, f2)), phase_consistent=d1 != d2)

    for ci, c in enumerate(model.connections):
        if c.kind != HINGING or ci in report.auto_solder:
            continue
        sel = select_hinge_edge(model, c, tol)
        if sel is None:
            raise GraphError(f"connection {ci}: hinge edge is missing or ambiguous")
        k, same = sel
        sheet = model.sheets[c.a[0]]
        f = sheet.facets[c.a[1]]
        va, vb = sheet.coords[f[k]], sheet.coords[f[(k + 1) % len(f)]]
        add(p=facet_body[c.a], q=facet_body[c.b],
            omega=_unit(vb - va), point=va.copy(), edge_vertices=np.array([va, vb]),
            kind="inter", connection=ci, facets=(c.a, c.b), phase_consistent=not same)

    return FacetHingeGraph(nodes, edges, model, facet_body, tol, dropped)

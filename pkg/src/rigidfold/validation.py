"""Schema checks run before graph construction.

Every finding is collected in a :class:`ValidationReport`; nothing here
raises for a bad model.
"""
from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np

from .errors import OrientationError
from .model import HINGING, SOLDERING, _orient_sheet, edge_facet_map, facet_edges
from .policy import DEFAULT_POLICY

Issue = namedtuple("Issue", "code location message")


@dataclass
class ValidationReport:
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    orientation_map: dict = field(default_factory=dict)
    # hinging connections that degenerate to a vertex contact; graph
    # construction merges them like soldering
    auto_solder: tuple = ()

    @property
    def ok(self):
        return not self.errors

    def codes(self):
        return [e.code for e in self.errors]

    def format(self):
        lines = []
        for tag, items in (("error", self.errors), ("warning", self.warnings)):
            for it in items:
                lines.append(f"{tag}: {it.code} at {it.location}: {it.message}")
        lines.append(f"errors: {len(self.errors)}")
        lines.append(f"warnings: {len(self.warnings)}")
        return "\n".join(lines)


def coincidence_tol(model, policy=DEFAULT_POLICY):
    diag = model.bbox_diagonal()
    return policy.coincidence * (diag if diag > 0 else 1.0)


def _facet_points(model, ref):
    s, f = ref
    sheet = model.sheets[s]
    return sheet.coords[list(sheet.facets[f])]


def coincident_vertices(model, a, b, tol):
    """Pairs (i, j) of facet-local vertex positions whose coordinates coincide."""
    pa, pb = _facet_points(model, a), _facet_points(model, b)
    d = np.linalg.norm(pa[:, None, :] - pb[None, :, :], axis=2)
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(d <= tol))]


def coincident_edges(model, a, b, tol):
    """Edges of facet ``a`` that coincide with an edge of facet ``b``.

    Returns a list of ``(k, same_direction)`` where ``k`` indexes the edge
    ``(f[k], f[k+1])`` of facet ``a`` as stored.
    """
    pairs = coincident_vertices(model, a, b, tol)
    match = {}
    for i, j in pairs:
        match.setdefault(i, set()).add(j)
    na = len(model.sheets[a[0]].facets[a[1]])
    nb = len(model.sheets[b[0]].facets[b[1]])
    out = []
    for k in range(na):
        i1, i2 = k, (k + 1) % na
        if i1 not in match or i2 not in match:
            continue
        for j1 in match[i1]:
            for j2 in match[i2]:
                if (j2 - j1) % nb == 1:
                    out.append((k, True))
                elif (j1 - j2) % nb == 1:
                    out.append((k, False))
    return out


def select_hinge_edge(model, conn, tol):
    """Resolve the active hinge edge of a hinging connection.

    Returns ``(k, same_direction)`` for facet ``conn.a`` or ``None`` when
    the connection is missing an edge or is ambiguous.
    """
    cands = coincident_edges(model, conn.a, conn.b, tol)
    if conn.hinge_edge is not None:
        pa = _facet_points(model, conn.a)
        h0, h1 = (np.asarray(p) for p in conn.hinge_edge)
        n = len(pa)
        for k, same in cands:
            e0, e1 = pa[k], pa[(k + 1) % n]
            fwd = np.linalg.norm(e0 - h0) <= tol and np.linalg.norm(e1 - h1) <= tol
            rev = np.linalg.norm(e0 - h1) <= tol and np.linalg.norm(e1 - h0) <= tol
            if fwd or rev:
                return k, same
        return None
    if len(cands) == 1:
        return cands[0]
    return None


def _plane_basis(pts):
    c = pts.mean(axis=0)
    _, s, vt = np.linalg.svd(pts - c)
    return c, vt, s


def _segments_intersect(p1, p2, q1, q2, eps):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_seg(a, b, c):
        return (min(a[0], b[0]) - eps <= c[0] <= max(a[0], b[0]) + eps
                and min(a[1], b[1]) - eps <= c[1] <= max(a[1], b[1]) + eps)

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and \
            ((d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)):
        return True
    if abs(d1) <= eps and on_seg(q1, q2, p1):
        return True
    if abs(d2) <= eps and on_seg(q1, q2, p2):
        return True
    if abs(d3) <= eps and on_seg(p1, p2, q1):
        return True
    if abs(d4) <= eps and on_seg(p1, p2, q2):
        return True
    return False


def check_facet(points, policy=DEFAULT_POLICY):
    """Return an error code for a bad facet polygon, or ``None``."""
    n = len(points)
    if n < 3:
        return "degenerate-facet"
    diam = max(np.linalg.norm(points[i] - points[j]) for i in range(n) for j in range(i + 1, n))
    if diam == 0:
        return "degenerate-facet"
    c, vt, s = _plane_basis(points)
    if s[1] <= 1e-12 * diam:
        return "degenerate-facet"
    dist = np.abs((points - c) @ vt[2])
    if dist.max() > policy.planarity * diam:
        return "non-planar-facet"
    uv = (points - c) @ vt[:2].T
    eps = 1e-12 * diam * diam
    for i in range(n):
        if np.linalg.norm(uv[i] - uv[(i + 1) % n]) <= 1e-12 * diam:
            return "non-simple-facet"
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_intersect(uv[i], uv[(i + 1) % n], uv[j], uv[(j + 1) % n], eps):
                return "non-simple-facet"
    return None


def _vertex_fans(sheet, emap):
    """Vertices whose incident facets are not edge-connected around them."""
    by_vertex = {}
    for fi, f in enumerate(sheet.facets):
        for v in set(f):
            by_vertex.setdefault(v, []).append(fi)
    bad = []
    for v, fs in by_vertex.items():
        if len(fs) < 2:
            continue
        parent = {f: f for f in fs}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (a, b), users in emap.items():
            if v not in (a, b) or len(users) != 2:
                continue
            f1, f2 = users[0][0], users[1][0]
            parent[find(f1)] = find(f2)
        if len({find(f) for f in fs}) > 1:
            bad.append(v)
    return sorted(bad)


def validate_model(model, policy=DEFAULT_POLICY):
    """Check a parsed model against the schema conventions."""
    rep = ValidationReport()
    err = lambda code, loc, msg: rep.errors.append(Issue(code, loc, msg))  # noqa: E731
    warn = lambda code, loc, msg: rep.warnings.append(Issue(code, loc, msg))  # noqa: E731
    tol = coincidence_tol(model, policy)

    for si, sheet in enumerate(model.sheets):
        nv = len(sheet.vertices)
        index_ok = True
        for fi, f in enumerate(sheet.facets):
            if any(not 0 <= v < nv for v in f):
                err("index-out-of-range", f"sheet {si} facet {fi}", "vertex index out of range")
                index_ok = False
        for ei, (a, b) in enumerate(sheet.edges):
            if not (0 <= a < nv and 0 <= b < nv):
                err("index-out-of-range", f"sheet {si} edge {ei}", "vertex index out of range")
                index_ok = False
        if not index_ok:
            continue

        for fi, f in enumerate(sheet.facets):
            if len(set(f)) != len(f) and len(f) >= 3:
                err("non-simple-facet", f"sheet {si} facet {fi}", "facet repeats a vertex")
                continue
            code = check_facet(sheet.coords[list(f)], policy)
            if code:
                err(code, f"sheet {si} facet {fi}", f"facet polygon failed check ({code})")

        emap = edge_facet_map(sheet)
        listed = {(min(a, b), max(a, b)) for a, b in sheet.edges}
        for key, users in sorted(emap.items()):
            if len(users) > 2:
                err("non-manifold-edge", f"sheet {si} edge {key}",
                    f"edge shared by {len(users)} facets")
            elif len(users) == 2 and key not in listed:
                warn("unlisted-shared-edge", f"sheet {si} edge {key}",
                     "shared facet edge is not in the pattern edge list; treated as a hinge")

        for v in _vertex_fans(sheet, emap):
            err("vertex-only-contact", f"sheet {si} vertex {v}",
                "facets on the same sheet touch only at this vertex")

        try:
            flips = _orient_sheet(sheet, si)
        except OrientationError as exc:
            err("orientation-conflict", f"sheet {si} facet {exc.facet}", str(exc))
        else:
            for fi, fl in flips.items():
                rep.orientation_map[(si, fi)] = fl
            if _n_components(sheet, emap) > 1:
                warn("disconnected-sheet", f"sheet {si}",
                     "facets are not edge-connected; components keep their stored orientation")

    # connections
    kinds_by_pair = {}
    seen_pairs = {}
    auto = []
    for ci, c in enumerate(model.connections):
        loc = f"connection {ci}"
        if c.a[0] == c.b[0]:
            err("same-sheet-connection", loc, "connected facets must lie on different sheets")
            continue
        pair = tuple(sorted((c.a[0], c.b[0])))
        kinds_by_pair.setdefault(pair, []).append((ci, c.kind))
        fpair = tuple(sorted((c.a, c.b)))
        if fpair in seen_pairs:
            err("duplicate-connection", loc,
                f"facet pair already connected by connection {seen_pairs[fpair]}")
            continue
        seen_pairs[fpair] = ci
        if c.kind != HINGING:
            continue
        cands = coincident_edges(model, c.a, c.b, tol)
        if not cands:
            shared = coincident_vertices(model, c.a, c.b, tol)
            if len(shared) == 1:
                warn("vertex-contact-soldered", loc,
                     "hinging facets share a single vertex; treated as soldering")
                auto.append(ci)
            else:
                err("no-hinge-edge", loc, "hinging facets share no coincident edge")
            continue
        if c.hinge_edge is not None:
            if select_hinge_edge(model, c, tol) is None:
                err("hinge-edge-mismatch", loc, "hinge_edge does not match a shared edge")
        elif len(cands) > 1:
            err("ambiguous-hinge", loc,
                f"{len(cands)} coincident edges; select the active one with hinge_edge")

    for pair, items in sorted(kinds_by_pair.items()):
        kinds = {k for _, k in items}
        if len(kinds) > 1:
            ids = ", ".join(str(ci) for ci, _ in items)
            err("mixed-connection-type", f"sheets {pair[0]}-{pair[1]}",
                f"connections {ids} mix hinging and soldering between the same sheets")

    rep.auto_solder = tuple(auto)
    return rep


def _n_components(sheet, emap):
    parent = list(range(len(sheet.facets)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for users in emap.values():
        if len(users) == 2:
            parent[find(users[0][0])] = find(users[1][0])
    return len({find(i) for i in range(len(parent))})


__all__ = ["Issue", "ValidationReport", "validate_model", "coincident_edges",
           "coincident_vertices", "select_hinge_edge", "coincidence_tol", "check_facet",
           "SOLDERING", "HINGING", "facet_edges"]

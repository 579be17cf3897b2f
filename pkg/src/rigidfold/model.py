"""Multi-sheet model description: sheets of vertices/edges/facets plus
inter-sheet connections, and its JSON file format.

File layout::

    {"sheets": [{"vertices": [[x, y, z], ...],
                 "edges": [[i, j], ...],
                 "facets": [[i0, i1, ...], ...],
                 "seed_orientation": "ccw" | "cw"}],
     "connections": [{"a": [sheet, facet], "b": [sheet, facet],
                      "type": "h" | "s",
                      "hinge_edge": [[x, y, z], [x, y, z]]}]}

``hinge_edge`` is optional and only meaningful for hinging connections.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ModelIndexError, ModelParseError, OrientationError, UnsupportedFeatureError

HINGING = "h"
SOLDERING = "s"


@dataclass(frozen=True)
class Sheet:
    vertices: tuple
    edges: tuple
    facets: tuple
    seed_orientation: str = "ccw"
    index: int = 0

    @cached_property
    def coords(self):
        return np.array(self.vertices, dtype=float).reshape(-1, 3)


@dataclass(frozen=True)
class Connection:
    a: tuple
    b: tuple
    kind: str
    hinge_edge: tuple | None = None


@dataclass(frozen=True)
class RFSModel:
    sheets: tuple
    connections: tuple = field(default_factory=tuple)

    @property
    def n_facets(self):
        return sum(len(s.facets) for s in self.sheets)

    def facet_offsets(self):
        """Global facet id of facet 0 on each sheet."""
        out, acc = [], 0
        for s in self.sheets:
            out.append(acc)
            acc += len(s.facets)
        return out

    def bbox_diagonal(self):
        pts = [s.coords for s in self.sheets if len(s.vertices)]
        if not pts:
            return 0.0
        allp = np.vstack(pts)
        return float(np.linalg.norm(allp.max(axis=0) - allp.min(axis=0)))


def make_sheet(vertices, edges, facets, seed_orientation="ccw", index=0):
    """Build a :class:`Sheet` from plain lists."""
    return Sheet(
        vertices=tuple(tuple(float(c) for c in v) for v in vertices),
        edges=tuple((int(a), int(b)) for a, b in edges),
        facets=tuple(tuple(int(i) for i in f) for f in facets),
        seed_orientation=seed_orientation,
        index=index,
    )


def make_model(sheets, connections=()):
    sheets = tuple(
        Sheet(s.vertices, s.edges, s.facets, s.seed_orientation, i) for i, s in enumerate(sheets)
    )
    return RFSModel(sheets, tuple(connections))


# -- parsing ---------------------------------------------------------------

def _json_line(text, key_path):
    """Best-effort line number of the first occurrence of a key in the text."""
    needle = f'"{key_path}"'
    idx = text.find(needle)
    return text.count("\n", 0, idx) + 1 if idx >= 0 else None


def _as_int(x, where):
    if isinstance(x, bool) or not isinstance(x, int):
        if isinstance(x, float) and x.is_integer():
            return int(x)
        raise ModelParseError(f"expected an integer, got {x!r}", field=where)
    return x


def _as_vec3(x, where):
    if not isinstance(x, (list, tuple)) or len(x) != 3:
        raise ModelParseError(f"expected a 3-component coordinate, got {x!r}", field=where)
    out = []
    for c in x:
        if isinstance(c, bool) or not isinstance(c, (int, float)) or not math.isfinite(c):
            raise ModelParseError(f"coordinate must be a finite number, got {c!r}", field=where)
        out.append(float(c))
    return tuple(out)


def model_from_dict(data, text=None):
    """Build and index-check a model from the decoded JSON document."""
    def line_of(key):
        return _json_line(text, key) if text else None

    if not isinstance(data, dict) or "sheets" not in data:
        raise ModelParseError("document must be an object with a 'sheets' list", field="sheets")
    raw_sheets = data["sheets"]
    if not isinstance(raw_sheets, list) or not raw_sheets:
        raise ModelParseError("'sheets' must be a non-empty list", field="sheets", line=line_of("sheets"))

    sheets = []
    for si, rs in enumerate(raw_sheets):
        base = f"sheets[{si}]"
        if not isinstance(rs, dict):
            raise ModelParseError("sheet must be an object", field=base)
        for key in ("vertices", "facets"):
            if key not in rs:
                raise ModelParseError(f"missing '{key}'", field=base)
        verts = [_as_vec3(v, f"{base}.vertices[{k}]") for k, v in enumerate(rs["vertices"])]
        nv = len(verts)

        edges = []
        for k, e in enumerate(rs.get("edges", [])):
            where = f"{base}.edges[{k}]"
            if not isinstance(e, (list, tuple)) or len(e) != 2:
                raise ModelParseError("edge must be a pair of vertex indices", field=where)
            a, b = (_as_int(x, where) for x in e)
            for x in (a, b):
                if not 0 <= x < nv:
                    raise ModelIndexError(
                        f"vertex index {x} out of range (sheet has {nv} vertices)",
                        field=where, line=line_of("edges"))
            edges.append((a, b))

        facets = []
        for k, f in enumerate(rs["facets"]):
            where = f"{base}.facets[{k}]"
            if not isinstance(f, (list, tuple)):
                raise ModelParseError("facet must be a list of vertex indices", field=where)
            idx = tuple(_as_int(x, where) for x in f)
            for x in idx:
                if not 0 <= x < nv:
                    raise ModelIndexError(
                        f"vertex index {x} out of range (sheet has {nv} vertices)",
                        field=where, line=line_of("facets"))
            facets.append(idx)

        orient = rs.get("seed_orientation", "ccw")
        if orient not in ("ccw", "cw"):
            raise ModelParseError(f"seed_orientation must be 'ccw' or 'cw', got {orient!r}",
                                  field=f"{base}.seed_orientation")
        sheets.append(Sheet(tuple(verts), tuple(edges), tuple(facets), orient, si))

    if sum(len(s.facets) for s in sheets) == 0:
        raise ModelParseError("model contains no facets", field="sheets")

    conns = []
    for ci, rc in enumerate(data.get("connections", [])):
        base = f"connections[{ci}]"
        if not isinstance(rc, dict):
            raise ModelParseError("connection must be an object", field=base)
        ends = []
        for key in ("a", "b"):
            ref = rc.get(key)
            if not isinstance(ref, (list, tuple)) or len(ref) != 2:
                raise ModelParseError("expected [sheet, facet]", field=f"{base}.{key}")
            s_i, f_i = (_as_int(x, f"{base}.{key}") for x in ref)
            if not 0 <= s_i < len(sheets):
                raise ModelIndexError(f"sheet index {s_i} out of range", field=f"{base}.{key}",
                                      line=line_of("connections"))
            if not 0 <= f_i < len(sheets[s_i].facets):
                raise ModelIndexError(f"facet index {f_i} out of range on sheet {s_i}",
                                      field=f"{base}.{key}", line=line_of("connections"))
            ends.append((s_i, f_i))
        kind = rc.get("type")
        if kind not in (HINGING, SOLDERING):
            raise ModelParseError(f"type must be 'h' or 's', got {kind!r}", field=f"{base}.type")
        hinge_edge = None
        if rc.get("hinge_edge") is not None:
            he = rc["hinge_edge"]
            if not isinstance(he, (list, tuple)) or len(he) != 2:
                raise ModelParseError("hinge_edge must be two coordinates", field=f"{base}.hinge_edge")
            hinge_edge = tuple(_as_vec3(p, f"{base}.hinge_edge") for p in he)
        conns.append(Connection(ends[0], ends[1], kind, hinge_edge))

    return RFSModel(tuple(sheets), tuple(conns))


def loads_model(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelParseError(exc.msg, line=exc.lineno) from exc
    return model_from_dict(data, text)


def parse_model(path):
    """Read a model file."""
    text = Path(path).read_text(encoding="utf-8")
    return loads_model(text)


def model_to_dict(model):
    sheets = []
    for s in model.sheets:
        sheets.append({
            "vertices": [list(v) for v in s.vertices],
            "edges": [list(e) for e in s.edges],
            "facets": [list(f) for f in s.facets],
            "seed_orientation": s.seed_orientation,
        })
    conns = []
    for c in model.connections:
        rc = {"a": list(c.a), "b": list(c.b), "type": c.kind}
        if c.hinge_edge is not None:
            rc["hinge_edge"] = [list(p) for p in c.hinge_edge]
        conns.append(rc)
    return {"sheets": sheets, "connections": conns}


def dumps_model(model):
    # one facet / vertex per line keeps diffs readable and output byte-stable
    d = model_to_dict(model)
    lines = ["{", '  "sheets": [']
    for si, s in enumerate(d["sheets"]):
        lines.append("    {")
        for key in ("vertices", "edges", "facets"):
            items = s[key]
            lines.append(f'      "{key}": [')
            for k, it in enumerate(items):
                sep = "," if k < len(items) - 1 else ""
                lines.append("        " + json.dumps(it) + sep)
            lines.append("      ],")
        lines.append(f'      "seed_orientation": {json.dumps(s["seed_orientation"])}')
        lines.append("    }" + ("," if si < len(d["sheets"]) - 1 else ""))
    lines.append("  ],")
    lines.append('  "connections": [')
    for ci, c in enumerate(d["connections"]):
        sep = "," if ci < len(d["connections"]) - 1 else ""
        lines.append("    " + json.dumps(c) + sep)
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_model(model, path):
    Path(path).write_text(dumps_model(model), encoding="utf-8")


# -- FOLD import -----------------------------------------------------------

_FOLD_MULTILAYER_KEYS = ("faceOrders", "edgeOrders", "file_frames")


def import_fold(path):
    """Single-sheet model from a FOLD file.

    Only ``vertices_coords``, ``edges_vertices`` and ``faces_vertices`` are
    read; edge assignments are dropped because fold sense is carried by the
    sign of the hinge variable.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelParseError(exc.msg, line=exc.lineno) from exc
    for key in _FOLD_MULTILAYER_KEYS:
        if key in data:
            raise UnsupportedFeatureError(f"multi-layer FOLD feature '{key}' is not supported", field=key)
    for key in ("vertices_coords", "faces_vertices"):
        if key not in data:
            raise ModelParseError(f"missing '{key}'", field=key)
    verts = []
    for k, v in enumerate(data["vertices_coords"]):
        v = list(v)
        if len(v) == 2:
            v.append(0.0)
        verts.append(v)
    doc = {
        "sheets": [{
            "vertices": verts,
            "edges": data.get("edges_vertices", []),
            "facets": data["faces_vertices"],
            "seed_orientation": "ccw",
        }],
        "connections": [],
    }
    return model_from_dict(doc, text)


# -- orientation -----------------------------------------------------------

def facet_edges(facet):
    n = len(facet)
    return [(facet[k], facet[(k + 1) % n]) for k in range(n)]


def edge_facet_map(sheet):
    """Undirected vertex pair -> list of (facet index, directed pair in that facet)."""
    out = {}
    for fi, f in enumerate(sheet.facets):
        for a, b in facet_edges(f):
            out.setdefault((min(a, b), max(a, b)), []).append((fi, (a, b)))
    return out


def _orient_sheet(sheet, si):
    emap = edge_facet_map(sheet)
    adj = {fi: [] for fi in range(len(sheet.facets))}
    for users in emap.values():
        if len(users) != 2:
            continue
        (f1, d1), (f2, d2) = users
        if f1 == f2:
            continue
        same = d1 == d2  # same direction: orientations disagree as stored
        adj[f1].append((f2, same))
        adj[f2].append((f1, same))

    flip = {}
    for start in range(len(sheet.facets)):
        if start in flip:
            continue
        flip[start] = False
        queue = deque([start])
        while queue:
            f = queue.popleft()
            for g, same in sorted(adj[f]):
                want = flip[f] ^ same
                if g not in flip:
                    flip[g] = want
                    queue.append(g)
                elif flip[g] != want:
                    raise OrientationError(
                        f"facet {g} on sheet {si} receives contradictory orientation "
                        f"(non-orientable sheet)", sheet=si, facet=g)
    return flip


def orient_facets(model):
    """Flip map ``{(sheet, facet): bool}`` making shared edges opposite.

    Propagates breadth first from each sheet's seed facet, which is never
    flipped. Facets not reachable from the seed start their own propagation
    from their lowest index, keeping that facet's stored order.
    """
    out = {}
    for si, sheet in enumerate(model.sheets):
        for fi, flipped in _orient_sheet(sheet, si).items():
            out[(si, fi)] = flipped
    return out


def apply_orientation(model, orientation_map):
    """Model with flipped facets reversed."""
    sheets = []
    for si, s in enumerate(model.sheets):
        facets = tuple(
            tuple(reversed(f)) if orientation_map.get((si, fi), False) else f
            for fi, f in enumerate(s.facets)
        )
        sheets.append(Sheet(s.vertices, s.edges, facets, s.seed_orientation, s.index))
    return RFSModel(tuple(sheets), model.connections)

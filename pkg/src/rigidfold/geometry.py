"""Folded geometry from hinge angles, and OBJ / VTK / CSV writers."""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .liegroup import pose_exp


@dataclass
class FoldedState:
    theta: np.ndarray
    body_poses: dict  # body id -> 4x4 pose mapping home to folded coordinates
    facet_polygons: list = field(default_factory=list)  # ((sheet, facet), n x 3 array)
    folded_vertices: list = field(default_factory=list)  # per sheet, V x 3 array


def _transform(T, pts):
    return pts @ T[:3, :3].T + T[:3, 3]


def body_poses(graph, screws, theta):
    """Poses of every body along a breadth-first spanning tree from the root.

    Bodies in other connected components get their own tree rooted at
    their smallest id and keep the identity there.
    """
    xs = np.array([s.screw if hasattr(s, "screw") else s for s in screws]).reshape(-1, 6)
    pairs = [s.oriented_pair if hasattr(s, "oriented_pair") else (e.p, e.q)
             for s, e in zip(screws, graph.edges)]
    poses = {}
    roots = [graph.root_body()] + sorted(graph.node_ids)
    for root in roots:
        if root in poses:
            continue
        poses[root] = np.eye(4)
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for eid, y in graph.adjacency[x]:
                if y in poses:
                    continue
                sign = 1.0 if pairs[eid][0] == x else -1.0
                poses[y] = poses[x] @ pose_exp(xs[eid], sign * theta[eid])
                queue.append(y)
    return poses


def fold_geometry(graph, screws, theta):
    """Map every facet of the graph's model through its body's pose."""
    theta = np.asarray(theta, dtype=float)
    poses = body_poses(graph, screws, theta)
    model = graph.model
    polys, verts = [], []
    for si, sheet in enumerate(model.sheets):
        folded = sheet.coords.copy()
        done = np.zeros(len(folded), dtype=bool)
        for fi, f in enumerate(sheet.facets):
            T = poses[graph.facet_body[(si, fi)]]
            pts = _transform(T, sheet.coords[list(f)])
            polys.append(((si, fi), pts))
            for v, p in zip(f, pts):
                if not done[v]:
                    folded[v] = p
                    done[v] = True
        verts.append(folded)
    return FoldedState(theta.copy(), poses, polys, verts)


def hinge_gaps(graph, state):
    """Per hinge, the largest distance between the edge images of its two bodies."""
    out = np.zeros(len(graph.edges))
    for e in graph.edges:
        a = _transform(state.body_poses[e.p], e.edge_vertices)
        b = _transform(state.body_poses[e.q], e.edge_vertices)
        out[e.id] = float(np.max(np.linalg.norm(a - b, axis=1)))
    return out


def isometry_error(graph, state):
    """Largest relative change of any pairwise vertex distance within a facet."""
    model = graph.model
    worst = 0.0
    for (si, fi), pts in state.facet_polygons:
        home = model.sheets[si].coords[list(model.sheets[si].facets[fi])]
        d0 = np.linalg.norm(home[:, None] - home[None], axis=2)
        d1 = np.linalg.norm(pts[:, None] - pts[None], axis=2)
        worst = max(worst, float(np.max(np.abs(d1 - d0)) / np.max(d0)))
    return worst


def _fmt(x):
    return format(float(x), ".17g")


def obj_text(state):
    lines = ["# rigidfold frame"]
    faces, base = [], 1
    for _, pts in state.facet_polygons:
        for p in pts:
            lines.append("v " + " ".join(_fmt(c) for c in p))
        faces.append("f " + " ".join(str(base + k) for k in range(len(pts))))
        base += len(pts)
    return "\n".join(lines + faces) + "\n"


def vtk_text(state):
    pts = [p for _, poly in state.facet_polygons for p in poly]
    lines = ["# vtk DataFile Version 3.0", "rigidfold frame", "ASCII", "DATASET POLYDATA",
             f"POINTS {len(pts)} double"]
    lines += [" ".join(_fmt(c) for c in p) for p in pts]
    polys = state.facet_polygons
    size = sum(len(poly) + 1 for _, poly in polys)
    lines.append(f"POLYGONS {len(polys)} {size}")
    base = 0
    for _, poly in polys:
        lines.append(" ".join([str(len(poly))] + [str(base + k) for k in range(len(poly))]))
        base += len(poly)
    return "\n".join(lines) + "\n"


def export_frame(state, fmt, path):
    """Write facets as independent polygons in OBJ or legacy ASCII VTK."""
    if fmt == "obj":
        text = obj_text(state)
    elif fmt == "vtk":
        text = vtk_text(state)
    else:
        raise ValueError(f"unknown geometry format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def export_trajectory_csv(trajectory, path):
    frames = trajectory.frames
    if not frames:
        raise ValueError("trajectory has no frames")
    n = len(frames[0].theta)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frame"] + [f"theta_{i}" for i in range(n)] + ["residual", "dof"])
        for f in frames:
            w.writerow([f.index] + [_fmt(t) for t in f.theta] + [_fmt(f.residual_norm),
                                                                  f.dof_active])


def read_trajectory_csv(path):
    """Return ``(frames, thetas, residuals, dofs)`` from a trajectory CSV."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    n = sum(1 for h in header if h.startswith("theta_"))
    frames = [int(r[0]) for r in body]
    thetas = np.array([[float(x) for x in r[1:1 + n]] for r in body]).reshape(len(body), n)
    res = np.array([float(r[1 + n]) for r in body])
    dofs = [int(r[2 + n]) for r in body]
    return frames, thetas, res, dofs


def read_obj(path):
    """Minimal OBJ reader: ``(vertices, faces)`` with 0-based face indices."""
    verts, faces = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(x.split("/")[0]) - 1 for x in parts[1:]])
    return np.array(verts), faces

"""Sign-consistent screw axes for every hinge.

The positive sense of a hinge is tied to facet orientation: crossing from
body X to body Y, the axis is the shared edge direction as it appears in
X's (oriented) facet.  With a ``ccw`` seed this makes positive angles fold
Y away from the sheet normal, i.e. a mountain crease seen from the normal
side.  A ``cw`` seed negates the whole sheet.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .cycles import CycleBasis
from .errors import InvalidSheetError, NonOrientableError
from .liegroup import screw_from_geometry

SHEET_SEED = "sheet_seed"
PROPAGATED = "propagated"


@dataclass(frozen=True)
class HingeScrew:
    hinge: int
    screw: np.ndarray = field(compare=False)
    oriented_pair: tuple  # (P, Q): positive theta turns Q relative to P
    polarity_source: str
    kind: str
    sheet: int | None = None
    # inter-sheet only: both facets list the hinge edge in the same order
    discrepancy: bool = False

    @property
    def omega(self):
        return self.screw[:3]

    @property
    def point(self):
        # closest point of the axis to the origin
        w, v = self.screw[:3], self.screw[3:]
        return np.cross(w, v)


@dataclass(frozen=True)
class BaseOrientation:
    pairs: dict  # hinge id -> (P, Q)
    axes: dict  # hinge id -> unit omega before sheet polarity
    basis: CycleBasis  # loops re-traversed, directions relative to pairs


@dataclass(frozen=True)
class ActiveSet:
    active: tuple
    free: tuple

    @property
    def n_active(self):
        return len(self.active)


def _in_phase_axis(edge, body):
    """Edge direction in the facet on ``body``'s side of the hinge."""
    if body == edge.p:
        return edge.omega
    if edge.kind == "inter" or edge.phase_consistent:
        return -edge.omega
    return edge.omega


def _redirect(loop, pairs):
    dirs = tuple(1 if loop.nodes[k] == pairs[h][0] else -1 for k, h in enumerate(loop.hinges))
    return loop.__class__(loop.id, loop.hinges, loop.nodes, dirs,
                          loop.perforation, loop.common_vertex)


def establish_base_orientation(basis, graph):
    """Fix loop traversal directions and an oriented pair for each hinge.

    Propagation runs breadth-first over loops that share hinges, starting
    from the loop through the lowest active hinge on the root body.
    """
    edges = graph.edges
    pairs, axes = {}, {}

    def fix(loop):
        for k, h in enumerate(loop.hinges):
            e = edges[h]
            x, y = loop.nodes[k], loop.nodes[k + 1]
            if e.kind == "intra" and not e.phase_consistent:
                raise NonOrientableError(
                    f"hinge {h}: both facets list the shared edge in the same order", hinge=h)
            axis = _in_phase_axis(e, x)
            if h not in pairs:
                pairs[h] = (x, y)
                axes[h] = axis
                continue
            p, _ = pairs[h]
            expected = axes[h] if x == p else -axes[h]
            if float(np.dot(expected, axis)) < 0:
                raise NonOrientableError(
                    f"hinge {h}: loop {loop.id} disagrees with the propagated orientation",
                    hinge=h)

    loops = list(basis.loops)
    by_hinge = {}
    for lp in loops:
        for h in lp.hinges:
            by_hinge.setdefault(h, []).append(lp.id)

    oriented = {}
    root = graph.root_body()
    incident = sorted(h for h in by_hinge if root in (edges[h].p, edges[h].q))
    pending = [lp.id for lp in loops]
    first = True
    while pending:
        start = pending[0]
        seed_loop = loops[start]
        if first and incident:
            h0 = incident[0]
            start = min(by_hinge[h0])
            seed_loop = loops[start]
            k = _find_departure(seed_loop, h0, root)
            if k is None:
                seed_loop = seed_loop.reversed()
                k = _find_departure(seed_loop, h0, root)
            seed_loop = seed_loop.rotated(k)
        first = False
        queue = deque([(start, seed_loop)])
        queued = {start}
        while queue:
            lid, lp = queue.popleft()
            if lp is None:
                lp = loops[lid]
                known = sorted(h for h in lp.hinges if h in pairs)
                if known:
                    h = known[0]
                    k = lp.hinges.index(h)
                    if lp.nodes[k] != pairs[h][0]:
                        lp = lp.reversed()
            fix(lp)
            oriented[lid] = lp
            pending.remove(lid)
            nbrs = sorted({m for h in lp.hinges for m in by_hinge[h]} - queued)
            for m in nbrs:
                queued.add(m)
                queue.append((m, None))

    for e in edges:
        if e.id not in pairs:
            pairs[e.id] = (e.p, e.q)
            axes[e.id] = e.omega
    new_loops = tuple(_redirect(oriented[lp.id], pairs) for lp in loops)
    return BaseOrientation(pairs, axes, CycleBasis(new_loops))


def _find_departure(loop, hinge, body):
    for k, h in enumerate(loop.hinges):
        if h == hinge and loop.nodes[k] == body:
            return k
    return None


def sheet_sign(model, sheet):
    return 1.0 if model.sheets[sheet].seed_orientation == "ccw" else -1.0


def apply_sheet_polarity(graph, orientation):
    """Finalize one screw per hinge, scaling each sheet by its seed sign."""
    model = graph.model
    out = []
    for e in graph.edges:
        p, q = orientation.pairs[e.id]
        axis = orientation.axes[e.id]
        if e.kind == "intra":
            if float(np.dot(axis, _in_phase_axis(e, p))) < 0:
                raise InvalidSheetError(
                    f"sheet {e.sheet}: hinge {e.id} is out of phase with its sheet", sheet=e.sheet)
            sign, source = sheet_sign(model, e.sheet), SHEET_SEED
        else:
            sign, source = sheet_sign(model, e.facets[0][0]), PROPAGATED
        xi = sign * screw_from_geometry(axis, e.point)
        out.append(HingeScrew(e.id, xi, (p, q), source, e.kind, e.sheet,
                              discrepancy=e.kind == "inter" and not e.phase_consistent))
    return out


def select_active(basis, graph):
    used = sorted({h for lp in basis.loops for h in lp.hinges})
    used_set = set(used)
    free = tuple(e.id for e in graph.edges if e.id not in used_set)
    return ActiveSet(tuple(used), free)

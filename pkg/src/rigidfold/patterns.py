"""Deterministic generators for the test structures.

All sheets are stored with facets counter-clockwise seen from +z (before
any tilt), so a ``ccw`` seed makes positive hinge angles mountain folds
seen from above.

Grid conventions: a Miura-type sheet with ``nc`` facet columns (along x)
and ``nr`` facet rows (along y) has vertex ``(i, j)`` at index
``j * (nc + 1) + i`` and facet ``(i, j)`` at index ``j * nc + i``.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import GeneratorError
from .model import HINGING, SOLDERING, Connection, make_model, make_sheet


def _check_grid(rows, cols):
    if int(rows) != rows or int(cols) != cols or rows < 1 or cols < 1:
        raise GeneratorError("rows and cols must be positive integers")


def _check_lengths(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise GeneratorError(f"{k} must be positive, got {v!r}")


def _grid_sheet(nc, nr, xs, zs, e, l, seed="ccw", index=0):
    """Parallelogram grid: vertex (i, j) at (xs[i] + (j % 2) e, j l, zs[i])."""
    verts = []
    for j in range(nr + 1):
        for i in range(nc + 1):
            verts.append((float(xs[i] + (j % 2) * e), float(j * l), float(zs[i])))
    vid = lambda i, j: j * (nc + 1) + i  # noqa: E731
    facets = []
    for j in range(nr):
        for i in range(nc):
            facets.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)))
    edges = []
    for j in range(nr + 1):
        for i in range(nc):
            edges.append((vid(i, j), vid(i + 1, j)))
    for j in range(nr):
        for i in range(nc + 1):
            edges.append((vid(i, j), vid(i, j + 1)))
    return make_sheet(verts, edges, facets, seed, index)


def grid_hinge_count(nc, nr):
    """Interior edges of an ``nc`` x ``nr`` quad grid."""
    return nc * (nr - 1) + (nc - 1) * nr


def gen_grid(nx, ny, size=1.0):
    """Flat ``nx`` x ``ny`` grid of unit squares (one sheet).

    Facets ``nx * ny``; hinges ``nx (ny - 1) + (nx - 1) ny``; loops
    ``(nx - 1)(ny - 1)``.
    """
    _check_grid(ny, nx)
    _check_lengths(size=size)
    xs = [i * size for i in range(nx + 1)]
    return make_model([_grid_sheet(nx, ny, xs, [0.0] * (nx + 1), 0.0, size)])


def miura_dimensions(a, b, alpha, tilt):
    """Projected cell sizes ``(u, t, e, l)`` of a Miura sheet folded to ``tilt``.

    ``u``/``t`` are the x/z extents of an ``a`` edge, ``e``/``l`` the x/y
    extents of a ``b`` edge.
    """
    if not 0 < alpha < math.pi / 2:
        raise GeneratorError("sector angle must lie in (0, pi/2)")
    if not 0 <= tilt < alpha:
        raise GeneratorError("tilt must lie in [0, sector angle)")
    u, t = a * math.cos(tilt), a * math.sin(tilt)
    e = b * math.cos(alpha) / math.cos(tilt)
    l = math.sqrt(b * b - e * e)
    return u, t, e, l


def gen_miura(rows, cols, a=1.0, b=1.0, alpha=math.pi / 3, tilt=0.0):
    """Miura-ori sheet with ``(rows + 1) x (cols + 1)`` parallelogram facets.

    ``alpha`` is the acute sector angle between the ``a`` and ``b`` edges.
    ``tilt`` > 0 emits the sheet partially folded (the x-zigzag rises by
    ``a sin(tilt)``), which makes the home configuration non-singular.

    Facets ``(rows+1)(cols+1)``; hinges ``(cols+1) rows + cols (rows+1)``;
    loops ``rows * cols`` (one per interior vertex).
    """
    _check_grid(rows, cols)
    _check_lengths(a=a, b=b)
    u, t, e, l = miura_dimensions(a, b, alpha, tilt)
    nc, nr = cols + 1, rows + 1
    xs = [i * u for i in range(nc + 1)]
    zs = [(i % 2) * t for i in range(nc + 1)]
    return make_model([_grid_sheet(nc, nr, xs, zs, e, l)])


def miura_folded_vertices(rows, cols, a, b, alpha, psi):
    """Closed-form vertex positions of a Miura sheet folded to ``psi``.

    Same layout as :func:`gen_miura`; useful as an independent geometry
    reference (shapes agree up to a rigid motion).
    """
    return np.array(gen_miura(rows, cols, a, b, alpha, psi).sheets[0].vertices)


def gen_stacked_miura(layers=2, rows=2, cols=2, a=1.0, b=1.0, alpha=math.pi / 3, tilt=0.4,
                      heights=None, connect="all"):
    """Stacked Miura-ori: Miura sheets bonded by hinges along shared zigzag lines.

    Every layer has ``rows`` x ``cols`` facets and the same x spacing and
    y zigzag; only the zigzag height differs (``heights[k]``, default the
    height of layer 0, i.e. mirrored layers).  Layer ``k`` rests on layer
    ``k - 1`` along the lines ``i`` with ``i % 2 == k % 2``.  For each
    segment of a shared line a hinging connection joins facet
    ``(max(i - 1, 0), j)`` of both layers.  With ``connect="alternate"``
    only segments with even ``j`` are joined.

    Hinges: ``layers * (cols (rows-1) + (cols-1) rows)`` intra-sheet plus
    one per joined segment.
    """
    _check_grid(rows, cols)
    _check_lengths(a=a, b=b)
    if int(layers) != layers or layers < 2:
        raise GeneratorError("stacked Miura needs at least two layers")
    if connect not in ("all", "alternate"):
        raise GeneratorError("connect must be 'all' or 'alternate'")
    u, t0, e, l = miura_dimensions(a, b, alpha, tilt)
    if heights is None:
        heights = [t0] * layers
    heights = [float(h) for h in heights]
    if len(heights) != layers:
        raise GeneratorError(f"{layers} layers but {len(heights)} heights")
    if any(h <= 0 for h in heights):
        raise GeneratorError("layer heights must be positive (tilt > 0)")
    nc, nr = cols, rows
    xs = [i * u for i in range(nc + 1)]
    sheets, base = [], 0.0
    for k in range(layers):
        bottom = k % 2
        zs = [base if i % 2 == bottom else base + heights[k] for i in range(nc + 1)]
        sheets.append(_grid_sheet(nc, nr, xs, zs, e, l, index=k))
        base += heights[k]
    conns = []
    for k in range(1, layers):
        for i in range(nc + 1):
            if i % 2 != k % 2:
                continue
            ci = max(i - 1, 0)
            for j in range(nr):
                if connect == "alternate" and j % 2:
                    continue
                f = j * nc + ci
                conns.append(Connection((k - 1, f), (k, f), HINGING))
    return make_model(sheets, conns)


def smo_unit():
    """Two 2-facet sheets joined by one hinging connection (a tree)."""
    return gen_stacked_miura(layers=2, rows=1, cols=2)


def gen_tmp(rows=2, bond=(0.6, 0.3), mid=(0.8, 0.6), e=0.3, l=1.0):
    """Tubular Miura-type tube made of two zigzag sheets soldered together.

    Each sheet has four facet columns along x with profile steps
    ``bond``, ``mid``, ``mid``, ``bond`` given as ``(dx, dz)``.  Sheet A
    climbs ``+dz`` then ``-dz`` across the middle columns; sheet B does the
    opposite, so the middle columns enclose a tube.  The bond columns of
    both sheets coincide and are soldered facet by facet.

    Facets ``8 rows``; solder records ``2 rows``; bodies ``6 rows``.
    """
    if int(rows) != rows or rows < 1:
        raise GeneratorError("rows must be a positive integer")
    (d0, s0), (d1, h) = bond, mid
    _check_lengths(bond_dx=d0, bond_dz=s0, mid_dx=d1, mid_dz=h, l=l)
    if e < 0:
        raise GeneratorError("zigzag offset must be non-negative")
    steps_a = [(d0, s0), (d1, h), (d1, -h), (d0, -s0)]
    steps_b = [(d0, s0), (d1, -h), (d1, h), (d0, -s0)]
    sheets = []
    for k, steps in enumerate((steps_a, steps_b)):
        xs, zs = [0.0], [0.0]
        for dx, dz in steps:
            xs.append(xs[-1] + dx)
            zs.append(zs[-1] + dz)
        sheets.append(_grid_sheet(4, rows, xs, zs, e, l, index=k))
    conns = []
    for j in range(rows):
        for col in (0, 3):
            f = j * 4 + col
            conns.append(Connection((0, f), (1, f), SOLDERING))
    return make_model(sheets, conns)


def gen_kirigami_slit(width=1.0, hole_w=1.0, hole_h=1.0):
    """Ring of eight quads around a rectangular hole (one sheet).

    Facets 8, hinges 8, one perforated loop.
    """
    _check_lengths(width=width, hole_w=hole_w, hole_h=hole_h)
    xs = [0.0, width, width + hole_w, 2 * width + hole_w]
    ys = [0.0, width, width + hole_h, 2 * width + hole_h]
    verts = [(x, y, 0.0) for y in ys for x in xs]
    vid = lambda i, j: j * 4 + i  # noqa: E731
    facets, edges = [], []
    for j in range(3):
        for i in range(3):
            if i == 1 and j == 1:
                continue
            facets.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)))
    seen = set()
    for f in facets:
        for k in range(4):
            a, b = f[k], f[(k + 1) % 4]
            key = (min(a, b), max(a, b))
            if key not in seen:
                seen.add(key)
                edges.append(key)
    return make_model([make_sheet(verts, edges, facets)])


def gen_degree4_vertex(sectors=(math.radians(70), math.radians(105), math.radians(100),
                                math.radians(85)), length=1.0, flap=False):
    """Four parallelogram facets around one interior vertex at the origin.

    Crease ``k`` leaves the origin at angle ``sum(sectors[:k])``; facet
    ``k`` lies between creases ``k`` and ``k + 1``.  With ``flap`` an
    extra facet hangs off the outer edge of facet 0 (a bridge hinge).
    """
    sectors = [float(s) for s in sectors]
    if len(sectors) != 4 or any(not 0 < s < math.pi for s in sectors):
        raise GeneratorError("need four sector angles in (0, pi)")
    if abs(sum(sectors) - 2 * math.pi) > 1e-9:
        raise GeneratorError("sector angles must sum to 2 pi")
    _check_lengths(length=length)
    ang = np.concatenate([[0.0], np.cumsum(sectors[:3])])
    rays = [length * np.array([math.cos(t), math.sin(t), 0.0]) for t in ang]
    verts = [(0.0, 0.0, 0.0)] + [tuple(r) for r in rays]
    corners = []
    for k in range(4):
        corners.append(len(verts))
        verts.append(tuple(rays[k] + rays[(k + 1) % 4]))
    facets = [(0, 1 + k, corners[k], 1 + (k + 1) % 4) for k in range(4)]
    edges = [(0, 1 + k) for k in range(4)]
    for k in range(4):
        edges += [(1 + k, corners[k]), (corners[k], 1 + (k + 1) % 4)]
    if flap:
        c0, c01 = rays[0], rays[0] + rays[1]
        d = rays[1] / np.linalg.norm(rays[1])
        m = c0 - (c0 @ d) * d
        m = 0.5 * length * m / np.linalg.norm(m)
        p0, p1 = len(verts), len(verts) + 1
        verts += [tuple(c0 + m), tuple(c01 + m)]
        facets.append((1, p0, p1, corners[0]))
        edges += [(1, p0), (p0, p1), (p1, corners[0])]
    return make_model([make_sheet(verts, edges, facets)])


def _newell_normal(pts):
    n = np.zeros(3)
    for k in range(len(pts)):
        p, q = pts[k], pts[(k + 1) % len(pts)]
        n += np.cross(p, q)
    return n / np.linalg.norm(n)


def thicken(model, offset):
    """Thick-panel version of a single-sheet model.

    Every facet ``p`` becomes three sheets: the top face (the original
    polygon, which carries the hinges), the bottom face shifted by
    ``offset`` against the facet normal, and a band of side quads.  The
    bottom face and every side quad are soldered to the top face; each
    original hinge becomes a hinging connection between top faces.
    Sheet ``3p`` is the top, ``3p + 1`` the bottom, ``3p + 2`` the sides.
    """
    if not offset > 0:
        raise GeneratorError("offset must be positive")
    if len(model.sheets) != 1:
        raise GeneratorError("thicken expects a single-sheet model")
    src = model.sheets[0]
    sign = 1.0 if src.seed_orientation == "ccw" else -1.0
    sheets, conns = [], []
    owner = {}
    for p, f in enumerate(src.facets):
        pts = src.coords[list(f)]
        n = sign * _newell_normal(pts)
        low = pts - offset * n
        m = len(f)
        top = make_sheet([tuple(x) for x in pts], [(k, (k + 1) % m) for k in range(m)],
                         [tuple(range(m))], index=3 * p)
        bottom = make_sheet([tuple(x) for x in low], [(k, (k + 1) % m) for k in range(m)],
                            [tuple(reversed(range(m)))], index=3 * p + 1)
        sv = [tuple(x) for x in pts] + [tuple(x) for x in low]
        sf = [(k, m + k, m + (k + 1) % m, (k + 1) % m) for k in range(m)]
        se = [(k, (k + 1) % m) for k in range(m)] + [(m + k, m + (k + 1) % m) for k in range(m)]
        se += [(k, m + k) for k in range(m)]
        side = make_sheet(sv, se, sf, index=3 * p + 2)
        sheets += [top, bottom, side]
        conns.append(Connection((3 * p, 0), (3 * p + 1, 0), SOLDERING))
        for k in range(m):
            conns.append(Connection((3 * p, 0), (3 * p + 2, k), SOLDERING))
        for k in range(m):
            a, b = f[k], f[(k + 1) % m]
            owner.setdefault((min(a, b), max(a, b)), []).append(p)
    for key in sorted(owner, key=lambda kk: owner[kk]):
        ps = owner[key]
        if len(ps) == 2:
            conns.append(Connection((3 * ps[0], 0), (3 * ps[1], 0), HINGING))
    return make_model(sheets, conns)


def gen_thick_miura(rows=1, cols=1, offset=0.1, a=1.0, b=1.0, alpha=math.pi / 3, tilt=0.0):
    """Thick-panel Miura: :func:`thicken` applied to :func:`gen_miura`."""
    return thicken(gen_miura(rows, cols, a, b, alpha, tilt), offset)


def gen_thick_crease(offset=0.1, size=1.0):
    """Two thick square panels sharing one hinge."""
    return thicken(gen_grid(2, 1, size), offset)


GENERATORS = {
    "miura": gen_miura,
    "stacked-miura": gen_stacked_miura,
    "tmp": gen_tmp,
    "kirigami-slit": gen_kirigami_slit,
    "thick-miura": gen_thick_miura,
    "degree4": gen_degree4_vertex,
    "grid": gen_grid,
}

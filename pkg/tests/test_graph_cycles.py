import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (DATA, all_bases_min_weight, exhaustive_min_basis_weight,
                     fundamental_cycles, random_connected_graph)
from rigidfold.cycles import (NON_PERFORATED, PERFORATED, bridges, classify_loop,
                              minimum_cycle_basis, minimum_cycle_basis_edges)
from rigidfold.errors import GraphError
from rigidfold.graph import build_graph
from rigidfold.model import SOLDERING, Connection, make_model, make_sheet, parse_model
from rigidfold.patterns import (gen_degree4_vertex, gen_grid, gen_kirigami_slit, gen_miura,
                                gen_stacked_miura, gen_thick_miura, gen_tmp)


def bitmask(cycle, edges):
    pos = {e[0]: k for k, e in enumerate(edges)}
    v = 0
    for e in cycle:
        v |= 1 << pos[e]
    return v


def gf2_rank(vectors):
    piv = {}
    for v in vectors:
        while v:
            t = v.bit_length() - 1
            if t not in piv:
                piv[t] = v
                break
            v ^= piv[t]
    return len(piv)


def graph_edges(g):
    return g.node_ids, [(e.id, e.p, e.q) for e in g.edges]


FIXTURES = {
    "degree4": lambda: gen_degree4_vertex(),
    "degree4-flap": lambda: gen_degree4_vertex(flap=True),
    "grid2x3": lambda: gen_grid(2, 3),
    "miura3x3": lambda: gen_miura(2, 2, tilt=0.3),
    "smo-unit": lambda: gen_stacked_miura(2, 2, 2),
    "smo-alt": lambda: gen_stacked_miura(2, 3, 2, connect="alternate"),
    "tmp": lambda: gen_tmp(2),
    "kirigami": lambda: gen_kirigami_slit(),
    "thick": lambda: gen_thick_miura(1, 1),
}


class TestBuildGraph:
    def test_two_squares(self):
        g = build_graph(gen_grid(2, 1))
        assert len(g.nodes) == 2 and len(g.edges) == 1
        assert g.cyclomatic_number() == 0

    def test_degree4(self):
        g = build_graph(gen_degree4_vertex())
        assert len(g.nodes) == 4 and len(g.edges) == 4
        assert g.cyclomatic_number() == 1

    def test_soldered_unit(self):
        # two 2-facet sheets with one soldering record
        a = make_sheet([(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (2, 0, 0), (2, 1, 0)],
                       [(1, 2)], [(0, 1, 2, 3), (1, 4, 5, 2)])
        b = make_sheet([(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (0, 2, 0), (1, 2, 0)],
                       [(3, 2)], [(0, 1, 2, 3), (3, 2, 5, 4)])
        g = build_graph(make_model([a, b], [Connection((0, 0), (1, 0), SOLDERING)]))
        assert len(g.nodes) == 3
        assert len(g.edges) == 2
        assert all(e.kind == "intra" for e in g.edges)
        assert g.node(0).member_facets == ((0, 0), (1, 0))

    def test_axis_data(self):
        g = build_graph(gen_degree4_vertex())
        for e in g.edges:
            assert np.linalg.norm(e.omega) == pytest.approx(1.0, abs=1e-12)
            np.testing.assert_allclose(e.point, e.edge_vertices[0])
            d = e.edge_vertices[1] - e.edge_vertices[0]
            np.testing.assert_allclose(e.omega, d / np.linalg.norm(d))

    def test_inter_sheet_hinge(self):
        g = build_graph(parse_model(DATA / "smo_unit.json"))
        kinds = sorted(e.kind for e in g.edges)
        assert kinds == ["inter", "intra", "intra"]
        inter = [e for e in g.edges if e.kind == "inter"][0]
        assert inter.connection == 0
        np.testing.assert_allclose(sorted(inter.edge_vertices[:, 1]), [0, 1])

    def test_refuses_invalid(self):
        with pytest.raises(GraphError):
            build_graph(parse_model(DATA / "mixed_connection.json"))

    def test_thick_side_hinges_dropped(self):
        g = build_graph(gen_thick_miura(1, 1))
        assert len(g.nodes) == 4
        assert len(g.edges) == 4
        assert len(g.dropped) == 16


class TestMinimumCycleBasis:
    def test_four_cycle(self):
        cyc = minimum_cycle_basis_edges(range(4), [(0, 0, 1), (1, 1, 2), (2, 2, 3), (3, 3, 0)])
        assert cyc == [(0, 1, 2, 3)]

    def test_complete_graph_k4(self):
        nodes = range(4)
        edges = [(k, u, v) for k, (u, v) in
                 enumerate([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])]
        cyc = minimum_cycle_basis_edges(nodes, edges)
        assert len(cyc) == 3
        assert sum(map(len, cyc)) == 9
        assert all_bases_min_weight(list(nodes), edges) == (9, 3)

    def test_grid_2x3(self):
        g = build_graph(gen_grid(2, 3))
        basis = minimum_cycle_basis(g)
        assert basis.L == 2 and basis.total_weight == 8
        nodes, edges = graph_edges(g)
        assert all_bases_min_weight(nodes, edges) == (8, 2)

    def test_acyclic(self):
        assert minimum_cycle_basis(build_graph(gen_grid(3, 1))).L == 0

    def test_parallel_edges(self):
        cyc = minimum_cycle_basis_edges(range(2), [(0, 0, 1), (1, 0, 1), (2, 0, 1)])
        assert cyc == [(0, 1), (0, 2)]

    def test_disconnected(self):
        edges = [(0, 0, 1), (1, 1, 2), (2, 2, 0), (3, 3, 4), (4, 4, 5), (5, 5, 3)]
        assert len(minimum_cycle_basis_edges(range(6), edges)) == 2

    def test_loop_structure(self):
        g = build_graph(gen_miura(2, 2))
        for lp in minimum_cycle_basis(g).loops:
            assert lp.nodes[0] == lp.nodes[-1]
            assert len(lp.hinges) >= 3
            for k, h in enumerate(lp.hinges):
                e = g.edges[h]
                assert {lp.nodes[k], lp.nodes[k + 1]} == {e.p, e.q}
                assert lp.directions[k] == (1 if lp.nodes[k] == e.p else -1)

    @pytest.mark.parametrize("name", sorted(FIXTURES))
    def test_fixture_invariants(self, name):
        g = build_graph(FIXTURES[name]())
        basis = minimum_cycle_basis(g)
        nodes, edges = graph_edges(g)
        assert basis.L == g.cyclomatic_number()
        masks = [bitmask(lp.hinges, edges) for lp in basis.loops]
        assert gf2_rank(masks) == basis.L
        fund = fundamental_cycles(nodes, edges)
        assert basis.total_weight <= sum(bin(v).count("1") for v in fund)
        if len(nodes) <= 8:
            assert basis.total_weight == exhaustive_min_basis_weight(nodes, edges)[0]
        used = {h for lp in basis.loops for h in lp.hinges}
        assert sorted(set(range(len(edges))) - used) == bridges(g)

    def test_deterministic(self):
        a = minimum_cycle_basis(build_graph(gen_miura(3, 3)))
        b = minimum_cycle_basis(build_graph(gen_miura(3, 3)))
        assert [lp.hinges for lp in a.loops] == [lp.hinges for lp in b.loops]

    def test_matches_networkx_weight(self):
        nx = pytest.importorskip("networkx")
        rng = np.random.default_rng(11)
        for _ in range(10):
            nodes, edges = random_connected_graph(rng, 10, 20)
            G = nx.Graph()
            G.add_nodes_from(nodes)
            G.add_edges_from((u, v) for _, u, v in edges)
            ref = sum(len(c) for c in nx.minimum_cycle_basis(G))
            assert sum(map(len, minimum_cycle_basis_edges(nodes, edges))) == ref


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_graphs_are_minimal(seed):
    nodes, edges = random_connected_graph(np.random.default_rng(seed))
    cyc = minimum_cycle_basis_edges(nodes, edges)
    best, dim = exhaustive_min_basis_weight(nodes, edges)
    assert len(cyc) == dim == len(edges) - len(nodes) + 1
    assert sum(map(len, cyc)) == best
    assert gf2_rank([bitmask(c, edges) for c in cyc]) == dim


class TestClassify:
    def test_degree4(self):
        g = build_graph(gen_degree4_vertex())
        lp = minimum_cycle_basis(g).loops[0]
        assert lp.perforation == NON_PERFORATED
        np.testing.assert_allclose(lp.common_vertex, [0, 0, 0])

    def test_kirigami_ring(self):
        g = build_graph(gen_kirigami_slit())
        lp = minimum_cycle_basis(g).loops[0]
        assert lp.perforation == PERFORATED
        # no endpoint is shared by every hinge of the ring
        ends = [set(map(tuple, g.edges[h].edge_vertices)) for h in lp.hinges]
        assert not set.intersection(*ends)
        assert classify_loop(lp, g).perforation == PERFORATED

    def test_inter_sheet_loops(self):
        g = build_graph(gen_stacked_miura(2, 3, 2, connect="alternate"))
        basis = minimum_cycle_basis(g)
        mixed = [lp for lp in basis.loops
                 if any(g.edges[h].kind == "inter" for h in lp.hinges)]
        assert mixed
        for lp in mixed:
            assert {g.edges[h].facets[0][0] for h in lp.hinges} == {0, 1}
            assert lp.perforation == PERFORATED
        # with every segment joined the inter-sheet loops close around a shared vertex
        g2 = build_graph(gen_stacked_miura(2, 2, 2))
        mixed2 = [lp for lp in minimum_cycle_basis(g2).loops
                  if any(g2.edges[h].kind == "inter" for h in lp.hinges)]
        assert mixed2 and all(lp.perforation == NON_PERFORATED for lp in mixed2)

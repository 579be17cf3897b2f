import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import DATA, axis_rotation
from rigidfold.geometry import (export_frame, export_trajectory_csv, fold_geometry, hinge_gaps,
                                isometry_error, obj_text, read_obj, read_trajectory_csv,
                                vtk_text)
from rigidfold.model import parse_model
from rigidfold.pipeline import Mechanism
from rigidfold.patterns import gen_degree4_vertex, gen_grid, gen_miura
from rigidfold.solver import SolverConfig, simulate

SQUARE_OBJ = """# rigidfold frame
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
f 1 2 3 4
"""

SQUARE_VTK = """# vtk DataFile Version 3.0
rigidfold frame
ASCII
DATASET POLYDATA
POINTS 4 double
0 0 0
1 0 0
1 1 0
0 1 0
POLYGONS 1 5
4 0 1 2 3
"""


@pytest.fixture(scope="module")
def d4():
    return Mechanism(gen_degree4_vertex())


@pytest.fixture(scope="module")
def d4_run(d4):
    return simulate(d4, SolverConfig(neutral_angles=np.array([-1.2, 1.2, 1.2, 1.2])))


def state_of(mech, theta):
    return fold_geometry(mech.graph, mech.hinge_screws, theta)


def chain_oracle(mech, theta):
    """Fold a strip of facets by rotating about hinge lines, far end first."""
    g = mech.graph
    order = [g.facet_body[(0, k)] for k in range(len(g.nodes))]
    hinge_between = {}
    for hs, e in zip(mech.hinge_screws, g.edges):
        hinge_between[frozenset((e.p, e.q))] = hs
    out = []
    for k, body in enumerate(order):
        pts = mech.model.sheets[0].coords[list(mech.model.sheets[0].facets[k])].copy()
        for j in range(k, 0, -1):
            hs = hinge_between[frozenset((order[j - 1], order[j]))]
            sign = 1.0 if hs.oriented_pair[0] == order[j - 1] else -1.0
            R = axis_rotation(hs.omega, sign * theta[hs.hinge])
            q = hs.point
            pts = (pts - q) @ R.T + q
        out.append(pts)
    return out


class TestFold:
    def test_home_is_identity(self, d4):
        st_ = state_of(d4, d4.zeros())
        for (s, f), pts in st_.facet_polygons:
            sheet = d4.model.sheets[s]
            np.testing.assert_array_equal(pts, sheet.coords[list(sheet.facets[f])])
        for T in st_.body_poses.values():
            np.testing.assert_array_equal(T, np.eye(4))

    def test_open_chain_matches_sequential_rotations(self):
        mech = Mechanism(gen_grid(4, 1))
        theta = np.array([0.7, -1.1, 0.4])
        st_ = state_of(mech, theta)
        for (_, f), pts in st_.facet_polygons:
            np.testing.assert_allclose(pts, chain_oracle(mech, theta)[f], atol=1e-12)

    def test_closing_hinge_coincides(self, d4, d4_run):
        for f in d4_run.frames[::10]:
            st_ = state_of(d4, f.theta)
            assert np.max(hinge_gaps(d4.graph, st_)) < 1e-9
            assert isometry_error(d4.graph, st_) < 1e-12

    def test_infeasible_angles_open_a_gap(self, d4):
        st_ = state_of(d4, np.array([0.3, 0.0, 0.0, 0.0]))
        assert np.max(hinge_gaps(d4.graph, st_)) > 1e-3

    def test_shared_vertices_folded(self, d4, d4_run):
        st_ = state_of(d4, d4_run.frames[-1].theta)
        verts = st_.folded_vertices[0]
        for (_, f), pts in st_.facet_polygons:
            idx = list(d4.model.sheets[0].facets[f])
            np.testing.assert_allclose(verts[idx], pts, atol=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
    def test_tree_is_isometric_for_any_angles(self, theta):
        mech = Mechanism(gen_grid(4, 1))
        st_ = state_of(mech, np.array(theta))
        assert np.max(hinge_gaps(mech.graph, st_)) < 1e-12
        assert isometry_error(mech.graph, st_) < 1e-12


class TestWriters:
    def test_obj_golden(self):
        mech = Mechanism(parse_model(DATA / "square.json"))
        assert obj_text(state_of(mech, mech.zeros())) == SQUARE_OBJ

    def test_vtk_golden(self):
        mech = Mechanism(parse_model(DATA / "square.json"))
        assert vtk_text(state_of(mech, mech.zeros())) == SQUARE_VTK

    def test_obj_round_trip(self, d4, d4_run, tmp_path):
        st_ = state_of(d4, d4_run.frames[40].theta)
        path = tmp_path / "f.obj"
        export_frame(st_, "obj", path)
        verts, faces = read_obj(path)
        assert len(faces) == 4
        for face, (_, pts) in zip(faces, st_.facet_polygons):
            np.testing.assert_array_equal(verts[face], pts)

    def test_export_deterministic(self, tmp_path):
        mech = Mechanism(gen_miura(2, 2, tilt=0.3))
        theta = np.linspace(-0.2, 0.2, mech.n_hinges)
        for fmt in ("obj", "vtk"):
            export_frame(state_of(mech, theta), fmt, tmp_path / f"a.{fmt}")
            export_frame(state_of(mech, theta), fmt, tmp_path / f"b.{fmt}")
            assert (tmp_path / f"a.{fmt}").read_bytes() == (tmp_path / f"b.{fmt}").read_bytes()

    def test_unknown_format(self, d4, tmp_path):
        with pytest.raises(ValueError):
            export_frame(state_of(d4, d4.zeros()), "stl", tmp_path / "x.stl")

    def test_trajectory_csv(self, d4, d4_run, tmp_path):
        path = tmp_path / "trajectory.csv"
        export_trajectory_csv(d4_run, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "frame,theta_0,theta_1,theta_2,theta_3,residual,dof"
        assert len(lines) == 102
        frames, thetas, res, dofs = read_trajectory_csv(path)
        assert frames == list(range(101))
        np.testing.assert_array_equal(thetas, d4_run.thetas)
        assert dofs == [f.dof_active for f in d4_run.frames]
        for t in thetas:
            assert np.max(np.abs(d4.residual(t))) <= 1e-10
        assert math.isclose(res[5], d4_run.frames[5].residual_norm)

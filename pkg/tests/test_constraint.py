import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import Degree4Oracle, newton, random_feasible, twist_from_fd
from rigidfold.constraint import (assemble_pfaffian, loop_jacobian, loop_pose, loop_residual,
                                  matrix_rank, null_space_basis, rank_and_dof, residual,
                                  truncated_loop_jacobian)
from rigidfold.cycles import NON_PERFORATED, PERFORATED, CycleBasis, Loop, _order_cycle
from rigidfold.errors import DomainError
from rigidfold.pipeline import Mechanism
from rigidfold.patterns import (gen_degree4_vertex, gen_grid, gen_kirigami_slit, gen_miura,
                                gen_stacked_miura, gen_tmp)

SECTORS = [math.radians(x) for x in (70, 105, 100, 85)]


@pytest.fixture(scope="module")
def d4():
    return Mechanism(gen_degree4_vertex(SECTORS))


@pytest.fixture(scope="module")
def oracle():
    return Degree4Oracle(SECTORS)


def oracle_configs(mech, oracle, rhos=(-1.0, -0.4, 0.3, 0.9)):
    out = []
    for rho in rhos:
        for sigma in oracle.sigma_roots(rho):
            out.append(oracle.hinge_angles(mech, rho, sigma))
    return out


class TestLoopPose:
    def test_identity_at_home(self, d4):
        (lp,) = d4.basis.loops
        np.testing.assert_array_equal(loop_pose(lp, d4.screws, d4.zeros()), np.eye(4))
        np.testing.assert_array_equal(loop_residual(lp, d4.screws, d4.zeros()), np.zeros(3))

    def test_identity_at_oracle_solutions(self, d4, oracle):
        (lp,) = d4.basis.loops
        configs = oracle_configs(d4, oracle)
        assert len(configs) >= 4
        for theta in configs:
            np.testing.assert_allclose(loop_pose(lp, d4.screws, theta), np.eye(4), atol=1e-10)
            assert np.linalg.norm(d4.residual(theta)) < 1e-10

    def test_perturbation_breaks_closure(self, d4, oracle):
        (lp,) = d4.basis.loops
        theta = oracle_configs(d4, oracle, (0.5,))[0].copy()
        theta[0] += 1e-3
        assert np.linalg.norm(loop_residual(lp, d4.screws, theta)) > 1e-5

    def test_reversed_loop_is_inverse(self, d4):
        (lp,) = d4.basis.loops
        theta = np.array([0.3, -0.2, 0.5, 0.1])
        T = loop_pose(lp, d4.screws, theta)
        Tr = loop_pose(lp.reversed(), d4.screws, theta)
        np.testing.assert_allclose(T @ Tr, np.eye(4), atol=1e-12)


class TestJacobian:
    @pytest.mark.parametrize("make", [gen_degree4_vertex, gen_kirigami_slit, lambda: gen_tmp(2)])
    def test_matches_finite_differences(self, make):
        mech = Mechanism(make())
        rng = np.random.default_rng(3)
        for lp in mech.basis.loops:
            theta = rng.uniform(-1, 1, mech.n_hinges)
            J = loop_jacobian(lp, mech.screws, theta).matrix
            for k, h in enumerate(lp.hinges):
                fd = twist_from_fd(lambda t: loop_pose(lp, mech.screws, t), theta, h)
                # a hinge crossed once contributes a single column
                assert np.linalg.norm(fd - J[:, k]) <= 1e-6 * max(1, np.linalg.norm(J[:, k]))

    def test_home_columns_are_effective_screws(self, d4):
        (lp,) = d4.basis.loops
        J = loop_jacobian(lp, d4.screws, d4.zeros())
        for k, (h, d) in enumerate(lp.crossings):
            np.testing.assert_allclose(J.matrix[:, k], d * d4.screws[h])
        assert J.column_map == tuple(lp.crossings)

    def test_truncated_is_rotational_slice(self, d4):
        (lp,) = d4.basis.loops
        theta = np.array([0.2, 0.4, -0.1, 0.3])
        full = loop_jacobian(lp, d4.screws, theta).matrix
        np.testing.assert_array_equal(truncated_loop_jacobian(lp, d4.screws, theta).matrix,
                                      full[:3])

    def test_truncated_refuses_perforated(self):
        mech = Mechanism(gen_kirigami_slit())
        (lp,) = mech.basis.loops
        assert lp.perforation == PERFORATED
        with pytest.raises(DomainError):
            truncated_loop_jacobian(lp, mech.screws, mech.zeros())

    def test_residual_linearisation(self, d4, oracle):
        theta = oracle_configs(d4, oracle, (0.6,))[0]
        A = d4.pfaffian(theta).A
        rng = np.random.default_rng(5)
        for eps in (1e-3, 1e-4):
            dt = rng.normal(size=4)
            dt *= eps / np.linalg.norm(dt)
            r = d4.residual(theta + dt)
            assert np.linalg.norm(r - A @ dt) < 10 * eps ** 2


class TestPfaffian:
    @pytest.mark.parametrize("make,shape", [
        (gen_degree4_vertex, (3, 4)),
        (lambda: gen_grid(2, 3), (6, 7)),
        (gen_kirigami_slit, (6, 8)),
        (lambda: gen_miura(2, 2, tilt=0.3), (12, 12)),
        (lambda: gen_tmp(2), (30, 20)),
    ])
    def test_dimensions(self, make, shape):
        mech = Mechanism(make())
        pf = mech.pfaffian(mech.zeros())
        assert pf.shape == shape
        assert pf.shape[0] == 3 * mech.basis.L_o + 6 * mech.basis.L_k

    def test_mixed_block_layout(self):
        mech = Mechanism(gen_tmp(2))
        pf = mech.pfaffian(mech.zeros())
        for lp in mech.basis.loops:
            rows = pf.row_blocks[lp.id]
            assert len(rows) == (3 if lp.perforation == NON_PERFORATED else 6)
            off = sorted(set(range(mech.n_hinges)) - set(lp.hinges))
            assert not np.any(pf.A[rows.start:rows.stop][:, off])

    def test_free_hinge_column_is_zero(self):
        mech = Mechanism(gen_degree4_vertex(flap=True))
        pf = mech.pfaffian(mech.zeros())
        for h in mech.active.free:
            assert not np.any(pf.A[:, h])

    def test_rank_examples(self, d4):
        # flat vertex: the creases span the plane only
        assert d4.dof(d4.zeros()) == (2, 2, 2)
        miura = Mechanism(gen_miura(2, 2, tilt=0.3))
        assert miura.dof(miura.zeros()) == (11, 1, 1)
        kiri = Mechanism(gen_kirigami_slit())
        assert kiri.dof(kiri.zeros()) == (3, 5, 5)

    def test_rank_and_dof_helper(self, d4, oracle):
        theta = oracle_configs(d4, oracle, (0.7,))[0]
        pf = d4.pfaffian(theta)
        assert rank_and_dof(pf, d4.active) == (3, 1, 1)

    def test_matrix_rank_threshold(self):
        A = np.diag([1.0, 1e-6, 1e-10])
        assert matrix_rank(A, 1e-8) == 2
        assert matrix_rank(A, 1e-4) == 1
        assert matrix_rank(np.zeros((3, 3))) == 0
        assert matrix_rank(np.zeros((0, 4))) == 0


class TestNullSpace:
    def test_orthonormal_and_annihilated(self, d4, oracle):
        theta = oracle_configs(d4, oracle, (0.7,))[0]
        A = d4.pfaffian(theta).A
        N = null_space_basis(A)
        assert N.shape == (4, 1)
        np.testing.assert_allclose(N.T @ N, np.eye(1), atol=1e-12)
        assert np.linalg.norm(A @ N) < 1e-10

    def test_empty_and_zero(self):
        np.testing.assert_array_equal(null_space_basis(np.zeros((0, 3))), np.eye(3))
        np.testing.assert_array_equal(null_space_basis(np.zeros((2, 3))), np.eye(3))

    def test_tangent_matches_oracle_curve(self, d4, oracle):
        rho, h = 0.5, 1e-6
        lo = oracle.sigma_roots(rho)[0]
        sig = lambda r: oracle.solve_sigma(r, lo - 0.05, lo + 0.05)
        t0 = oracle.hinge_angles(d4, rho, sig(rho))
        tp = oracle.hinge_angles(d4, rho + h, sig(rho + h))
        tm = oracle.hinge_angles(d4, rho - h, sig(rho - h))
        tangent = (tp - tm) / (2 * h)
        N = d4.null_space(t0)
        proj = N @ (N.T @ tangent)
        assert np.linalg.norm(proj - tangent) < 1e-6 * np.linalg.norm(tangent)


def feasible(mech, count, seed, scale=0.2):
    rng = np.random.default_rng(seed)
    start = newton(mech, mech.zeros())[0]
    return random_feasible(mech, start, count, rng, scale)


RANK_FIXTURES = {
    "degree4": lambda: Mechanism(gen_degree4_vertex(SECTORS)),
    "miura": lambda: Mechanism(gen_miura(2, 2, tilt=0.3)),
    "smo": lambda: Mechanism(gen_stacked_miura(2, 2, 2)),
    "tmp": lambda: Mechanism(gen_tmp(2)),
}


class TestInvariants:
    @pytest.mark.parametrize("name", sorted(RANK_FIXTURES))
    def test_vertex_loops_six_rows_same_rank(self, name):
        mech = RANK_FIXTURES[name]()
        for theta in feasible(mech, 5, 1):
            for lp in mech.basis.loops:
                if lp.perforation != NON_PERFORATED:
                    continue
                J = loop_jacobian(lp, mech.screws, theta).matrix
                assert matrix_rank(J) == matrix_rank(J[:3])

    @pytest.mark.parametrize("name", sorted(RANK_FIXTURES))
    def test_traversal_start_keeps_null_space(self, name):
        mech = RANK_FIXTURES[name]()
        for theta in feasible(mech, 3, 2):
            N = mech.null_space(theta)
            shifted = CycleBasis(tuple(lp.rotated(len(lp.hinges) // 2)
                                       for lp in mech.basis.loops))
            A2 = assemble_pfaffian(shifted, mech.screws, mech.n_hinges, theta).A
            N2 = null_space_basis(A2)
            assert N.shape == N2.shape
            assert np.linalg.norm(N - N2 @ (N2.T @ N)) < 1e-8

    def test_redundant_loop_keeps_rank(self):
        mech = Mechanism(gen_grid(2, 3))
        a, b = mech.basis.loops
        outer = set(a.hinges) ^ set(b.hinges)
        hinges, nodes, _ = _order_cycle(sorted(outer), mech.graph)
        pairs = {hs.hinge: hs.oriented_pair for hs in mech.hinge_screws}
        dirs = tuple(1 if nodes[k] == pairs[h][0] else -1 for k, h in enumerate(hinges))
        extra = Loop(2, hinges, nodes, dirs, PERFORATED)
        big = CycleBasis(mech.basis.loops + (extra,))
        for theta in feasible(mech, 5, 3):
            assert np.linalg.norm(residual(theta, big, mech.screws)) < 1e-10
            r1 = matrix_rank(mech.pfaffian(theta).A)
            r2 = matrix_rank(assemble_pfaffian(big, mech.screws, mech.n_hinges, theta).A)
            assert r1 == r2


@settings(max_examples=30, deadline=None)
@given(st.permutations(range(12)), st.integers(0, 1000))
def test_column_permutation_keeps_rank(perm, seed):
    mech = RANK_FIXTURES["miura"]()
    theta = np.random.default_rng(seed).uniform(-0.5, 0.5, mech.n_hinges)
    A = mech.pfaffian(theta).A
    assert matrix_rank(A[:, list(perm)]) == matrix_rank(A)
    N = null_space_basis(A[:, list(perm)])
    assert np.linalg.norm(A[:, list(perm)] @ N) < 1e-10

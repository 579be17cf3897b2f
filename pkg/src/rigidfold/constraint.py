"""Loop-closure Jacobians and the stacked Pfaffian matrix A(theta)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cycles import NON_PERFORATED
from .errors import DomainError
from .liegroup import apply_adjoint, pose_exp, pose_log, rot_log
from .policy import DEFAULT_POLICY


@dataclass(frozen=True)
class LoopJacobian:
    loop: int
    matrix: np.ndarray
    column_map: tuple  # (hinge id, direction) per column


@dataclass(frozen=True)
class PfaffianMatrix:
    A: np.ndarray
    row_blocks: dict  # loop id -> range of rows
    theta: np.ndarray
    rank_tolerance: float
    columns: tuple  # hinge id of each column

    @property
    def shape(self):
        return self.A.shape


def _screw_array(screws):
    if isinstance(screws, np.ndarray):
        return screws
    return np.array([s.screw if hasattr(s, "screw") else s for s in screws], dtype=float)


def loop_pose(loop, screws, theta):
    """Ordered product of the effective hinge exponentials around a loop."""
    xs = _screw_array(screws)
    T = np.eye(4)
    for h, d in loop.crossings:
        T = T @ pose_exp(d * xs[h], theta[h])
    return T


def loop_jacobian(loop, screws, theta):
    """6 x n_l loop space Jacobian; column k is Ad(T_1..k-1) of screw k."""
    xs = _screw_array(screws)
    J = np.zeros((6, len(loop.hinges)))
    T = np.eye(4)
    for k, (h, d) in enumerate(loop.crossings):
        xi = d * xs[h]
        J[:, k] = apply_adjoint(T, xi)
        T = T @ pose_exp(xi, theta[h])
    return LoopJacobian(loop.id, J, tuple(loop.crossings))


def truncated_loop_jacobian(loop, screws, theta):
    """3-row rotational Jacobian, valid for loops whose axes meet at one point."""
    if loop.perforation != NON_PERFORATED:
        raise DomainError(f"loop {loop.id} is perforated; the truncated form does not apply")
    full = loop_jacobian(loop, screws, theta)
    return LoopJacobian(loop.id, full.matrix[:3].copy(), full.column_map)


def loop_residual(loop, screws, theta, policy=DEFAULT_POLICY):
    T = loop_pose(loop, screws, theta)
    if loop.perforation == NON_PERFORATED:
        w, ang = rot_log(T[:3, :3])
        return w * ang
    return pose_log(T, policy)


def residual(theta, basis, screws, policy=DEFAULT_POLICY):
    """Stacked closure residual: SO(3) log for vertex loops, SE(3) log otherwise."""
    theta = np.asarray(theta, dtype=float)
    xs = _screw_array(screws)
    parts = [loop_residual(lp, xs, theta, policy) for lp in basis.loops]
    if not parts:
        return np.zeros(0)
    return np.concatenate(parts)


def assemble_pfaffian(basis, screws, n_hinges, theta, rank_tol=DEFAULT_POLICY.rank_tol):
    """Stack the loop blocks into a (3 L_o + 6 L_k) x n matrix.

    Columns are global hinge ids; hinges outside every loop stay zero.
    """
    theta = np.asarray(theta, dtype=float)
    xs = _screw_array(screws)
    A = np.zeros((basis.n_rows, n_hinges))
    blocks = basis.row_blocks()
    for lp in basis.loops:
        J = loop_jacobian(lp, xs, theta).matrix
        rows = blocks[lp.id]
        J = J[: len(rows)]
        for k, h in enumerate(lp.hinges):
            A[rows.start:rows.stop, h] += J[:, k]
    return PfaffianMatrix(A, blocks, theta.copy(), rank_tol, tuple(range(n_hinges)))


def _svd(A):
    if A.size == 0:
        return np.zeros(0), np.eye(A.shape[1])
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    return s, vt


def matrix_rank(A, rank_tol=DEFAULT_POLICY.rank_tol):
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


def rank_and_dof(pf, active):
    """Rank of A, DoF over the active hinges, and DoF including free hinges."""
    r = matrix_rank(pf.A, pf.rank_tolerance)
    dof_active = active.n_active - r
    return r, dof_active, dof_active + len(active.free)


def null_space_basis(A, rank_tol=DEFAULT_POLICY.rank_tol):
    """Orthonormal basis (columns) of the null space of A."""
    if isinstance(A, PfaffianMatrix):
        rank_tol = A.rank_tolerance
        A = A.A
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    if A.size == 0 or not np.any(A):
        return np.eye(n)
    s, vt = _svd(A)
    r = int(np.sum(s > rank_tol * s[0]))
    return vt[r:].T.copy()

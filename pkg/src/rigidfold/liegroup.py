"""Rigid-body math in exponential coordinates.

Conventions: a screw axis or twist is a length-6 array ``[omega, v]``
(angular part first); a pose is a 4x4 homogeneous matrix.
"""
import math

import numpy as np

from .errors import DomainError
from .policy import DEFAULT_POLICY

_I3 = np.eye(3)


def skew(w):
    """Return the 3x3 matrix ``[w]`` with ``[w] @ x == cross(w, x)``."""
    x, y, z = w
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(W):
    """Inverse of :func:`skew` (uses the antisymmetric part)."""
    return 0.5 * np.array([W[2, 1] - W[1, 2], W[0, 2] - W[2, 0], W[1, 0] - W[0, 1]])


def _check_unit(omega, tol):
    n = float(np.linalg.norm(omega))
    if abs(n - 1.0) > tol:
        raise DomainError(f"rotation axis must be a unit vector, got norm {n!r}")


def rot_exp(omega, theta, policy=DEFAULT_POLICY):
    """Rodrigues' formula for a rotation of ``theta`` about unit ``omega``."""
    omega = np.asarray(omega, dtype=float)
    _check_unit(omega, 1e3 * policy.unit_norm)
    W = skew(omega)
    return _I3 + math.sin(theta) * W + (1.0 - math.cos(theta)) * (W @ W)


def rot_log(R):
    """Axis-angle of a proper rotation, with ``theta`` in ``[0, pi]``.

    For the identity the axis is the fixed vector ``(1, 0, 0)``.
    """
    R = np.asarray(R, dtype=float)
    w = vee(R)  # sin(theta) * omega
    s = float(np.linalg.norm(w))
    c = 0.5 * (np.trace(R) - 1.0)
    theta = math.atan2(s, c)
    if s < 1e-12 and c > 0:
        return np.array([1.0, 0.0, 0.0]), 0.0
    if c > -0.9:
        return w / s, theta
    # near pi the antisymmetric part vanishes; read the axis from the
    # symmetric part sym(R) - cI = (1 - c) w w^T instead
    B = 0.5 * (R + R.T) - c * _I3
    k = int(np.argmax(np.diag(B)))
    axis = B[:, k] / math.sqrt(B[k, k])
    axis /= np.linalg.norm(axis)
    if s > 0 and axis @ w < 0:
        axis = -axis
    return axis, theta


def screw_from_geometry(omega, q, h=0.0):
    """Screw axis through point ``q`` with direction ``omega`` and pitch ``h``."""
    omega = np.asarray(omega, dtype=float)
    q = np.asarray(q, dtype=float)
    v = -np.cross(omega, q) + h * omega
    return np.concatenate([omega, v])


def _g_matrix(W, theta):
    return _I3 * theta + (1.0 - math.cos(theta)) * W + (theta - math.sin(theta)) * (W @ W)


def pose_exp(xi, theta):
    """Pose reached by moving ``theta`` along the unit screw ``xi``."""
    xi = np.asarray(xi, dtype=float)
    omega, v = xi[:3], xi[3:]
    T = np.eye(4)
    if np.dot(omega, omega) < 0.25:
        # pure translation
        T[:3, 3] = v * theta
        return T
    W = skew(omega)
    T[:3, :3] = _I3 + math.sin(theta) * W + (1.0 - math.cos(theta)) * (W @ W)
    T[:3, 3] = _g_matrix(W, theta) @ v
    return T


def pose_log(T, policy=DEFAULT_POLICY):
    """Twist ``theta * xi`` whose exponential is ``T``."""
    T = np.asarray(T, dtype=float)
    R, p = T[:3, :3], T[:3, 3]
    omega, theta = rot_log(R)
    if theta == 0.0:
        return np.concatenate([np.zeros(3), p])
    w = omega * theta
    W = skew(w)
    if theta < policy.small_angle:
        t2 = theta * theta
        coef = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    else:
        half = 0.5 * theta
        coef = (1.0 - half / math.tan(half)) / (theta * theta)
    lin = p - 0.5 * (W @ p) + coef * (W @ (W @ p))
    return np.concatenate([w, lin])


def pose_inv(T):
    R, p = T[:3, :3], T[:3, 3]
    out = np.eye(4)
    out[:3, :3] = R.T
    out[:3, 3] = -R.T @ p
    return out


def adjoint(T):
    """6x6 adjoint matrix ``[[R, 0], [[p]R, R]]``."""
    R, p = T[:3, :3], T[:3, 3]
    Ad = np.zeros((6, 6))
    Ad[:3, :3] = R
    Ad[3:, 3:] = R
    Ad[3:, :3] = skew(p) @ R
    return Ad


def apply_adjoint(T, xi):
    """``adjoint(T) @ xi`` without forming the 6x6 matrix."""
    R, p = T[:3, :3], T[:3, 3]
    w = R @ xi[:3]
    return np.concatenate([w, np.cross(p, w) + R @ xi[3:]])


def se3_hat(xi):
    out = np.zeros((4, 4))
    out[:3, :3] = skew(xi[:3])
    out[:3, 3] = xi[3:]
    return out


def poe_forward(screws, thetas, M=None):
    """Product of exponentials ``exp([xi_1] t_1) ... exp([xi_n] t_n) M``."""
    if len(screws) != len(thetas):
        raise DomainError(f"{len(screws)} screws but {len(thetas)} joint values")
    T = np.eye(4)
    for xi, th in zip(screws, thetas):
        T = T @ pose_exp(xi, th)
    if M is not None:
        T = T @ M
    return T


def space_jacobian(screws, thetas):
    """Space Jacobian of the open chain; column i is ``Ad_{T_1..i-1}(xi_i)``."""
    if len(screws) != len(thetas):
        raise DomainError(f"{len(screws)} screws but {len(thetas)} joint values")
    n = len(screws)
    J = np.zeros((6, n))
    T = np.eye(4)
    for i, (xi, th) in enumerate(zip(screws, thetas)):
        xi = np.asarray(xi, dtype=float)
        J[:, i] = apply_adjoint(T, xi)
        T = T @ pose_exp(xi, th)
    return J

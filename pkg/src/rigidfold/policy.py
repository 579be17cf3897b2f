"""Numeric tolerances used across the package.

Everything that compares floating point numbers takes its threshold from a
:class:`NumericPolicy`. Pass a customised instance to override.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class NumericPolicy:
    # relative to the model bounding-box diagonal
    coincidence: float = 1e-9
    # relative to the facet diameter
    planarity: float = 1e-8
    # singular values below rank_tol * sigma_max count as zero
    rank_tol: float = 1e-8
    unit_norm: float = 1e-12
    # below this angle pose_log switches to its series expansion
    small_angle: float = 1e-3
    tol_residual: float = 1e-10


DEFAULT_POLICY = NumericPolicy()

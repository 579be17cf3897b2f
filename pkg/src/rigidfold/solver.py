"""Trajectory tracing on the closure manifold.

Each step moves toward the neutral angles, projects the move onto the
null space of A(theta), then pulls the candidate back onto the manifold
with a Newton iteration.  Failed or non-descending steps are retried with
half the step length.
"""
from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .constraint import null_space_basis
from .errors import InitializationError, ModelParseError

log = logging.getLogger(__name__)

COMPLETED = "completed"
CONVERGED_TO_NEUTRAL = "converged_to_neutral"
STEP_UNDERFLOW = "step_underflow"


@dataclass
class SolverConfig:
    neutral_angles: np.ndarray | None = None
    stiffness: np.ndarray | None = None
    step_length: float = 0.02
    steps: int = 100
    tol_residual: float = 1e-10
    max_newton: int = 50
    min_step: float = 1e-6
    rank_tol: float = 1e-8
    # a projected step with max-norm below this counts as stationary
    stall_tol: float = 1e-12

    def __post_init__(self):
        if self.step_length <= 0:
            raise ValueError("step_length must be positive")
        if self.tol_residual <= 0:
            raise ValueError("tol_residual must be positive")
        if self.stiffness is not None and np.any(np.asarray(self.stiffness) <= 0):
            raise ValueError("stiffness must be positive")

    def resolved(self, n):
        """Neutral angles and stiffness as length-``n`` arrays."""
        nb = np.zeros(n) if self.neutral_angles is None else np.asarray(self.neutral_angles, float)
        k = np.ones(n) if self.stiffness is None else np.asarray(self.stiffness, float)
        if nb.shape != (n,) or k.shape != (n,):
            raise ValueError(f"neutral_angles and stiffness need {n} entries")
        return nb, k


@dataclass(frozen=True)
class TrajectoryFrame:
    index: int
    theta: np.ndarray = field(compare=False)
    residual_norm: float
    dof_active: int
    newton_iterations: int
    step_length: float = 0.0


@dataclass
class Trajectory:
    frames: list
    termination: str = COMPLETED

    @property
    def thetas(self):
        return np.array([f.theta for f in self.frames])

    def running_dof(self):
        """Most common per-frame dof, ignoring the first frame."""
        vals = [f.dof_active for f in self.frames[1:]] or [self.frames[0].dof_active]
        return Counter(vals).most_common(1)[0][0]

    def singular_frames(self):
        """Frames whose instantaneous dof differs from the running value."""
        mode = self.running_dof()
        return [f.index for f in self.frames if f.dof_active != mode]


@dataclass(frozen=True)
class NewtonResult:
    theta: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool


def energy(theta, neutral, stiffness):
    d = theta - neutral
    return 0.5 * float(np.sum(stiffness * d * d))


def project_step(delta0, A, rank_tol=1e-8):
    """Orthogonal projection of ``delta0`` onto the null space of ``A``."""
    N = null_space_basis(A, rank_tol)
    return N @ (N.T @ delta0)


def newton_correct(mech, theta, tol=1e-10, max_iter=50, rank_tol=1e-8):
    """Pull ``theta`` onto the closure manifold with pseudo-inverse Newton steps."""
    theta = np.array(theta, dtype=float)
    r = mech.residual(theta)
    norm = float(np.max(np.abs(r))) if r.size else 0.0
    start = norm
    for it in range(max_iter + 1):
        if norm <= tol:
            return NewtonResult(theta, norm, it, True)
        if it == max_iter or not np.isfinite(norm) or norm > 1e3 * max(start, 1.0):
            break
        A = mech.pfaffian(theta, rank_tol).A
        theta = theta - np.linalg.pinv(A, rcond=rank_tol) @ r
        r = mech.residual(theta)
        norm = float(np.max(np.abs(r)))
    return NewtonResult(theta, norm, max_iter, False)


def _frame(mech, index, theta, norm, iters, eta, rank_tol):
    _, dof, _ = mech.dof(theta, rank_tol)
    return TrajectoryFrame(index, theta.copy(), norm, dof, iters, eta)


def step(mech, theta, config, neutral=None, stiffness=None):
    """Advance one accepted frame from feasible ``theta``.

    Returns ``(new_theta, newton_result, eta)`` or a termination tag with
    ``None`` values.
    """
    n = mech.n_hinges
    if neutral is None or stiffness is None:
        neutral, stiffness = config.resolved(n)
    grad = -stiffness * (theta - neutral)
    gmax = float(np.max(np.abs(grad))) if n else 0.0
    if gmax <= config.stall_tol:
        return CONVERGED_TO_NEUTRAL, None, None
    A = mech.pfaffian(theta, config.rank_tol)
    N = null_space_basis(A, config.rank_tol)
    e0 = energy(theta, neutral, stiffness)
    eta = config.step_length
    while eta >= config.min_step:
        delta0 = grad * min(1.0, eta / gmax)
        delta1 = N @ (N.T @ delta0)
        if float(np.max(np.abs(delta1))) <= config.stall_tol:
            return CONVERGED_TO_NEUTRAL, None, None
        res = newton_correct(mech, theta + delta1, config.tol_residual,
                             config.max_newton, config.rank_tol)
        if res.converged and energy(res.theta, neutral, stiffness) < e0:
            return res.theta, res, eta
        eta *= 0.5
    return STEP_UNDERFLOW, None, None


def simulate(mech, config, theta0=None):
    """Run up to ``config.steps`` accepted steps from a feasible start."""
    n = mech.n_hinges
    theta = np.zeros(n) if theta0 is None else np.array(theta0, dtype=float)
    r = mech.residual(theta)
    norm = float(np.max(np.abs(r))) if r.size else 0.0
    if norm > config.tol_residual:
        raise InitializationError(
            f"initial configuration violates closure (residual {norm:.3e})")
    neutral, stiffness = config.resolved(n)
    frames = [_frame(mech, 0, theta, norm, 0, 0.0, config.rank_tol)]
    termination = COMPLETED
    for k in range(1, config.steps + 1):
        new, res, eta = step(mech, theta, config, neutral, stiffness)
        if isinstance(new, str):
            termination = new
            break
        theta = new
        frames.append(_frame(mech, k, theta, res.residual_norm, res.iterations, eta,
                             config.rank_tol))
        log.info("frame %d residual %.2e dof %d", k, res.residual_norm, frames[-1].dof_active)
    return Trajectory(frames, termination)


def _collect(entries, mech, default, what):
    out = np.full(mech.n_hinges, float(default))
    for item in entries or []:
        if "hinge" in item:
            h = int(item["hinge"])
        elif "sheet_edge" in item:
            s, e = item["sheet_edge"]
            key = ("sheet_edge", int(s), int(e))
            if key not in mech.hinge_lookup:
                raise ModelParseError(f"{what}: sheet {s} edge {e} is not a hinge", field=what)
            h = mech.hinge_lookup[key]
        elif "connection" in item:
            key = ("connection", int(item["connection"]))
            if key not in mech.hinge_lookup:
                raise ModelParseError(f"{what}: connection {key[1]} is not a hinge", field=what)
            h = mech.hinge_lookup[key]
        else:
            raise ModelParseError(f"{what}: entry needs hinge, sheet_edge or connection", field=what)
        if not 0 <= h < mech.n_hinges:
            raise ModelParseError(f"{what}: hinge {h} out of range", field=what)
        out[h] = float(item["value"])
    return out


def config_from_dict(data, mech):
    """Build a :class:`SolverConfig` from the JSON config layout."""
    kw = {}
    for key, name in (("step_length", "step_length"), ("steps", "steps"),
                      ("tol_residual", "tol_residual"), ("max_newton", "max_newton"),
                      ("min_step", "min_step"), ("rank_tol", "rank_tol"),
                      ("rank_tolerance", "rank_tol")):
        if key in data:
            kw[name] = data[key]
    if "steps" in kw:
        kw["steps"] = int(kw["steps"])
    if "max_newton" in kw:
        kw["max_newton"] = int(kw["max_newton"])
    neutral = _collect(data.get("neutral_angles"), mech, data.get("neutral_default", 0.0),
                       "neutral_angles")
    stiffness = _collect(data.get("stiffness"), mech, data.get("stiffness_default", 1.0),
                         "stiffness")
    return SolverConfig(neutral_angles=neutral, stiffness=stiffness, **kw)


def load_config(path, mech):
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelParseError(f"config: {exc.msg}", line=exc.lineno) from exc
    return config_from_dict(data, mech)

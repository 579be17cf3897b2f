"""End-to-end assembly: model -> graph -> loops -> screws -> A(theta)."""
from __future__ import annotations

from functools import cached_property

import numpy as np

from .constraint import assemble_pfaffian, matrix_rank, null_space_basis, residual
from .cycles import minimum_cycle_basis
from .graph import build_graph
from .policy import DEFAULT_POLICY
from .screws import apply_sheet_polarity, establish_base_orientation, select_active
from .validation import validate_model


class Mechanism:
    """All static data needed to evaluate closure constraints of a model."""

    def __init__(self, model, policy=DEFAULT_POLICY, orient=True):
        self.policy = policy
        self.report = validate_model(model, policy)
        self.graph = build_graph(model, self.report, policy, orient=orient)
        self.model = self.graph.model
        self.raw_basis = minimum_cycle_basis(self.graph)
        self.orientation = establish_base_orientation(self.raw_basis, self.graph)
        self.basis = self.orientation.basis
        self.hinge_screws = apply_sheet_polarity(self.graph, self.orientation)
        self.screws = np.array([h.screw for h in self.hinge_screws]).reshape(-1, 6)
        self.active = select_active(self.basis, self.graph)

    @classmethod
    def from_file(cls, path, policy=DEFAULT_POLICY):
        from .model import parse_model

        return cls(parse_model(path), policy)

    @property
    def n_hinges(self):
        return len(self.graph.edges)

    @cached_property
    def hinge_lookup(self):
        """Maps ``("sheet_edge", sheet, edge)`` and ``("connection", c)`` to hinge ids."""
        out = {}
        for e in self.graph.edges:
            if e.kind == "intra" and e.edge_index is not None:
                out[("sheet_edge", e.sheet, e.edge_index)] = e.id
            elif e.kind == "inter":
                out[("connection", e.connection)] = e.id
        return out

    def zeros(self):
        return np.zeros(self.n_hinges)

    def residual(self, theta):
        return residual(theta, self.basis, self.screws, self.policy)

    def pfaffian(self, theta, rank_tol=None):
        tol = self.policy.rank_tol if rank_tol is None else rank_tol
        return assemble_pfaffian(self.basis, self.screws, self.n_hinges, theta, tol)

    def rank(self, theta, rank_tol=None):
        pf = self.pfaffian(theta, rank_tol)
        return matrix_rank(pf.A, pf.rank_tolerance)

    def dof(self, theta, rank_tol=None):
        """``(rank, dof_active, dof_total)`` at ``theta``."""
        r = self.rank(theta, rank_tol)
        d = self.active.n_active - r
        return r, d, d + len(self.active.free)

    def null_space(self, theta, rank_tol=None):
        return null_space_basis(self.pfaffian(theta, rank_tol))

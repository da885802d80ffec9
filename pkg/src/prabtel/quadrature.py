"""Singular-weight product integration on graded meshes.

The fractional operators and the solution formula all integrate products
w(s) y(s) where w is a power weight (possibly singular at 0) and y is only
known at mesh nodes. The rules built here integrate w exactly against the
piecewise-linear interpolant of y, which keeps second-order accuracy in the
mesh size even when the weight blows up at an endpoint. Meshes are power
graded toward 0 to resolve the singularity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidParams

__all__ = ["GradedMesh", "WeightedRule", "graded_mesh", "power_moment", "build_rule"]


@dataclass(frozen=True)
class GradedMesh:
    """Power-graded mesh node_i = L * (i/n)^r on [0, L], r >= 1."""

    nodes: np.ndarray
    r: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if self.r < 1.0:
            raise InvalidParams(f"mesh grading must be >= 1, got {self.r}")
        if nodes.ndim != 1 or nodes.size < 2:
            raise InvalidParams("mesh needs at least two nodes")
        if nodes[0] != 0.0:
            raise InvalidParams("mesh must start at 0")
        if not np.all(np.diff(nodes) > 0.0):
            raise InvalidParams("mesh nodes must be strictly increasing")

    @property
    def length(self) -> float:
        return float(self.nodes[-1])

    @property
    def n_cells(self) -> int:
        return self.nodes.size - 1


def graded_mesh(L: float, n: int, r: float = 2.0) -> GradedMesh:
    """Build the n-cell graded mesh node_i = L * (i/n)^r on [0, L]."""
    if not (L > 0.0):
        raise InvalidParams(f"mesh length must be positive, got {L}")
    if n < 1:
        raise InvalidParams(f"mesh needs at least one cell, got n={n}")
    i = np.arange(n + 1, dtype=float)
    nodes = L * (i / n) ** r
    nodes[-1] = L  # guard rounding in the power map
    return GradedMesh(nodes=nodes, r=r)


@dataclass(frozen=True)
class WeightedRule:
    """Nodes and weights with sum(w_i y(node_i)) = int_0^L w(s) y(s) ds for
    every continuous piecewise-linear y on the nodes."""

    nodes: np.ndarray
    weights: np.ndarray

    def apply(self, values) -> float:
        values = np.asarray(values, dtype=float)
        if values.shape != self.nodes.shape:
            raise InvalidParams(
                f"rule expects {self.nodes.size} values, got {values.size}")
        return float(self.weights @ values)

    def integrate(self, fn) -> float:
        return float(self.weights @ np.asarray(fn(self.nodes), dtype=float))


def power_moment(mu: float, a: float, b: float, k: int) -> float:
    """Closed-form moment int_a^b s^(mu+k) ds for mu > -1, k in {0, 1}."""
    if mu <= -1.0:
        raise DomainError(f"power weight exponent must exceed -1, got {mu}")
    if not (0.0 <= a < b):
        raise DomainError(f"moment interval must satisfy 0 <= a < b, got [{a}, {b}]")
    if k not in (0, 1):
        raise DomainError(f"moment order k must be 0 or 1, got {k}")
    p = mu + k + 1.0
    return (b ** p - a ** p) / p


def build_rule(weight_exponent: float, mesh: GradedMesh) -> WeightedRule:
    """Product-integration rule for the weight s^weight_exponent on a mesh.

    Each cell [s_j, s_{j+1}] contributes the exact weighted integrals of the
    two linear hat-function pieces, so the rule integrates w times any
    piecewise-linear function exactly.
    """
    s = mesh.nodes
    n = mesh.n_cells
    w = np.zeros(n + 1)
    for j in range(n):
        a, b = s[j], s[j + 1]
        h = b - a
        m0 = power_moment(weight_exponent, a, b, 0)
        m1 = power_moment(weight_exponent, a, b, 1)
        w[j] += (b * m0 - m1) / h
        w[j + 1] += (m1 - a * m0) / h
    return WeightedRule(nodes=s, weights=w)

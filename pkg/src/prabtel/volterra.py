"""Reduction of the nonlocal condition to a second-kind Volterra equation.

Substituting the closed-form solution into the nonlocal condition

    u(0,x) - int_0^q M(t) u(t,x) dt = psi(x)

collapses the problem to a convolution equation for the initial trace
tau(x) = u(0,x):

    tau(x) - (ab/A) int_0^x tau(xi) M1(x - xi) dxi = g(x)/A,

with the weighted-moment constant A, the kernel M1 built from the V2
series instance, and a right-hand side g assembled from psi, phi, M and
the forcing.  ``assemble_system`` produces the discrete system on a
uniform x-grid, ``solve_tau`` runs the lower-triangular Nystrom sweep,
and ``picard_solve`` cross-checks it by successive approximations.

A note on the constant.  Two closely related constants appear:

    A_display = int_0^q M(t) (1 - a G(gamma) t^beta E2(...)) dt
    A_reduce  = 1 - int_0^q M dt - a G(gamma) int_0^q M t^beta E2 dt

``compute_A`` returns the first (the quantity whose positivity bound
A > int M dt holds for a < 0, M >= 0).  The divisor of the reduced
equation is the second: it is what makes G(0) = phi(0) under the
compatibility condition, and constant data then solve the system with
tau identically constant.  ``VolterraSystem.A`` stores the divisor;
``diagnostics`` records both.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateNonlocal,
    InvalidData,
    MaxIterExceeded,
    SingularStep,
)
from .fracops import PrabhakarParams, QuadPolicy
from .goursat import (
    Domain2D,
    ForcingTerm,
    TeleEngine,
    TelegraphCoeffs,
    TraceSolution,
    _call_on,
    _is_zero_forcing,
)
from .quadrature import build_rule, graded_mesh
from .specfun import SeriesPolicy

A_TOL = 1e-10

# M is declared degenerate when it never exceeds this at the sample nodes
_M_ZERO_TOL = 1e-14


@dataclass(frozen=True)
class VolterraSystem:
    """Discretized trace equation tau = rhs + coupling * int m2 tau.

    ``m2`` holds kernel samples M2(xi_j, x_i) = M1(x_i - xi_j)/A for
    xi_j <= x_i (entries above the diagonal are never read); ``rhs``
    holds G = g/A at the nodes; ``coupling`` is the product a*b.
    """

    A: float
    x_grid: np.ndarray
    m2: np.ndarray
    rhs: np.ndarray
    coupling: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x_grid, dtype=float)
        m2 = np.asarray(self.m2, dtype=float)
        rhs = np.asarray(self.rhs, dtype=float)
        object.__setattr__(self, "x_grid", x)
        object.__setattr__(self, "m2", m2)
        object.__setattr__(self, "rhs", rhs)
        if not abs(self.A) > A_TOL:
            raise DegenerateNonlocal(
                f"|A| = {abs(self.A):.3g} does not clear {A_TOL}")
        n = x.size
        if x.ndim != 1 or n < 2 or not np.all(np.diff(x) > 0.0):
            raise InvalidData("x_grid must be ascending with >= 2 nodes")
        if m2.shape != (n, n) or rhs.shape != (n,):
            raise InvalidData(
                f"shape mismatch: m2 {m2.shape}, rhs {rhs.shape}, grid {n}")


def _trapezoid_weights(x_grid: np.ndarray) -> np.ndarray:
    """Lower-triangular trapezoid weights: row i integrates over [0, x_i]."""
    n = x_grid.size
    w = np.zeros((n, n))
    for i in range(1, n):
        cells = np.diff(x_grid[: i + 1])
        w[i, 0] = 0.5 * cells[0]
        w[i, i] = 0.5 * cells[-1]
        if i > 1:
            w[i, 1:i] = 0.5 * (cells[:-1] + cells[1:])
    return w


def _sample_m(M, nodes: np.ndarray) -> np.ndarray:
    vals = _call_on(M, nodes)
    if np.abs(vals).max() <= _M_ZERO_TOL:
        raise InvalidData("weight M vanishes at every sample node")
    return vals


def _beta_rule(engine: TeleEngine, domain: Domain2D, quad: QuadPolicy):
    """Product rule on [0,q] for the weight t^beta, refined 4x.

    The 1-D t-integrals are cheap next to the grid evaluation, so they
    run on a finer mesh than quad.n_points to keep their error
    subdominant.
    """
    grading = max(quad.grading, 1.0 / engine.params.beta)
    mesh = graded_mesh(domain.q, 4 * quad.n_points, grading)
    return build_rule(engine.params.beta, mesh)


def _flat_rule(domain: Domain2D, quad: QuadPolicy):
    mesh = graded_mesh(domain.q, 4 * quad.n_points, 1.0)
    return build_rule(0.0, mesh)


def _a_integrals(engine: TeleEngine, M, domain: Domain2D,
                 quad: QuadPolicy) -> tuple:
    """(int M dt, a G(gamma) int M t^beta E2 dt) on [0, q]."""
    flat = _flat_rule(domain, quad)
    i_m = float(flat.weights @ _sample_m(M, flat.nodes))
    rule = _beta_rule(engine, domain, quad)
    ge2 = engine.gamma_e2(rule.nodes)
    i_e = engine.coeffs.a * float(
        (rule.weights * _sample_m(M, rule.nodes)) @ ge2)
    return i_m, i_e


def compute_A(params: PrabhakarParams, coeffs: TelegraphCoeffs, M,
              domain: Domain2D, quad: QuadPolicy = QuadPolicy(),
              series: SeriesPolicy = SeriesPolicy()) -> float:
    """Weighted-moment constant int_0^q M(t)(1 - a G(g) t^b E2(...)) dt.

    Raises InvalidData when M vanishes at every sample node and
    DegenerateNonlocal when the result does not clear A_TOL.
    """
    engine = TeleEngine(params, coeffs, domain.q, domain.p, series=series)
    i_m, i_e = _a_integrals(engine, M, domain, quad)
    value = i_m - i_e
    if not abs(value) > A_TOL:
        raise DegenerateNonlocal(
            f"|A| = {abs(value):.3g} does not clear {A_TOL}")
    return value


def _m1_at(engine: TeleEngine, M, domain: Domain2D, quad: QuadPolicy,
           diffs: np.ndarray) -> np.ndarray:
    """M1 at an array of displacements: int_0^q M t^beta F2(.., b s, ..) dt."""
    rule = _beta_rule(engine, domain, quad)
    mw = rule.weights * _sample_m(M, rule.nodes)
    return engine.fbar("V2", rule.nodes, diffs) @ mw


def kernel_M1(params: PrabhakarParams, coeffs: TelegraphCoeffs, M,
              xi: float, x: float, domain: Domain2D,
              quad: QuadPolicy = QuadPolicy(),
              series: SeriesPolicy = SeriesPolicy()) -> float:
    """Convolution kernel M1(xi, x); depends on the pair through x - xi."""
    if not (0.0 <= xi <= x <= domain.p):
        raise InvalidData(
            f"kernel arguments must satisfy 0 <= xi <= x <= p, "
            f"got ({xi}, {x})")
    engine = TeleEngine(params, coeffs, domain.q, domain.p, series=series)
    return float(_m1_at(engine, M, domain, quad, np.array([x - xi]))[0])


def _g_values(engine: TeleEngine, M, phi, psi, f, eps1: float, eps2: float,
              domain: Domain2D, quad: QuadPolicy,
              x_arr: np.ndarray) -> np.ndarray:
    """Right-hand side g on an array of x values (display normalization)."""
    co, q = engine.coeffs, domain.q
    phi0 = float(phi(0.0))
    out = _call_on(psi, x_arr).copy()

    flat = _flat_rule(domain, quad)
    m_flat = _sample_m(M, flat.nodes)
    c_phi = float((flat.weights * m_flat) @ (_call_on(phi, flat.nodes) - phi0))
    out += np.exp(co.b * x_arr) * c_phi

    rule = _beta_rule(engine, domain, quad)
    mw = rule.weights * _sample_m(M, rule.nodes)
    out -= co.a * phi0 * (engine.fbar("V1", rule.nodes, x_arr) @ mw)

    # double integral of phi against V3: with v = q - eta the factor
    # (q-eta)^beta from the inner s = t - eta integral becomes the
    # product weight v^beta of the outer rule; the x-dependence of the
    # V3 instance factors through its y-power block, so the whole
    # double sum collapses into one coefficient vector
    beta = engine.params.beta
    grading = max(quad.grading, 1.0 / beta)
    outer = build_rule(beta, graded_mesh(q, quad.n_points, grading))
    inner = build_rule(beta - 1.0, graded_mesh(1.0, quad.n_points, grading))
    cacc = np.zeros(engine.m_cap)
    for v, w_v in zip(outer.nodes, outer.weights):
        if v <= 0.0 or w_v == 0.0:
            continue
        eta = q - v
        s = v * inner.nodes
        mv = _call_on(M, eta + s)
        cacc += engine.cvec(s, shifted=False) @ (
            (w_v * float(phi(eta))) * inner.weights * mv)
    j3 = engine.ypowers(x_arr) @ (engine.jw["V3"].T @ cacc)
    out += co.a * co.b * x_arr * j3

    if not _is_zero_forcing(f):
        forcing = ForcingTerm(engine, f, eps1, eps2, x_arr, quad)
        f_outer = build_rule(0.0, graded_mesh(
            q, max(quad.n_points // 2, 16), grading))
        m_outer = _call_on(M, f_outer.nodes)
        acc = np.zeros_like(x_arr)
        for t, w, mt in zip(f_outer.nodes, f_outer.weights, m_outer):
            if t > 0.0 and w != 0.0 and mt != 0.0:
                acc += (w * mt) * forcing.row(float(t))
        out += acc
    return out


def rhs_g(params: PrabhakarParams, coeffs: TelegraphCoeffs, M, phi, psi, f,
          x: float, domain: Domain2D, quad: QuadPolicy = QuadPolicy(),
          series: SeriesPolicy = SeriesPolicy(),
          eps1: float = 0.0, eps2: float = 0.0) -> float:
    """Right-hand side g(x) of the reduced trace equation."""
    if not (0.0 <= x <= domain.p):
        raise InvalidData(f"x must lie in [0, p], got {x}")
    engine = TeleEngine(params, coeffs, domain.q, domain.p, series=series)
    return float(_g_values(engine, M, phi, psi, f, eps1, eps2,
                           domain, quad, np.array([x]))[0])


_STRICT_NOTE = ("uniqueness is only proven for a < 0, b < 0, delta < 0, "
                "alpha = 1, gamma = beta; proceeding on |A| > A_TOL alone")


def _in_strict_regime(params: PrabhakarParams,
                      coeffs: TelegraphCoeffs) -> bool:
    return (coeffs.a < 0.0 and coeffs.b < 0.0 and params.delta < 0.0
            and params.alpha == 1.0 and params.gamma == params.beta
            and 0.0 < params.beta < 1.0)


def assemble_system(params: PrabhakarParams, coeffs: TelegraphCoeffs,
                    domain: Domain2D, M, phi, psi, f=None,
                    eps1: float = 0.0, eps2: float = 0.0,
                    quad: QuadPolicy = QuadPolicy(),
                    series: SeriesPolicy = SeriesPolicy()) -> VolterraSystem:
    """Build the discrete trace equation on a uniform x-grid.

    The grid has quad.n_points cells on [0, p].  Diagnostics carry the
    display constant, the divisor, the M mass, and coarse-vs-fine
    refinement deltas for the kernel and right-hand side assembly.
    """
    engine = TeleEngine(params, coeffs, domain.q, domain.p, series=series)
    if not _in_strict_regime(params, coeffs):
        warnings.warn(_STRICT_NOTE, RuntimeWarning, stacklevel=2)
    i_m, i_e = _a_integrals(engine, M, domain, quad)
    a_display = i_m - i_e
    a_true = 1.0 - i_m - i_e
    if not abs(a_true) > A_TOL:
        raise DegenerateNonlocal(
            f"reduction divisor |1 - int M - E2 moment| = {abs(a_true):.3g} "
            f"does not clear {A_TOL}")

    n = quad.n_points
    x_grid = np.linspace(0.0, domain.p, n + 1)
    diffs = x_grid - x_grid[0]
    m1 = _m1_at(engine, M, domain, quad, diffs)
    idx = np.arange(n + 1)
    m2 = np.tril(m1[np.maximum(idx[:, None] - idx[None, :], 0)]) / a_true
    g = _g_values(engine, M, phi, psi, f, eps1, eps2, domain, quad, x_grid)

    coarse = QuadPolicy(n_points=max(quad.n_points // 2, 8),
                        grading=quad.grading, tol=quad.tol)
    i_m_c, i_e_c = _a_integrals(engine, M, domain, coarse)
    m1_c = _m1_at(engine, M, domain, coarse, diffs)
    g_c = _g_values(engine, M, phi, psi, f, eps1, eps2, domain, coarse,
                    x_grid)
    diagnostics = {
        "a_display": a_display,
        "a_true": a_true,
        "m_mass": i_m,
        "e2_moment": i_e,
        "a_refinement_delta": abs((i_m - i_e) - (i_m_c - i_e_c)),
        "m1_refinement_delta": float(np.abs(m1 - m1_c).max()),
        "g_refinement_delta": float(np.abs(g - g_c).max()),
    }
    return VolterraSystem(A=a_true, x_grid=x_grid, m2=m2, rhs=g / a_true,
                          coupling=coeffs.a * coeffs.b,
                          diagnostics=diagnostics)


def solve_tau(system: VolterraSystem) -> TraceSolution:
    """Forward-substitution Nystrom solve of the trace equation.

    Trapezoid weights in xi make every row i depend on nodes j <= i
    only; each step divides by the pivot 1 - coupling * w_ii * m2_ii.
    The discrete residual of the returned trace is an algebraic
    identity (reported in diagnostics, <= 1e-12).
    """
    x, m2, rhs, c = system.x_grid, system.m2, system.rhs, system.coupling
    w = _trapezoid_weights(x)
    n = x.size
    tau = np.zeros(n)
    tau[0] = rhs[0]
    for i in range(1, n):
        pivot = 1.0 - c * w[i, i] * m2[i, i]
        if abs(pivot) < 1e-12:
            raise SingularStep(f"pivot {pivot:.3g} at node {i} (x={x[i]:.6g})")
        acc = rhs[i] + c * float((w[i, :i] * m2[i, :i]) @ tau[:i])
        tau[i] = acc / pivot
    residual = float(np.abs(
        tau - c * (w * m2) @ tau - rhs).max())
    return TraceSolution(x_grid=x.copy(), tau=tau,
                         diagnostics={"residual": residual})


def picard_solve(system: VolterraSystem, max_iter: int = 200,
                 tol: float = 1e-12) -> TraceSolution:
    """Successive approximations tau <- rhs + coupling * int m2 tau.

    Starts from tau = rhs; Volterra structure makes the iteration
    contract after finitely many sweeps.  Raises MaxIterExceeded when
    the successive max-norm difference has not dropped below tol.
    """
    w = _trapezoid_weights(system.x_grid)
    kernel = system.coupling * (w * system.m2)
    tau = system.rhs.copy()
    for it in range(1, max_iter + 1):
        nxt = system.rhs + kernel @ tau
        delta = float(np.abs(nxt - tau).max())
        tau = nxt
        if delta < tol:
            return TraceSolution(x_grid=system.x_grid.copy(), tau=tau,
                                 diagnostics={"iterations": it,
                                              "last_delta": delta})
    raise MaxIterExceeded(
        f"no fixed point after {max_iter} sweeps (last delta {delta:.3g})")

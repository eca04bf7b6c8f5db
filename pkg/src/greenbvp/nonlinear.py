"""Newton-Kantorovich certification of nonlinear BVPs.

The operator ``G[y] = (y(t) - y(0) - int_0^t f(y), g(y(0), y(1)))`` has
derivative ``DG(y0)``, a linear BVP operator with ``A(t) = Df(y0(t))``,
``B0 = D_1 g`` and ``B1 = D_2 g``. With ``beta >= |DG(y0)^-1|``,
``K`` a Lipschitz constant of ``DG`` on a ball around ``y0`` and
``eta >= beta |G(y0)|``, the condition ``h = beta K eta <= 1/2`` gives a
zero of ``G`` within ``s0`` of ``y0``, unique within ``s1``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, StateError
from .interval import Interval, IntervalMatrix, WeightMatrix, add_up, mul_up, sum_up
from .linear import (SUBNORMAL_THRESHOLD, LinearCertificate, _mode_flag, _series_endpoints,
                     certify_linear, piecewise_residual_bound)
from .problems import LinearBVProblem, Mesh, NonlinearBVProblem, nonlinear_residual_series


@dataclass(frozen=True)
class NKParameters:
    """Inputs and conclusions of the Newton-Kantorovich test."""

    beta: Interval
    K: Interval
    eta: Interval
    h: Interval
    s0: Interval
    s1: Interval
    radius: float
    status: str
    reason: str = ""

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    def to_dict(self) -> dict:
        return {"beta": self.beta.hi, "K": self.K.hi, "eta": self.eta.hi, "h": self.h.hi,
                "s0": self.s0.hi, "s1": self.s1.lo, "radius": self.radius,
                "status": self.status, "reason": self.reason}


def _as_interval(x, rigorous: bool) -> Interval:
    if isinstance(x, Interval):
        return x
    x = float(x)
    if x < 0 or math.isnan(x):
        raise DomainError("Newton-Kantorovich inputs must be nonnegative")
    return Interval.point(x, rigorous)


def newton_kantorovich(beta, K, eta, radius: float, rigorous: bool = True) -> NKParameters:
    """Apply the Newton-Kantorovich theorem to bounds ``beta``, ``K``, ``eta``.

    ``s0 = 2 eta / (1 + sqrt(1 - 2h))`` and ``s1 = (1 + sqrt(1 - 2h)) / (beta K)``
    are enclosed with interval arithmetic; ``K = 0`` gives ``s0 = eta`` and
    an unbounded uniqueness radius.
    """
    b, k, e = (_as_interval(x, rigorous) for x in (beta, K, eta))
    for x in (b, k, e):
        if x.lo < 0:
            raise DomainError("Newton-Kantorovich inputs must be nonnegative")
    h = b * k * e
    if k.hi == 0.0:
        return NKParameters(b, k, e, h, e, Interval(math.inf, math.inf, rigorous), radius,
                            *_status(h, e, radius))
    if h.lo > 0.5:
        return NKParameters(b, k, e, h, Interval(0.0, math.inf, rigorous),
                            Interval(0.0, 0.0, rigorous), radius,
                            "failed", f"h = {h.lo:.3g} exceeds 1/2")
    disc = 1.0 - 2.0 * h
    disc = Interval(max(disc.lo, 0.0), max(disc.hi, 0.0), rigorous)
    root = disc.sqrt()
    s0 = 2.0 * e / (1.0 + root)
    s1 = (1.0 + root) / (b * k)
    return NKParameters(b, k, e, h, s0, s1, radius, *_status(h, s0, radius))


def _status(h: Interval, s0: Interval, radius: float):
    if h.hi > 0.5:
        return "failed", f"h = {h.hi:.3g} exceeds 1/2"
    if s0.hi > radius:
        return "failed", f"ball too small: s0 = {s0.hi:.3g} > radius {radius:.3g}"
    return "certified", ""


# ---------------------------------------------------------------------------
# residual and Lipschitz bounds
# ---------------------------------------------------------------------------

def solution_coefficients(problem: NonlinearBVProblem, v_nodes, mesh: Mesh, m: int,
                          rigorous: bool = True) -> IntervalMatrix:
    """Enclosures of the degree-m series through ``v_nodes`` on every piece."""
    return problem.solution_series(IntervalMatrix.point(np.asarray(v_nodes, float), rigorous),
                                   mesh, m)


def bound_residual(problem: NonlinearBVProblem, coeffs: IntervalMatrix, mesh: Mesh,
                   W: WeightMatrix | None = None) -> Interval:
    """Upper bound on ``|G(y0)|`` for the piecewise polynomial ``y0`` given by ``coeffs``."""
    rig = coeffs.rigorous
    res, rem = nonlinear_residual_series(problem, coeffs, mesh, W)
    left, right = _series_endpoints(coeffs, mesh)
    bc = problem.boundary(left[0], right[-1])
    r = piecewise_residual_bound(mesh, coeffs, res, rem, bc, W)
    return Interval(0.0, r["total"], rig)


def solution_tube(coeffs: IntervalMatrix, mesh: Mesh, radius: float) -> IntervalMatrix:
    """Boxes (N, n) containing every y with ``|y - y0| <= radius`` on each piece."""
    rig = coeffs.rigorous
    hw = mesh.halfwidths
    spread = np.zeros(coeffs.shape[::2])
    power = np.ones_like(hw)
    mags = coeffs.mag()
    for k in range(1, coeffs.shape[1]):
        power = mul_up(power, hw, rig)
        spread = add_up(spread, mul_up(mags[:, k], power[:, None], rig), rig)
    spread = add_up(spread, radius, rig)
    return coeffs[:, 0].widen(spread)


def bound_lipschitz(problem: NonlinearBVProblem, coeffs: IntervalMatrix, mesh: Mesh,
                    radius: float) -> Interval:
    """Lipschitz constant of ``DG`` on the ball of the given radius around ``y0``.

    ``|DG(x) - DG(y)| <= sum_j h_j L_j |x - y|`` where ``L_j`` bounds the
    second derivative of the field over the tube on piece j; the boundary
    part of ``DG`` is constant because g is affine.
    """
    if not radius > 0:
        raise DomainError("radius must be positive")
    rig = coeffs.rigorous
    L = problem.lipschitz(solution_tube(coeffs, mesh, radius))
    K = sum_up(mul_up(mesh.widths, L, rig), rigorous=rig)
    return Interval(0.0, float(K), rig)


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def linearization(problem: NonlinearBVProblem, v_nodes, m: int) -> LinearBVProblem:
    """``DG(y0)`` as a linear BVP whose Taylor data come from the series through ``v_nodes``."""
    v = np.asarray(v_nodes, dtype=float)

    def a_taylor(mesh: Mesh, deg: int, rigorous: bool = True):
        coeffs = solution_coefficients(problem, v, mesh, m, rigorous)
        return problem.jacobian_taylor(coeffs, mesh, deg)

    D1, D2 = problem.boundary_jacobians()
    return LinearBVProblem(f"{problem.name}-linearization", D1, D2, a_taylor, None,
                           params=dict(problem.params))


@dataclass(eq=False)
class NonlinearCertificate:
    status: str
    linear: LinearCertificate
    nk: NKParameters | None
    residual_norm: Interval | None
    stage: str = ""
    reason: str = ""
    problem: str = ""
    params: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    def require_certified(self):
        if not self.certified:
            raise StateError(f"certificate status is {self.status}: {self.reason}")

    def to_dict(self) -> dict:
        return {
            "kind": "nonlinear",
            "status": self.status,
            "stage": self.stage,
            "reason": self.reason,
            "problem": self.problem,
            "params": self.params,
            "residual_norm": None if self.residual_norm is None else self.residual_norm.hi,
            "linear": self.linear.to_dict(),
            "newton_kantorovich": None if self.nk is None else self.nk.to_dict(),
            "elapsed_seconds": self.elapsed,
        }


def certify_nonlinear(problem: NonlinearBVProblem, approx, m: int | None = None,
                      radius: float = 2.3e-4, mode: str = "rigorous", workers=None,
                      threshold: float = SUBNORMAL_THRESHOLD) -> NonlinearCertificate:
    """Prove existence of a zero of ``G`` near the approximate solution ``approx``.

    ``y0`` is the piecewise series of degree ``approx.m`` through the
    solution nodes; ``m`` is the Taylor degree used for the fundamental
    solution propagators (defaults to ``approx.m``).

    Runs the linear certification of ``DG(y0)``, bounds ``|G(y0)|`` and the
    Lipschitz constant on the ball of ``radius``, then the Newton-Kantorovich
    test. The weight is the identity throughout.
    """
    rig = _mode_flag(mode)
    t0 = time.perf_counter()
    m = approx.m if m is None else m
    deg = approx.m
    mesh = approx.mesh
    W = WeightMatrix.identity(problem.n)
    lin = linearization(problem, approx.v_nodes, deg)
    lc = certify_linear(lin, approx.fundamentals, m, mesh, W, mode=mode, workers=workers,
                        threshold=threshold)
    out = NonlinearCertificate("failed", lc, None, None, problem=problem.name,
                               params=dict(problem.params))
    if not lc.certified:
        out.stage, out.reason = "linear", lc.reason
        out.elapsed = time.perf_counter() - t0
        return out
    coeffs = solution_coefficients(problem, approx.v_nodes, mesh, deg, rig)
    out.residual_norm = bound_residual(problem, coeffs, mesh, W)
    K = bound_lipschitz(problem, coeffs, mesh, radius)
    beta = lc.Finv_norm.hi
    eta = float(mul_up(beta, out.residual_norm.hi, rig))
    out.nk = newton_kantorovich(beta, K.hi, eta, radius, rig)
    out.status = out.nk.status
    if not out.nk.certified:
        out.stage, out.reason = "newton-kantorovich", out.nk.reason
    out.elapsed = time.perf_counter() - t0
    return out


def search_radius(problem: NonlinearBVProblem, approx, m: int | None = None,
                  start: float = 1e-6, max_steps: int = 40, mode: str = "rigorous",
                  workers=None) -> NonlinearCertificate:
    """Double the ball radius from ``start`` until the test passes or cannot pass.

    The linear stage does not depend on the radius and is run once. The
    search stops when the contraction condition fails, since a larger ball
    only increases K.
    """
    rig = _mode_flag(mode)
    first = certify_nonlinear(problem, approx, m, start, mode, workers)
    if first.certified or first.nk is None:
        return first
    coeffs = solution_coefficients(problem, approx.v_nodes, approx.mesh, approx.m, rig)
    beta = first.linear.Finv_norm.hi
    eta = first.nk.eta
    radius, nk = start, first.nk
    for _ in range(max_steps):
        if nk.h.hi > 0.5 and radius > start:
            break
        radius *= 2.0
        K = bound_lipschitz(problem, coeffs, approx.mesh, radius)
        nk = newton_kantorovich(beta, K.hi, eta, radius, rig)
        if nk.certified:
            break
    first.nk = nk
    first.status = nk.status
    first.stage, first.reason = ("", "") if nk.certified else ("newton-kantorovich", nk.reason)
    return first


__all__ = ["NKParameters", "NonlinearCertificate", "newton_kantorovich", "bound_residual",
           "bound_lipschitz", "solution_tube", "certify_nonlinear", "search_radius",
           "linearization", "solution_coefficients"]

"""Boundary value problems, meshes and their Taylor data.

Linear problems have the form ``v' = A(t) v + q(t)`` on ``[0, 1]`` with
``B0 v(0) + B1 v(1) = w``. Nonlinear problems supply a vector field, a
boundary function and the Taylor series machinery needed to build an
approximate solution on each subinterval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConfigError, DomainError, ShapeError
from .interval import (IntervalMatrix, WeightMatrix, _dn, _up, add_up, mul_up,
                       norm_upper)
from .taylor import TaylorData, abs_monomial_integral_up


# ---------------------------------------------------------------------------
# mesh
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Mesh:
    """Partition ``0 = t_0 < ... < t_N = 1`` with expansion points per piece.

    ``centers`` are floats inside each subinterval; ``halfwidths`` are upper
    bounds on the distance from the center to either endpoint and ``widths``
    upper bounds on the subinterval lengths.
    """

    nodes: np.ndarray
    centers: np.ndarray = field(init=False)
    halfwidths: np.ndarray = field(init=False)
    widths: np.ndarray = field(init=False)

    def __post_init__(self):
        t = np.array(self.nodes, dtype=float).reshape(-1)
        if t.size < 2:
            raise DomainError("a mesh needs at least one subinterval")
        if not np.all(np.isfinite(t)) or np.any(np.diff(t) <= 0):
            raise DomainError("mesh nodes must be finite and strictly increasing")
        a, b = t[:-1], t[1:]
        c = a + 0.5 * (b - a)
        c = np.clip(c, a, b)
        hw = _up(np.maximum(_up(c - a), _up(b - c)))
        hw = np.where(hw > 0, hw, np.nextafter(0.0, 1.0))
        for name, arr in (("nodes", t), ("centers", c), ("halfwidths", hw),
                          ("widths", _up(b - a))):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def uniform(cls, N: int, a: float = 0.0, b: float = 1.0) -> "Mesh":
        if int(N) < 1:
            raise DomainError("number of subintervals must be positive")
        t = np.linspace(a, b, int(N) + 1)
        t[0], t[-1] = a, b
        return cls(t)

    @property
    def N(self) -> int:
        return self.nodes.size - 1

    def tau_left(self, rigorous: bool = True) -> IntervalMatrix:
        """Enclosures of ``t_{j-1} - c_j``."""
        d = self.nodes[:-1] - self.centers
        lo, hi = (_dn(d), _up(d)) if rigorous else (d, d)
        hi = np.minimum(hi, 0.0)
        return IntervalMatrix(np.minimum(lo, hi), hi, rigorous, check=False)

    def tau_right(self, rigorous: bool = True) -> IntervalMatrix:
        """Enclosures of ``t_j - c_j``."""
        d = self.nodes[1:] - self.centers
        lo, hi = (_dn(d), _up(d)) if rigorous else (d, d)
        lo = np.maximum(lo, 0.0)
        return IntervalMatrix(lo, np.maximum(lo, hi), rigorous, check=False)

    def locate(self, t) -> np.ndarray:
        """Index of the subinterval containing each ``t``."""
        idx = np.searchsorted(self.nodes, np.asarray(t, dtype=float), side="right") - 1
        return np.clip(idx, 0, self.N - 1)

    def refine(self, factor: int = 2) -> "Mesh":
        t = self.nodes
        pieces = [np.linspace(t[i], t[i + 1], factor + 1)[:-1] for i in range(self.N)]
        return Mesh(np.concatenate(pieces + [t[-1:]]))


def _poly_taylor(mesh: Mesh, coeffs: IntervalMatrix, m: int) -> TaylorData:
    """Taylor data of an exact polynomial given by all its coefficients.

    ``coeffs`` has shape (N, d+1, r, c). Higher coefficients are folded into
    the remainder when ``m <= d``; zero coefficients are appended otherwise.
    """
    rig = coeffs.rigorous
    N, d1 = coeffs.shape[0], coeffs.shape[1]
    if d1 < m:
        pad = IntervalMatrix.zeros((N, m - d1) + coeffs.shape[2:], rig)
        coeffs = IntervalMatrix.concatenate([coeffs, pad], axis=1)
        d1 = m
    full = TaylorData(mesh.centers, mesh.halfwidths, coeffs,
                      IntervalMatrix.zeros((N,) + coeffs.shape[2:], rig))
    return full.truncate(m)


def _iv(x, rigorous: bool) -> IntervalMatrix:
    """Enclosure of a parameter given as float, int or Fraction."""
    if isinstance(x, Fraction) and x.denominator != 1:
        return IntervalMatrix.point(float(x.numerator), rigorous) / float(x.denominator)
    return IntervalMatrix.point(float(x), rigorous)


# ---------------------------------------------------------------------------
# linear problems
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LinearBVProblem:
    """``v' = A(t) v + q(t)``, ``B0 v(0) + B1 v(1) = w`` on ``[0, 1]``.

    ``a_taylor(mesh, m, rigorous)`` returns :class:`TaylorData` for A on each
    subinterval. ``q_taylor`` does the same for the forcing, as (n, 1)
    matrices; ``None`` means no forcing. ``a_func`` evaluates A at a float
    time and is used by the solver and for sampling.
    """

    name: str
    B0: np.ndarray
    B1: np.ndarray
    a_taylor: Callable[[Mesh, int, bool], TaylorData]
    a_func: Callable[[float], np.ndarray]
    w: np.ndarray | None = None
    q_taylor: Callable[[Mesh, int, bool], TaylorData] | None = None
    q_func: Callable[[float], np.ndarray] | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        B0 = np.array(self.B0, dtype=float)
        B1 = np.array(self.B1, dtype=float)
        if B0.ndim != 2 or B0.shape[0] != B0.shape[1] or B0.shape != B1.shape:
            raise ShapeError("boundary matrices must be square and of equal size")
        n = B0.shape[0]
        w = np.zeros(n) if self.w is None else np.array(self.w, dtype=float).reshape(-1)
        if w.shape != (n,):
            raise ShapeError("boundary data has the wrong length")
        object.__setattr__(self, "B0", B0)
        object.__setattr__(self, "B1", B1)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.B0.shape[0]

    @property
    def B1_norm(self) -> float:
        """Unweighted infinity norm of B1 (rounded up)."""
        return float(norm_upper(IntervalMatrix.point(self.B1)))

    def with_rhs(self, w=None, q_taylor=None, q_func=None) -> "LinearBVProblem":
        return LinearBVProblem(self.name, self.B0, self.B1, self.a_taylor, self.a_func,
                               self.w if w is None else w, q_taylor, q_func, dict(self.params))


def constant_a_taylor(A) -> Callable[[Mesh, int, bool], TaylorData]:
    A = np.array(A, dtype=float)

    def provider(mesh: Mesh, m: int, rigorous: bool = True) -> TaylorData:
        c = IntervalMatrix.point(np.broadcast_to(A, (mesh.N, 1) + A.shape), rigorous)
        return _poly_taylor(mesh, c, m)
    return provider


def exact_test_problem(b: float = 1.0) -> LinearBVProblem:
    """``y'' = y`` on ``[0, b]`` with ``y(0) = 1, y(b) = 0``, rescaled to ``[0, 1]``.

    The state is ``v(t) = (y(bt), y'(bt))`` so ``A = b [[0, 1], [1, 0]]``.
    """
    b = float(b)
    if not b > 0:
        raise ConfigError("interval length b must be positive")
    A = b * np.array([[0.0, 1.0], [1.0, 0.0]])
    return LinearBVProblem(
        "exact-test",
        B0=[[1.0, 0.0], [0.0, 0.0]], B1=[[0.0, 0.0], [1.0, 0.0]],
        a_taylor=constant_a_taylor(A), a_func=lambda t: A.copy(),
        w=[1.0, 0.0], params={"b": b})


class ExactTestOracle:
    """Closed forms for ``y'' = y``, ``y(0) = 1``, ``y(b) = 0`` on ``[0, b]``.

    ``phi`` is the fundamental matrix normalized by the boundary rows, so
    ``B0 Phi(0) + B1 Phi(b) = I``. Methods take the original variable ``x``;
    the ``unit_*`` versions take ``t = x / b``, matching
    :func:`exact_test_problem`.
    """

    B0 = np.array([[1.0, 0.0], [0.0, 0.0]])
    B1 = np.array([[0.0, 0.0], [1.0, 0.0]])

    def __init__(self, b: float = 1.0):
        if not b > 0:
            raise DomainError("b must be positive")
        self.b = float(b)

    def phi(self, x):
        b = self.b
        return np.array([[math.sinh(b - x), math.sinh(x)],
                         [-math.cosh(b - x), math.cosh(x)]]) / math.sinh(b)

    def phi_inv(self, x):
        b = self.b
        return np.array([[math.cosh(x), -math.sinh(x)],
                         [math.cosh(b - x), math.sinh(b - x)]])

    def green(self, x, s):
        """``G(x, s)``; the value for ``s <= x`` is used on the diagonal."""
        b = self.b
        if s <= x:
            M = np.array([[math.sinh(b - x) * math.cosh(s), -math.sinh(b - x) * math.sinh(s)],
                          [-math.cosh(b - x) * math.cosh(s), math.cosh(b - x) * math.sinh(s)]])
            return M / math.sinh(b)
        M = np.array([[math.sinh(x) * math.cosh(b - s), math.sinh(x) * math.sinh(b - s)],
                      [math.cosh(x) * math.cosh(b - s), math.cosh(x) * math.sinh(b - s)]])
        return -M / math.sinh(b)

    def solution(self, x):
        """``(y, y')`` at ``x``."""
        b = self.b
        return np.array([math.sinh(b - x), -math.cosh(b - x)]) / math.sinh(b)

    def unit_phi(self, t):
        return self.phi(self.b * t)

    def unit_phi_inv(self, t):
        return self.phi_inv(self.b * t)

    def unit_green(self, t, s):
        return self.green(self.b * t, self.b * s)

    def unit_solution(self, t):
        return self.solution(self.b * t)


def exact_testprob_oracle(b: float = 1.0) -> ExactTestOracle:
    return ExactTestOracle(b)


def turning_point_problem(eps: float) -> LinearBVProblem:
    """``eps y'' = (t - 1/2) y`` with ``y(0) = 1, y(1) = 1``."""
    eps = float(eps)
    if not eps > 0:
        raise ConfigError("eps must be positive")

    def a_taylor(mesh: Mesh, m: int, rigorous: bool = True) -> TaylorData:
        N = mesh.N
        u = IntervalMatrix.point(mesh.centers, rigorous) - 0.5
        c0 = u / eps
        c1 = IntervalMatrix.point(np.full(N, 1.0), rigorous) / eps
        z = IntervalMatrix.zeros((N,), rigorous)
        one = IntervalMatrix.point(np.ones(N), rigorous)
        k0 = IntervalMatrix.stack([IntervalMatrix.stack([z, one], -1),
                                   IntervalMatrix.stack([c0, z], -1)], -2)
        k1 = IntervalMatrix.stack([IntervalMatrix.stack([z, z], -1),
                                   IntervalMatrix.stack([c1, z], -1)], -2)
        return _poly_taylor(mesh, IntervalMatrix.stack([k0, k1], axis=1), m)

    def a_func(t):
        return np.array([[0.0, 1.0], [(t - 0.5) / eps, 0.0]])

    return LinearBVProblem("turning-point", B0=[[1.0, 0.0], [0.0, 0.0]],
                           B1=[[0.0, 0.0], [1.0, 0.0]], a_taylor=a_taylor,
                           a_func=a_func, w=[1.0, 1.0], params={"eps": eps})


def potential_well_problem(eps: float, omega: float = 0.25) -> LinearBVProblem:
    """``eps y'' = (omega**2 - (t - 1/2)**2) y`` with ``y(0) = 1, y(1) = 2``."""
    eps = float(eps)
    omega = float(omega)
    if not eps > 0:
        raise ConfigError("eps must be positive")

    def a_taylor(mesh: Mesh, m: int, rigorous: bool = True) -> TaylorData:
        N = mesh.N
        u = IntervalMatrix.point(mesh.centers, rigorous) - 0.5
        om2 = IntervalMatrix.point(np.full(N, omega), rigorous)
        om2 = om2 * om2
        c0 = (om2 - u * u) / eps
        c1 = -(u * 2.0) / eps
        c2 = -(IntervalMatrix.point(np.ones(N), rigorous) / eps)
        z = IntervalMatrix.zeros((N,), rigorous)
        one = IntervalMatrix.point(np.ones(N), rigorous)

        def mat(a12, a21):
            return IntervalMatrix.stack([IntervalMatrix.stack([z, a12], -1),
                                         IntervalMatrix.stack([a21, z], -1)], -2)
        coeffs = IntervalMatrix.stack([mat(one, c0), mat(z, c1), mat(z, c2)], axis=1)
        return _poly_taylor(mesh, coeffs, m)

    def a_func(t):
        return np.array([[0.0, 1.0], [(omega ** 2 - (t - 0.5) ** 2) / eps, 0.0]])

    return LinearBVProblem("potential-well", B0=[[1.0, 0.0], [0.0, 0.0]],
                           B1=[[0.0, 0.0], [1.0, 0.0]], a_taylor=a_taylor,
                           a_func=a_func, w=[1.0, 2.0],
                           params={"eps": eps, "omega": omega})


# ---------------------------------------------------------------------------
# nonlinear problems
# ---------------------------------------------------------------------------

class NonlinearBVProblem:
    """Interface for ``y' = f(y)`` on ``[0, 1]`` with ``g(y(0), y(1)) = 0``.

    Subclasses work with Taylor coefficient arrays of shape (N, k, n) held as
    :class:`IntervalMatrix`, expanded about the mesh centers.
    """

    name = "nonlinear"
    n = 0
    params: dict = {}

    def field(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def solution_series(self, u: IntervalMatrix, mesh: Mesh, m: int) -> IntervalMatrix:
        """Degree-m Taylor coefficients of the local solution through ``u`` at each center."""
        raise NotImplementedError

    def field_series(self, coeffs: IntervalMatrix, mesh: Mesh) -> IntervalMatrix:
        """All coefficients of ``f(p(t))`` for the polynomials ``p`` given by ``coeffs``."""
        raise NotImplementedError

    def jacobian_taylor(self, coeffs: IntervalMatrix, mesh: Mesh, m: int) -> TaylorData:
        """Taylor data of ``Df(p(t))``."""
        raise NotImplementedError

    def boundary(self, ya: IntervalMatrix, yb: IntervalMatrix) -> IntervalMatrix:
        raise NotImplementedError

    def boundary_jacobians(self, ya: np.ndarray, yb: np.ndarray):
        raise NotImplementedError

    def lipschitz(self, tube: IntervalMatrix) -> np.ndarray:
        """Per-piece bounds on ``sup |D^2 f|`` over boxes, as an infinity-norm constant."""
        raise NotImplementedError

    def initial_guess(self, mesh: Mesh) -> np.ndarray:
        raise NotImplementedError


def _conv(a, b, k):
    """Coefficient k of the product of two series given as lists of (N,) intervals."""
    acc = None
    for i in range(max(0, k - len(b) + 1), min(k, len(a) - 1) + 1):
        t = a[i] * b[k - i]
        acc = t if acc is None else acc + t
    return acc


class LorenzProblem(NonlinearBVProblem):
    """Periodic orbit of the Lorenz system with unknown period ``T``.

    State ``(x, y, z, T)`` on the unit interval:
    ``x' = T sigma (y - x)``, ``y' = T (x (rho - z) - y)``,
    ``z' = T (x y - beta z)``, ``T' = 0``; boundary conditions
    ``(x, y, z)(0) = (x, y, z)(1)`` and ``x(0) = y(0)``.
    """

    name = "lorenz"
    n = 4

    def __init__(self, sigma=10.0, beta=Fraction(8, 3), rho=28.0):
        self.sigma = sigma
        self.beta = beta
        self.rho = rho
        self.params = {"sigma": float(sigma), "beta": float(beta), "rho": float(rho)}
        if isinstance(beta, Fraction):
            self.params["beta_fraction"] = f"{beta.numerator}/{beta.denominator}"

    def _constants(self, rigorous):
        return (_iv(self.sigma, rigorous), _iv(self.beta, rigorous), _iv(self.rho, rigorous))

    def field(self, y):
        s, b, r = float(self.sigma), float(self.beta), float(self.rho)
        x, yy, z, T = y
        return np.array([T * s * (yy - x), T * (x * (r - z) - yy), T * (x * yy - b * z), 0.0])

    def solution_series(self, u, mesh, m):
        rig = u.rigorous
        s, b, r = self._constants(rig)
        x = [u[:, 0]]
        y = [u[:, 1]]
        z = [u[:, 2]]
        T = u[:, 3]
        for k in range(m):
            xz = _conv(x, z, k)
            xy = _conv(x, y, k)
            x.append(T * s * (y[k] - x[k]) / float(k + 1))
            y.append(T * (r * x[k] - y[k] - xz) / float(k + 1))
            z.append(T * (xy - b * z[k]) / float(k + 1))
        zero = IntervalMatrix.zeros(T.shape, rig)
        Tcol = [T] + [zero] * m
        comps = [IntervalMatrix.stack(c, axis=-1) for c in (x, y, z, Tcol)]
        return IntervalMatrix.stack(comps, axis=-1)

    def field_series(self, coeffs, mesh):
        rig = coeffs.rigorous
        s, b, r = self._constants(rig)
        d = coeffs.shape[1] - 1
        x = [coeffs[:, k, 0] for k in range(d + 1)]
        y = [coeffs[:, k, 1] for k in range(d + 1)]
        z = [coeffs[:, k, 2] for k in range(d + 1)]
        T = coeffs[:, 0, 3]
        zero = IntervalMatrix.zeros(T.shape, rig)
        out = []
        for k in range(2 * d + 1):
            xk = x[k] if k <= d else zero
            yk = y[k] if k <= d else zero
            zk = z[k] if k <= d else zero
            xz = _conv(x, z, k)
            xy = _conv(x, y, k)
            out.append(IntervalMatrix.stack([
                T * s * (yk - xk), T * (r * xk - yk - xz), T * (xy - b * zk), zero], axis=-1))
        return IntervalMatrix.stack(out, axis=1)

    def jacobian_taylor(self, coeffs, mesh, m):
        rig = coeffs.rigorous
        s, b, r = self._constants(rig)
        d = coeffs.shape[1] - 1
        x = [coeffs[:, k, 0] for k in range(d + 1)]
        y = [coeffs[:, k, 1] for k in range(d + 1)]
        z = [coeffs[:, k, 2] for k in range(d + 1)]
        T = coeffs[:, 0, 3]
        zero = IntervalMatrix.zeros(T.shape, rig)
        mats = []
        for k in range(max(2 * d + 1, m)):
            xk = x[k] if k <= d else zero
            yk = y[k] if k <= d else zero
            zk = z[k] if k <= d else zero
            xz = _conv(x, z, k) if k <= 2 * d else zero
            xy = _conv(x, y, k) if k <= 2 * d else zero
            if k == 0:
                row1 = [-(T * s), T * s, zero, s * (yk - xk)]
                row2 = [T * (r - zk), -T, -(T * xk), r * xk - yk - xz]
                row3 = [T * yk, T * xk, -(T * b), xy - b * zk]
            else:
                row1 = [zero, zero, zero, s * (yk - xk)]
                row2 = [-(T * zk), zero, -(T * xk), r * xk - yk - xz]
                row3 = [T * yk, T * xk, zero, xy - b * zk]
            row4 = [zero] * 4
            mats.append(IntervalMatrix.stack(
                [IntervalMatrix.stack(row, -1) for row in (row1, row2, row3, row4)], -2))
        return _poly_taylor(mesh, IntervalMatrix.stack(mats, axis=1), m)

    def boundary(self, ya, yb):
        return IntervalMatrix.stack([ya[..., 0] - yb[..., 0], ya[..., 1] - yb[..., 1],
                                     ya[..., 2] - yb[..., 2], ya[..., 0] - ya[..., 1]], -1)

    def boundary_jacobians(self, ya=None, yb=None):
        D1 = np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0], [0, 0, 1.0, 0], [1.0, -1.0, 0, 0]])
        D2 = np.diag([-1.0, -1.0, -1.0, 0.0])
        return D1, D2

    def lipschitz(self, tube):
        rig = tube.rigorous
        s, b, r = self._constants(rig)
        x, y, z, T = (tube[:, i] for i in range(4))
        r1 = (s * 4.0).mag()
        r2 = add_up(add_up(mul_up(2.0, (r - z).mag(), rig), mul_up(2.0, T.mag(), rig), rig),
                    add_up(mul_up(2.0, x.mag(), rig), 2.0, rig), rig)
        r3 = add_up(add_up(mul_up(2.0, x.mag(), rig), mul_up(2.0, y.mag(), rig), rig),
                    add_up(mul_up(2.0, T.mag(), rig), mul_up(2.0, b.mag(), rig), rig), rig)
        return np.maximum(np.maximum(np.broadcast_to(r1, r2.shape), r2), r3)

    def initial_guess(self, mesh: Mesh, start=(-12.78619, -19.36419, 24.0),
                      period=1.559) -> np.ndarray:
        """Values at the mesh centers from a float integration of the orbit.

        The orbit is first relaxed onto the cycle, then shifted so that it
        starts where ``x = y`` and the period is estimated from the return.
        """
        s, b, r = float(self.sigma), float(self.beta), float(self.rho)

        def f(t, v):
            x, y, z = v
            return [s * (y - x), x * (r - z) - y, x * y - b * z]

        opts = dict(rtol=1e-12, atol=1e-12, method="DOP853")

        def ev(t, v):
            return v[0] - v[1]
        ev.direction = 1.0
        sol = solve_ivp(f, (0.0, 1.5 * period), start, events=ev, dense_output=True, **opts)
        hits = sol.t_events[0]
        y0 = sol.y_events[0][0] if len(hits) else np.array(start, dtype=float)
        sol2 = solve_ivp(f, (0.0, 1.3 * period), y0, events=ev, dense_output=True, **opts)
        back = [t for t in sol2.t_events[0] if t > 0.5 * period]
        T = back[0] if back else period
        traj = sol2.sol(T * mesh.centers).T
        return np.column_stack([traj, np.full(mesh.N, T)])


def lorenz_solution_taylor(x0, y0, z0, T, m: int, sigma=10.0, beta=Fraction(8, 3),
                           rho=28.0, rigorous: bool = False) -> np.ndarray | IntervalMatrix:
    """Taylor coefficients (m+1, 4) of the scaled Lorenz flow through one point."""
    if m < 1:
        raise DomainError("Taylor degree must be at least 1")
    prob = LorenzProblem(sigma, beta, rho)
    u = IntervalMatrix.point(np.array([[x0, y0, z0, T]], dtype=float), rigorous)
    c = prob.solution_series(u, None, m)[0]
    return c if rigorous else c.mid()


def lorenz_jacobian_taylor(coeffs, m: int, halfwidth: float = 1.0, center: float = 0.0,
                           sigma=10.0, beta=Fraction(8, 3), rho=28.0,
                           rigorous: bool = True) -> TaylorData:
    """Taylor data of the Lorenz Jacobian along solution coefficients (k, 4) on one piece."""
    if not isinstance(coeffs, IntervalMatrix):
        coeffs = IntervalMatrix.point(np.asarray(coeffs, dtype=float), rigorous)
    if coeffs.ndim == 2:
        coeffs = coeffs.reshape((1,) + coeffs.shape)
    mesh = Mesh([center - halfwidth, center + halfwidth])
    return LorenzProblem(sigma, beta, rho).jacobian_taylor(coeffs, mesh, m)


class LinearAsNonlinear(NonlinearBVProblem):
    """View a linear problem through the nonlinear interface (affine field)."""

    def __init__(self, problem: LinearBVProblem):
        self.linear = problem
        self.name = problem.name
        self.n = problem.n
        self.params = dict(problem.params)

    def field(self, y, t=0.0):
        out = self.linear.a_func(t) @ y
        if self.linear.q_func is not None:
            out = out + np.asarray(self.linear.q_func(t)).reshape(-1)
        return out

    def _data(self, mesh, m, rigorous):
        A = self.linear.a_taylor(mesh, m, rigorous)
        q = None
        if self.linear.q_taylor is not None:
            q = self.linear.q_taylor(mesh, m, rigorous)
        return A, q

    def solution_series(self, u, mesh, m):
        A, q = self._data(mesh, m, u.rigorous)
        c = [u]
        for l in range(m):
            acc = None
            for i in range(l + 1):
                t = (A.coeffs[:, i] @ c[l - i].reshape(c[l - i].shape + (1,)))[..., 0]
                acc = t if acc is None else acc + t
            if q is not None:
                acc = acc + q.coeffs[:, l, :, 0]
            c.append(acc / float(l + 1))
        return IntervalMatrix.stack(c, axis=1)

    def residual_series(self, coeffs, mesh, W: WeightMatrix | None = None):
        """Coefficients of ``A_trunc p + q_trunc - p'`` and a bound on the integral of the rest.

        Returns ``(poly_coeffs, rem_integral)``; ``rem_integral[j]`` bounds
        ``int |W (r_A(t) tau**m p(t) + r_q(t) tau**m)| dt`` over piece j.
        """
        rig = coeffs.rigorous
        m = coeffs.shape[1] - 1
        A, q = self._data(mesh, m, rig)
        N, n = coeffs.shape[0], coeffs.shape[2]
        out = []
        zero = IntervalMatrix.zeros((N, n), rig)
        for k in range(2 * m):
            acc = zero
            for i in range(max(0, k - m), min(k, m - 1) + 1):
                acc = acc + (A.coeffs[:, i] @ coeffs[:, k - i].reshape((N, n, 1)))[..., 0]
            if q is not None and k < m:
                acc = acc + q.coeffs[:, k, :, 0]
            if k + 1 <= m:
                acc = acc - coeffs[:, k + 1] * float(k + 1)
            out.append(acc)
        poly = IntervalMatrix.stack(out, axis=1)
        hw = mesh.halfwidths
        psup = _series_sup(coeffs, hw, W)
        rem = mul_up(norm_upper(A.remainder, W), psup, rig)
        if q is not None:
            rem = add_up(rem, norm_upper(q.remainder[..., 0], W, vector=True), rig)
        rem = mul_up(rem, abs_monomial_integral_up(hw, m, rig), rig)
        return poly, rem

    def jacobian_taylor(self, coeffs, mesh, m):
        return self.linear.a_taylor(mesh, m, coeffs.rigorous)

    def boundary(self, ya, yb):
        B0 = IntervalMatrix.point(self.linear.B0, ya.rigorous)
        B1 = IntervalMatrix.point(self.linear.B1, ya.rigorous)
        return (B0 @ ya.reshape(ya.shape + (1,)))[..., 0] + \
            (B1 @ yb.reshape(yb.shape + (1,)))[..., 0] - self.linear.w

    def boundary_jacobians(self, ya=None, yb=None):
        return self.linear.B0, self.linear.B1

    def lipschitz(self, tube):
        return np.zeros(tube.shape[0])


def _series_sup(coeffs: IntervalMatrix, hw, W=None):
    """Bound on ``sup |W p(t)|`` for vector series (N, k, n)."""
    rig = coeffs.rigorous
    norms = norm_upper(coeffs, W, vector=True)
    total = norms[:, 0]
    power = np.ones_like(hw)
    for k in range(1, coeffs.shape[1]):
        power = mul_up(power, hw, rig)
        total = add_up(total, mul_up(norms[:, k], power, rig), rig)
    return total


def nonlinear_residual_series(problem: NonlinearBVProblem, coeffs: IntervalMatrix,
                              mesh: Mesh, W: WeightMatrix | None = None):
    """Coefficients of ``f(p) - p'`` and a remainder integral bound (zero for polynomial fields)."""
    if isinstance(problem, LinearAsNonlinear):
        return problem.residual_series(coeffs, mesh, W)
    f = problem.field_series(coeffs, mesh)
    m = coeffs.shape[1] - 1
    items = []
    for k in range(f.shape[1]):
        if k + 1 <= m:
            items.append(f[:, k] - coeffs[:, k + 1] * float(k + 1))
        else:
            items.append(f[:, k])
    return IntervalMatrix.stack(items, axis=1), np.zeros(coeffs.shape[0])


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

PROBLEMS = ("exact-test", "turning-point", "potential-well", "lorenz")


def builtin_problem(name: str, **params):
    """Construct a built-in problem by name.

    ``exact-test`` takes ``b``; ``turning-point`` takes ``eps``;
    ``potential-well`` takes ``eps`` and ``omega``; ``lorenz`` takes
    ``sigma``, ``beta`` and ``rho``.
    """
    params = {k: v for k, v in params.items() if v is not None}
    try:
        if name == "exact-test":
            return exact_test_problem(**params)
        if name == "turning-point":
            return turning_point_problem(**params)
        if name == "potential-well":
            return potential_well_problem(**params)
        if name == "lorenz":
            params.pop("beta_fraction", None)
            return LorenzProblem(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name}: {exc}") from None
    raise ConfigError(f"unknown problem {name!r}; choose from {', '.join(PROBLEMS)}")

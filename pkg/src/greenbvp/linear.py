"""Certification of linear BVPs through an approximate Green's function.

Given node values of an approximate fundamental solution and its inverse,
the Green's function is assembled from products of node matrices and the
norm of ``I - F H`` is bounded, where ``H`` is the approximate inverse built
from it. ``|I - F H| < 1`` proves that ``F`` is invertible with
``|F^-1| <= |H| / (1 - |I - F H|)``.

The pairwise Green's function terms cost O(N^2) small matrix products; they
are evaluated in row blocks, optionally on a thread pool, and combined in a
fixed order so results do not depend on scheduling.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, ShapeError, StateError, UnderflowDiagnostic
from .interval import (Interval, IntervalMatrix, WeightMatrix, add_up, div_up, mul_up,
                       norm_upper, sum_up)
from .problems import LinearAsNonlinear, LinearBVProblem, Mesh
from .taylor import (MatrixPolynomial, abs_monomial_integral_up, monomial_integrals,
                     poly_mul, poly_scale, residual_R, taylor_E, taylor_F)

SUBNORMAL_THRESHOLD = float(np.finfo(float).tiny)

# entries of the (rows, N, n, n) block held in memory at once
_BLOCK_BUDGET = 1 << 18


def check_underflow(values, where: str, threshold: float = SUBNORMAL_THRESHOLD):
    """Raise :class:`UnderflowDiagnostic` on nonzero entries below ``threshold``.

    Non-finite entries are reported the same way: they arise when a mode that
    underflowed is inverted.
    """
    if isinstance(values, IntervalMatrix):
        mag = values.mag()
        bad = (~values.contains_zero()) & (mag < threshold)
        small = mag
    else:
        a = np.abs(np.asarray(values, dtype=float))
        bad = (a > 0) & (a < threshold)
        small = a
    nonfinite = ~np.isfinite(small)
    if nonfinite.any():
        raise UnderflowDiagnostic(
            f"{where}: {int(nonfinite.sum())} non-finite entries; decaying modes lost",
            where, int(nonfinite.sum()), 0.0)
    if bad.any():
        smallest = float(small[bad].min())
        raise UnderflowDiagnostic(
            f"{where}: {int(bad.sum())} nonzero entries below {threshold:.3g} "
            f"(smallest {smallest:.3g}); decaying modes lost to underflow",
            where, int(bad.sum()), smallest)


# ---------------------------------------------------------------------------
# node data
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FundamentalNodes:
    """Approximate fundamental solution ``Phi[j]`` and inverse ``Psi[j]`` at mesh centers."""

    Phi: np.ndarray
    Psi: np.ndarray

    def __post_init__(self):
        Phi = np.array(self.Phi, dtype=float)
        Psi = np.array(self.Psi, dtype=float)
        if Phi.ndim != 3 or Phi.shape[1] != Phi.shape[2] or Phi.shape != Psi.shape:
            raise ShapeError("node arrays must both have shape (N, n, n)")
        for a in (Phi, Psi):
            a.setflags(write=False)
        object.__setattr__(self, "Phi", Phi)
        object.__setattr__(self, "Psi", Psi)

    @property
    def N(self) -> int:
        return self.Phi.shape[0]

    @property
    def n(self) -> int:
        return self.Phi.shape[1]

    def inversion_residual(self) -> float:
        return float(np.max(np.abs(self.Phi @ self.Psi - np.eye(self.n))))


@dataclass(frozen=True, eq=False)
class GreenNodes:
    """Green's function node factors.

    For ``k < j`` the block is ``Phi_j @ lower[k]`` and for ``k > j`` it is
    ``Phi_j @ upper[k]``, with ``lower[k] = B0 P0 Psi_k`` and
    ``upper[k] = -B1 P1 Psi_k``. ``minus``/``plus`` are the two one-sided
    diagonal blocks.
    """

    Phi: IntervalMatrix
    lower: IntervalMatrix
    upper: IntervalMatrix
    minus: IntervalMatrix
    plus: IntervalMatrix
    bc_sum: IntervalMatrix

    @property
    def N(self) -> int:
        return self.Phi.shape[0]

    def block(self, j: int, k: int) -> IntervalMatrix:
        if j == k:
            raise DomainError("diagonal blocks are one-sided; use minus or plus")
        return self.Phi[j] @ (self.lower[k] if k < j else self.upper[k])

    def dense(self, diagonal: str = "minus") -> IntervalMatrix:
        """All blocks as an (N, N, n, n) array; the diagonal holds ``minus`` or ``plus``."""
        N = self.N
        below = (np.arange(N)[None, :] < np.arange(N)[:, None])[..., None, None]
        M = IntervalMatrix.where(below, self.lower[None], self.upper[None])
        G = self.Phi[:, None] @ M
        diag = self.minus if diagonal == "minus" else self.plus
        idx = np.arange(N)
        G.lo[idx, idx] = diag.lo
        G.hi[idx, idx] = diag.hi
        return G


def build_green_nodes(nodes: FundamentalNodes, B0, B1, left=None, right=None,
                      rigorous: bool = True,
                      threshold: float = SUBNORMAL_THRESHOLD) -> GreenNodes:
    """Assemble Green's function factors from fundamental-solution nodes.

    ``left``/``right`` stand for the fundamental solution at ``t = 0`` and
    ``t = 1`` inside the boundary projections; they default to the first and
    last node.
    """
    check_underflow(nodes.Phi, "fundamental solution nodes", threshold)
    check_underflow(nodes.Psi, "inverse fundamental solution nodes", threshold)
    B0 = np.asarray(B0, dtype=float)
    B1 = np.asarray(B1, dtype=float)
    if B0.shape != (nodes.n, nodes.n) or B1.shape != B0.shape:
        raise ShapeError("boundary matrices do not match node size")
    left = nodes.Phi[0] if left is None else np.asarray(left, dtype=float)
    right = nodes.Phi[-1] if right is None else np.asarray(right, dtype=float)
    P = IntervalMatrix.point(nodes.Phi, rigorous)
    S = IntervalMatrix.point(nodes.Psi, rigorous)
    B0L = IntervalMatrix.point(B0, rigorous) @ IntervalMatrix.point(left, rigorous)
    B1R = IntervalMatrix.point(B1, rigorous) @ IntervalMatrix.point(right, rigorous)
    lower = B0L @ S
    upper = -(B1R @ S)
    check_underflow(lower, "Green's function factors", threshold)
    check_underflow(upper, "Green's function factors", threshold)
    return GreenNodes(P, lower, upper, P @ lower, P @ upper, B0L + B1R)


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------

def choose_weights(err_sums) -> WeightMatrix:
    """Diagonal weights with ``w_i * sum_j |err_j^i|`` constant and ``max w_i = 1``.

    Components whose error sum is zero get weight 1.
    """
    s = np.abs(np.asarray(err_sums, dtype=float)).reshape(-1)
    if s.size == 0 or not np.all(np.isfinite(s)):
        raise DomainError("error sums must be finite")
    pos = s > 0
    if not pos.any():
        return WeightMatrix.identity(s.size)
    w = np.ones_like(s)
    w[pos] = np.min(s[pos]) / s[pos]
    w = np.maximum(w, np.finfo(float).tiny)
    return WeightMatrix(w)


def _series_endpoints(coeffs: IntervalMatrix, mesh: Mesh):
    """Values of vector series (N, k, n) at the left and right ends of each piece."""
    rig = coeffs.rigorous
    out = []
    for tau in (mesh.tau_left(rig), mesh.tau_right(rig)):
        t = tau.reshape(tau.shape + (1,))
        acc = coeffs[:, -1]
        for k in range(coeffs.shape[1] - 2, -1, -1):
            acc = acc * t + coeffs[:, k]
        out.append(acc)
    return out[0], out[1]


def solution_jump_errors(problem, mesh: Mesh, v_nodes, m: int) -> np.ndarray:
    """Absolute jumps (N-1, n) of the piecewise series extension of ``v_nodes``."""
    lp = problem if not isinstance(problem, LinearBVProblem) else LinearAsNonlinear(problem)
    u = IntervalMatrix.point(np.asarray(v_nodes, dtype=float), False)
    coeffs = lp.solution_series(u, mesh, m)
    left, right = _series_endpoints(coeffs, mesh)
    return np.abs(left.mid()[1:] - right.mid()[:-1])


def adaptive_weights(problem, mesh: Mesh, v_nodes, m: int) -> WeightMatrix:
    return choose_weights(solution_jump_errors(problem, mesh, v_nodes, m).sum(axis=0))


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

def _resolve_workers(workers) -> int:
    if workers is None:
        env = os.environ.get("GREENBVP_WORKERS")
        workers = int(env) if env else 1
    return max(1, int(workers))


class _BoundContext:
    """Shared quantities for the ``|I - FH|`` and ``|H|`` bounds."""

    def __init__(self, problem: LinearBVProblem, nodes: FundamentalNodes, m: int,
                 mesh: Mesh | None, W: WeightMatrix | None, rigorous: bool,
                 green: GreenNodes | None, workers, threshold):
        rig = rigorous
        N, n = nodes.N, nodes.n
        if n != problem.n:
            raise ShapeError("node size does not match the problem dimension")
        mesh = Mesh.uniform(N) if mesh is None else mesh
        if mesh.N != N:
            raise ShapeError(f"mesh has {mesh.N} pieces but there are {N} nodes")
        W = WeightMatrix.identity(n) if W is None else W
        if W.n != n:
            raise ShapeError("weight size does not match the problem dimension")
        if m < 1:
            raise DomainError("Taylor degree must be at least 1")
        self.problem, self.nodes, self.mesh, self.W, self.m = problem, nodes, mesh, W, m
        self.rig, self.N, self.n = rig, N, n
        self.workers = _resolve_workers(workers)

        A = problem.a_taylor(mesh, m, rig)
        self.E = taylor_E(A)
        self.F = taylor_F(A)
        self.R = residual_R(A, self.E, W)
        self.normA = A.sup_bound(W)
        self.normR = self.R.supnorm
        self.normE = self.E.sup_bound(W)
        self.normF = self.F.sup_bound(W)
        self.h = mesh.widths
        self.hw = mesh.halfwidths
        self.c = abs_monomial_integral_up(self.hw, m, rig)
        self.b = mul_up(mul_up(self.h, self.normF, rig), self.normA, rig)

        self.Phi = IntervalMatrix.point(nodes.Phi, rig)
        self.EL = self.E(mesh.tau_left(rig))
        self.ER = self.E(mesh.tau_right(rig))
        self.P0 = self.EL[0] @ self.Phi[0]
        self.P1 = self.ER[-1] @ self.Phi[-1]
        if green is None:
            green = build_green_nodes(nodes, problem.B0, problem.B1, left=self.P0.mid(),
                                      right=self.P1.mid(), rigorous=rig, threshold=threshold)
        elif green.Phi.rigorous != rig:
            raise ConfigError("Green's function nodes were built in a different mode")
        self.green = green
        self.B0 = IntervalMatrix.point(problem.B0, rig)
        self.B1 = IntervalMatrix.point(problem.B1, rig)
        self.q = add_up(1.0, norm_upper(self.B1, W), rig)
        self.J = self.ER[:-1] @ self.Phi[:-1] - self.EL[1:] @ self.Phi[1:]
        self._rows = None

    # O(N) pieces ----------------------------------------------------------
    def one_sided(self):
        """``sup |G^-_j (I + F_j)|`` and ``sup |G^+_j (I + F_j)|``."""
        gm = poly_scale(self.F, left=self.green.minus).sup_bound(self.W)
        gp = poly_scale(self.F, left=self.green.plus).sup_bound(self.W)
        return gm, gp

    def diag_jump(self):
        rig = self.rig
        Y = -(self.Phi @ (self.green.bc_sum @ IntervalMatrix.point(self.nodes.Psi, rig)))
        EY = poly_scale(self.E, right=Y)
        Q, _ = poly_mul(EY, self.F)
        I = IntervalMatrix.eye(self.n, rig)
        c = Q.coeffs.copy()
        c0 = c[:, 0] + I
        c.lo[:, 0], c.hi[:, 0] = c0.lo, c0.hi
        s = Q.with_coeffs(c).sup_bound(self.W)
        return mul_up(mul_up(self.h, s, rig), self.normA, rig)

    # O(N^2) pieces --------------------------------------------------------
    def _block(self, rows: np.ndarray):
        N, rig, W = self.N, self.rig, self.W
        g = self.green
        kk = np.arange(N)[None, :]
        below = (kk < rows[:, None])[..., None, None]
        M = IntervalMatrix.where(below, g.lower[None], g.upper[None])
        G = self.Phi[rows][:, None] @ M
        gn = norm_upper(G, W)
        gn[np.arange(rows.size), rows] = 0.0
        S = sum_up(mul_up(gn, self.b[None, :], rig), axis=1, rigorous=rig)
        jr = rows[rows < N - 1]
        T = np.zeros(jr.size)
        if jr.size:
            belowJ = (kk <= jr[:, None])[..., None, None]
            MJ = IntervalMatrix.where(belowJ, g.lower[None], g.upper[None])
            D = self.J[jr][:, None] @ MJ
            T = sum_up(mul_up(norm_upper(D, W), self.b[None, :], rig), axis=1, rigorous=rig)
        return S, T

    def row_sums(self):
        """``S_j = sum_{k != j} |G_jk| b_k`` and jump sums ``T_j`` for every row."""
        if self._rows is not None:
            return self._rows
        N, n = self.N, self.n
        per = max(1, _BLOCK_BUDGET // max(1, N * n * n))
        chunks = [np.arange(i, min(N, i + per)) for i in range(0, N, per)]
        if self.workers > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(self.workers) as pool:
                parts = list(pool.map(self._block, chunks))
        else:
            parts = [self._block(c) for c in chunks]
        S = np.concatenate([p[0] for p in parts])
        T = np.concatenate([p[1] for p in parts])
        self._rows = (S, T)
        return self._rows

    # totals ---------------------------------------------------------------
    def alpha_terms(self) -> dict:
        rig, W = self.rig, self.W
        t = {}
        phiR = self.R.sup_bound(W, right=self.Phi)
        t["phi_residual"] = mul_up(self.q, sum_up(mul_up(self.c, phiR, rig), rigorous=rig), rig)
        t["phi_jump"] = mul_up(self.q, sum_up(norm_upper(self.J, W), rigorous=rig), rig)
        t["diag_jump"] = sum_up(self.diag_jump(), rigorous=rig)
        gm, gp = self.one_sided()
        d = mul_up(mul_up(self.hw, self.c, rig), add_up(gm, gp, rig), rig)
        d = mul_up(mul_up(d, self.normA, rig), self.normR, rig)
        t["diag_residual"] = sum_up(d, rigorous=rig)
        S, T = self.row_sums()
        t["green_residual"] = sum_up(mul_up(mul_up(self.c, self.normR, rig), S, rig), rigorous=rig)
        t["green_jump"] = sum_up(T, rigorous=rig)
        first = 0.0
        for v in t.values():
            first = add_up(first, v, rig)
        t["first"] = first
        I = IntervalMatrix.eye(self.n, rig)
        bcres = I - self.B0 @ self.P0 - self.B1 @ self.P1
        t["bc_fundamental"] = mul_up(norm_upper(bcres, W), self.q, rig)
        Z = (self.B0 @ self.P0) @ self.green.upper + (self.B1 @ self.P1) @ self.green.lower
        zf = poly_scale(self.F, left=Z).sup_bound(W)
        t["bc_green"] = sum_up(mul_up(mul_up(self.h, zf, rig), self.normA, rig), rigorous=rig)
        t["second"] = add_up(t["bc_fundamental"], t["bc_green"], rig)
        t["alpha"] = max(float(t["first"]), float(t["second"]))
        return {k: float(v) for k, v in t.items()}

    def H_bound(self) -> float:
        rig, W = self.rig, self.W
        gm, gp = self.one_sided()
        S, _ = self.row_sums()
        diag = mul_up(mul_up(self.h, self.normE, rig), mul_up(np.maximum(gm, gp), self.normA, rig), rig)
        ephi = poly_scale(self.E, right=self.Phi).sup_bound(W)
        rows = add_up(add_up(1.0, diag, rig),
                      add_up(mul_up(ephi, self.q, rig), mul_up(self.normE, S, rig), rig), rig)
        return float(np.max(rows))


def bound_I_minus_FH(problem: LinearBVProblem, nodes: FundamentalNodes, W=None, m: int = 15,
                     green: GreenNodes | None = None, mesh: Mesh | None = None,
                     rigorous: bool = True, workers=None,
                     threshold: float = SUBNORMAL_THRESHOLD) -> Interval:
    """Upper bound on ``|I - F H|`` as the interval ``[0, alpha]``."""
    ctx = _BoundContext(problem, nodes, m, mesh, W, rigorous, green, workers, threshold)
    return Interval(0.0, ctx.alpha_terms()["alpha"], rigorous)


def bound_H(problem: LinearBVProblem, nodes: FundamentalNodes, W=None, m: int = 15,
            green: GreenNodes | None = None, mesh: Mesh | None = None,
            rigorous: bool = True, workers=None,
            threshold: float = SUBNORMAL_THRESHOLD) -> Interval:
    """Upper bound on ``|H|`` as the interval ``[0, bound]``."""
    ctx = _BoundContext(problem, nodes, m, mesh, W, rigorous, green, workers, threshold)
    return Interval(0.0, ctx.H_bound(), rigorous)


def finv_bound(H: float, alpha: float, rigorous: bool = True) -> float:
    """``H / (1 - alpha)`` rounded up; requires ``alpha < 1``."""
    if not alpha < 1.0:
        raise DomainError("|I - FH| bound must be below 1")
    denom = 1.0 - alpha
    if rigorous:
        denom = float(np.nextafter(denom, 0.0))
    return float(div_up(H, denom, rigorous))


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class LinearCertificate:
    """Outcome of a linear certification run."""

    status: str
    alpha: Interval
    H_norm: Interval
    Finv_norm: Interval | None
    weights: WeightMatrix
    mesh: Mesh
    m: int
    mode: str
    terms: dict = field(default_factory=dict)
    reason: str = ""
    problem: str = ""
    params: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    @property
    def N(self) -> int:
        return self.mesh.N

    def require_certified(self):
        if not self.certified:
            raise StateError(f"certificate status is {self.status}: {self.reason}")

    def to_dict(self) -> dict:
        return {
            "kind": "linear",
            "status": self.status,
            "reason": self.reason,
            "problem": self.problem,
            "params": self.params,
            "N": self.N,
            "m": self.m,
            "mode": self.mode,
            "weights": self.weights.tolist(),
            "alpha": self.alpha.hi,
            "H_norm": self.H_norm.hi,
            "Finv_norm": None if self.Finv_norm is None else self.Finv_norm.hi,
            "terms": self.terms,
            "elapsed_seconds": self.elapsed,
        }


def _mode_flag(mode) -> bool:
    if mode in ("rigorous", True):
        return True
    if mode in ("fast-float", "fast", False):
        return False
    raise ConfigError(f"unknown mode {mode!r}; use 'rigorous' or 'fast-float'")


def certify_linear(problem: LinearBVProblem, nodes: FundamentalNodes, m: int = 15,
                   mesh: Mesh | None = None, weights="identity", v_nodes=None,
                   mode: str = "rigorous", workers=None,
                   threshold: float = SUBNORMAL_THRESHOLD) -> LinearCertificate:
    """Bound ``|I - FH|`` and ``|H|`` and decide invertibility.

    ``weights`` is ``"identity"``, ``"adaptive"`` (needs ``v_nodes``, the
    approximate solution at the mesh centers) or a :class:`WeightMatrix`.
    Underflow in the node data propagates as :class:`UnderflowDiagnostic`.
    """
    rig = _mode_flag(mode)
    t0 = time.perf_counter()
    mesh = Mesh.uniform(nodes.N) if mesh is None else mesh
    if isinstance(weights, WeightMatrix):
        W = weights
    elif weights in (None, "identity"):
        W = WeightMatrix.identity(problem.n)
    elif weights == "adaptive":
        if v_nodes is None:
            raise ConfigError("adaptive weights need the approximate solution nodes")
        W = adaptive_weights(problem, mesh, v_nodes, m)
    else:
        raise ConfigError(f"unknown weight choice {weights!r}")
    ctx = _BoundContext(problem, nodes, m, mesh, W, rig, None, workers, threshold)
    terms = ctx.alpha_terms()
    alpha = terms["alpha"]
    H = ctx.H_bound()
    cert = LinearCertificate(
        status="failed", alpha=Interval(0.0, alpha, rig), H_norm=Interval(0.0, H, rig),
        Finv_norm=None, weights=W, mesh=mesh, m=m, mode="rigorous" if rig else "fast-float",
        terms=terms, problem=problem.name, params=dict(problem.params))
    if math.isfinite(alpha) and alpha < 1.0 and math.isfinite(H):
        cert.Finv_norm = Interval(0.0, finv_bound(H, alpha, rig), rig)
        cert.status = "certified"
    else:
        cert.reason = f"|I - FH| bound {alpha:.3g} is not below 1"
    cert.elapsed = time.perf_counter() - t0
    return cert


# ---------------------------------------------------------------------------
# residual of a piecewise polynomial approximation
# ---------------------------------------------------------------------------

def piecewise_residual_bound(mesh: Mesh, coeffs: IntervalMatrix, res_coeffs: IntervalMatrix,
                             rem_integral, bc_residual: IntervalMatrix,
                             W: WeightMatrix | None = None) -> dict:
    """Bound the residual of a piecewise polynomial ``p`` in the product norm.

    The first component is ``p(t) - p(0) - int_0^t f``: on piece j it equals
    the accumulated jumps and full-piece integrals of the pointwise residual
    ``res = f(p) - p'`` for earlier pieces plus a partial integral on piece j.
    ``res_coeffs`` (N, K, n) are the polynomial part of ``res`` and
    ``rem_integral`` bounds the integral of the remaining part per piece.
    """
    rig = coeffs.rigorous
    N = mesh.N
    left, right = _series_endpoints(coeffs, mesh)
    K = res_coeffs.shape[1]
    ints = monomial_integrals(mesh.tau_left(rig), mesh.tau_right(rig), K - 1)
    full = (res_coeffs * ints.reshape(ints.shape + (1,))).sum(axis=1)
    own = np.zeros(N)
    cn = norm_upper(res_coeffs, W, vector=True)
    for l in range(K):
        own = add_up(own, mul_up(cn[:, l], abs_monomial_integral_up(mesh.halfwidths, l, rig),
                                 rig), rig)
    jumps = left[1:] - right[:-1]
    rem = np.asarray(rem_integral, dtype=float)
    if N > 1:
        steps = (jumps - full[:-1]).cumsum(axis=0)
        prefix = np.concatenate([[0.0], norm_upper(steps, W, vector=True)])
    else:
        prefix = np.zeros(1)
    remcum = np.cumsum(rem)
    if rig:
        remcum = np.nextafter(remcum * (1.0 + 2.0 * N * np.finfo(float).eps), np.inf)
    pieces = add_up(add_up(prefix, own, rig), remcum, rig)
    first = float(np.max(pieces))
    second = float(norm_upper(bc_residual, W, vector=True))
    return {"first": first, "second": second, "total": max(first, second),
            "pieces": pieces,
            "jump_norm": float(np.max(norm_upper(jumps, W, vector=True))) if N > 1 else 0.0}


@dataclass(frozen=True)
class SolutionErrorBound:
    """Error bound for an approximate solution of a certified linear problem."""

    error: Interval
    components: np.ndarray
    residual: float
    residual_terms: dict


def verify_inhomogeneous(cert: LinearCertificate, problem: LinearBVProblem, v_nodes,
                         m: int | None = None) -> SolutionErrorBound:
    """Bound ``|v - v_exact|`` for the piecewise series extension of ``v_nodes``.

    The approximate solution on piece j is the degree-m Taylor polynomial of
    the local solution through ``v_nodes[j]`` at the piece center. The bound
    is ``|F^-1|`` times the residual norm; ``components[i]`` bounds the error
    in component i (the weighted bound divided by ``w_i``).
    """
    cert.require_certified()
    m = cert.m if m is None else m
    rig = cert.mode == "rigorous"
    mesh, W = cert.mesh, cert.weights
    v = np.asarray(v_nodes, dtype=float)
    if v.shape != (mesh.N, problem.n):
        raise ShapeError(f"solution nodes must have shape {(mesh.N, problem.n)}")
    lp = LinearAsNonlinear(problem)
    coeffs = lp.solution_series(IntervalMatrix.point(v, rig), mesh, m)
    res, rem = lp.residual_series(coeffs, mesh, W)
    left, right = _series_endpoints(coeffs, mesh)
    bc = lp.boundary(left[0], right[-1])
    r = piecewise_residual_bound(mesh, coeffs, res, rem, bc, W)
    err = float(mul_up(cert.Finv_norm.hi, r["total"], rig))
    comps = div_up(err, W.diag, rig)
    return SolutionErrorBound(Interval(0.0, err, rig), np.asarray(comps), r["total"],
                              {k: r[k] for k in ("first", "second", "jump_norm")})


__all__ = [
    "FundamentalNodes", "GreenNodes", "LinearCertificate", "SolutionErrorBound",
    "build_green_nodes", "bound_I_minus_FH", "bound_H", "finv_bound", "certify_linear",
    "choose_weights", "adaptive_weights", "solution_jump_errors", "verify_inhomogeneous",
    "piecewise_residual_bound", "check_underflow", "SUBNORMAL_THRESHOLD",
]

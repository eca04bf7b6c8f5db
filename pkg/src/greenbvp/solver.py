"""Non-rigorous solvers producing certification inputs, and the solution file format.

Both solvers work with the same global system. On piece j the unknown is
the value ``X_j`` at the center; the local solution is propagated to the
piece ends by a degree-m Taylor series, and the system collects the
boundary condition together with continuity across every interior node::

    B0 EL_1 X_1 + B1 ER_N X_N = rhs_0
    ER_j X_j - EL_{j+1} X_{j+1} = rhs_j,   j = 1 .. N-1

Solving it globally (rather than marching) keeps the decaying modes of the
fundamental solution as accurate as the growing ones.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import FormatError, SolveError
from .interval import IntervalMatrix
from .linear import SUBNORMAL_THRESHOLD, FundamentalNodes, _series_endpoints, check_underflow
from .problems import LinearAsNonlinear, LinearBVProblem, Mesh, NonlinearBVProblem
from .taylor import taylor_E


@dataclass(eq=False)
class ApproximateSolution:
    """Node data for certification: solution values and fundamental-solution nodes."""

    problem: str
    params: dict
    mesh: Mesh
    m: int
    v_nodes: np.ndarray
    fundamentals: FundamentalNodes
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.v_nodes = np.asarray(self.v_nodes, dtype=float)
        N, n = self.fundamentals.N, self.fundamentals.n
        if self.mesh.N != N or self.v_nodes.shape != (N, n):
            raise FormatError("node arrays do not match the mesh", "v_nodes")

    @property
    def N(self) -> int:
        return self.mesh.N

    @property
    def n(self) -> int:
        return self.fundamentals.n


def _propagators(E_taylor, mesh: Mesh):
    """Float values of ``I + E_j`` at the left and right ends of each piece."""
    E = taylor_E(E_taylor)
    return E(mesh.tau_left(False)).mid(), E(mesh.tau_right(False)).mid()


def _system(EL, ER, B0, B1) -> sp.csc_matrix:
    N, n = EL.shape[0], EL.shape[1]
    rows, cols, vals = [], [], []

    def put(bi, bj, M):
        r, c = np.nonzero(np.ones_like(M, dtype=bool))
        rows.append(bi * n + r)
        cols.append(bj * n + c)
        vals.append(M[r, c])

    put(0, 0, B0 @ EL[0])
    put(0, N - 1, B1 @ ER[N - 1])
    for j in range(N - 1):
        put(j + 1, j, ER[j])
        put(j + 1, j + 1, -EL[j + 1])
    M = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(N * n, N * n))
    return M.tocsc()


class _Factored:
    def __init__(self, M: sp.csc_matrix, refine: int = 2):
        self.M = M
        self.refine = refine
        if not np.all(np.isfinite(M.data)):
            raise SolveError("global system has non-finite entries (propagator overflow)")
        try:
            self.lu = spla.splu(M)
        except RuntimeError as exc:
            raise SolveError(f"global system is singular: {exc}") from None
        self.condition = self._condition()
        if not math.isfinite(self.condition) or self.condition > 1e16:
            raise SolveError(f"global system is ill-conditioned (estimate {self.condition:.3g})",
                             self.condition)

    def _condition(self) -> float:
        n = self.M.shape[0]
        try:
            inv = spla.LinearOperator((n, n), matvec=self.lu.solve,
                                      rmatvec=lambda x: self.lu.solve(x, trans="T"),
                                      dtype=float)
            est = spla.onenormest(inv)
        except Exception:  # estimator breakdown on tiny systems
            est = np.linalg.norm(np.linalg.inv(self.M.toarray()), 1)
        return float(est * spla.norm(self.M, 1))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x = self.lu.solve(rhs)
        for _ in range(self.refine):
            x = x + self.lu.solve(rhs - self.M @ x)
        if not np.all(np.isfinite(x)):
            raise SolveError("solution of the global system is not finite", self.condition)
        return x


def _fundamentals(fac: _Factored, N: int, n: int, threshold: float) -> FundamentalNodes:
    rhs = np.zeros((N * n, n))
    rhs[:n] = np.eye(n)
    Phi = fac.solve(rhs).reshape(N, n, n)
    check_underflow(Phi, "fundamental solution nodes", threshold)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        try:
            Psi = np.linalg.inv(Phi)
        except np.linalg.LinAlgError:
            raise SolveError("a fundamental solution node is singular") from None
    check_underflow(Psi, "inverse fundamental solution nodes", threshold)
    return FundamentalNodes(Phi, Psi)


def solve_linear_bvp(problem: LinearBVProblem, mesh: Mesh, m: int = 15, tol: float = 1e-10,
                     threshold: float = SUBNORMAL_THRESHOLD,
                     refine: int = 2) -> ApproximateSolution:
    """Solve ``v' = A v + q``, ``B0 v(0) + B1 v(1) = w`` and the boundary fundamental matrix.

    ``tol`` bounds the relative continuity/boundary residual of the discrete
    system; a larger residual raises :class:`SolveError`.
    """
    t0 = time.perf_counter()
    N, n = mesh.N, problem.n
    A = problem.a_taylor(mesh, m, False)
    EL, ER = _propagators(A, mesh)
    fac = _Factored(_system(EL, ER, problem.B0, problem.B1), refine)

    lp = LinearAsNonlinear(problem)
    rhs = np.zeros(N * n)
    sl = sr = np.zeros((N, n))
    if problem.q_taylor is not None:
        s = lp.solution_series(IntervalMatrix.zeros((N, n), False), mesh, m)
        sl, sr = (e.mid() for e in _series_endpoints(s, mesh))
        rhs[n:] = (sl[1:] - sr[:-1]).reshape(-1)
    rhs[:n] = problem.w - problem.B0 @ sl[0] - problem.B1 @ sr[-1]
    X = fac.solve(rhs)
    res = np.max(np.abs(fac.M @ X - rhs)) / max(1.0, np.max(np.abs(rhs)))
    if res > tol:
        raise SolveError(f"discrete residual {res:.3g} exceeds tolerance {tol:.3g}",
                         fac.condition)
    fund = _fundamentals(fac, N, n, threshold)
    meta = {"solver": "taylor-global-linear", "m": m, "tol": tol, "residual": float(res),
            "condition": fac.condition, "seconds": time.perf_counter() - t0}
    return ApproximateSolution(problem.name, dict(problem.params), mesh, m,
                               X.reshape(N, n), fund, meta)


def _nonlinear_residual(problem: NonlinearBVProblem, u: np.ndarray, mesh: Mesh, m: int):
    coeffs = problem.solution_series(IntervalMatrix.point(u, False), mesh, m)
    left, right = _series_endpoints(coeffs, mesh)
    left, right = left.mid(), right.mid()
    g = problem.boundary(IntervalMatrix.point(left[0], False),
                         IntervalMatrix.point(right[-1], False)).mid()
    F = np.concatenate([g, (right[:-1] - left[1:]).reshape(-1)])
    return F, coeffs, left, right


def _newton_matrix(problem, coeffs, left, right, mesh, m, refine):
    J = problem.jacobian_taylor(coeffs, mesh, m)
    EL, ER = _propagators(J, mesh)
    D1, D2 = problem.boundary_jacobians(left[0], right[-1])
    return _Factored(_system(EL, ER, np.asarray(D1, float), np.asarray(D2, float)), refine)


def solve_nonlinear_bvp(problem: NonlinearBVProblem, mesh: Mesh, m: int = 15,
                        tol: float = 1e-10, initial=None, max_iter: int = 40,
                        threshold: float = SUBNORMAL_THRESHOLD,
                        refine: int = 1) -> ApproximateSolution:
    """Damped Newton on the global continuity system.

    Converges when the max-norm of the discrete residual (boundary function
    and interior jumps) is below ``tol`` and further steps no longer reduce
    it. Fundamental nodes are those of the linearization at the final
    iterate.
    """
    if isinstance(problem, LinearBVProblem):
        problem = LinearAsNonlinear(problem)
    t0 = time.perf_counter()
    N, n = mesh.N, problem.n
    u = problem.initial_guess(mesh) if initial is None else np.array(initial, dtype=float)
    if u.shape != (N, n):
        raise SolveError(f"initial guess must have shape {(N, n)}")
    F, coeffs, left, right = _nonlinear_residual(problem, u, mesh, m)
    fnorm = float(np.max(np.abs(F)))
    history = [fnorm]
    converged = False
    for it in range(1, max_iter + 1):
        fac = _newton_matrix(problem, coeffs, left, right, mesh, m, refine)
        du = -fac.solve(F).reshape(N, n)
        lam = 1.0
        while True:
            cand = u + lam * du
            Fc, cc, lc, rc = _nonlinear_residual(problem, cand, mesh, m)
            cnorm = float(np.max(np.abs(Fc))) if np.all(np.isfinite(Fc)) else math.inf
            if cnorm <= (1.0 - 0.25 * lam) * fnorm or (fnorm <= tol and cnorm <= fnorm):
                break
            lam *= 0.5
            if lam < 1e-6:
                break
        if not cnorm < math.inf or (lam < 1e-6 and fnorm > tol):
            raise SolveError(f"Newton line search failed at iteration {it} "
                             f"(residual {fnorm:.3g})")
        if cnorm >= fnorm and fnorm <= tol:
            converged = True
            break
        u, F, coeffs, left, right, fnorm = cand, Fc, cc, lc, rc, cnorm
        history.append(fnorm)
        step = float(np.max(np.abs(lam * du)))
        if fnorm <= tol and step <= 1e-14 * max(1.0, float(np.max(np.abs(u)))):
            converged = True
            break
    if not converged and fnorm <= tol:
        converged = True
    if not converged:
        raise SolveError(f"Newton did not converge in {max_iter} iterations "
                         f"(residual {fnorm:.3g})")
    fac = _newton_matrix(problem, coeffs, left, right, mesh, m, refine=2)
    fund = _fundamentals(fac, N, n, threshold)
    meta = {"solver": "taylor-global-newton", "m": m, "tol": tol, "residual": fnorm,
            "iterations": len(history) - 1, "history": history,
            "condition": fac.condition, "seconds": time.perf_counter() - t0}
    return ApproximateSolution(problem.name, dict(problem.params), mesh, m, u, fund, meta)


def evaluate_solution(problem, approx: ApproximateSolution, t) -> np.ndarray:
    """Float values (len(t), n) of the piecewise series extension of ``approx``."""
    if isinstance(problem, LinearBVProblem):
        problem = LinearAsNonlinear(problem)
    mesh = approx.mesh
    t = np.atleast_1d(np.asarray(t, dtype=float))
    coeffs = problem.solution_series(IntervalMatrix.point(approx.v_nodes, False), mesh,
                                     approx.m).mid()
    idx = mesh.locate(t)
    tau = (t - mesh.centers[idx])[:, None]
    c = coeffs[idx]
    acc = c[:, -1]
    for k in range(c.shape[1] - 2, -1, -1):
        acc = acc * tau + c[:, k]
    return acc


# ---------------------------------------------------------------------------
# solution files
# ---------------------------------------------------------------------------

FORMAT_NAME = "greenbvp-solution"

SOLUTION_SCHEMA = {
    "type": "object",
    "required": ["problem", "params", "n", "mesh", "m", "v_nodes", "phi_nodes", "psi_nodes"],
    "properties": {
        "problem": {"type": "string"},
        "params": {"type": "object"},
        "n": {"type": "integer", "minimum": 1},
        "m": {"type": "integer", "minimum": 1},
        "mesh": {"type": "array", "minItems": 2, "items": {"type": "number"}},
        "v_nodes": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "phi_nodes": {"type": "array", "items": {"type": "array", "items": {
            "type": "array", "items": {"type": "number"}}}},
        "psi_nodes": {"type": "array", "items": {"type": "array", "items": {
            "type": "array", "items": {"type": "number"}}}},
        "meta": {"type": "object"},
    },
}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def export_solution(sol: ApproximateSolution, path) -> None:
    """Write ``sol`` as JSON; floats use the shortest round-trip representation."""
    doc = {
        "format": FORMAT_NAME,
        "problem": sol.problem,
        "params": _jsonable(sol.params),
        "n": sol.n,
        "m": sol.m,
        "mesh": sol.mesh.nodes.tolist(),
        "v_nodes": sol.v_nodes.tolist(),
        "phi_nodes": sol.fundamentals.Phi.tolist(),
        "psi_nodes": sol.fundamentals.Psi.tolist(),
        "meta": _jsonable(sol.meta),
    }
    Path(path).write_text(json.dumps(doc, allow_nan=False, indent=1))


def _array(doc, key, shape):
    try:
        a = np.array(doc[key], dtype=float)
    except (ValueError, TypeError):
        raise FormatError("ragged or non-numeric array", key) from None
    if a.shape != shape:
        raise FormatError(f"expected shape {shape}, got {a.shape}", key)
    if not np.all(np.isfinite(a)):
        raise FormatError("entries must be finite", key)
    return a


def solution_from_dict(doc: dict) -> ApproximateSolution:
    import jsonschema

    try:
        jsonschema.validate(doc, SOLUTION_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise FormatError(exc.message, where) from None
    n, m = doc["n"], doc["m"]
    t = np.array(doc["mesh"], dtype=float)
    if not np.all(np.isfinite(t)) or np.any(np.diff(t) <= 0):
        raise FormatError("mesh must be finite and strictly increasing", "mesh")
    if t[0] != 0.0 or t[-1] != 1.0:
        raise FormatError("mesh must start at 0 and end at 1", "mesh")
    N = t.size - 1
    v = _array(doc, "v_nodes", (N, n))
    phi = _array(doc, "phi_nodes", (N, n, n))
    psi = _array(doc, "psi_nodes", (N, n, n))
    return ApproximateSolution(doc["problem"], dict(doc["params"]), Mesh(t), m, v,
                               FundamentalNodes(phi, psi), dict(doc.get("meta", {})))


def ingest_solution(path) -> ApproximateSolution:
    """Read a solution file written by :func:`export_solution` or an external tool."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise FormatError("top level must be an object")
    return solution_from_dict(doc)


__all__ = ["ApproximateSolution", "solve_linear_bvp", "solve_nonlinear_bvp", "evaluate_solution",
           "export_solution", "ingest_solution", "solution_from_dict", "SOLUTION_SCHEMA"]

"""Interval matrix polynomials on mesh subintervals.

Polynomials are expanded in ``tau = t - center`` and stored with a leading
batch axis so that one object holds the expansions on all N subintervals.
Coefficient arrays have shape ``(*batch, deg + 1, rows, cols)``; vectors are
``cols == 1``.

Sup bounds use the sum of monomial norms, ``sum_k |c_k| * halfwidth**k``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, DomainError, ShapeError
from .interval import IntervalMatrix, WeightMatrix, add_up, mul_up, norm_upper, pow_up


@dataclass(frozen=True, eq=False)
class MatrixPolynomial:
    """``P(t) = sum_k coeffs[..., k, :, :] * (t - center)**k`` on ``|t - center| <= halfwidth``."""

    center: np.ndarray
    halfwidth: np.ndarray
    coeffs: IntervalMatrix

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        hw = np.asarray(self.halfwidth, dtype=float)
        if np.any(hw <= 0):
            raise DomainError("halfwidth must be positive")
        if self.coeffs.ndim < 3:
            raise ShapeError("coefficients need shape (..., deg+1, rows, cols)")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "halfwidth", hw)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[-3] - 1

    @property
    def rigorous(self) -> bool:
        return self.coeffs.rigorous

    @property
    def batch_shape(self):
        return self.coeffs.shape[:-3]

    def coeff(self, k: int) -> IntervalMatrix:
        return self.coeffs[..., k, :, :]

    def __call__(self, tau) -> IntervalMatrix:
        """Evaluate at offsets ``tau`` (interval or float, shape ``batch``) by Horner."""
        tau = tau if isinstance(tau, IntervalMatrix) else IntervalMatrix.point(tau, self.rigorous)
        t = tau.reshape(tau.shape + (1, 1))
        acc = self.coeff(self.degree)
        for k in range(self.degree - 1, -1, -1):
            acc = acc * t + self.coeff(k)
        return acc

    def sup_bound(self, W: WeightMatrix | None = None, vector: bool = False) -> np.ndarray:
        return poly_sup_bound(self, W, vector)

    def with_coeffs(self, coeffs: IntervalMatrix) -> "MatrixPolynomial":
        return MatrixPolynomial(self.center, self.halfwidth, coeffs)


def _check_aligned(P: MatrixPolynomial, Q: MatrixPolynomial):
    if P.center.shape != Q.center.shape or not np.array_equal(P.center, Q.center) \
            or not np.array_equal(P.halfwidth, Q.halfwidth):
        raise AlignmentError("polynomials are expanded about different centers")


def poly_sup_bound(P: MatrixPolynomial, W: WeightMatrix | None = None,
                   vector: bool = False) -> np.ndarray:
    """Upper bound on ``sup |P(t)|`` over the subinterval, per batch entry."""
    rig = P.rigorous
    c = P.coeffs
    if vector:
        norms = norm_upper(c[..., 0], W, vector=True)
    else:
        norms = norm_upper(c, W)
    total = norms[..., 0]
    hw = P.halfwidth
    power = np.ones_like(hw)
    for k in range(1, P.degree + 1):
        power = mul_up(power, hw, rig)
        total = add_up(total, mul_up(norms[..., k], power, rig), rig)
    return total


def poly_add(P: MatrixPolynomial, Q: MatrixPolynomial) -> MatrixPolynomial:
    _check_aligned(P, Q)
    dp, dq = P.degree, Q.degree
    d = max(dp, dq)
    items = []
    for k in range(d + 1):
        if k <= dp and k <= dq:
            items.append(P.coeff(k) + Q.coeff(k))
        elif k <= dp:
            items.append(P.coeff(k))
        else:
            items.append(Q.coeff(k))
    return P.with_coeffs(IntervalMatrix.stack(items, axis=-3))


def poly_mul(P: MatrixPolynomial, Q: MatrixPolynomial, deg: int | None = None,
             W: WeightMatrix | None = None):
    """Product ``P Q`` truncated at degree ``deg``.

    Returns ``(product, tail)`` where ``tail`` bounds the weighted sup norm of
    the discarded higher-degree terms (zero when nothing is discarded).
    """
    _check_aligned(P, Q)
    full = P.degree + Q.degree
    deg = full if deg is None else deg
    if deg < 0:
        raise DomainError("truncation degree must be nonnegative")
    coeffs = []
    for k in range(full + 1):
        acc = None
        for i in range(max(0, k - Q.degree), min(k, P.degree) + 1):
            term = P.coeff(i) @ Q.coeff(k - i)
            acc = term if acc is None else acc + term
        coeffs.append(acc)
    rig = P.rigorous
    tail = np.zeros(P.batch_shape)
    if full > deg:
        tail_poly = P.with_coeffs(IntervalMatrix.stack(
            [IntervalMatrix.zeros(coeffs[0].shape, rig)] * (deg + 1) + coeffs[deg + 1:], axis=-3))
        tail = poly_sup_bound(tail_poly, W)
    kept = P.with_coeffs(IntervalMatrix.stack(coeffs[:deg + 1], axis=-3))
    return kept, tail


def poly_scale(P: MatrixPolynomial, left=None, right=None) -> MatrixPolynomial:
    """``left @ P(t) @ right`` for constant (batched) matrices."""
    c = P.coeffs
    if left is not None:
        c = left.reshape(left.shape[:-2] + (1,) + left.shape[-2:]) @ c
    if right is not None:
        c = c @ right.reshape(right.shape[:-2] + (1,) + right.shape[-2:])
    return P.with_coeffs(c)


@dataclass(frozen=True, eq=False)
class TaylorData:
    """Taylor data of a matrix function A(t) on each subinterval.

    ``A(t) = sum_{k<m} coeffs[k] tau**k + r_m(t) tau**m`` with ``remainder``
    enclosing ``r_m(t)`` for every t in the subinterval.
    """

    center: np.ndarray
    halfwidth: np.ndarray
    coeffs: IntervalMatrix
    remainder: IntervalMatrix

    @property
    def m(self) -> int:
        return self.coeffs.shape[-3]

    @property
    def n(self) -> int:
        return self.coeffs.shape[-1]

    @property
    def rigorous(self) -> bool:
        return self.coeffs.rigorous

    def truncate(self, m: int) -> "TaylorData":
        """Keep ``m`` coefficients; fold the rest into the remainder."""
        if m < 1:
            raise DomainError("Taylor degree must be at least 1")
        if m > self.m:
            raise DomainError(f"only {self.m} coefficients available, {m} requested")
        if m == self.m:
            return self
        rig = self.rigorous
        hw = IntervalMatrix(-self.halfwidth, self.halfwidth, rig, check=False)
        hw = hw.reshape(hw.shape + (1, 1))
        rem = self.remainder
        for k in range(self.m - 1, m - 1, -1):
            rem = rem * hw + self.coeffs[..., k, :, :]
        return TaylorData(self.center, self.halfwidth, self.coeffs[..., :m, :, :], rem)

    def sup_bound(self, W: WeightMatrix | None = None) -> np.ndarray:
        """Upper bound on ``sup |A(t)|`` over each subinterval."""
        rig = self.rigorous
        poly = MatrixPolynomial(self.center, self.halfwidth, self.coeffs)
        total = poly_sup_bound(poly, W)
        if not (self.remainder.is_point and not np.any(self.remainder.lo)):
            rem = norm_upper(self.remainder, W)
            total = add_up(total, mul_up(rem, pow_up(self.halfwidth, self.m, rig), rig), rig)
        return total

    def evaluate(self, tau) -> IntervalMatrix:
        """Enclosure of A at offsets ``tau`` including the remainder."""
        rig = self.rigorous
        tau = tau if isinstance(tau, IntervalMatrix) else IntervalMatrix.point(tau, rig)
        poly = MatrixPolynomial(self.center, self.halfwidth, self.coeffs)
        t = tau.reshape(tau.shape + (1, 1))
        tm = IntervalMatrix.point(np.ones(t.shape), rig)
        for _ in range(self.m):
            tm = tm * t
        return poly(tau) + self.remainder * tm


def _identity_like(A: TaylorData) -> IntervalMatrix:
    n = A.n
    shape = A.coeffs.shape[:-3] + (n, n)
    return IntervalMatrix.point(np.broadcast_to(np.eye(n), shape), A.rigorous)


def taylor_E(A: TaylorData, m: int | None = None) -> MatrixPolynomial:
    """Coefficients of ``I + E(t)`` solving ``E' = A (I + E)`` through order m-1.

    ``E^0 = I`` and ``E^k = (1/k) sum_{l<k} A_l E^{k-l-1}``.
    """
    m = A.m if m is None else m
    if m < 1:
        raise DomainError("Taylor degree must be at least 1")
    if A.m < m:
        raise DomainError(f"need {m} Taylor coefficients of A, have {A.m}")
    terms = [_identity_like(A)]
    for k in range(1, m + 1):
        acc = None
        for l in range(k):
            t = A.coeffs[..., l, :, :] @ terms[k - l - 1]
            acc = t if acc is None else acc + t
        terms.append(acc / float(k))
    return MatrixPolynomial(A.center, A.halfwidth, IntervalMatrix.stack(terms, axis=-3))


def taylor_F(A: TaylorData, m: int | None = None) -> MatrixPolynomial:
    """Coefficients of ``I + F(t)`` solving ``F' = -(I + F) A`` through order m-1."""
    m = A.m if m is None else m
    if m < 1:
        raise DomainError("Taylor degree must be at least 1")
    if A.m < m:
        raise DomainError(f"need {m} Taylor coefficients of A, have {A.m}")
    terms = [_identity_like(A)]
    for k in range(1, m + 1):
        acc = None
        for l in range(k):
            t = terms[k - l - 1] @ A.coeffs[..., l, :, :]
            acc = t if acc is None else acc + t
        terms.append(-(acc / float(k)))
    return MatrixPolynomial(A.center, A.halfwidth, IntervalMatrix.stack(terms, axis=-3))


def ode_defect(A: TaylorData, E: MatrixPolynomial) -> IntervalMatrix:
    """All coefficients of ``A_trunc (I + E) - E'`` (degrees 0 .. 2m-1).

    Coefficients below degree m vanish for ``E = taylor_E(A)``; their
    enclosures contain zero.
    """
    m = A.m
    deg = E.degree
    out = []
    for k in range(m + deg):
        acc = None
        for l in range(max(0, k - deg), min(k, m - 1) + 1):
            t = A.coeffs[..., l, :, :] @ E.coeff(k - l)
            acc = t if acc is None else acc + t
        if k + 1 <= deg:
            acc = acc - E.coeff(k + 1) * float(k + 1)
        out.append(acc)
    return IntervalMatrix.stack(out, axis=-3)


@dataclass(frozen=True, eq=False)
class Residual:
    """``A(I+E) - E' = R(t) tau**m`` with ``R = poly(tau) + r_m(t) (I + E(t))``.

    ``poly`` has coefficients ``C_m .. C_2m`` of the truncated product,
    shifted down by m. ``supnorm`` bounds ``sup |R(t)|`` (unweighted unless a
    weight was supplied).
    """

    poly: MatrixPolynomial
    remainder: IntervalMatrix
    E: MatrixPolynomial
    m: int
    supnorm: np.ndarray

    @property
    def has_remainder(self) -> bool:
        return not (self.remainder.is_point and not np.any(self.remainder.lo))

    def sup_bound(self, W: WeightMatrix | None = None, right: IntervalMatrix | None = None):
        """Bound on ``sup |R(t) X|`` for a constant right factor ``X``."""
        rig = self.poly.rigorous
        p = self.poly if right is None else poly_scale(self.poly, right=right)
        total = poly_sup_bound(p, W)
        if self.has_remainder:
            e = self.E if right is None else poly_scale(self.E, right=right)
            rem = mul_up(norm_upper(self.remainder, W), poly_sup_bound(e, W), rig)
            total = add_up(total, rem, rig)
        return total


def residual_R(A: TaylorData, E: MatrixPolynomial, W: WeightMatrix | None = None) -> Residual:
    """ODE residual of ``I + E`` for ``A``: coefficients of degree m..2m and a sup bound."""
    m = A.m
    if E.degree != m:
        raise DomainError("E must have degree m, as produced by taylor_E")
    items = []
    for k in range(m, 2 * m + 1):
        acc = None
        for l in range(max(0, k - m), m):
            t = A.coeffs[..., l, :, :] @ E.coeff(k - l)
            acc = t if acc is None else acc + t
        if acc is None:
            acc = IntervalMatrix.zeros(A.coeffs.shape[:-3] + (A.n, A.n), A.rigorous)
        items.append(acc)
    poly = MatrixPolynomial(A.center, A.halfwidth, IntervalMatrix.stack(items, axis=-3))
    res = Residual(poly, A.remainder, E, m, np.zeros(0))
    object.__setattr__(res, "supnorm", res.sup_bound(W))
    return res


def monomial_integrals(lo_tau: IntervalMatrix, hi_tau: IntervalMatrix, degree: int) -> IntervalMatrix:
    """Enclosures of ``int_lo^hi tau**k dtau`` for k = 0..degree, stacked on the last axis."""
    items = []
    a = IntervalMatrix.point(np.ones(lo_tau.shape), lo_tau.rigorous)
    b = a
    for k in range(degree + 1):
        a = a * lo_tau
        b = b * hi_tau
        items.append((b - a) / float(k + 1))
    return IntervalMatrix.stack(items, axis=-1)


def abs_monomial_integral_up(halfwidth, k: int, rigorous: bool = True):
    """Upper bound on ``int_{-hw}^{hw} |tau|**k dtau = 2 hw**(k+1) / (k+1)``."""
    p = pow_up(halfwidth, k + 1, rigorous)
    val = mul_up(p, 2.0, rigorous)
    q = val / float(k + 1)
    return np.nextafter(q, np.inf) if rigorous else q


__all__ = [
    "MatrixPolynomial", "TaylorData", "Residual", "poly_add", "poly_mul", "poly_scale",
    "poly_sup_bound", "taylor_E", "taylor_F", "residual_R", "ode_defect",
    "monomial_integrals", "abs_monomial_integral_up",
]

import math
from fractions import Fraction

import numpy as np
import pytest

from greenbvp.errors import AlignmentError, DomainError
from greenbvp.interval import IntervalMatrix
from greenbvp.problems import Mesh, _poly_taylor
from greenbvp.taylor import (MatrixPolynomial, TaylorData, abs_monomial_integral_up, monomial_integrals,
                             ode_defect, poly_add, poly_mul, residual_R, taylor_E, taylor_F)


def _const_taylor(A, m, N=1):
    mesh = Mesh.uniform(N)
    c = IntervalMatrix.point(np.broadcast_to(A, (N, 1) + A.shape))
    return _poly_taylor(mesh, c, m)


def _frac_matrix(A):
    return [[Fraction(x) for x in row] for row in A]


def _frac_matmul(X, Y):
    n = len(X)
    return [[sum(X[i][l] * Y[l][j] for l in range(n)) for j in range(n)] for i in range(n)]


def _contains(M, F):
    n = len(F)
    return all(Fraction(float(M.lo[i, j])) <= F[i][j] <= Fraction(float(M.hi[i, j]))
               for i in range(n) for j in range(n))


@pytest.mark.parametrize("m", [1, 4, 9])
def test_constant_coefficients_match_exponential_series(rng, m):
    A = rng.standard_normal((3, 3))
    T = _const_taylor(A, m)
    E, F = taylor_E(T), taylor_F(T)
    Af, negAf = _frac_matrix(A), _frac_matrix(-A)
    P = [[Fraction(int(i == j)) for j in range(3)] for i in range(3)]
    Q = [row[:] for row in P]
    for k in range(m + 1):
        if k:
            P = [[x / k for x in row] for row in _frac_matmul(P, Af)]
            Q = [[x / k for x in row] for row in _frac_matmul(Q, negAf)]
        assert _contains(E.coeffs[0, k], P)
        assert _contains(F.coeffs[0, k], Q)


def test_E_times_F_is_identity_to_truncation(rng):
    A = 0.3 * rng.standard_normal((2, 2))
    T = _const_taylor(A, 12)
    E, F = taylor_E(T), taylor_F(T)
    for tau in (-0.5, 0.1, 0.5):
        prod = F(np.array([tau])).mid()[0] @ E(np.array([tau])).mid()[0]
        assert np.allclose(prod, np.eye(2), atol=1e-12)


def test_defect_vanishes_below_degree_m(rng):
    mesh = Mesh.uniform(3)
    coeffs = IntervalMatrix.point(rng.standard_normal((3, 3, 2, 2)))
    T = _poly_taylor(mesh, coeffs, 6)
    D = ode_defect(T, taylor_E(T))
    assert D[:, :6].contains_zero().all()
    assert np.max(np.abs(D[:, :6].mid())) < 1e-12


def test_residual_bound_dominates_pointwise_residual(rng):
    mesh = Mesh.uniform(2)
    raw = rng.standard_normal((2, 4, 2, 2))
    T = _poly_taylor(mesh, IntervalMatrix.point(raw), 3)
    E = taylor_E(T)
    R = residual_R(T, E)
    hw = mesh.halfwidths
    for tau_frac in np.linspace(-1, 1, 9):
        if tau_frac == 0:
            continue
        tau = tau_frac * hw
        A = sum(raw[:, k] * tau[:, None, None] ** k for k in range(4))
        Ev = E(tau).mid()
        dE = sum(k * E.coeffs[:, k].mid() * tau[:, None, None] ** (k - 1)
                 for k in range(1, E.degree + 1))
        res = (A @ Ev - dE) / tau[:, None, None] ** 3
        assert np.all(np.abs(res).sum(axis=-1).max(axis=-1) <= R.supnorm * (1 + 1e-9))


def test_truncate_keeps_enclosure(rng):
    mesh = Mesh.uniform(4)
    raw = rng.standard_normal((4, 6, 2, 2))
    full = _poly_taylor(mesh, IntervalMatrix.point(raw), 6)
    cut = full.truncate(3)
    assert cut.m == 3
    for frac in (-1.0, -0.3, 0.7, 1.0):
        tau = frac * mesh.halfwidths
        exact = sum(raw[:, k] * tau[:, None, None] ** k for k in range(6))
        assert cut.evaluate(tau).contains(exact).all()
    with pytest.raises(DomainError):
        full.truncate(7)


def test_sup_bound_dominates_samples(rng):
    mesh = Mesh.uniform(5)
    raw = rng.standard_normal((5, 4, 2, 2))
    T = _poly_taylor(mesh, IntervalMatrix.point(raw), 4)
    bound = T.sup_bound()
    for frac in np.linspace(-1, 1, 11):
        tau = frac * mesh.halfwidths
        val = sum(raw[:, k] * tau[:, None, None] ** k for k in range(4))
        assert np.all(np.abs(val).sum(-1).max(-1) <= bound)


def test_poly_mul_matches_convolution_and_tail(rng):
    P = MatrixPolynomial(np.zeros(1), np.ones(1), IntervalMatrix.point(rng.standard_normal((1, 3, 2, 2))))
    Q = MatrixPolynomial(np.zeros(1), np.ones(1), IntervalMatrix.point(rng.standard_normal((1, 2, 2, 2))))
    full, tail = poly_mul(P, Q)
    assert full.degree == 3 and tail[0] == 0
    a, b = P.coeffs.mid()[0], Q.coeffs.mid()[0]
    expect = [sum(a[i] @ b[k - i] for i in range(3) if 0 <= k - i < 2) for k in range(4)]
    assert np.allclose(full.coeffs.mid()[0], expect)
    kept, tail = poly_mul(P, Q, 1)
    assert kept.degree == 1
    dropped = sum(np.abs(expect[k]).sum(-1).max() for k in (2, 3))
    assert tail[0] >= dropped * (1 - 1e-12)


def test_alignment_checked():
    P = MatrixPolynomial(np.zeros(1), np.ones(1), IntervalMatrix.zeros((1, 2, 2, 2)))
    Q = MatrixPolynomial(np.ones(1), np.ones(1), IntervalMatrix.zeros((1, 2, 2, 2)))
    with pytest.raises(AlignmentError):
        poly_add(P, Q)


def test_monomial_integrals():
    lo = IntervalMatrix.point([-0.5, 0.0])
    hi = IntervalMatrix.point([0.25, 0.5])
    I = monomial_integrals(lo, hi, 3)
    for j, (a, b) in enumerate([(-0.5, 0.25), (0.0, 0.5)]):
        for k in range(4):
            exact = (b ** (k + 1) - a ** (k + 1)) / (k + 1)
            assert I.lo[j, k] <= exact <= I.hi[j, k]
    up = abs_monomial_integral_up(np.array([0.5]), 2)
    assert up[0] >= 2 * 0.5 ** 3 / 3


def test_bad_degree():
    T = _const_taylor(np.eye(2), 2)
    with pytest.raises(DomainError):
        taylor_E(T, 0)
    with pytest.raises(DomainError):
        taylor_F(T, 5)
    assert isinstance(T, TaylorData) and T.n == 2 and math.isclose(T.center[0], 0.5)


def _poly(coeffs, hw=1.0):
    c = np.asarray(coeffs, dtype=float)
    return MatrixPolynomial(np.zeros(1), np.full(1, hw), IntervalMatrix.point(c[None]))


def test_small_polynomial_identities():
    I = np.eye(2)
    P = _poly([I, 2 * I])
    Z = _poly([np.zeros((2, 2))])
    assert np.array_equal(poly_add(P, Z).coeffs.lo, P.coeffs.lo)
    prod, tail = poly_mul(_poly([I, I]), _poly([I, -I]), 2)
    assert np.array_equal(prod.coeffs.mid()[0], [I, 0 * I, -I])
    assert tail[0] == 0.0
    assert 1.5 <= _poly([I, I], hw=0.5).sup_bound()[0] <= 1.5 * (1 + 1e-14)


def test_random_product_sampled_inside_enclosure(rng):
    P = _poly(rng.standard_normal((4, 2, 2)), hw=0.7)
    Q = _poly(rng.standard_normal((3, 2, 2)), hw=0.7)
    kept, tail = poly_mul(P, Q, 3)
    for tau in np.linspace(-0.7, 0.7, 41):
        exact = P(np.array([tau])).mid()[0] @ Q(np.array([tau])).mid()[0]
        approx = kept(np.array([tau])).mid()[0]
        assert np.abs(exact - approx).sum(-1).max() <= tail[0] * (1 + 1e-12) + 1e-12


def test_zero_coefficient_recursions():
    T = _const_taylor(np.zeros((2, 2)), 5)
    E, F = taylor_E(T), taylor_F(T)
    for X in (E, F):
        assert np.array_equal(X.coeffs.mid()[0, 0], np.eye(2))
        assert not np.any(X.coeffs.mid()[0, 1:])
    R = residual_R(T, E)
    assert R.supnorm[0] == 0.0


def test_scalar_hand_unrolled_recursion():
    a0, a1 = 0.75, -1.25
    T = _poly_taylor(Mesh.uniform(1), IntervalMatrix.point(np.array([[[[a0]], [[a1]]]])), 2)
    E = taylor_E(T).coeffs.mid()[0, :, 0, 0]
    assert E[1] == a0 and E[2] == pytest.approx((a0 ** 2 + a1) / 2, rel=1e-15)


def test_product_of_propagators_is_identity_to_degree_m(rng):
    mesh = Mesh.uniform(2)
    T = _poly_taylor(mesh, IntervalMatrix.point(rng.standard_normal((2, 3, 2, 2))), 5)
    E, F = taylor_E(T), taylor_F(T)
    prod, _ = poly_mul(E, F)
    c = prod.coeffs
    assert c[:, 0].contains(np.eye(2)).all()
    assert c[:, 1:6].contains_zero().all()


def test_unit_scalar_residual():
    mesh = Mesh([0.0, 1.0])
    T = _poly_taylor(mesh, IntervalMatrix.point(np.ones((1, 1, 1, 1))), 1)
    E = taylor_E(T)
    assert np.array_equal(E.coeffs.mid()[0, :, 0, 0], [1.0, 1.0])
    R = residual_R(T, E)
    # A (I + E) - E' = 1 + tau - 1 = tau, so R = 1
    assert R.supnorm[0] == pytest.approx(1.0)
    assert ode_defect(T, E)[:, :1].contains_zero().all()


def test_residual_shrinks_with_halfwidth_on_airy_coefficient():
    from greenbvp.problems import turning_point_problem
    p = turning_point_problem(1e-2)
    m = 8
    sup = []
    for N in (20, 40, 80):
        mesh = Mesh.uniform(N)
        T = p.a_taylor(mesh, m, True)
        R = residual_R(T, taylor_E(T))
        # the residual is tau**m R_j, so its sup is bounded by hw**m |R_j|
        sup.append(float(np.max(R.supnorm * mesh.halfwidths ** m)))
    assert sup[1] <= sup[0] / 2 and sup[2] <= sup[1] / 2

import numpy as np
import pytest

from greenbvp.errors import ConfigError, DomainError, ShapeError, StateError, UnderflowDiagnostic
from greenbvp.interval import IntervalMatrix, WeightMatrix
from greenbvp.linear import (FundamentalNodes, bound_H, bound_I_minus_FH, build_green_nodes,
                             certify_linear, check_underflow, choose_weights, finv_bound,
                             solution_jump_errors, verify_inhomogeneous)
from greenbvp.problems import Mesh, builtin_problem, exact_test_problem, exact_testprob_oracle
from greenbvp.solver import solve_linear_bvp


def _oracle_nodes(N, b=1.0):
    o = exact_testprob_oracle(b)
    c = Mesh.uniform(N).centers
    return o, FundamentalNodes(np.stack([o.unit_phi(t) for t in c]),
                               np.stack([o.unit_phi_inv(t) for t in c]))


def test_green_nodes_reproduce_oracle():
    o, nodes = _oracle_nodes(6, b=1.5)
    G = build_green_nodes(nodes, o.B0, o.B1, o.unit_phi(0.0), o.unit_phi(1.0))
    c = Mesh.uniform(6).centers
    for j in range(6):
        for k in range(6):
            if j == k:
                assert np.allclose(G.minus[j].mid(), o.unit_green(c[j], c[j]))
                assert np.allclose(G.plus[j].mid(), o.unit_green(c[j], c[j] + 1e-15), atol=1e-12)
                continue
            assert np.allclose(G.block(j, k).mid(), o.unit_green(c[j], c[k]))
    D = G.dense()
    assert np.allclose(D[2, 4].mid(), o.unit_green(c[2], c[4]))
    assert np.allclose(G.bc_sum.mid(), np.eye(2))
    with pytest.raises(DomainError):
        G.block(1, 1)


def test_node_validation():
    with pytest.raises(ShapeError):
        FundamentalNodes(np.zeros((3, 2, 2)), np.zeros((3, 3, 3)))
    _, nodes = _oracle_nodes(4)
    assert nodes.inversion_residual() < 1e-14
    with pytest.raises(ShapeError):
        build_green_nodes(nodes, np.eye(3), np.eye(3))


def test_check_underflow():
    check_underflow(np.array([0.0, 1.0, 1e-300]), "ok")
    with pytest.raises(UnderflowDiagnostic) as info:
        check_underflow(np.array([1.0, 5e-324, 1e-320]), "nodes")
    assert info.value.count == 2 and info.value.smallest == 5e-324 and info.value.where == "nodes"
    with pytest.raises(UnderflowDiagnostic):
        check_underflow(np.array([np.inf]), "nodes")
    with pytest.raises(UnderflowDiagnostic):
        check_underflow(IntervalMatrix(1e-320, 2e-320), "iv")
    check_underflow(IntervalMatrix(-1e-320, 1e-320), "straddles zero")


def test_choose_weights():
    W = choose_weights([1e-10, 1e-6])
    assert W.diag.tolist() == [1.0, pytest.approx(1e-4)]
    assert choose_weights([0.0, 0.0]).is_identity
    assert choose_weights([0.0, 2.0]).diag.tolist() == [1.0, 1.0]
    with pytest.raises(DomainError):
        choose_weights([np.nan])


def test_finv_bound():
    assert finv_bound(2.0, 0.5) >= 4.0
    assert finv_bound(2.0, 0.0, rigorous=False) == 2.0
    with pytest.raises(DomainError):
        finv_bound(1.0, 1.0)


def test_exact_nodes_certify_with_small_alpha():
    o, nodes = _oracle_nodes(32)
    p = exact_test_problem(1.0)
    cert = certify_linear(p, nodes, 10)
    assert cert.certified
    assert cert.alpha.lo == 0.0 and cert.alpha.hi < 1e-10
    assert cert.Finv_norm.hi >= cert.H_norm.hi
    d = cert.to_dict()
    assert d["kind"] == "linear" and d["N"] == 32 and d["status"] == "certified"


def test_alpha_tracks_node_perturbation():
    o, nodes = _oracle_nodes(32)
    p = exact_test_problem(1.0)
    base = bound_I_minus_FH(p, nodes, None, 10).hi
    noisy = FundamentalNodes(nodes.Phi * (1 + 1e-6), nodes.Psi)
    assert bound_I_minus_FH(p, noisy, None, 10).hi > 1e-7 > base


def test_bad_nodes_fail_without_certifying():
    _, nodes = _oracle_nodes(8)
    p = exact_test_problem(1.0)
    bad = FundamentalNodes(nodes.Phi * 1.5, nodes.Psi)
    cert = certify_linear(p, bad, 10)
    assert not cert.certified and cert.Finv_norm is None and "not below 1" in cert.reason
    with pytest.raises(StateError):
        cert.require_certified()
    with pytest.raises(StateError):
        verify_inhomogeneous(cert, p, np.zeros((8, 2)))


def test_weights_options():
    p = exact_test_problem(1.0)
    _, nodes = _oracle_nodes(16)
    with pytest.raises(ConfigError):
        certify_linear(p, nodes, 8, weights="adaptive")
    with pytest.raises(ConfigError):
        certify_linear(p, nodes, 8, weights="bogus")
    with pytest.raises(ConfigError):
        certify_linear(p, nodes, 8, mode="sloppy")
    W = WeightMatrix([1.0, 0.5])
    assert certify_linear(p, nodes, 8, weights=W).weights is W


def test_worker_count_does_not_change_bounds():
    p = builtin_problem("turning-point", eps=1e-3)
    approx = solve_linear_bvp(p, Mesh.uniform(120), 12)
    a1 = bound_I_minus_FH(p, approx.fundamentals, None, 12, mesh=approx.mesh, workers=1)
    a3 = bound_I_minus_FH(p, approx.fundamentals, None, 12, mesh=approx.mesh, workers=3)
    h1 = bound_H(p, approx.fundamentals, None, 12, mesh=approx.mesh, workers=1)
    h3 = bound_H(p, approx.fundamentals, None, 12, mesh=approx.mesh, workers=3)
    assert a1.hi == a3.hi and h1.hi == h3.hi


@pytest.mark.parametrize("name,kw,N,m", [("exact-test", {"b": 1.0}, 8, 4),
                                         ("turning-point", {"eps": 1e-4}, 120, 10),
                                         ("potential-well", {"eps": 1e-5}, 200, 10)])
def test_fast_float_alpha_close_to_rigorous(name, kw, N, m):
    # truncation-dominated settings; at the roundoff floor the modes differ by design
    p = builtin_problem(name, **kw)
    approx = solve_linear_bvp(p, Mesh.uniform(N), 15)
    rig, fast = (certify_linear(p, approx.fundamentals, m, approx.mesh, "adaptive",
                                approx.v_nodes, mode=mode).alpha.hi
                 for mode in ("rigorous", "fast-float"))
    assert fast <= rig and fast >= 0.9 * rig


def test_error_bound_dominates_true_error():
    p = exact_test_problem(2.0)
    o = exact_testprob_oracle(2.0)
    approx = solve_linear_bvp(p, Mesh.uniform(20), 12)
    cert = certify_linear(p, approx.fundamentals, 12, approx.mesh)
    err = verify_inhomogeneous(cert, p, approx.v_nodes)
    true = np.array([o.unit_solution(t) for t in approx.mesh.centers])
    assert np.all(np.abs(approx.v_nodes - true).max(axis=0) <= err.components)
    # perturbing the nodes must raise the bound above the perturbation
    shifted = approx.v_nodes + 1e-6
    err2 = verify_inhomogeneous(cert, p, shifted)
    assert err2.error.hi >= 1e-6
    with pytest.raises(ShapeError):
        verify_inhomogeneous(cert, p, approx.v_nodes[:-1])


def test_solution_jump_errors_small_for_solver_output():
    p = exact_test_problem(1.0)
    approx = solve_linear_bvp(p, Mesh.uniform(16), 12)
    jumps = solution_jump_errors(p, approx.mesh, approx.v_nodes, 12)
    assert jumps.shape == (15, 2) and jumps.max() < 1e-13


def _trivial_problem(n=2):
    from greenbvp.problems import LinearBVProblem, constant_a_taylor
    return LinearBVProblem("trivial", np.eye(n), np.zeros((n, n)),
                           constant_a_taylor(np.zeros((n, n))), lambda t: np.zeros((n, n)))


def test_trivial_green_nodes_and_bounds():
    N, n = 5, 2
    I = np.broadcast_to(np.eye(n), (N, n, n))
    nodes = FundamentalNodes(I, I)
    G = build_green_nodes(nodes, np.eye(n), np.zeros((n, n)))
    for j in range(N):
        for k in range(N):
            if j != k:
                want = np.eye(n) if k < j else np.zeros((n, n))
                assert np.allclose(G.block(j, k).mid(), want, rtol=0, atol=1e-15)
    assert np.allclose(G.minus.mid(), I, rtol=0, atol=1e-15)
    assert np.allclose(G.plus.mid(), 0.0, rtol=0, atol=1e-15)
    p = _trivial_problem(n)
    assert bound_I_minus_FH(p, nodes, None, 4).hi <= 1e-14  # outward rounding only
    H = bound_H(p, nodes, None, 4).hi
    assert 2.0 <= H <= 2.0 * (1 + 1e-12)


def test_trivial_problem_solution_error_is_zero():
    p = _trivial_problem(1).with_rhs(w=[0.75])
    approx = solve_linear_bvp(p, Mesh.uniform(6), 4)
    assert np.all(approx.v_nodes == 0.75)
    cert = certify_linear(p, approx.fundamentals, 4, approx.mesh)
    assert cert.certified
    assert verify_inhomogeneous(cert, p, approx.v_nodes).error.hi <= 1e-15


def test_weight_and_finv_formulas():
    assert finv_bound(1.0, 0.0, rigorous=False) == 1.0
    assert 1.0 <= finv_bound(1.0, 0.0) <= 1.0 + 1e-15
    assert choose_weights([1.0, 10.0]).diag.tolist() == [1.0, pytest.approx(0.1, rel=1e-15)]
    assert choose_weights([3.0, 3.0]).is_identity


def test_h_bound_grows_with_green_entries():
    _, nodes = _oracle_nodes(16)
    p = exact_test_problem(1.0)
    base = bound_H(p, nodes, None, 8).hi
    Phi = np.array(nodes.Phi)
    Phi[5] *= 2.0
    grown = bound_H(p, FundamentalNodes(Phi, nodes.Psi), None, 8).hi
    assert grown >= base


def test_diagonal_jump_is_identity_for_solver_nodes():
    p = exact_test_problem(1.0)
    approx = solve_linear_bvp(p, Mesh.uniform(20), 12)
    o = exact_testprob_oracle(1.0)
    G = build_green_nodes(approx.fundamentals, p.B0, p.B1, o.unit_phi(0.0), o.unit_phi(1.0))
    jump = G.minus.mid() - G.plus.mid()
    assert np.allclose(jump, np.eye(2), atol=1e-12)


def test_adaptive_weights_reduce_alpha():
    p = builtin_problem("turning-point", eps=1e-5)
    approx = solve_linear_bvp(p, Mesh.uniform(250), 15)
    plain = certify_linear(p, approx.fundamentals, 15, approx.mesh, "identity")
    adapt = certify_linear(p, approx.fundamentals, 15, approx.mesh, "adaptive", approx.v_nodes)
    assert adapt.alpha.hi < plain.alpha.hi
    assert not adapt.weights.is_identity


@pytest.mark.parametrize("m", [4, 6])
def test_residual_terms_shrink_by_two_to_the_m(m):
    p = exact_test_problem(1.0)
    totals = []
    for N in (8, 16):
        _, nodes = _oracle_nodes(N)
        t = certify_linear(p, nodes, m).terms
        totals.append(sum(float(t[k]) for k in ("phi_residual", "green_residual", "diag_residual")))
    assert totals[0] / totals[1] >= 2 ** m


def test_alpha_decreases_under_refinement_while_truncation_dominates():
    p = builtin_problem("turning-point", eps=1e-2)
    alphas = []
    for N in (16, 32, 64):
        approx = solve_linear_bvp(p, Mesh.uniform(N), 4)
        alphas.append(certify_linear(p, approx.fundamentals, 4, approx.mesh).alpha.hi)
    assert alphas[0] > alphas[1] > alphas[2]

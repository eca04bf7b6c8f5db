import numpy as np
import pytest
from scipy.integrate import solve_bvp

from greenbvp.benchmarks import (REFERENCE_TABLE1, Table1Row, airy_solution, format_table1, run_row,
                                 run_table1)


def test_reference_rows():
    assert len(REFERENCE_TABLE1) == 5
    assert [(r.problem, r.eps, r.N) for r in REFERENCE_TABLE1] == [
        ("turning-point", 1e-4, 230), ("turning-point", 1e-5, 250), ("turning-point", 1e-6, 600),
        ("potential-well", 1e-5, 350), ("potential-well", 1e-6, 600)]


@pytest.mark.parametrize("eps", [1e-2, 1e-4, 1e-6])
def test_airy_solution_satisfies_problem(eps):
    ends = airy_solution(eps, [0.0, 1.0])
    assert np.allclose(ends[:, 0], 1.0, atol=1e-12)
    t = np.array([0.3, 0.5, 0.55, 0.9])
    h = 1e-5 * eps ** (1 / 3)
    v, vp, vm = (airy_solution(eps, t + d)[:, 0] for d in (0.0, h, -h))
    second = (vp - 2 * v + vm) / h ** 2
    assert np.allclose(eps * second, (t - 0.5) * v, atol=1e-4 * max(1.0, np.abs(v).max()))
    d = airy_solution(eps, t)[:, 1]
    assert np.allclose(d, (vp - vm) / (2 * h), rtol=1e-5, atol=1e-8)


def test_airy_solution_against_collocation():
    eps = 1e-3
    x = np.linspace(0, 1, 400)
    res = solve_bvp(lambda t, y: np.vstack([y[1], (t - 0.5) * y[0] / eps]),
                    lambda a, b: np.array([a[0] - 1, b[0] - 1]), x,
                    np.ones((2, x.size)), tol=1e-10, max_nodes=100000)
    t = np.linspace(0.05, 0.95, 7)
    assert np.allclose(airy_solution(eps, t)[:, 0], res.sol(t)[0], atol=1e-7)


def test_run_row_certifies_first_row():
    out = run_row(REFERENCE_TABLE1[0])
    assert out["status"] == "certified"
    assert out["alpha"] < 1e-6 and out["error_bound"] < 1e-8
    assert out["input_error"] < 1e-10
    assert out["reference"]["alpha"] == 5.2e-9


def test_run_row_records_underflow():
    out = run_row(Table1Row("turning-point", 1e-7, 600, 0.0, 0.0, 0.0))
    assert out["status"] == "failed" and out["reason"].startswith("underflow")
    assert "error_bound" not in out


def test_run_row_records_errors():
    out = run_row(Table1Row("heat", 1e-3, 10, 0.0, 0.0, 0.0))
    assert out["status"] == "error"


def test_format_table():
    rows = run_table1(rows=[0])
    text = format_table1(rows)
    assert "turning-point" in text and "certified" in text
    assert "3.10e-10" in text

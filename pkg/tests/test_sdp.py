import io

import numpy as np
import pytest

from star_isac import sdp
from star_isac.errors import InvalidInput
from star_isac.sdp import ConicProblem, ConicSolution, check_solution, solve

from sdp_cases import CLOSED_FORM, complex_min_eig, max_eig_random, min_eig_diag, two_blocks

TOL = 1e-7


@pytest.mark.parametrize("case", CLOSED_FORM, ids=lambda f: f.__name__)
def test_closed_form_optimum(case):
    _, p, ref = case()
    s = solve(p, tol=TOL)
    assert s.status == sdp.OPTIMAL
    assert abs(s.objective_value - ref) <= 1e-6 * max(1.0, abs(ref))
    rep = check_solution(p, s)
    scale = 1 + max(abs(c.rhs) for c in p.constraints)
    assert rep.max_violation <= TOL * scale * 10
    assert all(m >= -1e-7 for m in rep.psd_margins)


def test_min_eig_argmax():
    _, p, _ = min_eig_diag()
    s = solve(p, tol=TOL)
    np.testing.assert_allclose(s.block_values[0], np.diag([1.0, 0.0]), atol=1e-6)


def test_solution_invariants_hold():
    _, p, _ = max_eig_random()
    s = solve(p, tol=TOL)
    rep = check_solution(p, s)
    assert s.duality_gap <= TOL * (1 + abs(s.objective_value)) * 10
    assert rep.max_violation <= s.max_residual + 1e-12
    assert rep.dual_sign_violation <= 1e-8
    assert min(rep.dual_psd_margins) >= -1e-6
    assert abs(rep.gap) <= 1e-6 * (1 + abs(rep.primal_objective))


def test_infeasible_status():
    p = ConicProblem([2], 0, objective_blocks={0: np.eye(2)})
    p.add({0: np.eye(2)}, {}, -1.0, "==")
    assert solve(p).status == sdp.INFEASIBLE


def test_infeasible_with_scalar():
    p = ConicProblem([1], 1, objective_scalars={0: 1.0})
    p.add({}, {0: 1.0}, 1.0, ">=")
    p.add({}, {0: 1.0}, 0.0, "<=")
    assert solve(p).status == sdp.INFEASIBLE


def test_unbounded_status():
    p = ConicProblem([2], 0, objective_blocks={0: np.eye(2)})
    p.add({0: np.diag([1.0, 0.0])}, {}, 1.0, "<=")
    assert solve(p).status == sdp.UNBOUNDED


def test_iteration_cap_reports_failure():
    _, p, _ = max_eig_random()
    s = solve(p, tol=1e-12, max_iters=2)
    assert s.status == sdp.NUMERICAL_FAILURE
    assert s.message


def test_deterministic():
    _, p, _ = two_blocks()
    a, b = solve(p), solve(p)
    assert a.objective_value == b.objective_value
    assert all(np.array_equal(x, y) for x, y in zip(a.block_values, b.block_values))


def test_check_solution_exact_hand_solution():
    _, p, _ = min_eig_diag()
    hand = ConicSolution([np.diag([1.0, 0.0]).astype(complex)], np.zeros(0), -1.0, sdp.OPTIMAL, 0.0, 0.0,
                         duals=np.array([-1.0]))
    rep = check_solution(p, hand)
    assert rep.max_violation <= 1e-12
    assert abs(rep.gap) <= 1e-12
    assert min(rep.psd_margins) >= -1e-12


def test_check_solution_detects_perturbation():
    _, p, _ = min_eig_diag()
    s = solve(p, tol=TOL)
    s.block_values[0] = s.block_values[0] + 0.1 * np.eye(2)
    assert check_solution(p, s).violations[0] == pytest.approx(0.2, abs=1e-6)


def test_validate_rejects_malformed():
    p = ConicProblem([2], 0)
    p.add({0: np.array([[1, 2], [0, 1]])}, {}, 1.0, "==")
    with pytest.raises(InvalidInput):
        p.validate()
    q = ConicProblem([2], 0)
    q.add({0: np.eye(3)}, {}, 1.0, "==")
    with pytest.raises(InvalidInput):
        q.validate()
    r = ConicProblem([2], 0)
    r.add({0: np.eye(2)}, {}, np.inf, "==")
    with pytest.raises(InvalidInput):
        r.validate()
    t = ConicProblem([2], 0)
    t.add({0: np.eye(2)}, {}, 1.0, "~")
    with pytest.raises(InvalidInput):
        t.validate()


def test_real_embedding_same_optimum():
    _, p, ref = complex_min_eig()
    a = solve(p, tol=TOL)
    b = solve(sdp.real_embedding(p), tol=TOL)
    assert abs(a.objective_value - b.objective_value) <= 10 * TOL * (1 + abs(ref))


def test_embedding_round_trip(rng):
    z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    h = z + z.conj().T
    np.testing.assert_allclose(sdp.unembed_hermitian(sdp.embed_hermitian(h)), h, atol=1e-15)


def test_dump_load_round_trip():
    _, p, _ = max_eig_random()
    buf = io.StringIO()
    sdp.dump_problem(p, buf)
    buf.seek(0)
    q = sdp.load_problem(buf)
    assert q.block_dims == p.block_dims and q.free_scalars == p.free_scalars
    for a, b in zip(p.constraints, q.constraints):
        assert a.sense == b.sense and a.rhs == b.rhs
        for blk in a.blocks:
            np.testing.assert_array_equal(np.asarray(a.blocks[blk], complex), b.blocks[blk])
    assert solve(p).objective_value == solve(q).objective_value


def test_load_rejects_garbage():
    with pytest.raises(InvalidInput):
        sdp.load_problem(io.StringIO("hello\n"))


def _random_feasible_problem(seed, n=4, m=5):
    rng = np.random.default_rng(seed)
    herm = lambda: (lambda z: 0.5 * (z + z.conj().T))(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    x0 = np.eye(n)
    p = ConicProblem([n], 1, objective_blocks={0: herm()}, objective_scalars={0: 1.0})
    for _ in range(m):
        a = herm()
        p.add({0: a}, {}, float(np.trace(a @ x0).real) + 1.0, "<=")
    p.add({0: np.eye(n)}, {0: 1.0}, float(n), "==")
    p.add({0: np.eye(n)}, {}, 2.0 * n, "<=")
    return p


def test_cvxpy_oracle():
    cp = pytest.importorskip("cvxpy")
    for seed in range(3):
        p = _random_feasible_problem(seed)
        n = p.block_dims[0]
        x = cp.Variable((n, n), hermitian=True)
        t = cp.Variable()
        expr = lambda c, blk=x: cp.real(cp.trace(c @ blk))
        cons = [x >> 0]
        for con in p.constraints:
            lhs = expr(con.blocks[0]) + sum(v * t for v in con.scalars.values())
            cons.append(lhs <= con.rhs if con.sense == "<=" else lhs == con.rhs)
        prob = cp.Problem(cp.Maximize(expr(p.objective_blocks[0]) + t), cons)
        prob.solve(solver=cp.CVXOPT)
        assert prob.status == cp.OPTIMAL
        ours = solve(p, tol=1e-8)
        assert ours.status == sdp.OPTIMAL
        assert abs(ours.objective_value - prob.value) <= 1e-6 * (1 + abs(prob.value))

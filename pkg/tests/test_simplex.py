import numpy as np
import pytest

from fnets.errors import SolverError
from fnets.simplex import solve_l1_box, solve_l1_general, solve_lp
from oracles import dantzig_column_oracle, min_l1_over_polytope


class TestSolveLp:
    def test_textbook_instance(self):
        # min -3x - 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6)
        c = np.array([-3.0, -5.0])
        a = np.array([[1.0, 0.0], [0.0, 2.0], [3.0, 2.0]])
        b = np.array([4.0, 12.0, 18.0])
        x = solve_lp(c, a, b)
        assert np.allclose(x, [2.0, 6.0], atol=1e-9)

    def test_negative_rhs_needs_phase_one(self):
        # min x + y s.t. -x <= -2, -y <= -3 -> (2, 3)
        c = np.array([1.0, 1.0])
        a = np.array([[-1.0, 0.0], [0.0, -1.0]])
        b = np.array([-2.0, -3.0])
        assert np.allclose(solve_lp(c, a, b), [2.0, 3.0], atol=1e-9)

    def test_infeasible_detected(self):
        # x <= 1 and -x <= -2 cannot both hold.
        with pytest.raises(SolverError):
            solve_lp(np.array([1.0]), np.array([[1.0], [-1.0]]), np.array([1.0, -2.0]))

    def test_unbounded_detected(self):
        with pytest.raises(SolverError):
            solve_lp(np.array([-1.0]), np.array([[-1.0]]), np.array([0.0]))

    def test_degenerate_instance_terminates(self):
        # Many redundant constraints through the origin.
        c = np.array([-1.0, -1.0])
        a = np.array([[1.0, 1.0], [2.0, 2.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
        b = np.array([1.0, 2.0, 1.0, 1.0, 1.0])
        x = solve_lp(c, a, b)
        assert x.sum() == pytest.approx(1.0, abs=1e-9)

    def test_random_against_enumeration(self, rng):
        for _ in range(60):
            n = int(rng.integers(1, 4))
            m = int(rng.integers(1, 5))
            a = rng.standard_normal((m, n))
            b = rng.standard_normal(m) + 1.0
            c = rng.standard_normal(n) ** 2 + 0.1  # positive costs keep it bounded
            # Enumerate over x >= 0 explicitly to get the oracle optimum.
            f_mat = np.vstack([a, -np.eye(n)])
            h = np.concatenate([b, np.zeros(n)])
            feasible = np.all(b >= -1e-12)
            try:
                x = solve_lp(c, a, b)
            except SolverError:
                assert not feasible
                continue
            val, _ = _lp_oracle(c, f_mat, h, n)
            assert c @ x == pytest.approx(val, abs=1e-7)


def _lp_oracle(c, f_mat, h, n):
    """Enumerate active sets for min c@x over f_mat x <= h (last n rows are x >= 0)."""
    import itertools

    rows = f_mat.shape[0]
    best, best_x = np.inf, None
    for active in itertools.combinations(range(rows), n):
        mat = f_mat[list(active)]
        if abs(np.linalg.det(mat)) < 1e-10:
            continue
        x = np.linalg.solve(mat, h[list(active)])
        if np.all(f_mat @ x <= h + 1e-9):
            val = float(c @ x)
            if val < best:
                best, best_x = val, x
    return best, best_x


class TestL1Solvers:
    def test_box_matches_oracle(self, rng):
        for _ in range(60):
            d = int(rng.integers(1, 4))
            a = rng.standard_normal((d, d))
            gram = a @ a.T + 0.3 * np.eye(d)
            target = rng.standard_normal(d)
            lam = float(rng.uniform(0.05, 0.6))
            got = solve_l1_box(gram, target, np.full(d, lam))
            val, _ = dantzig_column_oracle(gram, target, lam)
            assert np.abs(got).sum() == pytest.approx(val, abs=1e-7)
            assert np.max(np.abs(gram @ got - target)) <= lam + 1e-8

    def test_general_matches_oracle(self, rng):
        for _ in range(40):
            d = int(rng.integers(1, 4))
            rows = int(rng.integers(d, 2 * d + 2))
            f_mat = rng.standard_normal((rows, d))
            interior = rng.standard_normal(d)
            h = f_mat @ interior + rng.uniform(0.1, 1.0, rows)
            got = solve_l1_general(f_mat, h)
            val, _ = min_l1_over_polytope(f_mat, h)
            assert np.abs(got).sum() == pytest.approx(val, abs=1e-7)
            assert np.all(f_mat @ got <= h + 1e-8)

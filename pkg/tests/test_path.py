import numpy as np
import pytest

from pathsig import (
    ContractError,
    ParameterError,
    SingularityError,
    kkt_violation,
    lars_lasso_path,
    make_design,
    orthogonal_knots,
    path_until_entering,
    restricted_lasso_fit,
    simulate_response,
    ResponseSpec,
)

KKT_TOL = 1e-8


def _random_problem(seed, family="iid_gaussian", n=60, p=12, signal=0, **params):
    X = make_design(family, n, p, seed=seed, **params)
    beta = np.zeros(p)
    if signal:
        beta[:signal] = 4.0
    y = simulate_response(X, ResponseSpec(beta=beta, sigma=1.0, seed=seed + 10000))
    return X, y


def _assert_kkt_all_knots(X, y, path, tol=KKT_TOL):
    for knot in path.knots:
        eq, ineq = kkt_violation(X, y, knot.coef, knot.lam, knot.active_after)
        assert eq <= tol and ineq <= tol, (knot.lam, eq, ineq)
        support = set(np.nonzero(knot.coef)[0])
        assert support.issubset(set(knot.active_after))


class TestOrthogonalReduction:
    def test_knots_are_order_statistics(self):
        X = make_design("orthogonal", 50, 8, seed=4)
        y = np.random.default_rng(5).standard_normal(50)
        V = orthogonal_knots(X, y)
        path = lars_lasso_path(X, y, 8)
        assert np.max(np.abs(path.lambdas - V[: path.n_events])) < 1e-8
        # event order follows the descending sort of |X'y|
        order = list(np.argsort(-np.abs(X.values.T @ y)))
        entered = [k.index for k in path.knots]
        assert entered == order[: len(entered)]

    def test_sorted_absolute_values(self):
        X = np.eye(3)
        y = np.array([-3.0, 5.0, 1.0])
        assert np.array_equal(orthogonal_knots(X, y), np.array([5.0, 3.0, 1.0]))

    def test_agreement_on_50_random_instances(self):
        for seed in range(50):
            X = make_design("orthogonal", 40, 10, seed=seed)
            y = np.random.default_rng(seed + 999).standard_normal(40)
            V = orthogonal_knots(X, y)
            path = lars_lasso_path(X, y, 10)
            assert np.max(np.abs(path.lambdas - V[: path.n_events])) < 1e-8
            assert all(k.event == "enter" for k in path.knots)

    def test_zero_response(self):
        X = make_design("orthogonal", 20, 5, seed=0)
        assert np.array_equal(orthogonal_knots(X, np.zeros(20)), np.zeros(5))
        path = lars_lasso_path(X, np.zeros(20), 5)
        assert path.n_events == 0 and path.exhausted

    def test_contract_violation_on_non_orthogonal(self):
        X = make_design("equal_corr", 50, 5, rho=0.8, seed=1)
        with pytest.raises(ContractError):
            orthogonal_knots(X, np.zeros(50))
        with pytest.raises(ContractError):
            orthogonal_knots(X.values, np.zeros(50))


class TestHandExamples:
    def test_two_variable_soft_threshold_path(self):
        X = np.eye(2)
        y = np.array([4.0, 1.0])
        path = path_until_entering(X, y, 2)
        assert np.allclose(path.lambdas, [4.0, 1.0], atol=1e-12)
        assert np.allclose(path.coef_at(1.0), [3.0, 0.0], atol=1e-12)
        assert np.allclose(path.coef_at(2.5), [1.5, 0.0], atol=1e-12)

    def test_first_knot_is_max_abs_correlation(self):
        X, y = _random_problem(7)
        path = lars_lasso_path(X, y, 5)
        assert path.knots[0].lam == pytest.approx(
            float(np.max(np.abs(X.values.T @ y))), abs=1e-10
        )

    def test_max_steps_validation(self):
        X, y = _random_problem(3)
        with pytest.raises(ParameterError):
            lars_lasso_path(X, y, 0)
        with pytest.raises(ParameterError):
            lars_lasso_path(X, y, 13)  # > min(n-1, p) = 12

    def test_unit_norm_required(self):
        X = 2.0 * np.eye(4)
        with pytest.raises(ParameterError):
            lars_lasso_path(X, np.ones(4), 2)


class TestKKTCertification:
    def test_100_random_problems(self):
        # acceptance gate material: KKT on every knot of 100 random problems
        rng = np.random.default_rng(42)
        for trial in range(100):
            family = ["iid_gaussian", "equal_corr", "ar1"][trial % 3]
            params = {} if family == "iid_gaussian" else {"rho": 0.7}
            signal = int(rng.integers(0, 3))
            X, y = _random_problem(5000 + trial, family=family, signal=signal, **params)
            path = lars_lasso_path(X, y, 11)
            assert path.n_events > 0
            _assert_kkt_all_knots(X, y, path)

    def test_piecewise_linearity_midpoints(self):
        for seed in range(20):
            X, y = _random_problem(seed, family="ar1", rho=0.6)
            path = path_until_entering(X, y, 6)
            for a, b in zip(path.knots[:-1], path.knots[1:]):
                mid = 0.5 * (a.lam + b.lam)
                coef = path.coef_at(mid)
                active = [j for j in range(X.p) if coef[j] != 0.0] or b.active_before
                eq, ineq = kkt_violation(X, y, coef, mid, active)
                assert eq <= 1e-6 and ineq <= 1e-6

    def test_permutation_equivariance(self):
        X, y = _random_problem(31, signal=2)
        perm = np.random.default_rng(8).permutation(X.p)
        path_a = lars_lasso_path(X, y, 8)
        path_b = lars_lasso_path(X.values[:, perm], y, 8)
        assert np.max(np.abs(path_a.lambdas - path_b.lambdas)) < 1e-10
        for ka, kb in zip(path_a.knots, path_b.knots):
            assert perm[kb.index] == ka.index
            assert ka.event == kb.event


class TestDeletions:
    @staticmethod
    def _deletion_instance():
        # correlated design scanned offline for a deletion event; frozen seed
        for seed in range(400):
            X = make_design("equal_corr", 40, 8, rho=0.9, seed=seed)
            beta = np.zeros(8)
            beta[:3] = [3.0, -2.0, 1.5]
            y = simulate_response(X, ResponseSpec(beta=beta, sigma=1.0, seed=seed + 1))
            path = path_until_entering(X, y, 8)
            if any(k.event == "leave" for k in path.knots):
                return X, y, path
        raise RuntimeError("no deletion instance found")

    def test_deletion_path_satisfies_kkt(self):
        X, y, path = self._deletion_instance()
        _assert_kkt_all_knots(X, y, path)
        leaves = [k for k in path.knots if k.event == "leave"]
        assert leaves
        # leaving variable was active before the event, inactive after
        for knot in leaves:
            assert knot.index in knot.active_before
            assert knot.index not in knot.active_after

    def test_lambdas_nonincreasing_with_deletions(self):
        X, y, path = self._deletion_instance()
        assert np.all(np.diff(path.lambdas) <= 1e-12)

    def test_entering_counter_vs_event_counter(self):
        X, y, path = self._deletion_instance()
        assert path.n_entering < path.n_events


class TestRestrictedFit:
    def test_empty_set(self):
        X, y = _random_problem(2)
        assert np.array_equal(restricted_lasso_fit(X, y, [], 1.0), np.zeros(X.p))

    def test_single_variable_soft_threshold(self):
        X, y = _random_problem(12)
        j = 4
        c = float(X.values[:, j] @ y)
        for lam in (0.0, 0.3 * abs(c), 0.9 * abs(c), 2 * abs(c)):
            beta = restricted_lasso_fit(X, y, [j], lam)
            expected = np.sign(c) * max(abs(c) - lam, 0.0)
            assert beta[j] == pytest.approx(expected, abs=1e-10)
            assert np.all(beta[np.arange(X.p) != j] == 0.0)

    def test_lambda_zero_is_ols(self):
        X, y = _random_problem(19, family="ar1", rho=0.5)
        A = [1, 3, 4, 9]
        beta = restricted_lasso_fit(X, y, A, 0.0)
        XA = X.values[:, A]
        ols = np.linalg.solve(XA.T @ XA, XA.T @ y)
        assert np.max(np.abs(beta[A] - ols)) < 1e-8

    def test_out_of_range_index(self):
        X, y = _random_problem(2)
        with pytest.raises(ParameterError):
            restricted_lasso_fit(X, y, [99], 1.0)

    def test_rank_deficient_submatrix(self):
        Xv = np.random.default_rng(3).standard_normal((30, 4))
        Xv[:, 3] = Xv[:, 0]
        Xv /= np.linalg.norm(Xv, axis=0)
        y = Xv[:, 0] * 2 + np.random.default_rng(4).standard_normal(30) * 0.1
        with pytest.raises(SingularityError):
            restricted_lasso_fit(Xv, y, [0, 3], 0.0)


class TestAgainstCoordinateDescent:
    def test_solution_matches_sklearn_lasso(self):
        # independent oracle: coordinate-descent lasso at a mid-path lambda
        from sklearn.linear_model import Lasso

        X, y = _random_problem(77, family="equal_corr", rho=0.6, signal=2)
        path = path_until_entering(X, y, 6)
        lam = 0.5 * (path.knots[3].lam + path.knots[4].lam)
        mine = path.coef_at(lam)
        sk = Lasso(alpha=lam / X.n, fit_intercept=False, tol=1e-14, max_iter=200000)
        sk.fit(X.values, y)
        assert np.max(np.abs(mine - sk.coef_)) < 1e-6


class TestTruncationContract:
    def test_coef_below_truncated_path_raises(self):
        X, y = _random_problem(21)
        path = lars_lasso_path(X, y, 2)
        assert not path.exhausted
        with pytest.raises(ParameterError):
            path.coef_at(path.knots[-1].lam / 2)

    def test_next_lambda_of_final_truncated_knot_raises(self):
        X, y = _random_problem(21)
        path = lars_lasso_path(X, y, 2)
        with pytest.raises(ParameterError):
            path.next_lambda(2)

    def test_exhausted_path_extends_to_zero(self):
        X, y = _random_problem(23, p=6)
        # ask for more entering events than p: the engine runs to exhaustion
        path = path_until_entering(X, y, 7)
        assert path.exhausted
        coef0 = path.coef_at(0.0)
        A = np.nonzero(coef0)[0]
        XA = X.values[:, A]
        ols = np.linalg.solve(XA.T @ XA, XA.T @ y)
        assert np.max(np.abs(coef0[A] - ols)) < 1e-8

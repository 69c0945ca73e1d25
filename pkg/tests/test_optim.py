import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppa import (
    DescentOptions,
    complement_basis,
    cost,
    cost_gradient,
    data,
    derivative_operator,
    optimize_leading,
    pca_split,
)


def _centered_parabola(kappa=2.5, sigma=0.15, n=1000, seed=4):
    X = data.gen_parabola2d(kappa, sigma, n, seed=seed)
    return X - X.mean(axis=1, keepdims=True)


class TestDerivativeOperator:
    @pytest.mark.parametrize("alpha", [0.0, 1.0, -2.0])
    @pytest.mark.parametrize("degree", [1, 2, 4, 6])
    def test_maps_powers_to_derivatives(self, alpha, degree):
        D = derivative_operator(degree)
        v = np.array([alpha**j for j in range(degree + 1)])
        vdot = np.array(
            [0.0] + [j * alpha ** (j - 1) for j in range(1, degree + 1)]
        )
        assert np.abs(D @ v - vdot).max() < 1e-12

    @given(st.floats(-3, 3), st.integers(1, 6))
    @settings(max_examples=40, deadline=None)
    def test_property_random_alpha(self, alpha, degree):
        D = derivative_operator(degree)
        v = np.array([alpha**j for j in range(degree + 1)])
        vdot = np.array([0.0] + [j * alpha ** (j - 1) for j in range(1, degree + 1)])
        assert np.allclose(D @ v, vdot, atol=1e-9)


class TestComplementBasis:
    def test_axis_case(self):
        E = complement_basis(np.array([1.0, 0.0, 0.0]))
        assert np.abs(np.abs(E) - np.eye(3)[1:]).max() < 1e-12

    def test_diagonal_2d(self):
        e = np.array([1.0, 1.0]) / np.sqrt(2)
        E = complement_basis(e)
        assert E.shape == (1, 2)
        assert abs(E @ e) < 1e-12
        assert abs(np.linalg.norm(E[0]) - 1.0) < 1e-12

    def test_random_7d_constraints(self):
        rng = np.random.default_rng(0)
        e = rng.standard_normal(7)
        e /= np.linalg.norm(e)
        E = complement_basis(e)
        assert np.abs(E @ e).max() < 1e-12
        assert np.abs(E @ E.T - np.eye(6)).max() < 1e-12

    def test_zero_vector(self):
        with pytest.raises(ValueError):
            complement_basis(np.zeros(3))


class TestCost:
    def test_linear_manifold_zero(self):
        t = np.linspace(-2, 2, 100)
        X = np.vstack([t, 0.5 * t, -t])
        X -= X.mean(axis=1, keepdims=True)
        direction = np.array([1.0, 0.5, -1.0])
        direction /= np.linalg.norm(direction)
        assert cost(direction, X, 2) < 1e-20

    def test_pc2_beats_pc1_on_steep_parabola(self):
        X = _centered_parabola()
        lead, comp = pca_split(X)
        assert cost(comp[0], X, 2) < cost(lead, X, 2)

    def test_sign_flip_invariance(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((3, 200))
        X[1] += X[0] ** 2
        X -= X.mean(axis=1, keepdims=True)
        e = rng.standard_normal(3)
        e /= np.linalg.norm(e)
        assert abs(cost(e, X, 3) - cost(-e, X, 3)) < 1e-12


class TestCostGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        worst = 0.0
        for _ in range(100):
            d = int(rng.integers(2, 5))
            X = rng.standard_normal((d, 150)) * rng.uniform(0.5, 2, size=(d, 1))
            X[min(1, d - 1)] += 0.5 * X[0] ** 2
            X -= X.mean(axis=1, keepdims=True)
            gamma = int(rng.integers(1, 5))
            e = rng.standard_normal(d)
            e /= np.linalg.norm(e)
            grad = cost_gradient(e, X, gamma)
            h = 1e-5
            fd = np.zeros(d)
            for j in range(d):
                ep, em = e.copy(), e.copy()
                ep[j] += h
                em[j] -= h
                fd[j] = (cost(ep, X, gamma) - cost(em, X, gamma)) / (2 * h)
            rel = np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-12)
            worst = max(worst, rel)
        assert worst < 1e-4

    def test_zero_on_linear_global_minimum(self):
        t = np.linspace(-2, 2, 200)
        X = np.vstack([t, 0.25 * t])
        X -= X.mean(axis=1, keepdims=True)
        e = np.array([1.0, 0.25])
        e /= np.linalg.norm(e)
        assert np.linalg.norm(cost_gradient(e, X, 2)) < 1e-10

    def test_stationary_at_descent_output(self):
        X = _centered_parabola(kappa=1.0, sigma=0.1, n=500, seed=6)
        res = optimize_leading(X, 2, options=DescentOptions(grad_tol=1e-8))
        grad = cost_gradient(res.leading, X, 2)
        tangential = grad - (res.leading @ grad) * res.leading
        assert np.linalg.norm(tangential) < 1e-6


class TestOptimizeLeading:
    def test_never_worse_than_init(self):
        X = _centered_parabola()
        init, _ = pca_split(X)
        res = optimize_leading(X, 2, init=init)
        assert res.cost <= cost(init, X, 2) + 1e-12

    def test_fixed_point_on_linear_data(self):
        t = np.linspace(-1, 1, 300)
        X = np.vstack([t, 2 * t])
        X -= X.mean(axis=1, keepdims=True)
        init = np.array([1.0, 2.0]) / np.sqrt(5)
        res = optimize_leading(X, 3, init=init)
        assert np.abs(res.leading - init).max() < 1e-9
        assert res.converged

    def test_unit_norm_output(self):
        X = _centered_parabola(seed=9)
        res = optimize_leading(X, 2)
        assert abs(np.linalg.norm(res.leading) - 1.0) < 1e-12

    def test_monotone_accepted_costs(self):
        # re-run the line-search loop by hand and check monotonicity
        X = _centered_parabola(seed=10)
        opts = DescentOptions(max_iters=40)
        init, _ = pca_split(X)
        costs = [cost(init, X, 2)]
        e = init
        for _ in range(opts.max_iters):
            grad = cost_gradient(e, X, 2)
            tangent = grad - (e @ grad) * e
            gnorm = np.linalg.norm(tangent)
            if gnorm < opts.grad_tol:
                break
            step, accepted = opts.initial_step, False
            while step >= 1e-14:
                cand = e - step * tangent
                cand /= np.linalg.norm(cand)
                fc = cost(cand, X, 2)
                if fc <= costs[-1] - 1e-4 * step * gnorm**2:
                    e, accepted = cand, True
                    costs.append(fc)
                    break
                step *= opts.backtrack
            if not accepted:
                break
        assert all(b <= a for a, b in zip(costs, costs[1:]))

    def test_restarts_deterministic(self):
        X = _centered_parabola(seed=11)
        opts = DescentOptions(restarts=3, seed=5)
        a = optimize_leading(X, 2, options=opts)
        b = optimize_leading(X, 2, options=opts)
        assert np.array_equal(a.leading, b.leading)
        assert a.cost == b.cost

    def test_orientation_sweep_nonconvex(self):
        # 36 orientations of the candidate vector over the half circle: the
        # profile shows several basins and the PCA direction is not optimal
        X = _centered_parabola()
        lead, comp = pca_split(X)
        phis = np.linspace(0, np.pi, 36, endpoint=False)
        fs = np.array(
            [cost(np.cos(p) * comp[0] + np.sin(p) * lead, X, 2) for p in phis]
        )
        minima = [
            i for i in range(36) if fs[i] < fs[i - 1] and fs[i] < fs[(i + 1) % 36]
        ]
        assert len(minima) >= 2
        assert fs.min() < cost(lead, X, 2)


class TestDescentOptions:
    def test_validation(self):
        with pytest.raises(ValueError):
            DescentOptions(max_iters=0)
        with pytest.raises(ValueError):
            DescentOptions(backtrack=1.5)
        with pytest.raises(ValueError):
            DescentOptions(grad_tol=0.5, initial_step=0.1)

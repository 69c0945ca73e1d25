import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppa import (
    FitConfig,
    UndefinedFrameError,
    alpha_span,
    curvature_profile,
    fit,
    forward,
    frenet_frame,
    full_jacobian,
    helix_reference_curvatures,
    metric_tensor,
    principal_curve,
    principal_grid,
    squared_distance,
    step_jacobian,
    transform,
    whitened_variances,
)


def _fd_forward_jacobian(model, x, h=1e-6):
    d = x.shape[0]
    J = np.zeros((d, d))
    for j in range(d):
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        J[:, j] = (forward(model, xp) - forward(model, xm)) / (2 * h)
    return J


class TestStepJacobian:
    def test_gamma1_block_is_orthonormal(self, gauss5_pca_model):
        step = gauss5_pca_model.steps[0]
        block = step_jacobian(step, np.ones(5))
        assert np.abs(block @ block.T - np.eye(5)).max() < 1e-10

    def test_unit_determinant_any_point(self, helix_model):
        rng = np.random.default_rng(0)
        for step in helix_model.steps:
            for _ in range(5):
                x = rng.standard_normal(step.in_dim) * 3
                det = np.linalg.det(step_jacobian(step, x))
                assert abs(abs(det) - 1.0) < 1e-10

    def test_matches_fd_of_stage_map(self, helix_model):
        from ppa.model import vandermonde

        step = helix_model.steps[0]

        def stage(x):
            a = step.leading @ x
            resid = step.complement @ x - step.coeffs @ vandermonde([a], step.degree)[:, 0]
            return np.concatenate([[a], resid])

        rng = np.random.default_rng(1)
        for _ in range(20):
            x = rng.standard_normal(3) * 2
            h = 1e-6 * max(1.0, np.abs(x).max())
            J = step_jacobian(step, x)
            Jfd = np.zeros((3, 3))
            for j in range(3):
                xp, xm = x.copy(), x.copy()
                xp[j] += h
                xm[j] -= h
                Jfd[:, j] = (stage(xp) - stage(xm)) / (2 * h)
            assert np.linalg.norm(J - Jfd) / np.linalg.norm(Jfd) < 1e-5

    def test_dimension_mismatch(self, helix_model):
        with pytest.raises(ValueError):
            step_jacobian(helix_model.steps[0], np.zeros(2))


class TestFullJacobian:
    def test_gamma1_orthonormal(self, gauss5_pca_model):
        J = full_jacobian(gauss5_pca_model, np.zeros(5))
        assert np.abs(J @ J.T - np.eye(5)).max() < 1e-10

    def test_volume_preserved_at_random_points(
        self, helix_model, helix_data, tabular10_model, tabular10_data
    ):
        # random points near the data support; far outside it the determinant
        # is still +-1 mathematically, but high-degree slopes make the matrix
        # too ill-conditioned for slogdet to certify that at 1e-8
        rng = np.random.default_rng(2)
        for model, X in ((helix_model, helix_data), (tabular10_model, tabular10_data)):
            sd = X.std(axis=1)
            for _ in range(100):
                base = X[:, rng.integers(X.shape[1])]
                x = base + 0.25 * sd * rng.standard_normal(X.shape[0])
                _, logdet = np.linalg.slogdet(full_jacobian(model, x))
                assert abs(logdet) < 1e-8

    def test_matches_fd_of_forward(self, helix_model):
        rng = np.random.default_rng(3)
        for _ in range(20):
            x = rng.standard_normal(3) * 2
            J = full_jacobian(helix_model, x)
            Jfd = _fd_forward_jacobian(helix_model, x)
            assert np.linalg.norm(J - Jfd) / np.linalg.norm(Jfd) < 1e-5

    def test_inverse_function_consistency(self, helix_model):
        # Jacobian of the inverse at r equals the inverse Jacobian at x
        from ppa.model import inverse

        r = np.array([1.0, 0.3, -0.2])
        x = inverse(helix_model, r)
        J = full_jacobian(helix_model, x)
        h = 1e-6
        Jinv_fd = np.zeros((3, 3))
        for j in range(3):
            rp, rm = r.copy(), r.copy()
            rp[j] += h
            rm[j] -= h
            Jinv_fd[:, j] = (inverse(helix_model, rp) - inverse(helix_model, rm)) / (2 * h)
        assert np.abs(J @ Jinv_fd - np.eye(3)).max() < 1e-7


class TestWhitenedVariances:
    def test_whitening_gives_unit_variance(self, helix_model, helix_data):
        lam = whitened_variances(helix_model, helix_data)
        R = transform(helix_model, helix_data) / np.sqrt(lam)[:, None]
        assert np.abs(R.var(axis=1) - 1.0).max() < 1e-10

    def test_gamma1_matches_eigenvalues(self, gauss5_pca_model, gauss5_data):
        lam = whitened_variances(gauss5_pca_model, gauss5_data)
        Xc = gauss5_data - gauss5_data.mean(axis=1, keepdims=True)
        eig = np.sort(np.linalg.eigvalsh(Xc @ Xc.T / Xc.shape[1]))[::-1]
        assert np.abs(lam - eig).max() < 1e-9 * max(eig.max(), 1.0)

    def test_floor_on_constant_dimension(self):
        rng = np.random.default_rng(4)
        X = np.zeros((3, 100))
        X[:2] = rng.standard_normal((2, 100))
        model = fit(X, FitConfig(degree=1))
        lam = whitened_variances(model, X)
        assert lam.min() >= 1e-12


class TestMetric:
    def test_gamma1_is_mahalanobis(self, gauss5_pca_model, gauss5_data):
        lam = whitened_variances(gauss5_pca_model, gauss5_data)
        M = metric_tensor(gauss5_pca_model, np.zeros(5), lam)
        Xc = gauss5_data - gauss5_data.mean(axis=1, keepdims=True)
        cov = Xc @ Xc.T / Xc.shape[1]
        assert np.abs(M - np.linalg.inv(cov)).max() < 1e-8 * np.abs(M).max()

    def test_identity_lambda_unit_determinant(self, helix_model):
        M = metric_tensor(helix_model, np.array([0.5, -1.0, 2.0]), np.ones(3))
        assert abs(np.linalg.det(M) - 1.0) < 1e-8
        assert np.abs(M - M.T).max() < 1e-10

    def test_point_dependence_with_curvature(self, helix_model, helix_data):
        lam = whitened_variances(helix_model, helix_data)
        M1 = metric_tensor(helix_model, helix_data[:, 0], lam)
        M2 = metric_tensor(helix_model, helix_data[:, 100], lam)
        assert np.linalg.norm(M1 - M2) > 0

    def test_nonpositive_lambda_rejected(self, helix_model):
        with pytest.raises(ValueError):
            metric_tensor(helix_model, np.zeros(3), np.array([1.0, 0.0, 1.0]))

    def test_squared_distance_basics(self, helix_model, helix_data):
        lam = whitened_variances(helix_model, helix_data)
        x = helix_data[:, 3]
        assert squared_distance(helix_model, x, np.zeros(3), lam) == 0.0
        dx = np.array([0.1, -0.2, 0.05])
        assert squared_distance(helix_model, x, dx, lam) > 0

    def test_gamma1_squared_distance_vs_inverse_covariance(
        self, gauss5_pca_model, gauss5_data
    ):
        lam = whitened_variances(gauss5_pca_model, gauss5_data)
        Xc = gauss5_data - gauss5_data.mean(axis=1, keepdims=True)
        inv_cov = np.linalg.inv(Xc @ Xc.T / Xc.shape[1])
        rng = np.random.default_rng(5)
        dx = rng.standard_normal(5) * 0.3
        got = squared_distance(gauss5_pca_model, np.zeros(5), dx, lam)
        assert abs(got - dx @ inv_cov @ dx) < 1e-8 * max(abs(got), 1.0)

    @given(st.floats(-2, 2).filter(lambda c: abs(c) > 1e-3))
    @settings(max_examples=25, deadline=None)
    def test_quadratic_scaling(self, helix_model, c):
        lam = np.ones(3)
        x = np.array([0.2, 0.4, -0.6])
        dx = np.array([0.3, -0.1, 0.2])
        base = squared_distance(helix_model, x, dx, lam)
        scaled = squared_distance(helix_model, x, c * dx, lam)
        assert abs(scaled - c * c * base) < 1e-9 * max(abs(scaled), 1.0)


class TestPrincipalCurve:
    def test_gamma1_is_straight_axis(self, gauss5_pca_model):
        pts = principal_curve(gauss5_pca_model, np.linspace(-2, 2, 9))
        chords = np.diff(pts, axis=0)
        chords /= np.linalg.norm(chords, axis=1, keepdims=True)
        assert np.abs(chords - chords[0]).max() < 1e-10

    def test_parabola_curve_matches_closed_form(self, parabola_model):
        s = parabola_model.steps[0]
        alphas = np.linspace(-1.5, 1.5, 11)
        pts = principal_curve(parabola_model, alphas)
        for a, p in zip(alphas, pts):
            v = np.array([a**j for j in range(s.degree + 1)])
            expected = s.leading * a + s.complement.T @ (s.coeffs @ v)
            expected = expected + parabola_model.mean
            assert np.abs(p - expected).max() < 1e-8

    def test_helix_curve_near_generator(self, helix_model, helix_data):
        lo, hi = alpha_span(helix_model, helix_data, 0.9)
        pts = principal_curve(helix_model, np.linspace(lo, hi, 300))
        # distance from each curve point to the ideal helix: radius error in
        # the xy plane and phase-consistent z
        t = np.arctan2(pts[:, 1], pts[:, 0])
        radial = np.hypot(pts[:, 0], pts[:, 1]) - 2.0
        z_err = np.minimum(
            np.abs((pts[:, 2] / 0.8 - t) % (2 * np.pi)),
            np.abs(((t - pts[:, 2] / 0.8) % (2 * np.pi))),
        )
        assert np.max(np.abs(radial)) < 3 * 0.1
        assert np.max(z_err * 0.8) < 3 * 0.1

    def test_grid_shapes(self, helix_model):
        coords, pts = principal_grid(
            helix_model, [np.linspace(-1, 1, 4), np.linspace(-0.5, 0.5, 3)]
        )
        assert coords.shape == (12, 2)
        assert pts.shape == (12, 3)
        # zeroed trailing coordinate: grid rows reproduce curve points
        single = principal_curve(helix_model, [coords[5, 0]])
        assert single.shape == (1, 3)


class TestFrenet:
    def test_straight_line_zero_curvature_constant_frame(self):
        t = np.linspace(-1, 1, 120)
        X = np.vstack([t, 0.5 * t, -0.3 * t])
        X += 1e-9 * np.random.default_rng(6).standard_normal(X.shape)
        model = fit(X, FitConfig(degree=1))
        frames = [frenet_frame(model, a) for a in (-0.5, 0.0, 0.5)]
        for fr in frames:
            assert np.abs(fr.curvatures[0]) < 1e-6
            assert np.abs(fr.vectors - frames[0].vectors).max() < 1e-9

    def test_parabola_apex_curvature(self):
        u = np.linspace(0.01, 2.0, 400)
        x1 = np.concatenate([u, -u])
        kappa = 1.5
        X = np.vstack([x1, kappa * x1**2 / 2.0])
        model = fit(X, FitConfig(degree=2))
        fr = frenet_frame(model, 0.0)
        assert abs(fr.curvatures[0] - kappa) / kappa < 0.02

    def test_helix_curvature_and_torsion(self, helix_model, helix_data):
        lo, hi = alpha_span(helix_model, helix_data, 0.9)
        _, frames, chis = curvature_profile(helix_model, np.linspace(lo, hi, 150))
        chi1_ref, chi2_ref = helix_reference_curvatures(2.0, 0.8)
        assert abs(chis[:, 0].mean() - chi1_ref) / chi1_ref < 0.15
        assert abs(chis[:, 1].mean() - chi2_ref) / abs(chi2_ref) < 0.25
        gram = frames[75] @ frames[75].T
        assert np.abs(gram - np.eye(3)).max() < 1e-8

    def test_frame_orthonormal_everywhere(self, helix_model):
        for a in np.linspace(-3, 3, 7):
            fr = frenet_frame(helix_model, a)
            assert np.abs(fr.vectors @ fr.vectors.T - np.eye(3)).max() < 1e-8

    def test_right_handed(self, helix_model):
        fr = frenet_frame(helix_model, 0.3)
        assert np.linalg.det(fr.vectors) > 0

    def test_degenerate_tangent_rejected(self):
        # a valid model always has tangent norm >= 1 (the leading row of the
        # Jacobian is a unit vector), so this guard only fires on corrupted
        # models, e.g. a damaged file whose leading vector lost its scale
        from ppa.model import PpaModel, PpaStep

        step = PpaStep(
            leading=np.array([1e14, 0.0]),
            complement=np.array([[0.0, 1.0]]),
            coeffs=np.zeros((1, 2)),
            degree=1,
        )
        broken = PpaModel(
            mean=np.zeros(2), steps=(step,), strategy="pca-based", dims=2
        )
        with pytest.raises(UndefinedFrameError):
            frenet_frame(broken, 0.0)


class TestHelixReference:
    def test_reference_configuration(self):
        chi1, chi2 = helix_reference_curvatures(2.0, 0.8)
        assert abs(chi1 - 2.0 / 4.64) < 1e-12
        assert abs(chi2 - 0.8 / 4.64) < 1e-12
        assert abs(chi1 - 0.431034) < 1e-6
        assert abs(chi2 - 0.172414) < 1e-6

    def test_circle_limit(self):
        chi1, chi2 = helix_reference_curvatures(2.0, 0.0)
        assert chi1 == 0.5 and chi2 == 0.0

    def test_unit_case(self):
        assert helix_reference_curvatures(1.0, 1.0) == (0.5, 0.5)

    def test_zero_radius_rejected(self):
        with pytest.raises(ValueError):
            helix_reference_curvatures(0.0, 1.0)

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from coss import (AdmmSettings, ValidationError, nearest_psd_maxnorm,
                  project_l1_ball, project_psd_cone)


def random_symmetric(dim, seed):
    a = np.random.default_rng(seed).standard_normal((dim, dim))
    return (a + a.T) / 2


class TestProjectPsdCone:
    def test_psd_input_returned_identically(self):
        a = np.array([[2.0, 0.5], [0.5, 1.0]])
        assert np.array_equal(project_psd_cone(a), a)

    def test_diagonal_clipping(self):
        assert np.allclose(project_psd_cone(np.diag([2.0, -1.0])), np.diag([2.0, 0.0]),
                           atol=1e-15)

    def test_matches_independent_decomposition_oracle(self):
        # oracle rebuilt from scipy's eigendecomposition, not numpy's
        s = random_symmetric(5, seed=42)
        w, v = scipy.linalg.eigh(s)
        oracle = (v * np.clip(w, 0, None)) @ v.T
        assert np.max(np.abs(project_psd_cone(s) - oracle)) < 1e-10

    def test_idempotent(self):
        s = random_symmetric(6, seed=1)
        once = project_psd_cone(s)
        twice = project_psd_cone(once)
        assert np.max(np.abs(twice - once)) < 1e-12

    def test_rejects_asymmetric(self):
        with pytest.raises(ValidationError):
            project_psd_cone(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestProjectL1Ball:
    def test_interior_point_unchanged(self):
        v = np.array([0.2, -0.3, 0.1])
        assert np.array_equal(project_l1_ball(v, 1.0), v)

    def test_axis_case(self):
        assert np.allclose(project_l1_ball(np.array([3.0, 0.0]), 1.0),
                           np.array([1.0, 0.0]), atol=1e-15)

    def test_kkt_threshold_case_with_grid_oracle(self):
        # KKT gives threshold 1 -> (1, 0); dense grid over the l1 ball agrees
        v = np.array([2.0, 1.0])
        got = project_l1_ball(v, 1.0)
        assert np.allclose(got, np.array([1.0, 0.0]), atol=1e-12)
        ts = np.linspace(-1, 1, 2001)
        best = None
        for t in ts:  # boundary |x1| + |x2| = 1 plus interior is dominated
            for x in ((t, 1 - abs(t)), (t, -(1 - abs(t)))):
                d = (x[0] - v[0]) ** 2 + (x[1] - v[1]) ** 2
                if best is None or d < best[0]:
                    best = (d, x)
        assert np.allclose(got, best[1], atol=1e-3)

    @given(st.integers(0, 5000), st.integers(1, 20), st.floats(0.1, 5.0))
    def test_nonexpansive(self, seed, dim, radius):
        rng = np.random.default_rng(seed)
        u, v = rng.standard_normal(dim), rng.standard_normal(dim)
        pu, pv = project_l1_ball(u, radius), project_l1_ball(v, radius)
        assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) + 1e-12

    @given(st.integers(0, 5000), st.integers(1, 20), st.floats(0.1, 5.0))
    def test_feasible_output(self, seed, dim, radius):
        v = np.random.default_rng(seed).standard_normal(dim) * 3
        assert np.sum(np.abs(project_l1_ball(v, radius))) <= radius * (1 + 1e-12)

    def test_radius_validation(self):
        with pytest.raises(ValidationError):
            project_l1_ball(np.ones(3), 0.0)


def brute_force_2x2_maxnorm_distance(target, span=3.0, stages=4, width=61):
    """Grid-search oracle for the 2x2 nearest-PSD max-norm distance."""
    center = np.array([target[0, 0], target[1, 1], target[0, 1]])
    radius = span
    best = None
    for _ in range(stages):
        a = np.linspace(center[0] - radius, center[0] + radius, width)
        c = np.linspace(center[1] - radius, center[1] + radius, width)
        b = np.linspace(center[2] - radius, center[2] + radius, width)
        aa, cc, bb = np.meshgrid(a, c, b, indexing="ij")
        psd = (aa >= 0) & (cc >= 0) & (aa * cc - bb ** 2 >= 0)
        dist = np.maximum(np.maximum(np.abs(aa - target[0, 0]), np.abs(cc - target[1, 1])),
                          np.abs(bb - target[0, 1]))
        dist = np.where(psd, dist, np.inf)
        idx = np.unravel_index(np.argmin(dist), dist.shape)
        best = dist[idx]
        center = np.array([aa[idx], cc[idx], bb[idx]])
        radius = radius * 4.0 / (width - 1)
    return best


class TestNearestPsdMaxnorm:
    def test_psd_input_is_fixed_point(self):
        s = np.array([[2.0, 0.3], [0.3, 1.0]])
        res = nearest_psd_maxnorm(s)
        assert res.converged
        assert res.max_norm_distance <= 1e-8
        assert np.array_equal(res.sigma_tilde, s)

    def test_two_by_two_indefinite_against_grid_oracle(self):
        s = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3 and -1
        res = nearest_psd_maxnorm(s)
        clip_dist = np.max(np.abs(project_psd_cone(s) - s))
        assert clip_dist == pytest.approx(0.5, abs=1e-12)
        assert res.max_norm_distance <= clip_dist + 1e-4
        assert np.linalg.eigvalsh(res.sigma_tilde)[0] >= -1e-8
        oracle = brute_force_2x2_maxnorm_distance(s)
        assert oracle == pytest.approx(0.5, abs=1e-3)
        assert res.max_norm_distance <= oracle + 1e-3

    def test_diagonal_case_reaches_known_optimum(self):
        s = np.diag([1.0, -0.3])
        res = nearest_psd_maxnorm(s)
        # diag(1, 0) is feasible at distance 0.3, and no PSD matrix does better
        assert res.max_norm_distance <= 0.3 + 1e-4
        assert np.linalg.eigvalsh(res.sigma_tilde)[0] >= -1e-8

    def test_feasibility_and_competitor_bound_on_random_indefinite(self):
        hits = 0
        for seed in range(50):
            dim = 5 + seed % 26
            s = random_symmetric(dim, seed=seed)
            if np.linalg.eigvalsh(s)[0] >= 0:
                continue
            hits += 1
            res = nearest_psd_maxnorm(s)
            scale = max(1.0, np.max(np.abs(s)))
            assert np.linalg.eigvalsh(res.sigma_tilde)[0] >= -1e-8 * scale
            clip_dist = np.max(np.abs(project_psd_cone(s) - s))
            assert res.max_norm_distance <= clip_dist + 1e-4
        assert hits >= 45  # nearly all random symmetric draws are indefinite

    def test_unconverged_result_is_still_feasible(self):
        s = random_symmetric(12, seed=7)
        res = nearest_psd_maxnorm(s, AdmmSettings(max_iter=2))
        assert not res.converged
        assert res.iterations == 2
        assert np.linalg.eigvalsh(res.sigma_tilde)[0] >= -1e-8 * max(1.0, np.max(np.abs(s)))

    def test_rejects_asymmetric_beyond_tolerance(self):
        with pytest.raises(ValidationError):
            nearest_psd_maxnorm(np.array([[1.0, 1.0], [0.5, 1.0]]))

    def test_settings_validation(self):
        with pytest.raises(ValidationError):
            nearest_psd_maxnorm(np.eye(2), AdmmSettings(penalty=-1.0))
        with pytest.raises(ValidationError):
            nearest_psd_maxnorm(np.eye(2), AdmmSettings(max_iter=0))
        with pytest.raises(ValidationError):
            nearest_psd_maxnorm(np.eye(2), AdmmSettings(over_relaxation=2.5))

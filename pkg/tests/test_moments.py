import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degenboot import (
    BootstrapScheme,
    PanelData,
    ValidationError,
    bootstrap_model,
    eval_phi,
    eval_theta,
    fit_quadratic_moments,
    load_panel,
    panel_from_series,
    save_panel,
)
from degenboot.moments import vec_outer
from degenboot.oracles import direct_theta

from conftest import model_from, random_panel


class TestFit:
    def test_constant_instrument_column_annihilated(self, rng):
        panel = random_panel(rng, t=60)
        z = panel.z.copy()
        z[:, 0] = 3.7
        panel = PanelData(y=panel.y, z=z)
        model = fit_quadratic_moments(panel)
        assert np.allclose(model.deltas[0], 0.0, atol=1e-14)
        for _ in range(5):
            g = rng.standard_normal(2)
            g /= np.linalg.norm(g)
            assert eval_theta(model, g)[0] == pytest.approx(0.0, abs=1e-13)

    def test_matches_direct_summation(self, rng):
        panel = random_panel(rng, t=50)
        model = fit_quadratic_moments(panel)
        for _ in range(100):
            g = rng.standard_normal(2)
            g /= np.linalg.norm(g)
            np.testing.assert_allclose(
                eval_theta(model, g), direct_theta(panel, g), atol=1e-10, rtol=0
            )

    def test_quadratic_in_y(self, rng):
        panel = random_panel(rng, t=40)
        flipped = PanelData(y=-panel.y, z=panel.z)
        a = fit_quadratic_moments(panel)
        b = fit_quadratic_moments(flipped)
        np.testing.assert_array_equal(a.deltas, b.deltas)
        np.testing.assert_array_equal(a.g_mat, b.g_mat)

    def test_g_mat_rows_are_vec_deltas(self, rng):
        model = fit_quadratic_moments(random_panel(rng, t=30, k=3, m=2))
        for j in range(model.m):
            np.testing.assert_array_equal(model.g_mat[j], model.deltas[j].reshape(-1))

    def test_deltas_symmetric(self, rng):
        model = fit_quadratic_moments(random_panel(rng, t=30, k=3, m=3))
        np.testing.assert_array_equal(model.deltas, model.deltas.transpose(0, 2, 1))

    def test_bad_weight_rejected(self, rng):
        panel = random_panel(rng)
        with pytest.raises(ValidationError):
            fit_quadratic_moments(panel, weight=np.array([[1.0, 0.0], [0.0, -1.0]]))
        with pytest.raises(ValidationError):
            fit_quadratic_moments(panel, weight=np.array([[1.0, 0.5], [0.0, 1.0]]))

    @settings(deadline=None, max_examples=25)
    @given(seed=st.integers(0, 10_000))
    def test_representation_identity_property(self, seed):
        rng = np.random.default_rng(seed)
        panel = random_panel(rng, t=30, k=2 + seed % 2, m=2)
        model = fit_quadratic_moments(panel)
        g = rng.standard_normal(panel.k)
        g /= np.linalg.norm(g)
        np.testing.assert_allclose(eval_theta(model, g), direct_theta(panel, g), atol=1e-10)


class TestEval:
    def test_zero_model_everywhere_zero(self, rng):
        model = model_from(np.zeros((2, 2, 2)))
        for _ in range(5):
            g = rng.standard_normal(2)
            g /= np.linalg.norm(g)
            assert np.all(eval_theta(model, g) == 0.0)
            assert eval_phi(model, g) == 0.0

    def test_even_in_gamma(self, rng):
        model = model_from(rng.standard_normal((2, 3, 3)))
        g = rng.standard_normal(3)
        g /= np.linalg.norm(g)
        np.testing.assert_array_equal(eval_theta(model, g), eval_theta(model, -g))
        assert eval_phi(model, g) == eval_phi(model, -g)

    def test_hand_computed_quadratic_form(self):
        model = model_from([[[1.0, 0.0], [0.0, -1.0]]])
        assert eval_theta(model, np.array([1.0, 0.0]))[0] == pytest.approx(1.0)
        r = 1.0 / np.sqrt(2.0)
        assert eval_theta(model, np.array([r, r]))[0] == pytest.approx(0.0, abs=1e-15)
        assert eval_phi(model, np.array([1.0, 0.0])) == pytest.approx(1.0)

    def test_weight_scales_phi(self, rng):
        deltas = rng.standard_normal((2, 2, 2))
        base = model_from(deltas)
        doubled = model_from(deltas, weight=2.0 * np.eye(2))
        g = rng.standard_normal(2)
        g /= np.linalg.norm(g)
        assert eval_phi(doubled, g) == pytest.approx(2.0 * eval_phi(base, g), rel=1e-14)

    def test_dimension_mismatch_rejected(self, rng):
        model = model_from(rng.standard_normal((1, 2, 2)))
        with pytest.raises(ValidationError):
            eval_theta(model, np.array([1.0, 0.0, 0.0]))

    def test_non_unit_gamma_rejected(self, rng):
        model = model_from(rng.standard_normal((1, 2, 2)))
        with pytest.raises(ValidationError):
            eval_theta(model, np.array([1.0, 1.0]))

    @settings(deadline=None, max_examples=20)
    @given(seed=st.integers(0, 10_000), scale_pow=st.integers(-3, 3))
    def test_scaling_y_by_s_scales_phi_by_s4(self, seed, scale_pow):
        s = 2.0**scale_pow
        rng = np.random.default_rng(seed)
        panel = random_panel(rng, t=25)
        scaled = PanelData(y=s * panel.y, z=panel.z)
        a = fit_quadratic_moments(panel)
        b = fit_quadratic_moments(scaled)
        # powers of two scale exactly
        np.testing.assert_array_equal(b.deltas, s**2 * a.deltas)
        g = rng.standard_normal(2)
        g /= np.linalg.norm(g)
        assert eval_phi(b, g) == s**4 * eval_phi(a, g)


class TestBootstrapModel:
    def test_identity_resample_recovers_fit(self, rng):
        panel = random_panel(rng, t=40)
        model = fit_quadratic_moments(panel)
        resampled = panel.take(np.arange(panel.sample_size))
        star = fit_quadratic_moments(resampled)
        np.testing.assert_array_equal(model.g_mat, star.g_mat)

    def test_constant_rows_resample_invariant(self, rng):
        y = np.tile(rng.standard_normal((1, 2)), (30, 1))
        z = np.tile(rng.standard_normal((1, 2)), (30, 1))
        panel = PanelData(y=y, z=z)
        star = bootstrap_model(panel, BootstrapScheme(), rng)
        np.testing.assert_allclose(star.g_mat, fit_quadratic_moments(panel).g_mat, atol=1e-15)

    def test_block_length_one_matches_iid_in_distribution(self):
        panel = random_panel(np.random.default_rng(0), t=25)
        n = 10_000
        iid_means = np.empty((n, 2, 4))
        blk_means = np.empty((n, 2, 4))
        rng_a = np.random.default_rng(1)
        rng_b = np.random.default_rng(2)
        for i in range(n):
            iid_means[i] = bootstrap_model(panel, BootstrapScheme("iid_multinomial"), rng_a).g_mat
            blk_means[i] = bootstrap_model(
                panel, BootstrapScheme("moving_block", block_len=1), rng_b
            ).g_mat
        diff = iid_means.mean(axis=0) - blk_means.mean(axis=0)
        spread = iid_means.std(axis=0) / np.sqrt(n)
        assert np.all(np.abs(diff) < 5 * (spread + 1e-12))

    def test_block_length_exceeding_t_rejected(self, rng):
        panel = random_panel(rng, t=20)
        with pytest.raises(ValidationError):
            bootstrap_model(panel, BootstrapScheme("moving_block", block_len=21), rng)


class TestPanelIo:
    def test_round_trip(self, tmp_path, rng):
        panel = random_panel(rng, t=20, k=3, m=2)
        path = tmp_path / "panel.csv"
        save_panel(panel, path, comments=["made by a test"])
        loaded = load_panel(path)
        np.testing.assert_array_equal(loaded.y, panel.y)
        np.testing.assert_array_equal(loaded.z, panel.z)

    def test_header_validated(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValidationError):
            load_panel(path)

    def test_panel_from_series_alignment(self, rng):
        series = rng.standard_normal((11, 2))
        panel = panel_from_series(series)
        assert panel.sample_size == 10
        np.testing.assert_array_equal(panel.z, series[:-1] ** 2)
        np.testing.assert_array_equal(panel.y, series[1:])


def test_vec_outer_is_flattened_outer_product(rng):
    g = rng.standard_normal(3)
    np.testing.assert_array_equal(vec_outer(g), np.outer(g, g).reshape(-1))

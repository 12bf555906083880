"""Channel draws, detection vectors, and the cell configuration."""

import numpy as np
import pytest

from nomasim import (
    ClusterRealization,
    DegenerateChannelError,
    SystemConfig,
    compute_detection_vector,
    draw_cluster,
)


@pytest.fixture(scope="module")
def cfg():
    return SystemConfig()


class TestSystemConfig:
    def test_defaults_match_reference_cell(self, cfg):
        assert cfg.tx_antennas == 3 and cfg.rx_antennas == 3
        assert cfg.bandwidth_hz == 10e6
        assert cfg.noise_density_dbm_hz == -174.0
        assert cfg.pathloss_fixed_db == 114.0 and cfg.pathloss_slope == 38.0

    def test_noise_power_and_rho(self, cfg):
        assert cfg.noise_power_dbm == pytest.approx(-104.0)
        assert cfg.rho == pytest.approx(10 ** ((35.0 + 104.0) / 10.0), rel=1e-12)
        assert cfg.rho_at(30.0) == pytest.approx(10 ** 13.4, rel=1e-12)

    def test_with_replaces_only_named_fields(self, cfg):
        other = cfg.with_(tx_power_dbm=40.0)
        assert other.tx_power_dbm == 40.0
        assert other.cell_radius_range_km == cfg.cell_radius_range_km

    @pytest.mark.parametrize(
        "changes",
        [
            {"rx_antennas": 2},  # fewer receive than transmit antennas
            {"users_per_cluster": 1},
            {"bandwidth_hz": 0.0},
            {"cell_radius_range_km": (1.0, 0.5)},
            {"cell_radius_range_km": (0.0, 0.5)},
            {"rng_seed": -1},
            {"rng_seed": 1.5},
        ],
    )
    def test_invalid_configs_rejected(self, changes):
        with pytest.raises((ValueError, TypeError)):
            SystemConfig(**changes)


class TestDetectionVector:
    def test_one_dimensional_null_space(self):
        # interference spans e1, own column leans on e2
        h = np.array([[1.0, 0.6], [0.0, 0.8j]])
        v = compute_detection_vector(h, own_column_index=1)
        assert abs(np.vdot(v, h[:, 0])) < 1e-14
        assert abs(np.abs(np.vdot(v, h[:, 1])) - 0.8) < 1e-12
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)

    def test_single_column_matched_filter(self):
        h = np.array([[3.0 - 4.0j]])
        v = compute_detection_vector(h, own_column_index=0)
        assert np.abs(np.vdot(v, h[:, 0])) == pytest.approx(5.0, rel=1e-12)

    def test_orthogonal_own_column_keeps_full_norm(self):
        h = np.zeros((3, 2), dtype=complex)
        h[:, 0] = [1.0, 0.0, 0.0]
        h[:, 1] = [0.0, 2.0j, 1.0]
        v = compute_detection_vector(h, own_column_index=1)
        assert np.abs(np.vdot(v, h[:, 1])) == pytest.approx(np.linalg.norm(h[:, 1]), rel=1e-12)

    def test_combiner_is_best_direction_in_null_space(self):
        rng = np.random.default_rng(3)
        h = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))) / np.sqrt(2)
        v = compute_detection_vector(h, own_column_index=1)
        best = np.abs(np.vdot(v, h[:, 1]))
        null = np.delete(h, 1, axis=1)
        for _ in range(500):
            w = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            w -= null @ np.linalg.lstsq(null, w, rcond=None)[0]  # project out interference
            w /= np.linalg.norm(w)
            assert np.abs(np.vdot(w, h[:, 1])) <= best + 1e-9

    def test_own_column_inside_interference_span_is_degenerate(self):
        h = np.array([[1.0, 2.0], [1.0, 2.0]], dtype=complex)
        with pytest.raises(DegenerateChannelError):
            compute_detection_vector(h, own_column_index=1)

    def test_wide_channel_rejected(self):
        # with fewer receive antennas than columns there is no way to null
        # every interferer, so the shape itself is refused
        rng = np.random.default_rng(5)
        h = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        with pytest.raises(ValueError):
            compute_detection_vector(h, own_column_index=0)

    def test_gain_invariant_to_interference_column_scaling(self):
        rng = np.random.default_rng(11)
        h = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))) / np.sqrt(2)
        base = np.abs(np.vdot(compute_detection_vector(h, 0), h[:, 0])) ** 2
        scaled = h.copy()
        scaled[:, 2] *= 2.0 - 3.0j
        again = np.abs(np.vdot(compute_detection_vector(scaled, 0), scaled[:, 0])) ** 2
        assert again == pytest.approx(base, rel=1e-9)


class TestDrawCluster:
    def test_shapes_and_basic_invariants(self, cfg):
        r = draw_cluster(cfg, cluster_index=1, trial_seed=4)
        assert isinstance(r, ClusterRealization)
        L, N, M = cfg.users_per_cluster, cfg.rx_antennas, cfg.tx_antennas
        assert r.channels.shape == (L, N, M)
        assert r.precoder.shape == (M, M)
        np.testing.assert_array_equal(r.precoder, np.eye(M))
        assert r.detection_vectors.shape == (L, N)
        np.testing.assert_allclose(np.linalg.norm(r.detection_vectors, axis=1), 1.0, atol=1e-12)
        assert np.all(np.diff(r.effective_gains) <= 0)
        assert np.all(r.effective_gains >= 0)
        np.testing.assert_allclose(r.snr_gains, r.rho * r.effective_gains, rtol=0)

    def test_other_cluster_columns_are_nulled(self, cfg):
        r = draw_cluster(cfg, cluster_index=2, trial_seed=9)
        prods = np.einsum("ln,lnm->lm", r.detection_vectors.conj(), r.channels @ r.precoder)
        off = np.abs(np.delete(prods, 2, axis=1))
        assert off.max() < 1e-10

    def test_gains_match_recomputed_products(self, cfg):
        r = draw_cluster(cfg, cluster_index=0, trial_seed=13)
        recomputed = np.abs(np.einsum("ln,ln->l", r.detection_vectors.conj(), r.channels[:, :, 0])) ** 2
        np.testing.assert_allclose(r.effective_gains, recomputed, rtol=1e-12)
        assert sorted(r.sort_order.tolist()) == list(range(cfg.users_per_cluster))

    def test_distances_stay_inside_annulus(self, cfg):
        r = draw_cluster(cfg, 0, 21)
        lo, hi = cfg.cell_radius_range_km
        assert np.all((r.distances_km >= lo) & (r.distances_km <= hi))

    def test_redraw_is_bit_identical(self, cfg):
        a = draw_cluster(cfg, 1, 7)
        b = draw_cluster(cfg, 1, 7)
        np.testing.assert_array_equal(a.channels, b.channels)
        np.testing.assert_array_equal(a.effective_gains, b.effective_gains)

    def test_trial_and_cluster_keys_change_the_draw(self, cfg):
        base = draw_cluster(cfg, 0, 0).effective_gains
        assert not np.array_equal(base, draw_cluster(cfg, 0, 1).effective_gains)
        assert not np.array_equal(base, draw_cluster(cfg, 1, 0).effective_gains)

    def test_seed_changes_the_draw(self, cfg):
        a = draw_cluster(cfg, 0, 3).effective_gains
        b = draw_cluster(cfg.with_(rng_seed=cfg.rng_seed + 1), 0, 3).effective_gains
        assert not np.array_equal(a, b)

    @pytest.mark.parametrize("cluster_index,trial_seed", [(-1, 0), (3, 0), (0, -2), (0, 1.5)])
    def test_bad_draw_keys_rejected(self, cfg, cluster_index, trial_seed):
        with pytest.raises((ValueError, TypeError)):
            draw_cluster(cfg, cluster_index, trial_seed)

    def test_arrays_are_read_only(self, cfg):
        r = draw_cluster(cfg, 0, 2)
        with pytest.raises(ValueError):
            r.effective_gains[0] = 0.0

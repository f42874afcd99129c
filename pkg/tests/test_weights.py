import numpy as np
import pytest

from clusterforest import (
    ClassCatalogError,
    Dataset,
    EtaState,
    InsufficientDataError,
    PearsonState,
    eta_stats,
    eta_update,
    eta_weights,
    normalize,
    pearson_stats,
    pearson_update,
    pearson_weights,
    state_max_rel_error,
)


# ---------------------------------------------------------------------------
# oracles: straight transcriptions of the defining formulas
# ---------------------------------------------------------------------------


def pearson_oracle(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    num = ((x - x.mean()) * (y - y.mean())).sum()
    den = np.sqrt(((x - x.mean()) ** 2).sum()) * np.sqrt(((y - y.mean()) ** 2).sum())
    return num / den


def eta_sq_oracle(x, labels, n_classes):
    x = np.asarray(x, dtype=float)
    ss_t = ((x - x.mean()) ** 2).sum()
    ss_c = 0.0
    for l in range(n_classes):
        members = x[labels == l]
        if len(members):
            ss_c += len(members) * (members.mean() - x.mean()) ** 2
    return ss_c / ss_t


def scratch_pearson(X, Y):
    return pearson_stats(X, Y)


def scratch_eta(X, Y, n_classes):
    return eta_stats(X, Y, n_classes)


# ---------------------------------------------------------------------------
# pearson
# ---------------------------------------------------------------------------


class TestPearsonStats:
    def test_perfect_correlation(self):
        s = pearson_stats(np.array([[1.0], [2.0], [3.0]]), np.array([1.0, 2.0, 3.0]))
        r = pearson_weights(s)
        assert r.raw[0] == pytest.approx(1.0, abs=1e-12)

    def test_perfect_anticorrelation(self):
        s = pearson_stats(np.array([[1.0], [2.0], [3.0]]), np.array([3.0, 2.0, 1.0]))
        num = s.sum_xy - s.n * s.mu_x * s.mu_y
        r = num[0] / (np.sqrt(s.ss_x[0]) * np.sqrt(s.ss_y))
        assert r == pytest.approx(-1.0, abs=1e-12)
        assert pearson_weights(s).raw[0] == pytest.approx(1.0, abs=1e-12)

    def test_mid_correlation_against_oracle(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        y = np.array([1.0, 3.0, 2.0, 4.0])
        assert pearson_oracle(x, y) == pytest.approx(0.8)
        s = pearson_stats(x[:, None], y)
        num = s.sum_xy[0] - s.n * s.mu_x[0] * s.mu_y
        assert num / (np.sqrt(s.ss_x[0]) * np.sqrt(s.ss_y)) == pytest.approx(0.8, abs=1e-12)

    def test_needs_two_samples(self):
        with pytest.raises(InsufficientDataError):
            pearson_stats(np.array([[1.0]]), np.array([1.0]))


class TestPearsonUpdate:
    def test_collinear_point_keeps_r_one(self):
        s = pearson_stats(np.array([[0.0], [2.0]]), np.array([0.0, 2.0]))
        s = pearson_update(s, np.array([[4.0]]), np.array([4.0]))
        assert pearson_weights(s).raw[0] == pytest.approx(1.0, abs=1e-12)

    def test_empty_batch_is_identity(self):
        s = pearson_stats(np.array([[0.0], [2.0]]), np.array([0.0, 2.0]))
        s2 = pearson_update(s, np.empty((0, 1)), np.empty(0))
        assert state_max_rel_error(s, s2) == 0.0

    def test_matches_scratch_on_random_batch(self, rng_np):
        X = rng_np.normal(size=(200, 5))
        Y = rng_np.normal(size=200)
        Xb = rng_np.normal(size=(37, 5))
        Yb = rng_np.normal(size=37)
        updated = pearson_update(pearson_stats(X, Y), Xb, Yb)
        fresh = scratch_pearson(np.vstack([X, Xb]), np.concatenate([Y, Yb]))
        assert state_max_rel_error(updated, fresh) < 1e-9

    def test_update_associativity(self, rng_np):
        X = rng_np.normal(size=(100, 3))
        Y = rng_np.normal(size=100)
        B1x, B1y = rng_np.normal(size=(20, 3)), rng_np.normal(size=20)
        B2x, B2y = rng_np.normal(size=(15, 3)), rng_np.normal(size=15)
        stepped = pearson_update(pearson_update(pearson_stats(X, Y), B1x, B1y), B2x, B2y)
        merged = pearson_update(
            pearson_stats(X, Y), np.vstack([B1x, B2x]), np.concatenate([B1y, B2y])
        )
        assert state_max_rel_error(stepped, merged) < 1e-9


class TestPearsonWeights:
    def _state(self, r_values):
        r = np.asarray(r_values, dtype=float)
        return PearsonState(
            n=4, mu_x=np.zeros(len(r)), mu_y=0.0, sum_xy=r, ss_x=np.ones(len(r)), ss_y=1.0
        )

    def test_forced(self):
        w = pearson_weights(self._state([1.0, 0.0]))
        assert np.allclose(w.normalized, [1.0, 0.0])

    def test_symmetric(self):
        w = pearson_weights(self._state([0.5, 0.5]))
        assert np.allclose(w.normalized, [0.5, 0.5])

    def test_absolute_value_rule(self):
        w = pearson_weights(self._state([0.8, -0.4]))
        assert np.allclose(w.raw, [0.8, 0.4])
        assert np.allclose(w.normalized, [2.0 / 3.0, 1.0 / 3.0])

    def test_uniform_fallback_on_constant_labels(self):
        s = pearson_stats(np.array([[1.0], [2.0], [3.0]]), np.array([5.0, 5.0, 5.0]))
        w = pearson_weights(s)
        assert w.uniform_fallback
        assert np.allclose(w.normalized, [1.0])

    def test_zero_variance_feature_gets_zero_weight(self):
        ds = Dataset(
            np.array([[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]]), np.array([1.0, 2.0, 3.0]), ()
        )
        norm, _ = normalize(ds)
        w = pearson_weights(pearson_stats(norm.X, norm.y))
        assert w.raw[1] == 0.0
        assert w.normalized[1] == 0.0


# ---------------------------------------------------------------------------
# eta
# ---------------------------------------------------------------------------


class TestEtaStats:
    def test_within_class_constant(self):
        s = eta_stats(np.array([[0.0], [0.0], [1.0], [1.0]]), np.array([0, 0, 1, 1]), 2)
        assert eta_weights(s).raw[0] == pytest.approx(1.0, abs=1e-12)

    def test_equal_class_means(self):
        s = eta_stats(np.array([[0.0], [1.0], [0.0], [1.0]]), np.array([0, 0, 1, 1]), 2)
        assert eta_weights(s).raw[0] == pytest.approx(0.0, abs=1e-12)

    def test_against_oracle(self):
        x = np.array([1.0, 2.0, 3.0, 4.0, 10.0])
        labels = np.array([0, 0, 1, 1, 1])
        s = eta_stats(x[:, None], labels, 2)
        assert s.ss_c()[0] / s.ss_t[0] == pytest.approx(eta_sq_oracle(x, labels, 2), abs=1e-12)

    def test_rejects_out_of_catalog_labels(self):
        with pytest.raises(ClassCatalogError):
            eta_stats(np.zeros((3, 1)), np.array([0, 1, 5]), 3)

    def test_empty_class_contributes_nothing(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        labels = np.array([0, 0, 2, 2])
        s = eta_stats(x[:, None], labels, 3)
        assert s.class_counts.tolist() == [2.0, 0.0, 2.0]
        assert s.ss_c()[0] / s.ss_t[0] == pytest.approx(eta_sq_oracle(x, labels, 3), abs=1e-12)


class TestEtaUpdate:
    def test_empty_batch_is_identity(self):
        s = eta_stats(np.array([[0.0], [1.0]]), np.array([0, 1]), 2)
        s2 = eta_update(s, np.empty((0, 1)), np.empty(0, dtype=int))
        assert state_max_rel_error(s, s2) == 0.0

    def test_within_class_constant_after_update(self):
        s = eta_stats(np.array([[0.0], [0.0]]), np.array([0, 0]), 2)
        s = eta_update(s, np.array([[1.0], [1.0]]), np.array([1, 1]))
        assert eta_weights(s).raw[0] == pytest.approx(1.0, abs=1e-12)

    def test_matches_scratch_on_random_batch(self, rng_np):
        X = rng_np.normal(size=(300, 4))
        Y = rng_np.integers(0, 3, size=300)
        Xb = rng_np.normal(size=(29, 4))
        Yb = rng_np.integers(0, 3, size=29)
        updated = eta_update(eta_stats(X, Y, 3), Xb, Yb)
        fresh = scratch_eta(np.vstack([X, Xb]), np.concatenate([Y, Yb]), 3)
        assert state_max_rel_error(updated, fresh) < 1e-9

    def test_batch_with_unseen_empty_class(self, rng_np):
        # class 2 absent from the base, appears only in the batch
        X = rng_np.normal(size=(50, 2))
        Y = rng_np.integers(0, 2, size=50)
        Xb = rng_np.normal(size=(10, 2))
        Yb = np.full(10, 2)
        updated = eta_update(eta_stats(X, Y, 3), Xb, Yb)
        fresh = scratch_eta(np.vstack([X, Xb]), np.concatenate([Y, Yb]), 3)
        assert state_max_rel_error(updated, fresh) < 1e-9

    def test_rejects_new_class_index(self):
        s = eta_stats(np.zeros((4, 1)), np.array([0, 1, 0, 1]), 2)
        with pytest.raises(ClassCatalogError):
            eta_update(s, np.ones((1, 1)), np.array([2]))


class TestEtaWeights:
    def _state(self, raw):
        raw = np.asarray(raw, dtype=float)
        d = len(raw)
        # one sample at mean 0, one class at mean 1 with count raw -> ss_c = raw
        return EtaState(
            n=2,
            mu_x=np.zeros(d),
            class_counts=np.array([1.0]),
            mu_xc=np.sqrt(raw)[:, None],
            ss_t=np.ones(d),
        )

    def test_forced(self):
        w = eta_weights(self._state([1.0, 0.0]))
        assert np.allclose(w.normalized, [1.0, 0.0])

    def test_already_normalized(self):
        w = eta_weights(self._state([0.2, 0.2, 0.6]))
        assert np.allclose(w.normalized, [0.2, 0.2, 0.6])

    def test_normalizes_oracle_values(self):
        x = np.array([1.0, 2.0, 3.0, 4.0, 10.0])
        labels = np.array([0, 0, 1, 1, 1])
        X = np.column_stack([x, x[::-1], np.arange(5.0)])
        s = eta_stats(X, labels, 2)
        raw = np.array([eta_sq_oracle(X[:, j], labels, 2) for j in range(3)])
        w = eta_weights(s)
        assert np.allclose(w.raw, raw, atol=1e-12)
        assert np.allclose(w.normalized, raw / raw.sum(), atol=1e-12)


# ---------------------------------------------------------------------------
# shared invariants
# ---------------------------------------------------------------------------


class TestInvariants:
    def test_chained_updates_match_scratch(self, rng_np):
        for _ in range(20):
            n = rng_np.integers(2, 120)
            d = rng_np.integers(1, 8)
            X = rng_np.normal(size=(n, d))
            Y = rng_np.normal(size=n)
            s = pearson_stats(X, Y)
            for _ in range(3):
                nb = rng_np.integers(1, 30)
                Xb, Yb = rng_np.normal(size=(nb, d)), rng_np.normal(size=nb)
                s = pearson_update(s, Xb, Yb)
                X, Y = np.vstack([X, Xb]), np.concatenate([Y, Yb])
            assert state_max_rel_error(s, scratch_pearson(X, Y)) < 1e-9

    def test_bounds(self, rng_np):
        for _ in range(20):
            X = rng_np.normal(size=(60, 4))
            Yc = rng_np.integers(0, 4, size=60)
            Yr = rng_np.normal(size=60)
            wp = pearson_weights(pearson_stats(X, Yr))
            we = eta_weights(eta_stats(X, Yc, 4))
            assert np.all(wp.raw <= 1.0 + 1e-12) and np.all(wp.raw >= 0.0)
            assert np.all(we.raw <= 1.0 + 1e-12) and np.all(we.raw >= 0.0)
            assert wp.normalized.sum() == pytest.approx(1.0, abs=1e-12)
            assert we.normalized.sum() == pytest.approx(1.0, abs=1e-12)

    def test_eta_affine_rescale_invariance(self, rng_np):
        X = rng_np.normal(size=(80, 3))
        Y = rng_np.integers(0, 3, size=80)
        base = eta_weights(eta_stats(X, Y, 3)).raw
        scaled = eta_weights(eta_stats(X * np.array([3.0, 0.5, 10.0]) + 7.0, Y, 3)).raw
        assert np.max(np.abs(base - scaled) / np.maximum(np.abs(base), 1e-12)) < 1e-9

    def test_ss_c_bounded_by_ss_t(self, rng_np):
        for _ in range(10):
            X = rng_np.normal(size=(50, 3))
            Y = rng_np.integers(0, 3, size=50)
            s = eta_stats(X, Y, 3)
            assert np.all(s.ss_c() <= s.ss_t * (1.0 + 1e-9))

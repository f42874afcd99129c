import numpy as np
import pytest

from clusterforest import (
    Dataset,
    ForestConfig,
    ModelFormatError,
    NoiseConfig,
    build_forest,
    cart_ensemble,
    load_model,
    predict,
    save_model,
    state_max_rel_error,
)
from clusterforest.model_io import emit_json


@pytest.fixture
def small_forest(rng_np):
    X = rng_np.normal(size=(50, 3))
    y = rng_np.integers(0, 3, size=50)
    ds = Dataset(X, y, ("a", "b", "c"))
    cfg = ForestConfig(n_trees=3, k=2, max_depth=2, seed=21, noise=NoiseConfig(eps4=0.0))
    return ds, build_forest(ds, cfg)


class TestEmitJson:
    def test_floats_round_trip_exactly(self):
        import json

        values = [1 / 3, 0.1, 1e-300, -2.5e17, 123456789.123456789]
        text = emit_json(values)
        assert json.loads(text) == values

    def test_seventeen_significant_digits(self):
        assert emit_json(1 / 3) == "0.33333333333333331"

    def test_negative_zero_normalized(self):
        assert emit_json(-0.0) == "0"

    def test_sorted_keys(self):
        assert emit_json({"b": 1, "a": 2}) == '{"a":2,"b":1}'

    def test_non_finite_rejected(self):
        with pytest.raises(ModelFormatError):
            emit_json(float("nan"))


class TestRoundTrip:
    def test_save_load_save_byte_identical(self, small_forest, tmp_path):
        _, f = small_forest
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_model(f, p1)
        g = load_model(p1)
        save_model(g, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_predictions_identical_after_round_trip(self, small_forest, tmp_path):
        ds, f = small_forest
        path = tmp_path / "m.json"
        save_model(f, path)
        g = load_model(path)
        assert np.array_equal(predict(f, ds.X), predict(g, ds.X))

    def test_weight_states_survive_exactly(self, small_forest, tmp_path):
        _, f = small_forest
        path = tmp_path / "m.json"
        save_model(f, path)
        g = load_model(path)
        for a, b in zip(f.weight_states, g.weight_states):
            assert state_max_rel_error(a, b) == 0.0

    def test_config_survives(self, small_forest, tmp_path):
        _, f = small_forest
        path = tmp_path / "m.json"
        save_model(f, path)
        g = load_model(path)
        assert g.config == f.config
        assert g.classes == f.classes
        assert g.feature_names == f.feature_names

    def test_cart_round_trip(self, rng_np, tmp_path):
        X = rng_np.normal(size=(40, 2))
        y = (X[:, 0] > 0).astype(int)
        ds = Dataset(X, y, ("n", "p"))
        e = cart_ensemble(ds, 3, 2, seed=4)
        path = tmp_path / "cart.json"
        save_model(e, path)
        g = load_model(path)
        assert np.array_equal(predict(e, ds.X), predict(g, ds.X))
        save_model(g, tmp_path / "cart2.json")
        assert (tmp_path / "cart.json").read_bytes() == (tmp_path / "cart2.json").read_bytes()

    def test_variant_tag_present(self, small_forest, tmp_path):
        _, f = small_forest
        path = tmp_path / "m.json"
        save_model(f, path)
        assert '"variant":"centroid"' in path.read_text()


class TestCorruption:
    def test_flipped_byte_detected(self, small_forest, tmp_path):
        _, f = small_forest
        path = tmp_path / "m.json"
        save_model(f, path)
        blob = bytearray(path.read_bytes())
        pos = len(blob) // 2
        blob[pos] = blob[pos] ^ 0x01
        path.write_bytes(bytes(blob))
        with pytest.raises(ModelFormatError, match="checksum|corrupt"):
            load_model(path)

    def test_truncation_detected(self, small_forest, tmp_path):
        _, f = small_forest
        path = tmp_path / "m.json"
        save_model(f, path)
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(ModelFormatError):
            load_model(path)

    def test_version_mismatch_detected(self, small_forest, tmp_path):
        import zlib

        _, f = small_forest
        path = tmp_path / "m.json"
        save_model(f, path)
        text = path.read_text().rsplit("\n", 2)[0]
        text = text.replace('"format_version":1', '"format_version":99') + "\n"
        crc = zlib.crc32(text.encode()) & 0xFFFFFFFF
        path.write_text(text + f"crc32 {crc:08x}\n")
        with pytest.raises(ModelFormatError, match="version"):
            load_model(path)

    def test_missing_trailer_detected(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text('{"format_version":1}\n')
        with pytest.raises(ModelFormatError, match="trailer|truncated"):
            load_model(path)

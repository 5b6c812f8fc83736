import json
import struct

import numpy as np
import pytest

import oodsel


def toy(seed=0, n=600, shift=0.0):
    rng = np.random.default_rng(seed)
    y = np.tile([1, 2], n // 2).astype(np.uint16)
    e = np.repeat([0, 1, 2], n // 3).astype(np.uint16)
    x = rng.normal(size=(n, 3)).astype(np.float32)
    x[:, 0] += np.where(y == 2, 2.0, -2.0)
    x[:, 1] += shift * e
    return oodsel.FeatureDataset(x, y, e)


def test_oodf_layout():
    ds = toy()
    raw = oodsel.encode_oodf(ds)
    assert raw[:4] == b"OODF"
    version, n, d, k, n_dom = struct.unpack_from("<IQIII", raw, 4)
    assert (version, n, d, k, n_dom) == (1, 600, 3, 2, 3)
    assert len(raw) == 28 + n * d * 4 + n * 2 * 2
    assert oodsel.decode_oodf(raw) == ds


def test_file_round_trip(tmp_path):
    ds = toy(1)
    path = tmp_path / "f.oodf"
    oodsel.write_dataset(ds, path)
    back = oodsel.load_dataset(path)
    assert back == ds
    np.testing.assert_array_equal(back.features, ds.features)
    np.testing.assert_array_equal(back.labels, ds.labels)
    assert back.domain_ids == [0, 1, 2]


def test_validation_errors():
    x = np.zeros((2, 1), dtype=np.float32)
    with pytest.raises(ValueError):
        oodsel.FeatureDataset(x, np.array([0, 1]), np.array([0, 0]))
    with pytest.raises(ValueError):
        oodsel.FeatureDataset(x, np.array([1, 2, 1]), np.array([0, 0]))
    with pytest.raises(ValueError):
        oodsel.decode_oodf(b"OODF\x01")


def test_metrics():
    ds = toy(2, n=6000, shift=1.5)
    assert oodsel.feature_variation(ds, 0) < 0.1
    assert oodsel.feature_variation(ds, 1) > 0.5
    assert oodsel.feature_informativeness(ds, 0) > 0.9
    v = oodsel.model_variation(ds, domains=[0, 1])
    assert 0.0 < v < 1.0
    assert oodsel.model_variation(ds, domains=[0]) == 0.0


def test_manifest_round_trip(tmp_path):
    oodsel.write_dataset(toy(3), tmp_path / "m.oodf")
    doc = {"models": [{"model_id": "m", "feature_file": "m.oodf", "val_accuracy": 0.75,
                       "metadata": {"arch": "toy"}}]}
    (tmp_path / "manifest.json").write_text(json.dumps(doc))
    man = oodsel.load_manifest(tmp_path / "manifest.json")
    entry = man.entries[0]
    assert entry.model_id == "m"
    assert entry.val_accuracy == 0.75
    assert entry.metadata == {"arch": "toy"}
    assert oodsel.load_dataset(entry.avail_file).n_samples == 600
    oodsel.write_manifest(man, tmp_path / "again.json")
    again = oodsel.load_manifest(tmp_path / "again.json")
    assert again.entries[0].avail_file == entry.avail_file

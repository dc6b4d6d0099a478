import numpy as np
import pytest

from biview.embedding import EmbeddingMatrix, format_tsv, read_tsv, write_tsv
from biview.fingerprint import canonical_json, content_digest, fingerprint_of
from biview.pipeline import verify_file


def test_validation():
    with pytest.raises(ValueError):
        EmbeddingMatrix(np.zeros((2, 2)), "other")
    with pytest.raises(ValueError):
        EmbeddingMatrix(np.array([[np.nan]]), "n2v")
    with pytest.raises(ValueError):
        EmbeddingMatrix(np.zeros(3), "n2v")


def test_tsv_round_trip_exact(tmp_path, rng):
    v = rng.normal(size=(4, 3))
    v[0, 0] = 1e-300
    emb = EmbeddingMatrix(v, "sage", np.array([False, True, False, False]))
    ids = ["a", "b", "c", "d"]
    write_tsv(tmp_path / "e.tsv", emb, ids, {"seed": 1})
    back, got_ids, meta = read_tsv(tmp_path / "e.tsv")
    assert got_ids == ids and back.role == "sage"
    assert np.array_equal(back.values, v)
    assert back.untrained.tolist() == [False, True, False, False]
    assert meta["fingerprint"] == fingerprint_of({"seed": 1})
    reordered, _, _ = read_tsv(tmp_path / "e.tsv", ["d", "a", "c", "b"])
    assert np.array_equal(reordered.values, v[[3, 0, 2, 1]])
    with pytest.raises(ValueError):
        read_tsv(tmp_path / "e.tsv", ["a", "zz"])


def test_tsv_rows_format(rng):
    text = format_tsv(EmbeddingMatrix(np.array([[0.5, -2.0]]), "n2v"), ["x"])
    assert text.splitlines()[-1] == "x\t0.5\t-2.0"
    with pytest.raises(ValueError):
        format_tsv(EmbeddingMatrix(np.zeros((2, 1)), "n2v"), ["x"])


def test_verify_detects_tampering(tmp_path):
    emb = EmbeddingMatrix(np.array([[1.0, 2.0]]), "fused")
    p = tmp_path / "e.tsv"
    write_tsv(p, emb, ["a"], {"seed": 3})
    assert verify_file(p)[0]
    p.write_text(p.read_text().replace("\t2.0", "\t2.5"))
    assert verify_file(p) == (False, "payload digest mismatch")
    write_tsv(p, emb, ["a"], {"seed": 3})
    p.write_text(p.read_text().replace('"seed":3', '"seed":4'))
    assert verify_file(p) == (False, "config fingerprint mismatch")
    write_tsv(p, emb, ["a"])
    assert verify_file(p) == (False, "no embedded fingerprint")


def test_canonical_json_is_order_free():
    assert canonical_json({"b": 1, "a": [1, 2]}) == canonical_json({"a": [1, 2], "b": 1})
    assert fingerprint_of({"b": 1, "a": 2}) == fingerprint_of({"a": 2, "b": 1})
    assert content_digest("x") != content_digest("y")

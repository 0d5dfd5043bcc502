import numpy as np
import pytest

from qmlgrid.circuit import EncodingSpec
from qmlgrid.errors import IngestionError, UsageError
from qmlgrid.qkernel import (cached_gram, cross_gram, encoding_key,
                             gram_matrix, kernel_value, load_gram, save_gram)

ALL_ENCODINGS = [EncodingSpec(kind, sequence=("Y",), repetitions=reps)
                 for kind in ("angle", "z", "zz_a", "zz_b")
                 for reps in (1, 2, 3)]


def closed_form_angle_y(x, y):
    # one feature, single RY(pi * x): overlap is cos(pi (x - y) / 2)
    return np.cos(np.pi * (x - y) / 2.0) ** 2


class TestKernelValue:
    def test_matches_closed_form_single_feature(self):
        enc = EncodingSpec("angle", sequence=("Y",))
        rng = np.random.default_rng(31)
        for _ in range(25):
            x, y = rng.uniform(-1, 1, 2)
            got = kernel_value(enc, [x], [y])
            assert abs(got - closed_form_angle_y(x, y)) < 1e-12

    def test_self_kernel_is_one(self):
        rng = np.random.default_rng(32)
        for enc in ALL_ENCODINGS:
            x = rng.uniform(-1, 1, 3)
            assert abs(kernel_value(enc, x, x) - 1.0) < 1e-12

    def test_symmetry(self):
        rng = np.random.default_rng(33)
        for enc in ALL_ENCODINGS:
            x, y = rng.uniform(-1, 1, (2, 3))
            assert abs(kernel_value(enc, x, y) - kernel_value(enc, y, x)) < 1e-12

    def test_shape_mismatch_rejected(self):
        with pytest.raises(UsageError):
            kernel_value(EncodingSpec("angle"), [0.1, 0.2], [0.1])


class TestGram:
    def test_gram_matches_pairwise_kernel_value(self):
        # embedding route vs the literal adjoint-circuit route
        rng = np.random.default_rng(34)
        for enc in (EncodingSpec("angle", sequence=("X", "Y")),
                    EncodingSpec("z", repetitions=2),
                    EncodingSpec("zz_a"),
                    EncodingSpec("zz_b", repetitions=2)):
            X = rng.uniform(-1, 1, (5, 2))
            gram = gram_matrix(enc, X)
            for i in range(5):
                for j in range(5):
                    assert abs(gram[i, j] - kernel_value(enc, X[i], X[j])) < 1e-12

    def test_gram_properties(self):
        rng = np.random.default_rng(35)
        for enc in ALL_ENCODINGS:
            X = rng.uniform(-1, 1, (12, 3))
            gram = gram_matrix(enc, X)
            assert np.all(np.diag(gram) == 1.0)
            np.testing.assert_array_equal(gram, gram.T)
            assert gram.min() >= 0.0 and gram.max() <= 1.0 + 1e-12
            assert np.linalg.eigvalsh(gram)[0] >= -1e-8

    def test_cross_gram_consistent_with_gram(self):
        enc = EncodingSpec("zz_b")
        rng = np.random.default_rng(36)
        X = rng.uniform(-1, 1, (6, 2))
        full = gram_matrix(enc, X)
        rect = cross_gram(enc, X[:2], X[2:])
        np.testing.assert_allclose(rect, full[:2, 2:], atol=1e-12)

    def test_cross_gram_checks_dimensions(self):
        enc = EncodingSpec("angle")
        with pytest.raises(UsageError):
            cross_gram(enc, np.zeros((2, 3)), np.zeros((2, 2)))


class TestCache:
    def test_save_load_round_trip(self, tmp_path):
        enc = EncodingSpec("z", repetitions=2)
        X = np.random.default_rng(37).uniform(-1, 1, (9, 2))
        gram = gram_matrix(enc, X)
        key = encoding_key(enc, tag="split-abc")
        path = tmp_path / "k.gram"
        save_gram(path, gram, key)
        np.testing.assert_array_equal(load_gram(path, key), gram)

    def test_key_mismatch_detected(self, tmp_path):
        gram = np.eye(3)
        path = tmp_path / "k.gram"
        save_gram(path, gram, encoding_key(EncodingSpec("z"), "a"))
        with pytest.raises(IngestionError):
            load_gram(path, encoding_key(EncodingSpec("z"), "b"))

    def test_not_a_cache_file(self, tmp_path):
        path = tmp_path / "junk.gram"
        path.write_bytes(b"hello world, definitely not a gram")
        with pytest.raises(IngestionError):
            load_gram(path)

    def test_cached_gram_writes_then_reuses(self, tmp_path):
        enc = EncodingSpec("angle")
        X = np.random.default_rng(38).uniform(-1, 1, (7, 2))
        first = cached_gram(enc, X, tag="t0", directory=str(tmp_path))
        files = list(tmp_path.iterdir())
        assert len(files) == 1
        again = cached_gram(enc, X, tag="t0", directory=str(tmp_path))
        np.testing.assert_array_equal(first, again)
        assert list(tmp_path.iterdir()) == files

    def test_different_tag_different_key(self):
        enc = EncodingSpec("angle")
        assert encoding_key(enc, "a") != encoding_key(enc, "b")

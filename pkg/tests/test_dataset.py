import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amrbench import dataset as ds
from amrbench.errors import (
    BadMagicError,
    InvalidInputError,
    TruncatedFileError,
    VersionMismatchError,
)


class TestGenerate:
    def test_kept_counts(self, small_corpus):
        assert len(small_corpus) == 11 * 20 * 5

    def test_default_spec_size_arithmetic(self):
        # 11 schemes x 20 levels x 1000/pair; checked without generating
        spec = ds.DatasetSpec()
        n = len(spec.schemes) * len(spec.snr_levels) * spec.frames_per_pair
        assert n == 220_000

    def test_single_frame(self):
        corpus = ds.generate_dataset(
            ds.DatasetSpec(frames_per_pair=1, schemes=("BPSK",), snr_levels=(0,))
        )
        assert len(corpus) == 1
        assert corpus.labels[0] == ds.CLASS_NAMES.index("BPSK")
        assert corpus.snrs[0] == 0
        assert np.all(np.isfinite(corpus.iq))

    def test_deterministic(self):
        spec = ds.DatasetSpec(frames_per_pair=3, schemes=("QPSK", "GFSK"),
                              snr_levels=(-4, 8), seed=9)
        a = ds.generate_dataset(spec)
        b = ds.generate_dataset(spec)
        assert np.array_equal(a.iq, b.iq)
        assert np.array_equal(a.labels, b.labels)
        assert np.array_equal(a.snrs, b.snrs)

    def test_empty_spec_rejected(self):
        with pytest.raises(InvalidInputError):
            ds.DatasetSpec(schemes=())
        with pytest.raises(InvalidInputError):
            ds.DatasetSpec(frames_per_pair=0)


class TestSplit:
    def test_ten_per_stratum(self):
        corpus = ds.generate_dataset(
            ds.DatasetSpec(frames_per_pair=10, schemes=("BPSK",), snr_levels=(0,))
        )
        idx = ds.split(corpus)
        assert (len(idx.train), len(idx.val), len(idx.test)) == (6, 2, 2)

    def test_largest_remainder_five(self):
        # oracle: largest-remainder apportionment of 5 at 60/20/20
        assert ds._largest_remainder(5, (0.6, 0.2, 0.2)) == [3, 1, 1]

    def test_bad_ratios(self):
        corpus = ds.generate_dataset(
            ds.DatasetSpec(frames_per_pair=2, schemes=("BPSK",), snr_levels=(0,))
        )
        with pytest.raises(InvalidInputError):
            ds.split(corpus, ratios=(0.5, 0.2, 0.2))

    def test_disjoint_exhaustive_stratified(self, small_corpus):
        idx = ds.split(small_corpus, seed=3)
        union = np.concatenate([idx.train, idx.val, idx.test])
        assert len(union) == len(small_corpus)
        assert len(np.unique(union)) == len(small_corpus)
        # per stratum 60/20/20 within +-1 (5 frames -> 3/1/1)
        for part, want in ((idx.train, 3), (idx.val, 1), (idx.test, 1)):
            sub = small_corpus.subset(part)
            counts = {}
            for lab, snr in zip(sub.labels, sub.snrs):
                counts[(int(lab), int(snr))] = counts.get((int(lab), int(snr)), 0) + 1
            assert set(counts.values()) == {want}

    @settings(max_examples=25, deadline=None)
    @given(
        sizes=st.lists(st.integers(min_value=1, max_value=40), min_size=1, max_size=6),
        seed=st.integers(min_value=0, max_value=2**31 - 1),
    )
    def test_split_property(self, sizes, seed):
        labels = np.concatenate([
            np.full(n, i % 11, dtype=np.uint8) for i, n in enumerate(sizes)
        ])
        snrs = np.concatenate([
            np.full(n, (i * 2 - 4) % 20 - 10, dtype=np.int8)
            for i, n in enumerate(sizes)
        ])
        total = len(labels)
        corpus = ds.Dataset(np.zeros((total, 2, 128), np.float32), labels, snrs)
        idx = ds.split(corpus, seed=seed)
        union = np.concatenate(list(idx))
        assert len(union) == total
        assert len(np.unique(union)) == total
        for part, ratio in zip(idx, (0.6, 0.2, 0.2)):
            sub = corpus.subset(part)
            for i, n in enumerate(sizes):
                lab, snr = i % 11, (i * 2 - 4) % 20 - 10
                got = int(np.sum((sub.labels == lab) & (sub.snrs == snr)))
                want_all = [
                    (j, m) for j, m in enumerate(sizes)
                    if j % 11 == lab and (j * 2 - 4) % 20 - 10 == snr
                ]
                expected = sum(m for _, m in want_all)
                assert abs(got - ratio * expected) <= 1 * len(want_all)


class TestFilter:
    def test_high_half(self, small_corpus):
        subset = ds.filter_by_snr(small_corpus, 0, 18)
        assert len(subset) == len(small_corpus) // 2
        assert subset.snrs.min() >= 0

    def test_identity(self, small_corpus):
        subset = ds.filter_by_snr(small_corpus, -20, 18)
        assert len(subset) == len(small_corpus)
        assert np.array_equal(subset.iq, small_corpus.iq)

    def test_empty(self, small_corpus):
        assert len(ds.filter_by_snr(small_corpus, 19, 20)) == 0

    def test_order_preserved(self, small_corpus):
        subset = ds.filter_by_snr(small_corpus, -2, 2)
        positions = np.flatnonzero((small_corpus.snrs >= -2) & (small_corpus.snrs <= 2))
        assert np.array_equal(subset.iq, small_corpus.iq[positions])

    def test_bad_range(self, small_corpus):
        with pytest.raises(InvalidInputError):
            ds.filter_by_snr(small_corpus, 10, 0)


class TestSummarize:
    def test_uniform_counts(self, small_corpus):
        stats = ds.summarize(small_corpus)
        assert stats["uniform"]
        assert np.all(stats["counts"] == 5)
        assert stats["classes_present"] == 11

    def test_single_frame(self):
        corpus = ds.generate_dataset(
            ds.DatasetSpec(frames_per_pair=1, schemes=("QAM16",), snr_levels=(4,))
        )
        stats = ds.summarize(corpus)
        assert stats["counts"].sum() == 1

    def test_filtered_levels(self, small_corpus):
        stats = ds.summarize(ds.filter_by_snr(small_corpus, 0, 18))
        assert len(stats["snr_levels"]) == 10

    def test_empty_rejected(self):
        empty = ds.Dataset(np.zeros((0, 2, 128), np.float32),
                           np.zeros(0, np.uint8), np.zeros(0, np.int8))
        with pytest.raises(InvalidInputError):
            ds.summarize(empty)


class TestNativeFormat:
    def test_round_trip(self, small_corpus, tmp_path):
        path = tmp_path / "corpus.amrd"
        ds.write_native(small_corpus, path)
        back = ds.read_native(path)
        assert np.array_equal(back.iq, small_corpus.iq)
        assert np.array_equal(back.labels, small_corpus.labels)
        assert np.array_equal(back.snrs, small_corpus.snrs)
        assert back.metadata == small_corpus.metadata

    def test_round_trip_bit_exact_payload(self, tmp_path):
        corpus = ds.generate_dataset(
            ds.DatasetSpec(frames_per_pair=2, schemes=("8PSK",), snr_levels=(-20,))
        )
        path = tmp_path / "c.amrd"
        ds.write_native(corpus, path)
        back = ds.read_native(path)
        assert back.iq.tobytes() == corpus.iq.tobytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.amrd"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(BadMagicError):
            ds.read_native(path)

    def test_version_mismatch(self, small_corpus, tmp_path):
        path = tmp_path / "v.amrd"
        ds.write_native(small_corpus, path)
        raw = bytearray(path.read_bytes())
        raw[4:6] = (99).to_bytes(2, "little")
        path.write_bytes(bytes(raw))
        with pytest.raises(VersionMismatchError):
            ds.read_native(path)

    def test_truncation(self, small_corpus, tmp_path):
        path = tmp_path / "t.amrd"
        ds.write_native(small_corpus, path)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) - 100])
        with pytest.raises(TruncatedFileError):
            ds.read_native(path)

    def test_deterministic_bytes(self, small_corpus, tmp_path):
        p1, p2 = tmp_path / "a.amrd", tmp_path / "b.amrd"
        ds.write_native(small_corpus, p1)
        ds.write_native(small_corpus, p2)
        assert ds.corpus_hash(p1) == ds.corpus_hash(p2)

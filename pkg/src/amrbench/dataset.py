"""Labeled frame corpora: generation, stratified splitting, filtering,
summaries, and the native binary format.

Native format (little-endian): magic ``AMRD``, u16 version = 1, u32-length-
prefixed UTF-8 JSON metadata, u32 frame count, then per frame one packed
record: u8 class index, i8 snr_db, 256 f32 samples (I row then Q row).
Round trips are bit-exact for f32 payloads.
"""

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from . import sigsynth
from .errors import (
    BadMagicError,
    InvalidInputError,
    TruncatedFileError,
    VersionMismatchError,
)
from .seeding import seed_sequence
from .sigsynth import CLASS_NAMES, FRAME_LEN, SNR_LEVELS

MAGIC = b"AMRD"
VERSION = 1

_FRAME_DTYPE = np.dtype([("label", "u1"), ("snr", "i1"), ("iq", "<f4", (2 * FRAME_LEN,))])


@dataclass
class DatasetSpec:
    frames_per_pair: int = 1000
    schemes: tuple = CLASS_NAMES
    snr_levels: tuple = SNR_LEVELS
    seed: int = 0

    def __post_init__(self):
        if self.frames_per_pair < 1:
            raise InvalidInputError("frames_per_pair must be >= 1")
        if not self.schemes or not self.snr_levels:
            raise InvalidInputError("schemes and snr_levels must be nonempty")
        for name in self.schemes:
            sigsynth.scheme(name)
        self.schemes = tuple(self.schemes)
        self.snr_levels = tuple(int(s) for s in self.snr_levels)


@dataclass
class Dataset:
    iq: np.ndarray        # (n, 2, FRAME_LEN) float32
    labels: np.ndarray    # (n,) uint8, indices into CLASS_NAMES
    snrs: np.ndarray      # (n,) int8, dB
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.labels)

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices)
        return Dataset(self.iq[indices], self.labels[indices], self.snrs[indices],
                       dict(self.metadata))

    @property
    def num_classes(self) -> int:
        return len(CLASS_NAMES)


@dataclass
class SplitIndices:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __iter__(self):
        return iter((self.train, self.val, self.test))


def generate_dataset(spec: DatasetSpec) -> Dataset:
    """Synthesize |schemes| x |snr_levels| x frames_per_pair labeled frames.

    Each (scheme, snr) stratum gets its own seed stream, so strata can be
    generated in any order (or in parallel) with identical results.
    """
    n = len(spec.schemes) * len(spec.snr_levels) * spec.frames_per_pair
    iq = np.empty((n, 2, FRAME_LEN), dtype=np.float32)
    labels = np.empty(n, dtype=np.uint8)
    snrs = np.empty(n, dtype=np.int8)
    pos = 0
    for name in spec.schemes:
        sch = sigsynth.scheme(name)
        cls = sigsynth.class_index(name)
        for snr in spec.snr_levels:
            children = seed_sequence(spec.seed, "stratum", name, snr).spawn(
                spec.frames_per_pair
            )
            for child in children:
                rng = np.random.default_rng(child)
                clean = sigsynth.synthesize_clean(sch, rng)
                sigma2 = 10.0 ** (-snr / 10.0)
                noise = np.sqrt(sigma2 / 2.0) * (
                    rng.standard_normal(FRAME_LEN)
                    + 1j * rng.standard_normal(FRAME_LEN)
                )
                noisy = clean + noise
                iq[pos, 0] = noisy.real
                iq[pos, 1] = noisy.imag
                labels[pos] = cls
                snrs[pos] = snr
                pos += 1
    metadata = {
        "provenance": "generated",
        "spec": {
            "frames_per_pair": spec.frames_per_pair,
            "schemes": list(spec.schemes),
            "snr_levels": list(spec.snr_levels),
            "seed": spec.seed,
        },
        "class_names": list(CLASS_NAMES),
        "frame_shape": [2, FRAME_LEN],
        "modulator": {
            "sps": sigsynth.SPS,
            "rrc_rolloff": sigsynth.RRC_ROLLOFF,
            "rrc_span_symbols": sigsynth.RRC_SPAN,
            "gfsk_h": sigsynth.GFSK_H,
            "gfsk_bt": sigsynth.GFSK_BT,
            "cpfsk_h": sigsynth.CPFSK_H,
            "fm_deviation": sigsynth.FM_DEVIATION,
            "am_depth": sigsynth.AM_DEPTH,
            "message_cutoff": sigsynth.MESSAGE_CUTOFF,
        },
        "snr_definition": "mean signal power over total complex noise power per frame",
        "impairments": {"cfo": False, "timing_offset": False},
    }
    return Dataset(iq, labels, snrs, metadata)


# ---------------------------------------------------------------------------
# splitting and filtering


def split(dataset: Dataset, ratios=(0.6, 0.2, 0.2), seed: int = 0) -> SplitIndices:
    """Stratified per-(scheme, snr) split with largest-remainder rounding."""
    ratios = tuple(float(r) for r in ratios)
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise InvalidInputError(f"ratios must sum to 1, got {sum(ratios)}")
    parts = [[], [], []]
    strata = {}
    for i, (lab, snr) in enumerate(zip(dataset.labels, dataset.snrs)):
        strata.setdefault((int(lab), int(snr)), []).append(i)
    for key in sorted(strata):
        idx = np.array(strata[key])
        rng = np.random.default_rng(seed_sequence(seed, "split", *key))
        rng.shuffle(idx)
        counts = _largest_remainder(len(idx), ratios)
        offset = 0
        for p, c in enumerate(counts):
            parts[p].append(idx[offset : offset + c])
            offset += c
    train, val, test = (
        np.sort(np.concatenate(p)) if p else np.array([], dtype=int) for p in parts
    )
    return SplitIndices(train, val, test)


def _largest_remainder(n: int, ratios) -> list:
    exact = [n * r for r in ratios]
    counts = [int(np.floor(e)) for e in exact]
    short = n - sum(counts)
    remainders = sorted(
        range(len(ratios)), key=lambda i: (exact[i] - counts[i], -i), reverse=True
    )
    for i in range(short):
        counts[remainders[i]] += 1
    return counts


def filter_by_snr(dataset: Dataset, lo: int, hi: int) -> Dataset:
    """Frames with lo <= snr_db <= hi, original order preserved."""
    if lo > hi:
        raise InvalidInputError(f"lo {lo} > hi {hi}")
    mask = (dataset.snrs >= lo) & (dataset.snrs <= hi)
    return dataset.subset(np.flatnonzero(mask))


def summarize(dataset: Dataset) -> dict:
    """Counts per (class, snr), mean power, and a uniformity flag."""
    if len(dataset) == 0:
        raise InvalidInputError("empty dataset")
    levels = sorted(set(int(s) for s in dataset.snrs))
    counts = np.zeros((len(CLASS_NAMES), len(levels)), dtype=int)
    level_pos = {s: j for j, s in enumerate(levels)}
    for lab, snr in zip(dataset.labels, dataset.snrs):
        counts[int(lab), level_pos[int(snr)]] += 1
    present = counts[counts.sum(axis=1) > 0]
    nonzero = present[present > 0] if present.size else np.array([])
    uniform = bool(nonzero.size and np.all(present == nonzero[0]))
    power = float(np.mean(np.sum(dataset.iq.astype(np.float64) ** 2, axis=1)))
    return {
        "n_frames": len(dataset),
        "snr_levels": levels,
        "class_names": list(CLASS_NAMES),
        "counts": counts,
        "classes_present": int((counts.sum(axis=1) > 0).sum()),
        "mean_power": power,
        "uniform": uniform,
    }


# ---------------------------------------------------------------------------
# persistence


def write_native(dataset: Dataset, path, chunk: int = 16384):
    records = np.empty(len(dataset), dtype=_FRAME_DTYPE)
    records["label"] = dataset.labels
    records["snr"] = dataset.snrs
    records["iq"] = dataset.iq.reshape(len(dataset), -1)
    meta = json.dumps(dataset.metadata, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", VERSION))
        fh.write(struct.pack("<I", len(meta)))
        fh.write(meta)
        fh.write(struct.pack("<I", len(dataset)))
        for start in range(0, len(records), chunk):
            fh.write(records[start : start + chunk].tobytes())


def read_native(path) -> Dataset:
    with open(path, "rb") as fh:
        header = fh.read(10)
        if len(header) < 10:
            raise TruncatedFileError(f"{path}: header truncated")
        if header[:4] != MAGIC:
            raise BadMagicError(f"{path}: not a native frame corpus")
        (version,) = struct.unpack("<H", header[4:6])
        if version != VERSION:
            raise VersionMismatchError(f"{path}: version {version}, expected {VERSION}")
        (meta_len,) = struct.unpack("<I", header[6:10])
        meta_raw = fh.read(meta_len)
        if len(meta_raw) < meta_len:
            raise TruncatedFileError(f"{path}: metadata truncated")
        count_raw = fh.read(4)
        if len(count_raw) < 4:
            raise TruncatedFileError(f"{path}: frame count missing")
        (count,) = struct.unpack("<I", count_raw)
        payload = fh.read()
    expected = count * _FRAME_DTYPE.itemsize
    if len(payload) != expected:
        raise TruncatedFileError(
            f"{path}: payload {len(payload)} bytes, expected {expected}"
        )
    try:
        metadata = json.loads(meta_raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BadMagicError(f"{path}: metadata is not valid JSON: {exc}") from exc
    records = np.frombuffer(payload, dtype=_FRAME_DTYPE, count=count)
    iq = records["iq"].reshape(count, 2, FRAME_LEN).copy()
    return Dataset(iq, records["label"].copy(), records["snr"].astype(np.int8).copy(),
                   metadata)


def corpus_hash(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()

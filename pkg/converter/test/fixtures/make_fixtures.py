"""Regenerates the committed pickle fixtures. Run from this directory:

    python3 make_fixtures.py
"""

import json
import pickle
from pathlib import Path

import numpy as np

HERE = Path(__file__).parent

CLASS_NAMES = ("WBFM", "AM-DSB", "BPSK", "QPSK", "8PSK", "QAM64",
               "CPFSK", "AM-SSB", "PAM4", "GFSK", "QAM16")
SNR_LEVELS = tuple(range(-20, 20, 2))


def mini_archive():
    """All 11 modulations x 20 SNR levels x 2 float32 frames, protocol 2."""
    rng = np.random.default_rng(1234)
    archive = {}
    expected = {}
    for name in CLASS_NAMES:
        for snr in SNR_LEVELS:
            frames = rng.standard_normal((2, 2, 128)).astype(np.float32)
            archive[(name, snr)] = frames
            expected[f"{name}|{snr}"] = [float(frames[0, 0, 0]),
                                         float(frames[1, 1, 127])]
    (HERE / "mini_archive.pkl").write_bytes(pickle.dumps(archive, protocol=2))
    (HERE / "mini_archive_expected.json").write_text(
        json.dumps(expected, indent=1, sort_keys=True))


def single_entry():
    """One float64 stack with a big-endian twist exercised via protocol 4."""
    frames = np.linspace(-1.0, 1.0, 2 * 128, dtype=np.float64).reshape(1, 2, 128)
    archive = {("qam-16", 0): frames}
    (HERE / "single_entry.pkl").write_bytes(pickle.dumps(archive, protocol=4))
    (HERE / "single_entry_expected.json").write_text(
        json.dumps([float(np.float32(v)) for v in frames.ravel()[:5]]))


def unknown_modulation():
    archive = {("OOK", 0): np.zeros((1, 2, 128), dtype=np.float32)}
    (HERE / "unknown_mod.pkl").write_bytes(pickle.dumps(archive, protocol=2))


def bad_shape():
    archive = {("BPSK", 0): np.zeros((1, 2, 64), dtype=np.float32)}
    (HERE / "bad_shape.pkl").write_bytes(pickle.dumps(archive, protocol=2))


if __name__ == "__main__":
    mini_archive()
    single_entry()
    unknown_modulation()
    bad_shape()
    print("fixtures written to", HERE)

"""Baseband IQ synthesis for the 11 benchmark modulations plus a calibrated
AWGN channel.

All waveforms are unit-mean-power complex baseband; only sample-rate ratios
matter. Frame geometry follows the 2x128 window / 8 samples-per-symbol
convention of the benchmark corpus. Defaults that the corpus metadata
records: RRC rolloff 0.35 over an 8-symbol span, GFSK h=0.5 BT=0.35,
CPFSK h=0.5, FM peak deviation 0.25 cycles/sample, AM depth 0.5, analog
message = seeded Gaussian noise low-passed at 1/8 of the sample rate.
SNR is mean signal power over total complex noise power per frame.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sp_signal

from .errors import CalibrationError, InvalidInputError, WrongKindError
from .seeding import derive_rng

FRAME_LEN = 128
SPS = 8
RRC_ROLLOFF = 0.35
RRC_SPAN = 8
GFSK_H = 0.5
GFSK_BT = 0.35
CPFSK_H = 0.5
FM_DEVIATION = 0.25
AM_DEPTH = 0.5
MESSAGE_CUTOFF = 0.125  # fraction of sample rate

SNR_LEVELS = tuple(range(-20, 20, 2))  # the 20 benchmark levels


@dataclass(frozen=True)
class ModulationScheme:
    name: str
    kind: str  # "analog" or "digital"
    bits_per_symbol: int = 0

    @property
    def is_digital(self) -> bool:
        return self.kind == "digital"


MODULATIONS = (
    ModulationScheme("WBFM", "analog"),
    ModulationScheme("AM-DSB", "analog"),
    ModulationScheme("BPSK", "digital", 1),
    ModulationScheme("QPSK", "digital", 2),
    ModulationScheme("8PSK", "digital", 3),
    ModulationScheme("QAM64", "digital", 6),
    ModulationScheme("CPFSK", "digital", 1),
    ModulationScheme("AM-SSB", "analog"),
    ModulationScheme("PAM4", "digital", 2),
    ModulationScheme("GFSK", "digital", 1),
    ModulationScheme("QAM16", "digital", 4),
)

CLASS_NAMES = tuple(m.name for m in MODULATIONS)
_BY_NAME = {m.name: m for m in MODULATIONS}
CPM_SCHEMES = ("GFSK", "CPFSK")


def scheme(name: str) -> ModulationScheme:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise InvalidInputError(
            f"unknown modulation {name!r}; known: {', '.join(CLASS_NAMES)}"
        ) from None


def class_index(name: str) -> int:
    return CLASS_NAMES.index(scheme(name).name)


@dataclass
class Waveform:
    samples: np.ndarray
    sample_rate: float = 1.0

    @property
    def power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))


@dataclass
class ChannelParams:
    snr_db: float
    enable_cfo: bool = False
    cfo_fraction: float = 0.0
    enable_timing_offset: bool = False
    rng_seed: int = 0


# ---------------------------------------------------------------------------
# constellations


def _gray(i: int) -> int:
    return i ^ (i >> 1)


def _pam_gray_levels(n_bits: int) -> dict:
    """bit value -> amplitude level, Gray-coded along the amplitude axis."""
    m = 1 << n_bits
    levels = np.arange(-(m - 1), m, 2, dtype=float)
    return {_gray(i): levels[i] for i in range(m)}


_PAM2 = _pam_gray_levels(1)
_PAM4_LEVELS = _pam_gray_levels(2)
_PAM8_LEVELS = _pam_gray_levels(3)
_PSK8_POS = {_gray(k): k for k in range(8)}


def constellation(sch: ModulationScheme) -> np.ndarray:
    """All 2**bits_per_symbol points indexed by bit value, unit mean energy."""
    if not sch.is_digital or sch.name in CPM_SCHEMES:
        raise WrongKindError(f"{sch.name} has no linear constellation")
    n = 1 << sch.bits_per_symbol
    values = np.arange(n)
    bits = ((values[:, None] >> np.arange(sch.bits_per_symbol - 1, -1, -1)) & 1).astype(
        np.uint8
    )
    return map_symbols(sch, bits.reshape(-1))


def map_symbols(sch: ModulationScheme, bits) -> np.ndarray:
    """Gray-mapped unit-energy symbols (or +/-1 frequency symbols for CPM)."""
    if isinstance(sch, str):
        sch = scheme(sch)
    if not sch.is_digital:
        raise WrongKindError(f"{sch.name} is analog; map_symbols needs a digital scheme")
    bits = np.asarray(bits)
    if bits.ndim != 1 or not np.all((bits == 0) | (bits == 1)):
        raise InvalidInputError("bits must be a flat 0/1 sequence")
    bps = sch.bits_per_symbol
    if len(bits) % bps:
        raise InvalidInputError(
            f"{sch.name}: bit count {len(bits)} is not a multiple of {bps}"
        )
    groups = bits.reshape(-1, bps)
    if sch.name in CPM_SCHEMES:
        return 1.0 - 2.0 * groups[:, 0].astype(float)
    values = np.zeros(len(groups), dtype=int)
    for b in range(bps):
        values = (values << 1) | groups[:, b]
    if sch.name == "BPSK":
        return 1.0 - 2.0 * values.astype(float) + 0j
    if sch.name == "QPSK":
        i = 1.0 - 2.0 * groups[:, 0]
        q = 1.0 - 2.0 * groups[:, 1]
        return (i + 1j * q) / np.sqrt(2.0)
    if sch.name == "8PSK":
        pos = np.array([_PSK8_POS[v] for v in values])
        return np.exp(2j * np.pi * pos / 8.0)
    if sch.name == "PAM4":
        amp = np.array([_PAM4_LEVELS[v] for v in values])
        return amp / np.sqrt(5.0) + 0j
    if sch.name == "QAM16":
        i = np.array([_PAM4_LEVELS[v >> 2] for v in values])
        q = np.array([_PAM4_LEVELS[v & 0b11] for v in values])
        return (i + 1j * q) / np.sqrt(10.0)
    if sch.name == "QAM64":
        i = np.array([_PAM8_LEVELS[v >> 3] for v in values])
        q = np.array([_PAM8_LEVELS[v & 0b111] for v in values])
        return (i + 1j * q) / np.sqrt(42.0)
    raise InvalidInputError(f"no symbol mapper for {sch.name}")


# ---------------------------------------------------------------------------
# pulse shaping


def rrc_taps(sps: int = SPS, rolloff: float = RRC_ROLLOFF, span: int = RRC_SPAN):
    """Root-raised-cosine impulse response, unit energy, span*sps+1 taps."""
    if not 0 < rolloff < 1:
        raise InvalidInputError(f"rolloff must be in (0, 1), got {rolloff}")
    n = span * sps + 1
    t = (np.arange(n) - (n - 1) / 2) / sps
    beta = rolloff
    taps = np.empty(n)
    for k, tk in enumerate(t):
        if abs(tk) < 1e-12:
            taps[k] = 1.0 + beta * (4.0 / np.pi - 1.0)
        elif abs(abs(tk) - 1.0 / (4.0 * beta)) < 1e-12:
            taps[k] = (beta / np.sqrt(2.0)) * (
                (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * beta))
                + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * beta))
            )
        else:
            num = np.sin(np.pi * tk * (1.0 - beta)) + 4.0 * beta * tk * np.cos(
                np.pi * tk * (1.0 + beta)
            )
            den = np.pi * tk * (1.0 - (4.0 * beta * tk) ** 2)
            taps[k] = num / den
    return taps / np.sqrt(np.sum(taps**2))


def normalize_power(samples: np.ndarray) -> np.ndarray:
    """Scale to unit mean power; all-zero input passes through unchanged."""
    p = np.mean(np.abs(samples) ** 2)
    if p == 0:
        return samples
    return samples / np.sqrt(p)


def pulse_shape(symbols, sps: int = SPS, rolloff: float = RRC_ROLLOFF,
                span: int = RRC_SPAN) -> Waveform:
    """Upsample and RRC-filter; output length len(symbols)*sps, unit power."""
    symbols = np.asarray(symbols, dtype=complex)
    if symbols.size == 0:
        raise InvalidInputError("empty symbol sequence")
    if sps < 2:
        raise InvalidInputError(f"sps must be >= 2, got {sps}")
    taps = rrc_taps(sps, rolloff, span)
    up = np.zeros(len(symbols) * sps, dtype=complex)
    up[::sps] = symbols
    full = np.convolve(up, taps)
    delay = (len(taps) - 1) // 2
    trimmed = full[delay : delay + len(symbols) * sps]
    return Waveform(normalize_power(trimmed))


# ---------------------------------------------------------------------------
# continuous-phase and analog modulators


def _gaussian_pulse_taps(sps: int, bt: float, span: int = 4) -> np.ndarray:
    """Gaussian filter for GFSK, area-normalized so the per-symbol phase
    increment is preserved."""
    t = (np.arange(span * sps + 1) - span * sps / 2) / sps
    sigma = np.sqrt(np.log(2.0)) / (2.0 * np.pi * bt)
    taps = np.exp(-(t**2) / (2.0 * sigma**2))
    return taps / taps.sum()


def modulate_cpm(sch, freq_symbols, sps: int = SPS, h: float | None = None,
                 bt: float = GFSK_BT) -> Waveform:
    """Continuous-phase modulation; |s| = 1 exactly.

    Phase is the running sum of the (Gaussian-filtered for GFSK) rectangular
    frequency pulse scaled so each symbol advances the phase by pi*h*a_k.
    """
    if isinstance(sch, str):
        sch = scheme(sch)
    if sch.name not in CPM_SCHEMES:
        raise WrongKindError(f"{sch.name} is not a continuous-phase scheme")
    if h is None:
        h = GFSK_H if sch.name == "GFSK" else CPFSK_H
    if h <= 0:
        raise InvalidInputError(f"modulation index must be positive, got {h}")
    freq_symbols = np.asarray(freq_symbols, dtype=float)
    if freq_symbols.size == 0:
        raise InvalidInputError("empty symbol sequence")
    pulse = np.repeat(freq_symbols, sps)
    if sch.name == "GFSK":
        taps = _gaussian_pulse_taps(sps, bt)
        pad = len(taps) // 2
        padded = np.concatenate([
            np.full(pad, pulse[0]), pulse, np.full(pad, pulse[-1])
        ])
        pulse = np.convolve(padded, taps, mode="valid")
    phase = np.pi * h * np.cumsum(pulse) / sps
    return Waveform(np.exp(1j * phase))


def band_limited_message(n: int, rng, cutoff: float = MESSAGE_CUTOFF) -> np.ndarray:
    """Filtered Gaussian noise, peak-normalized to 1; the analog source."""
    taps = sp_signal.firwin(129, cutoff * 2.0)
    raw = rng.standard_normal(n + 2 * len(taps))
    smooth = sp_signal.lfilter(taps, 1.0, raw)[len(taps) : len(taps) + n]
    peak = np.max(np.abs(smooth))
    return smooth / peak if peak > 0 else smooth


def analytic_signal(x: np.ndarray) -> np.ndarray:
    """One-sided-spectrum (analytic) signal of a real sequence via FFT."""
    n = len(x)
    spectrum = np.fft.fft(x)
    gain = np.zeros(n)
    gain[0] = 1.0
    if n % 2 == 0:
        gain[n // 2] = 1.0
        gain[1 : n // 2] = 2.0
    else:
        gain[1 : (n + 1) // 2] = 2.0
    return np.fft.ifft(spectrum * gain)


def modulate_analog(sch, message, fm_deviation: float = FM_DEVIATION,
                    am_depth: float = AM_DEPTH) -> Waveform:
    """WBFM / AM-DSB / AM-SSB of a peak-bounded real message, unit power."""
    if isinstance(sch, str):
        sch = scheme(sch)
    if sch.kind != "analog":
        raise WrongKindError(f"{sch.name} is digital; use the symbol pipeline")
    message = np.asarray(message, dtype=float)
    if message.size == 0:
        raise InvalidInputError("empty message")
    if np.max(np.abs(message)) > 1.0 + 1e-9:
        raise InvalidInputError("message amplitude exceeds 1")
    if sch.name == "WBFM":
        phase = 2.0 * np.pi * fm_deviation * np.cumsum(message)
        return Waveform(np.exp(1j * phase))
    if sch.name == "AM-DSB":
        envelope = 1.0 + am_depth * message
        return Waveform(normalize_power(envelope.astype(complex)))
    # AM-SSB: quadrature construction, upper sideband
    return Waveform(normalize_power(analytic_signal(message)))


# ---------------------------------------------------------------------------
# channel


def apply_awgn(waveform: Waveform, channel: ChannelParams) -> Waveform:
    """Add circular complex Gaussian noise at the target SNR.

    Noise variance per complex sample is 10^(-snr_db/10) against the
    unit-power input. Deterministic for a given rng_seed.
    """
    samples = np.asarray(waveform.samples, dtype=complex)
    power = float(np.mean(np.abs(samples) ** 2))
    if not 0.9 <= power <= 1.1:
        raise CalibrationError(
            f"input power {power:.4f} outside [0.9, 1.1]; normalize first"
        )
    rng = derive_rng(channel.rng_seed, "channel")
    out = samples
    if channel.enable_cfo and channel.cfo_fraction != 0.0:
        ramp = np.exp(2j * np.pi * channel.cfo_fraction * np.arange(len(samples)))
        out = out * ramp
    if channel.enable_timing_offset:
        shift = rng.uniform(-0.5, 0.5)
        k = np.fft.fftfreq(len(out))
        out = np.fft.ifft(np.fft.fft(out) * np.exp(-2j * np.pi * k * shift))
    sigma2 = 10.0 ** (-channel.snr_db / 10.0)
    noise = np.sqrt(sigma2 / 2.0) * (
        rng.standard_normal(len(out)) + 1j * rng.standard_normal(len(out))
    )
    return Waveform(out + noise, waveform.sample_rate)


def measure_snr_db(clean: np.ndarray, noisy: np.ndarray) -> float:
    """Empirical SNR from a clean/noisy pair (total power ratio)."""
    noise = np.asarray(noisy) - np.asarray(clean)
    return 10.0 * np.log10(
        np.sum(np.abs(clean) ** 2) / np.sum(np.abs(noise) ** 2)
    )


# ---------------------------------------------------------------------------
# frame assembly


def _center_slice(samples: np.ndarray, n: int) -> np.ndarray:
    start = (len(samples) - n) // 2
    if start < 0:
        raise InvalidInputError(f"waveform shorter than {n} samples")
    return samples[start : start + n]


def synthesize_clean(sch, rng, n: int = FRAME_LEN) -> np.ndarray:
    """One noise-free unit-power frame of n complex samples."""
    if isinstance(sch, str):
        sch = scheme(sch)
    if sch.name in CPM_SCHEMES:
        nsym = n // SPS + 4
        freq = map_symbols(sch, rng.integers(0, 2, nsym))
        wave = modulate_cpm(sch, freq)
        return normalize_power(_center_slice(wave.samples, n))
    if sch.is_digital:
        nsym = n // SPS + 2 * RRC_SPAN
        bits = rng.integers(0, 2, nsym * sch.bits_per_symbol)
        symbols = map_symbols(sch, bits)
        wave = pulse_shape(symbols)
        return normalize_power(_center_slice(wave.samples, n))
    message = band_limited_message(n, rng)
    return normalize_power(modulate_analog(sch, message).samples)


def synthesize_frame(sch, snr_db: float, seed: int) -> np.ndarray:
    """One labeled-corpus frame: (2, n) float32, row 0 = I, row 1 = Q."""
    if isinstance(sch, str):
        sch = scheme(sch)
    rng = derive_rng(seed, "frame", sch.name, float(snr_db))
    clean = synthesize_clean(sch, rng)
    sigma2 = 10.0 ** (-snr_db / 10.0)
    noise = np.sqrt(sigma2 / 2.0) * (
        rng.standard_normal(len(clean)) + 1j * rng.standard_normal(len(clean))
    )
    noisy = clean + noise
    return np.stack([noisy.real, noisy.imag]).astype(np.float32)

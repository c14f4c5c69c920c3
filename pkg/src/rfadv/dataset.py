"""Synthetic I/Q modulation dataset and its RMLD binary container.

Frames mimic the structure of the public RML2016.10a corpus: 11 modulation
classes at 20 SNR tags from -20 to 18 dB, each frame 128 complex baseband
samples stored as an in-phase row over a quadrature row. Digital schemes
use 8 samples per symbol; linear constellations are shaped with a
root-raised-cosine pulse (roll-off 0.35), CPFSK/GFSK integrate phase, and
the analog schemes modulate a band-limited filtered-noise source standing
in for programme audio. Every clean frame is normalized to unit average
power before complex white Gaussian noise of power 10^(-snr/10) is added,
which is the convention the perturbation/noise power accounting relies on.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import FileFormatError, ValidationError

FRAME_LEN = 128
SAMPLES_PER_SYMBOL = 8
RRC_ROLLOFF = 0.35
RRC_SPAN_SYMBOLS = 8

SNR_GRID_DB = tuple(range(-20, 20, 2))

DATASET_MAGIC = b"RMLD"
DATASET_VERSION = 1
RECORD_BYTES = 2 + FRAME_LEN * 2 * 4
HEADER_BYTES = 4 + 4 + 8 + 1


class Modulation(IntEnum):
    BPSK = 0
    QPSK = 1
    PSK8 = 2
    QAM16 = 3
    QAM64 = 4
    CPFSK = 5
    GFSK = 6
    PAM4 = 7
    WBFM = 8
    AMSSB = 9
    AMDSB = 10


DIGITAL_LINEAR = (Modulation.BPSK, Modulation.QPSK, Modulation.PSK8,
                  Modulation.QAM16, Modulation.QAM64, Modulation.PAM4)


@dataclass
class Example:
    frame: np.ndarray  # (2, 128) float32, I row then Q row
    mod_id: int
    snr_db: int


@dataclass
class Dataset:
    examples: list[Example]
    split_seed: int
    train_indices: np.ndarray = field(repr=False)
    test_indices: np.ndarray = field(repr=False)

    def train_examples(self):
        return [self.examples[i] for i in self.train_indices]

    def test_examples(self):
        return [self.examples[i] for i in self.test_indices]


def measure_power(frame) -> float:
    """Mean squared magnitude per time sample: (1/128) sum(I^2 + Q^2)."""
    f = np.asarray(frame, dtype=np.float64)
    return float((f * f).sum() / FRAME_LEN)


# --- constellations and pulse shapes -----------------------------------

def constellation(mod: Modulation) -> np.ndarray:
    """Unit-average-power constellation points for a linear scheme."""
    if mod == Modulation.BPSK:
        return np.array([1.0, -1.0], dtype=complex)
    if mod == Modulation.QPSK:
        return np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)
    if mod == Modulation.PSK8:
        return np.exp(2j * np.pi * np.arange(8) / 8.0)
    if mod == Modulation.PAM4:
        return np.array([-3.0, -1.0, 1.0, 3.0], dtype=complex) / np.sqrt(5.0)
    if mod == Modulation.QAM16:
        levels = np.array([-3.0, -1.0, 1.0, 3.0])
        pts = (levels[:, None] + 1j * levels[None, :]).ravel()
        return pts / np.sqrt(10.0)
    if mod == Modulation.QAM64:
        levels = np.array([-7.0, -5.0, -3.0, -1.0, 1.0, 3.0, 5.0, 7.0])
        pts = (levels[:, None] + 1j * levels[None, :]).ravel()
        return pts / np.sqrt(42.0)
    raise ValidationError(f"{mod.name} has no linear constellation")


def random_symbols(mod: Modulation, n: int, rng) -> np.ndarray:
    points = constellation(mod)
    return points[rng.integers(0, len(points), size=n)]


def rrc_taps(sps: int, span: int, beta: float) -> np.ndarray:
    """Root-raised-cosine impulse response, unit energy."""
    n = span * sps
    t = (np.arange(-n // 2, n // 2 + 1)) / sps
    taps = np.empty_like(t)
    for i, ti in enumerate(t):
        if abs(ti) < 1e-12:
            taps[i] = 1.0 - beta + 4.0 * beta / np.pi
        elif abs(abs(4.0 * beta * ti) - 1.0) < 1e-9:
            taps[i] = (beta / np.sqrt(2.0)) * (
                (1 + 2 / np.pi) * np.sin(np.pi / (4 * beta))
                + (1 - 2 / np.pi) * np.cos(np.pi / (4 * beta))
            )
        else:
            num = (np.sin(np.pi * ti * (1 - beta))
                   + 4 * beta * ti * np.cos(np.pi * ti * (1 + beta)))
            den = np.pi * ti * (1 - (4 * beta * ti) ** 2)
            taps[i] = num / den
    return taps / np.sqrt((taps * taps).sum())


def lowpass_taps(cutoff: float, numtaps: int = 63) -> np.ndarray:
    """Hamming-windowed sinc FIR, cutoff in cycles/sample, unit DC gain."""
    n = np.arange(numtaps) - (numtaps - 1) / 2.0
    taps = 2.0 * cutoff * np.sinc(2.0 * cutoff * n) * np.hamming(numtaps)
    return taps / taps.sum()


def _audio_source(rng, n: int, cutoff: float = 0.08) -> np.ndarray:
    """Band-limited filtered-noise stand-in for programme audio, unit RMS."""
    taps = lowpass_taps(cutoff)
    raw = rng.standard_normal(n + taps.size)
    audio = np.convolve(raw, taps, mode="valid")[:n]
    rms = np.sqrt((audio * audio).mean())
    return audio / rms


def _analytic(x: np.ndarray) -> np.ndarray:
    """Analytic signal via the FFT one-sided spectrum method."""
    n = x.size
    spec = np.fft.fft(x)
    h = np.zeros(n)
    h[0] = 1.0
    if n % 2 == 0:
        h[n // 2] = 1.0
        h[1:n // 2] = 2.0
    else:
        h[1:(n + 1) // 2] = 2.0
    return np.fft.ifft(spec * h)


# --- per-class clean baseband generators --------------------------------

def _linear_baseband(mod: Modulation, rng) -> np.ndarray:
    sps = SAMPLES_PER_SYMBOL
    taps = rrc_taps(sps, RRC_SPAN_SYMBOLS, RRC_ROLLOFF)
    n_sym = FRAME_LEN // sps + 2 * RRC_SPAN_SYMBOLS
    syms = random_symbols(mod, n_sym, rng)
    train = np.zeros(n_sym * sps, dtype=complex)
    train[::sps] = syms
    shaped = np.convolve(train, taps, mode="same")
    lead = RRC_SPAN_SYMBOLS * sps // 2
    start = lead + int(rng.integers(0, sps))
    return shaped[start:start + FRAME_LEN]


def _fsk_baseband(rng, mod_index: float, bt: float | None) -> np.ndarray:
    sps = SAMPLES_PER_SYMBOL
    n_sym = FRAME_LEN // sps + 4
    bits = rng.integers(0, 2, size=n_sym) * 2.0 - 1.0
    nrz = np.repeat(bits, sps)
    if bt is not None:
        # Gaussian frequency pulse spanning ~2 symbols.
        t = np.arange(-2 * sps, 2 * sps + 1) / sps
        g = np.exp(-2.0 * (np.pi * bt * t) ** 2 / np.log(2.0))
        g /= g.sum()
        nrz = np.convolve(nrz, g, mode="same")
    phase = np.cumsum(np.pi * mod_index * nrz / sps)
    start = sps + int(rng.integers(0, sps))
    return np.exp(1j * phase)[start:start + FRAME_LEN]


def _wbfm_baseband(rng) -> np.ndarray:
    audio = _audio_source(rng, FRAME_LEN + SAMPLES_PER_SYMBOL)
    deviation = 0.12  # peak-ish frequency deviation, cycles/sample
    phase = np.cumsum(2.0 * np.pi * deviation * audio)
    start = int(rng.integers(0, SAMPLES_PER_SYMBOL))
    return np.exp(1j * phase)[start:start + FRAME_LEN]


def _amdsb_baseband(rng) -> np.ndarray:
    audio = _audio_source(rng, FRAME_LEN)
    return (1.0 + 0.5 * audio).astype(complex)


def _amssb_baseband(rng) -> np.ndarray:
    return _analytic(_audio_source(rng, FRAME_LEN))


def clean_baseband(mod: Modulation, rng) -> np.ndarray:
    """128 complex baseband samples, normalized to unit average power.

    Every frame carries a uniform random carrier phase: receivers are not
    phase-synchronized to the transmitter, and without it the linear
    constellations sit axis-aligned in I/Q, which makes the classes
    unrealistically separable.
    """
    if mod in DIGITAL_LINEAR:
        sig = _linear_baseband(mod, rng)
    elif mod == Modulation.CPFSK:
        sig = _fsk_baseband(rng, mod_index=0.5, bt=None)
    elif mod == Modulation.GFSK:
        sig = _fsk_baseband(rng, mod_index=0.35, bt=0.35)
    elif mod == Modulation.WBFM:
        sig = _wbfm_baseband(rng)
    elif mod == Modulation.AMDSB:
        sig = _amdsb_baseband(rng)
    elif mod == Modulation.AMSSB:
        sig = _amssb_baseband(rng)
    else:
        raise ValidationError(f"unknown modulation {mod}")
    sig = sig * np.exp(2j * np.pi * rng.random())
    power = (sig.real ** 2 + sig.imag ** 2).mean()
    return sig / np.sqrt(power)


def synthesize_example(mod: Modulation | int, snr_db: int, rng_seed) -> Example:
    """One seeded frame of the given class at the given SNR tag."""
    mod = Modulation(mod)
    if snr_db not in SNR_GRID_DB:
        raise ValidationError(
            f"snr_db must be one of {SNR_GRID_DB[0]}..{SNR_GRID_DB[-1]} "
            f"step 2, got {snr_db}"
        )
    rng = np.random.default_rng(rng_seed)
    sig = clean_baseband(mod, rng)
    noise_power = 10.0 ** (-snr_db / 10.0)
    scale = np.sqrt(noise_power / 2.0)
    noise = scale * (rng.standard_normal(FRAME_LEN)
                     + 1j * rng.standard_normal(FRAME_LEN))
    rx = sig + noise
    frame = np.stack([rx.real, rx.imag]).astype(np.float32)
    return Example(frame=frame, mod_id=int(mod), snr_db=int(snr_db))


def make_split(n_examples: int, split_seed: int):
    """Deterministic disjoint 50/50 shuffle split covering all indices."""
    rng = np.random.default_rng(split_seed)
    order = rng.permutation(n_examples)
    half = n_examples // 2
    return np.sort(order[:half]), np.sort(order[half:])


def generate_dataset(n_per_class_per_snr: int, seed: int) -> Dataset:
    """Balanced dataset of 11 * 20 * n seeded frames with a 50/50 split."""
    if n_per_class_per_snr < 1:
        raise ValidationError(
            f"n_per_class_per_snr must be >= 1, got {n_per_class_per_snr}"
        )
    examples = []
    idx = 0
    for mod in Modulation:
        for snr in SNR_GRID_DB:
            for _ in range(n_per_class_per_snr):
                examples.append(synthesize_example(mod, snr, (seed, idx)))
                idx += 1
    train_idx, test_idx = make_split(len(examples), seed)
    return Dataset(examples=examples, split_seed=seed,
                   train_indices=train_idx, test_indices=test_idx)


def write_dataset(ds: Dataset, path) -> None:
    with open(path, "wb") as f:
        f.write(DATASET_MAGIC)
        f.write(struct.pack("<IQB", DATASET_VERSION, len(ds.examples), FRAME_LEN))
        for ex in ds.examples:
            f.write(struct.pack("<Bb", ex.mod_id, ex.snr_db))
            f.write(np.ascontiguousarray(ex.frame, dtype="<f4").tobytes())


def read_dataset(path, split_seed: int = 0) -> Dataset:
    """Parse an RMLD file; the split is recomputed from split_seed."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < HEADER_BYTES:
        raise FileFormatError(f"{path}: truncated header ({len(data)} bytes)")
    if data[:4] != DATASET_MAGIC:
        raise FileFormatError(f"{path}: bad magic {data[:4]!r}")
    version, count, frame_len = struct.unpack("<IQB", data[4:HEADER_BYTES])
    if version != DATASET_VERSION:
        raise FileFormatError(
            f"{path}: unsupported version {version} (expected {DATASET_VERSION})"
        )
    if frame_len != FRAME_LEN:
        raise FileFormatError(
            f"{path}: frame_len {frame_len} != {FRAME_LEN}"
        )
    expected = HEADER_BYTES + count * RECORD_BYTES
    if len(data) != expected:
        raise FileFormatError(
            f"{path}: size {len(data)} != expected {expected} for "
            f"count {count}"
        )
    examples = []
    off = HEADER_BYTES
    for _ in range(count):
        mod_id, snr_db = struct.unpack("<Bb", data[off:off + 2])
        off += 2
        frame = np.frombuffer(data, dtype="<f4", count=2 * FRAME_LEN,
                              offset=off).reshape(2, FRAME_LEN).copy()
        off += FRAME_LEN * 2 * 4
        examples.append(Example(frame=frame, mod_id=mod_id, snr_db=snr_db))
    train_idx, test_idx = make_split(len(examples), split_seed)
    return Dataset(examples=examples, split_seed=split_seed,
                   train_indices=train_idx, test_indices=test_idx)

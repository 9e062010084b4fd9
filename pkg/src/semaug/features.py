"""Log-Mel filterbank extraction and global CMVN."""
from __future__ import annotations

import io
import wave
from dataclasses import dataclass
from typing import Iterable

import numpy as np


class FeatureError(ValueError):
    pass


class NotRiff(FeatureError):
    pass


class UnsupportedEncoding(FeatureError):
    pass


class UnsupportedChannels(FeatureError):
    pass


class TooShort(FeatureError):
    pass


class EmptyStats(FeatureError):
    pass


class DimensionMismatch(FeatureError):
    pass


def parse_wav(data: bytes) -> tuple[int, np.ndarray]:
    """Decode 16-bit PCM mono WAV bytes to (sample_rate, float64 samples in [-1, 1))."""
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise NotRiff("not a RIFF/WAVE file")
    try:
        with wave.open(io.BytesIO(data), "rb") as w:
            channels, width, rate = w.getnchannels(), w.getsampwidth(), w.getframerate()
            if width != 2:
                raise UnsupportedEncoding(f"{8 * width}-bit samples; only 16-bit PCM is supported")
            if channels != 1:
                raise UnsupportedChannels(f"{channels} channels; only mono is supported")
            raw = w.readframes(w.getnframes())
    except wave.Error as exc:
        raise UnsupportedEncoding(str(exc)) from None
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return rate, samples


def read_wav(path) -> tuple[int, np.ndarray]:
    with open(path, "rb") as f:
        return parse_wav(f.read())


def write_wav(path, samples: np.ndarray, sample_rate: int) -> None:
    pcm = np.clip(np.round(np.asarray(samples) * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sample_rate)
        w.writeframes(pcm.tobytes())


@dataclass(frozen=True)
class FbankConfig:
    sample_rate_hz: int = 16000
    frame_len_ms: float = 25.0
    frame_shift_ms: float = 10.0
    num_mel_bins: int = 40
    fft_size: int = 512
    preemphasis: float = 0.97
    low_freq_hz: float = 20.0
    high_freq_hz: float | None = None  # None -> Nyquist
    dither: float = 0.0
    log_floor: float = 1e-10

    def __post_init__(self):
        if self.sample_rate_hz <= 0 or self.num_mel_bins <= 0:
            raise ValueError("sample rate and mel bin count must be positive")
        if self.fft_size <= 0 or self.fft_size & (self.fft_size - 1):
            raise ValueError(f"fft_size {self.fft_size} is not a power of two")
        if not 0.0 <= self.preemphasis < 1.0:
            raise ValueError("preemphasis must lie in [0, 1)")
        if self.dither < 0 or self.log_floor <= 0:
            raise ValueError("dither must be >= 0 and log_floor > 0")
        if self.frame_len_samples > self.fft_size:
            raise ValueError(f"frame of {self.frame_len_samples} samples exceeds fft_size {self.fft_size}")
        if self.frame_shift_samples <= 0:
            raise ValueError("frame shift must be positive")
        if not 0.0 <= self.low_freq_hz < self.high_freq < self.sample_rate_hz / 2 + 1e-9:
            raise ValueError("need 0 <= low_freq < high_freq <= Nyquist")

    @property
    def frame_len_samples(self) -> int:
        return int(round(self.sample_rate_hz * self.frame_len_ms / 1000.0))

    @property
    def frame_shift_samples(self) -> int:
        return int(round(self.sample_rate_hz * self.frame_shift_ms / 1000.0))

    @property
    def high_freq(self) -> float:
        return self.sample_rate_hz / 2.0 if self.high_freq_hz is None else float(self.high_freq_hz)

    def num_frames(self, num_samples: int) -> int:
        if num_samples < self.frame_len_samples:
            return 0
        return (num_samples - self.frame_len_samples) // self.frame_shift_samples + 1


def hz_to_mel(hz):
    return 2595.0 * np.log10(1.0 + np.asarray(hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_center_freqs(config: FbankConfig) -> np.ndarray:
    lo, hi = hz_to_mel(config.low_freq_hz), hz_to_mel(config.high_freq)
    step = (hi - lo) / (config.num_mel_bins + 1)
    return mel_to_hz(lo + step * np.arange(1, config.num_mel_bins + 1))


def mel_filterbank(config: FbankConfig) -> np.ndarray:
    """(num_mel_bins, fft_size//2 + 1) triangular weights, triangles spaced evenly in mel."""
    lo, hi = hz_to_mel(config.low_freq_hz), hz_to_mel(config.high_freq)
    step = (hi - lo) / (config.num_mel_bins + 1)
    left = lo + step * np.arange(config.num_mel_bins)[:, None]
    center, right = left + step, left + 2 * step
    bin_mel = hz_to_mel(np.arange(config.fft_size // 2 + 1) * config.sample_rate_hz / config.fft_size)
    up = (bin_mel - left) / (center - left)
    down = (right - bin_mel) / (right - center)
    return np.clip(np.minimum(up, down), 0.0, None)


def frame_signal(samples: np.ndarray, config: FbankConfig) -> np.ndarray:
    n = config.num_frames(len(samples))
    if n == 0:
        raise TooShort(f"{len(samples)} samples < one {config.frame_len_samples}-sample frame")
    width, shift = config.frame_len_samples, config.frame_shift_samples
    idx = np.arange(width)[None, :] + shift * np.arange(n)[:, None]
    return np.asarray(samples, dtype=np.float64)[idx]


def compute_fbank(samples: np.ndarray, config: FbankConfig = FbankConfig(),
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """Log-Mel filterbank energies, shape (frames, num_mel_bins), float32.

    Per frame: optional dither, DC removal, pre-emphasis, Hamming window,
    power spectrum, mel filters and a floored natural log.  Frames never
    extend past the end of the signal.
    """
    frames = frame_signal(samples, config)
    if config.dither > 0:
        rng = rng if rng is not None else np.random.default_rng(0)
        frames = frames + config.dither * rng.standard_normal(frames.shape)
    frames = frames - frames.mean(axis=1, keepdims=True)
    if config.preemphasis:
        emphasized = frames.copy()
        emphasized[:, 1:] -= config.preemphasis * frames[:, :-1]
        emphasized[:, 0] -= config.preemphasis * frames[:, 0]
        frames = emphasized
    frames = frames * np.hamming(frames.shape[1])
    power = np.abs(np.fft.rfft(frames, n=config.fft_size, axis=1)) ** 2
    energies = power @ mel_filterbank(config).T
    return np.log(np.maximum(energies, config.log_floor)).astype(np.float32)


@dataclass
class CmvnStats:
    """Per-dimension sums, sums of squares and frame count; ``+`` merges two."""

    sums: np.ndarray
    sumsq: np.ndarray
    count: int = 0

    @classmethod
    def zeros(cls, dim: int) -> "CmvnStats":
        return cls(np.zeros(dim), np.zeros(dim), 0)

    @property
    def dim(self) -> int:
        return len(self.sums)

    def add(self, matrix: np.ndarray) -> "CmvnStats":
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[1] != self.dim:
            raise DimensionMismatch(f"matrix of shape {matrix.shape} vs {self.dim}-dim stats")
        self.sums += matrix.sum(axis=0)
        self.sumsq += (matrix * matrix).sum(axis=0)
        self.count += matrix.shape[0]
        return self

    def __add__(self, other: "CmvnStats") -> "CmvnStats":
        if other.dim != self.dim:
            raise DimensionMismatch(f"{self.dim}-dim vs {other.dim}-dim stats")
        return CmvnStats(self.sums + other.sums, self.sumsq + other.sumsq, self.count + other.count)

    def mean_var(self) -> tuple[np.ndarray, np.ndarray]:
        if self.count <= 0:
            raise EmptyStats("CMVN stats hold no frames")
        mean = self.sums / self.count
        var = np.maximum(self.sumsq / self.count - mean * mean, 0.0)
        return mean, var

    def to_matrix(self) -> np.ndarray:
        """2 x (dim+1): row 0 sums + count, row 1 sums of squares + 0."""
        out = np.zeros((2, self.dim + 1))
        out[0, :-1], out[0, -1] = self.sums, self.count
        out[1, :-1] = self.sumsq
        return out

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "CmvnStats":
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != 2 or matrix.shape[1] < 2:
            raise DimensionMismatch(f"CMVN stats matrix has shape {matrix.shape}")
        return cls(matrix[0, :-1].copy(), matrix[1, :-1].copy(), int(round(matrix[0, -1])))


def accumulate_cmvn(matrices: Iterable[np.ndarray]) -> CmvnStats:
    stats = None
    for m in matrices:
        m = np.asarray(m)
        if stats is None:
            if m.ndim != 2:
                raise DimensionMismatch(f"expected a 2-D matrix, got shape {m.shape}")
            stats = CmvnStats.zeros(m.shape[1])
        stats.add(m)
    if stats is None or stats.count == 0:
        raise EmptyStats("no frames to accumulate")
    return stats


def apply_cmvn(matrix: np.ndarray, stats: CmvnStats, eps: float = 1e-8) -> np.ndarray:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[1] != stats.dim:
        raise DimensionMismatch(f"matrix of shape {matrix.shape} vs {stats.dim}-dim stats")
    mean, var = stats.mean_var()
    out = (matrix.astype(np.float64) - mean) / np.sqrt(var + eps)
    return out.astype(np.float32)

"""Reference log-Mel filterbank written from the definitions, without FFTs.

Kept deliberately separate from semaug.features: explicit loops for the
per-frame preprocessing and filter weights, and a direct O(N^2) DFT.
"""
import math

import numpy as np


def mel(f):
    return 2595.0 * math.log10(1.0 + f / 700.0)


def filter_weights(sample_rate, fft_size, num_bins, low, high):
    lo, hi = mel(low), mel(high)
    step = (hi - lo) / (num_bins + 1)
    weights = np.zeros((num_bins, fft_size // 2 + 1))
    for m in range(num_bins):
        left, center, right = lo + m * step, lo + (m + 1) * step, lo + (m + 2) * step
        for k in range(fft_size // 2 + 1):
            f = mel(k * sample_rate / fft_size)
            if left < f <= center:
                weights[m, k] = (f - left) / (center - left)
            elif center < f < right:
                weights[m, k] = (right - f) / (right - center)
    return weights


def dft_matrices(frame_len, fft_size):
    k = np.arange(fft_size // 2 + 1)[:, None]
    n = np.arange(frame_len)[None, :]
    angle = 2.0 * math.pi * k * n / fft_size
    return np.cos(angle), np.sin(angle)


def reference_fbank(samples, sample_rate=16000, frame_len=400, shift=160, fft_size=512,
                    num_bins=40, preemph=0.97, low=20.0, high=None, floor=1e-10):
    high = sample_rate / 2 if high is None else high
    weights = filter_weights(sample_rate, fft_size, num_bins, low, high)
    cos_m, sin_m = dft_matrices(frame_len, fft_size)
    hamming = [0.54 - 0.46 * math.cos(2 * math.pi * i / (frame_len - 1)) for i in range(frame_len)]
    rows = []
    start = 0
    while start + frame_len <= len(samples):
        frame = [float(x) for x in samples[start:start + frame_len]]
        dc = sum(frame) / frame_len
        frame = [x - dc for x in frame]
        emph = [frame[0] - preemph * frame[0]]
        emph += [frame[i] - preemph * frame[i - 1] for i in range(1, frame_len)]
        windowed = np.array([emph[i] * hamming[i] for i in range(frame_len)])
        # zero padding to fft_size is implicit: the DFT sum stops at frame_len
        re, im = cos_m @ windowed, sin_m @ windowed
        power = re * re + im * im
        energies = weights @ power
        rows.append([math.log(max(e, floor)) for e in energies])
        start += shift
    return np.array(rows)

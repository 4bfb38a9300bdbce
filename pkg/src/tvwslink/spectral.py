"""Averaged FFT power measurement and the derived band metrics.

The estimator is the plain average of squared FFT magnitudes over M
consecutive length-N windows, normalized by N^2, with a rectangular
window. That normalization makes the sum over all bins equal the
time-domain mean power exactly (Parseval), which the channel-power and
occupied-bandwidth measurements rely on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, CoverageError, ZeroPowerError
from .modulators import SampleBlock

DB_FLOOR = -200.0
DEFAULT_FFT_SIZE = 1024
DEFAULT_ITERATIONS = 100


@dataclass(frozen=True)
class PowerSpectrum:
    bins: np.ndarray  # average linear power per bin, natural FFT order
    fft_size: int
    iterations: int
    sample_rate: float
    center_freq: float = 0.0

    def __post_init__(self) -> None:
        if len(self.bins) != self.fft_size:
            raise ConfigError("bins length must equal fft_size")
        if np.any(self.bins < 0):
            raise ConfigError("bin powers must be non-negative")
        if self.sample_rate <= 0:
            raise ConfigError("sample_rate must be positive")

    @property
    def bin_width(self) -> float:
        return self.sample_rate / self.fft_size

    def bin_freq(self, k: int) -> float:
        """Absolute frequency of bin k (natural FFT order, baseband-centered)."""
        f = k * self.bin_width
        if f >= self.sample_rate / 2.0:
            f -= self.sample_rate
        return self.center_freq + f


def avg_fft_power(x: SampleBlock, n: int = DEFAULT_FFT_SIZE, m: int = DEFAULT_ITERATIONS,
                  center_freq: float = 0.0) -> PowerSpectrum:
    """P_k = sum over M windows of |FFT_k|^2 / (M * N^2), rectangular window."""
    if n < 1 or m < 1:
        raise ConfigError("fft size and iteration count must be >= 1")
    if len(x.samples) < n * m:
        raise ConfigError(f"need {n * m} samples, got {len(x.samples)}")
    seg = np.asarray(x.samples[: n * m], dtype=np.complex128).reshape(m, n)
    spec = np.fft.fft(seg, axis=1)
    bins = np.mean(np.abs(spec) ** 2, axis=0) / n**2
    return PowerSpectrum(bins=bins, fft_size=n, iterations=m,
                         sample_rate=x.sample_rate, center_freq=center_freq)


def channel_power(ps: PowerSpectrum, n_first: int, n_last: int) -> float:
    """Sum of bin powers over the inclusive index range [n_first, n_last]."""
    if not 0 <= n_first <= n_last < ps.fft_size:
        raise IndexError("bin range out of bounds")
    return float(np.sum(ps.bins[n_first : n_last + 1]))


def band_to_bins(ps: PowerSpectrum, f_low: float, f_high: float) -> np.ndarray:
    """Indices (natural FFT order) of bins whose center lies in [f_low, f_high]."""
    if f_high < f_low:
        raise ConfigError("f_high must be >= f_low")
    freqs = np.array([ps.bin_freq(k) for k in range(ps.fft_size)])
    return np.flatnonzero((freqs >= f_low) & (freqs <= f_high))


def band_power(ps: PowerSpectrum, f_low: float, f_high: float) -> float:
    idx = band_to_bins(ps, f_low, f_high)
    return float(np.sum(ps.bins[idx]))


def to_db(ps: PowerSpectrum) -> np.ndarray:
    """10*log10(P_k), with zero bins clamped to the -200 dB floor."""
    out = np.full(ps.fft_size, DB_FLOOR)
    nz = ps.bins > 0
    out[nz] = np.maximum(10.0 * np.log10(ps.bins[nz]), DB_FLOOR)
    return out


def occupied_bandwidth(ps: PowerSpectrum, fraction: float = 0.99) -> float:
    """Width in Hz of the smallest centered bin span holding >= fraction of power.

    The span grows outward from DC one bin at a time, taking whichever
    side adds more power next, so asymmetric spectra are handled too.
    """
    if not 0.0 < fraction <= 1.0:
        raise ConfigError("fraction must be in (0, 1]")
    total = float(np.sum(ps.bins))
    if total <= 0.0:
        raise ZeroPowerError("occupied bandwidth undefined for a zero-power spectrum")
    shifted = np.fft.fftshift(ps.bins)
    center = ps.fft_size // 2  # DC after the shift
    lo = hi = center
    acc = float(shifted[center])
    target = fraction * total
    while acc < target:
        left = shifted[lo - 1] if lo > 0 else -1.0
        right = shifted[hi + 1] if hi < ps.fft_size - 1 else -1.0
        if left < 0 and right < 0:
            break
        if right >= left:
            hi += 1
            acc += float(shifted[hi])
        else:
            lo -= 1
            acc += float(shifted[lo])
    return (hi - lo + 1) * ps.bin_width


def adjacent_channel_power(
    ps: PowerSpectrum,
    in_band: tuple[int, int],
    adj_band: tuple[int, int],
) -> float:
    """ACP in dB: adjacent-band power over in-band power, each per 100 kHz.

    Band arguments are inclusive bin-index ranges; they must not overlap.
    Returns the -200 dB floor when the adjacent band is empty.
    """
    a0, a1 = in_band
    b0, b1 = adj_band
    if max(a0, b0) <= min(a1, b1):
        raise ConfigError("in-band and adjacent ranges must be disjoint")
    p_in = channel_power(ps, a0, a1)
    p_adj = channel_power(ps, b0, b1)
    if p_in <= 0.0:
        raise ZeroPowerError("no in-band power to normalize against")
    w_in = (a1 - a0 + 1) * ps.bin_width / 100e3
    w_adj = (b1 - b0 + 1) * ps.bin_width / 100e3
    ratio = (p_adj / w_adj) / (p_in / w_in)
    if ratio <= 0.0:
        return DB_FLOOR
    return max(10.0 * np.log10(ratio), DB_FLOOR)

"""Simulated radio channel: gain, multipath, carrier offset, AWGN.

The composition order in apply_profile is fixed: gain -> multipath ->
CFO -> AWGN. Noise is added last, at the receiver reference plane, so
the configured SNR is the post-impairment ratio.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import oaconvolve

from .errors import ConfigError, ZeroPowerError
from .modulators import SampleBlock


@dataclass(frozen=True)
class ChannelProfile:
    """Impairment parameters for one simulated link.

    snr_db is the ratio of measured signal power to the noise power that
    falls inside the reference bandwidth (noise_ref_bw, default the full
    sample rate). With noise_ref_bw = 100e3 the figure matches an
    in-channel SNR measurement on a 100 kHz signal.
    """

    snr_db: float = math.inf
    cfo_hz: float = 0.0
    phase0: float = 0.0
    taps: tuple = (1.0 + 0.0j,)
    gain_db: float = 0.0
    seed: int = 0
    noise_ref_bw: float | None = None
    phase_noise_std: float = 0.0  # radians of random-walk phase per sample

    def __post_init__(self) -> None:
        if len(self.taps) == 0:
            raise ConfigError("taps must be non-empty ([1] means a flat channel)")
        if self.noise_ref_bw is not None and self.noise_ref_bw <= 0:
            raise ConfigError("noise_ref_bw must be positive")
        if self.phase_noise_std < 0:
            raise ConfigError("phase_noise_std must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")


def apply_gain(x: SampleBlock, gain_db: float) -> SampleBlock:
    if gain_db == 0.0:
        return x
    return SampleBlock(x.samples * 10.0 ** (gain_db / 20.0), x.sample_rate)


def apply_multipath(x: SampleBlock, taps) -> SampleBlock:
    """Convolve with the tap vector; output truncated to the input length."""
    taps = np.asarray(taps, dtype=np.complex128)
    if len(taps) == 0:
        raise ConfigError("taps must be non-empty")
    y = oaconvolve(x.samples, taps, mode="full")[: len(x.samples)]
    return SampleBlock(y, x.sample_rate)


def apply_cfo(x: SampleBlock, cfo_hz: float, phase0: float = 0.0) -> SampleBlock:
    """Rotate by e^{j(2*pi*cfo*n/fs + phase0)}."""
    if abs(cfo_hz) >= x.sample_rate / 2.0:
        raise ConfigError("|cfo_hz| must be below Nyquist")
    if cfo_hz == 0.0 and phase0 == 0.0:
        return x
    n = np.arange(len(x.samples))
    rot = np.exp(1j * (2.0 * np.pi * cfo_hz * n / x.sample_rate + phase0))
    return SampleBlock(x.samples * rot, x.sample_rate)


def apply_awgn(
    x: SampleBlock,
    snr_db: float,
    seed: int = 0,
    noise_ref_bw: float | None = None,
) -> SampleBlock:
    """Add circular complex Gaussian noise at the requested SNR.

    snr_db = +inf is the no-noise sentinel. With noise_ref_bw set, the
    SNR counts only the noise inside that bandwidth; total noise power
    is scaled up by sample_rate / noise_ref_bw.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return x
    p_sig = float(np.mean(np.abs(x.samples) ** 2)) if len(x.samples) else 0.0
    if p_sig <= 0.0:
        raise ZeroPowerError("cannot scale noise against a zero-power signal")
    p_noise = p_sig / 10.0 ** (snr_db / 10.0)
    if noise_ref_bw is not None:
        p_noise *= x.sample_rate / noise_ref_bw
    rng = np.random.default_rng(seed)
    scale = np.sqrt(p_noise / 2.0)
    noise = scale * (
        rng.standard_normal(len(x.samples)) + 1j * rng.standard_normal(len(x.samples))
    )
    return SampleBlock(x.samples + noise, x.sample_rate)


def apply_phase_noise(x: SampleBlock, std: float, seed: int = 0) -> SampleBlock:
    """Rotate by a Wiener-process phase with per-sample increment std (radians).

    Models residual oscillator phase noise: a random walk the carrier
    loop can only track up to its bandwidth.
    """
    if std < 0:
        raise ConfigError("phase noise std must be >= 0")
    if std == 0.0:
        return x
    rng = np.random.default_rng([seed, 0x504E])
    walk = np.cumsum(std * rng.standard_normal(len(x.samples)))
    return SampleBlock(x.samples * np.exp(1j * walk), x.sample_rate)


def apply_profile(x: SampleBlock, profile: ChannelProfile) -> SampleBlock:
    """Run the full impairment chain: gain -> multipath -> CFO -> phase noise -> AWGN."""
    y = apply_gain(x, profile.gain_db)
    y = apply_multipath(y, profile.taps)
    y = apply_cfo(y, profile.cfo_hz, profile.phase0)
    y = apply_phase_noise(y, profile.phase_noise_std, profile.seed)
    return apply_awgn(y, profile.snr_db, profile.seed, profile.noise_ref_bw)

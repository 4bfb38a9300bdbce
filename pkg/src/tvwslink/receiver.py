"""Receiver synchronization and demodulation chains.

FSK path:  AGC -> lowpass -> quadrature demod -> symbol timing -> slicer.
PSK path:  AGC -> lowpass -> symbol timing (RRC matched filter) -> CMA
           equalizer -> Costas loop -> constellation + differential decode.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import firwin, kaiserord, oaconvolve

from . import _kernels
from .errors import ConfigError, EqualizerDivergedError, NoLockError
from .modulators import (
    FSK_SCHEMES,
    ModParams,
    PSK_SCHEMES,
    SampleBlock,
    differential_decode,
    psk_steps_to_bits,
    rrc_taps,
)

_DAMPING = 0.7071067811865476


@dataclass(frozen=True)
class SyncConfig:
    agc_reference: float = 1.0
    agc_rate: float = 1e-4  # slow enough not to track the pulse-shaping envelope
    lpf_cutoff: float | None = None  # Hz; None derives a per-scheme default
    lpf_transition: float | None = None
    timing_loop_bw: float = 0.01  # 0.045 slips under noise with this TED
    cma_taps: int = 11
    cma_mu: float = 1e-4  # larger steps random-walk the taps on megasymbol noisy bursts
    costas_loop_bw: float = 0.02
    costas_order: int | None = None  # None matches the scheme
    lock_threshold: float = 0.8  # |timing error| EMA must dip below this once

    def __post_init__(self) -> None:
        if not 0.0 < self.timing_loop_bw < 0.1:
            raise ConfigError("timing_loop_bw must be in (0, 0.1)")
        if not 0.0 < self.costas_loop_bw < 0.1:
            raise ConfigError("costas_loop_bw must be in (0, 0.1)")
        if not 0.0 < self.cma_mu < 0.1:
            raise ConfigError("cma_mu must be in (0, 0.1)")
        if self.cma_taps % 2 == 0:
            raise ConfigError("cma_taps must be odd")
        if self.agc_reference <= 0:
            raise ConfigError("agc_reference must be positive")


def _pi_gains(loop_bw: float, damping: float = _DAMPING) -> tuple[float, float]:
    theta = loop_bw / (damping + 1.0 / (4.0 * damping))
    d = 1.0 + 2.0 * damping * theta + theta * theta
    return 4.0 * damping * theta / d, 4.0 * theta * theta / d


def agc(x: SampleBlock, cfg: SyncConfig) -> SampleBlock:
    """Running-gain control driving mean |y| toward agc_reference.

    The initial gain comes from the block RMS, which makes the whole
    output exactly invariant to the input scale.
    """
    samples = np.ascontiguousarray(x.samples, dtype=np.complex128)
    rms = np.sqrt(np.mean(np.abs(samples) ** 2)) if len(samples) else 0.0
    gain0 = cfg.agc_reference / rms if rms > 0 else 1.0
    y = _kernels.agc_kernel(
        samples, cfg.agc_reference, cfg.agc_rate, gain0, 1e-6, 1e6
    )
    return SampleBlock(samples=y, sample_rate=x.sample_rate)


def lowpass_taps(sample_rate: float, cutoff: float, transition: float) -> np.ndarray:
    """Kaiser-window linear-phase lowpass, >= 60 dB stopband, unit DC gain."""
    if not 0.0 < cutoff < sample_rate / 2.0:
        raise ConfigError("cutoff must lie in (0, Nyquist)")
    if transition <= 0 or cutoff + transition >= sample_rate / 2.0:
        raise ConfigError("transition band must fit below Nyquist")
    numtaps, beta = kaiserord(65.0, transition / (sample_rate / 2.0))
    numtaps |= 1  # odd length keeps 'same' convolution delay-free
    return firwin(numtaps, cutoff + transition / 2.0, window=("kaiser", beta), fs=sample_rate)


def fir_lowpass(x: SampleBlock, cutoff: float, transition: float) -> SampleBlock:
    taps = lowpass_taps(x.sample_rate, cutoff, transition)
    y = oaconvolve(x.samples, taps, mode="same")
    return SampleBlock(samples=y, sample_rate=x.sample_rate)


def symbol_sync(
    x: SampleBlock,
    sps: int,
    matched_filter: np.ndarray | None,
    loop_bw: float,
    lock_threshold: float = 0.8,
) -> np.ndarray:
    """Gardner-driven clock recovery; one complex sample per symbol."""
    samples = np.ascontiguousarray(x.samples, dtype=np.complex128)
    if matched_filter is not None:
        samples = oaconvolve(samples, matched_filter, mode="same")
    if len(samples) < 3 * sps + 4:
        raise NoLockError("burst too short for the timing loop")
    k1, k2 = _pi_gains(loop_bw)
    syms, ema, locked = _kernels.gardner_kernel(
        samples, float(sps), k1, k2, 0.01, lock_threshold
    )
    if not locked or len(syms) == 0:
        raise NoLockError("timing loop never locked on the burst")
    return syms


def cma_equalize(symbols: np.ndarray, ntaps: int, mu: float) -> np.ndarray:
    """Blind CMA equalizer for constant-modulus constellations."""
    symbols = np.ascontiguousarray(symbols, dtype=np.complex128)
    out = _kernels.cma_kernel(symbols, ntaps, mu)
    p_in = np.mean(np.abs(symbols) ** 2) if len(symbols) else 0.0
    p_out = np.mean(np.abs(out) ** 2) if len(out) else 0.0
    if p_in > 0 and p_out > 100.0 * p_in:
        raise EqualizerDivergedError(
            f"output power {p_out:.3g} exceeds 100x input power {p_in:.3g}"
        )
    return out


def costas_loop(symbols: np.ndarray, order: int, loop_bw: float) -> np.ndarray:
    """Second-order Costas loop; residual pi/2*k ambiguity is left for the decoder."""
    if order not in (2, 4):
        raise ConfigError("costas order must be 2 or 4")
    symbols = np.ascontiguousarray(symbols, dtype=np.complex128)
    k1, k2 = _pi_gains(loop_bw)
    return _kernels.costas_kernel(symbols, order, k1, k2)


def quadrature_demod(x: SampleBlock, gain: float) -> np.ndarray:
    """Instantaneous frequency: gain * arg(x[n] * conj(x[n-1])), y[0] = 0."""
    s = x.samples
    out = np.empty(len(s))
    if len(s):
        out[0] = 0.0
        out[1:] = gain * np.angle(s[1:] * np.conj(s[:-1]))
    return out


def _default_lpf(scheme: str, p: ModParams, s: SyncConfig) -> tuple[float, float]:
    if s.lpf_cutoff is not None and s.lpf_transition is not None:
        return s.lpf_cutoff, s.lpf_transition
    if scheme in PSK_SCHEMES:
        cutoff = 0.5 * (1.0 + p.rrc_rolloff) * p.symbol_rate * 1.1
        transition = 0.25 * p.symbol_rate
    else:
        # narrow pre-detection filter: lowers the discriminator's FM
        # threshold without closing the eye at this deviation
        cutoff = 0.45 * p.symbol_rate
        transition = 0.2 * p.symbol_rate
    cutoff = s.lpf_cutoff if s.lpf_cutoff is not None else cutoff
    transition = s.lpf_transition if s.lpf_transition is not None else transition
    return cutoff, transition


def slice_psk(symbols: np.ndarray, order: int) -> np.ndarray:
    """Nearest constellation index on the unit circle (index k at angle 2*pi*k/order)."""
    idx = np.rint(np.angle(symbols) * order / (2.0 * np.pi)).astype(np.int64)
    return idx % order


def demodulate(scheme: str, x: SampleBlock, p: ModParams, s: SyncConfig) -> np.ndarray:
    """Run the full receive chain for `scheme` and return hard bits."""
    scheme = scheme.lower()
    if scheme not in PSK_SCHEMES + FSK_SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}")
    y = agc(x, s)
    cutoff, transition = _default_lpf(scheme, p, s)
    y = fir_lowpass(y, cutoff, transition)
    if scheme in FSK_SCHEMES:
        freq = quadrature_demod(y, p.sps / (np.pi * p.mod_index))
        block = SampleBlock(samples=freq.astype(np.complex128), sample_rate=y.sample_rate)
        mf = np.ones(p.sps) / p.sps
        syms = symbol_sync(block, p.sps, mf, s.timing_loop_bw, s.lock_threshold)
        return (syms.real > 0.0).astype(np.uint8)
    mf = rrc_taps(p.rrc_rolloff, p.sps, p.filter_span)
    syms = symbol_sync(y, p.sps, mf, s.timing_loop_bw, s.lock_threshold)
    rms = np.sqrt(np.mean(np.abs(syms) ** 2))
    if rms > 0:
        syms = syms / rms  # CMA cost assumes a unit-modulus constellation
    syms = cma_equalize(syms, s.cma_taps, s.cma_mu)
    order = 2 ** p.bits_per_symbol
    costas_order = s.costas_order if s.costas_order is not None else order
    syms = costas_loop(syms, costas_order, s.costas_loop_bw)
    if costas_order == 4:
        # the order-4 detector locks the points onto the diagonals; put them
        # back on the axes (any residual k*90 deg is absorbed by diff decode)
        syms = syms * np.exp(-1j * np.pi / 4.0)
    steps = differential_decode(slice_psk(syms, order), order)
    return psk_steps_to_bits(steps, scheme)

"""Bits-to-baseband modulators: DBPSK, DQPSK, GFSK and GMSK.

PSK schemes carry data in phase transitions and are shaped with a
root-raised-cosine filter; the FSK schemes pass NRZ symbols through a
Gaussian filter into a frequency modulator (deviation m * Rs / 2).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import oaconvolve

from .errors import ConfigError

PSK_SCHEMES = ("dbpsk", "dqpsk")
FSK_SCHEMES = ("gfsk", "gmsk")
SCHEMES = PSK_SCHEMES + FSK_SCHEMES

# Gray-coded dibit -> phase-step index (index k means a +k*90 degree step).
DQPSK_DIBIT_TO_STEP = {(0, 0): 0, (0, 1): 1, (1, 1): 2, (1, 0): 3}
DQPSK_STEP_TO_DIBIT = {v: k for k, v in DQPSK_DIBIT_TO_STEP.items()}


@dataclass(frozen=True)
class ModParams:
    scheme: str
    symbol_rate: float
    sps: int = 4
    rrc_rolloff: float = 0.35
    gauss_bt: float = 0.3
    mod_index: float = 0.5
    filter_span: int = 11

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.sps < 2 or int(self.sps) != self.sps:
            raise ConfigError("sps must be an integer >= 2")
        if not 0.0 < self.rrc_rolloff <= 1.0:
            raise ConfigError("rrc_rolloff must be in (0, 1]")
        if not 0.0 < self.gauss_bt <= 1.0:
            raise ConfigError("gauss_bt must be in (0, 1]")
        if self.scheme == "gmsk" and self.mod_index != 0.5:
            raise ConfigError("GMSK fixes mod_index = 0.5")
        if self.symbol_rate <= 0:
            raise ConfigError("symbol_rate must be positive")

    @property
    def bits_per_symbol(self) -> int:
        return 2 if self.scheme == "dqpsk" else 1

    @property
    def sample_rate(self) -> float:
        return self.symbol_rate * self.sps

    @property
    def bit_rate(self) -> float:
        return self.symbol_rate * self.bits_per_symbol


def default_params(scheme: str, sps: int = 4) -> ModParams:
    """Default per-scheme profiles; each keeps 99% occupied bandwidth <= 100 kHz."""
    scheme = scheme.lower()
    if scheme in FSK_SCHEMES:
        return ModParams(scheme=scheme, symbol_rate=98e3, sps=sps, gauss_bt=0.3)
    if scheme == "dbpsk":
        return ModParams(scheme=scheme, symbol_rate=64e3, sps=sps, rrc_rolloff=0.35)
    if scheme == "dqpsk":
        return ModParams(scheme=scheme, symbol_rate=49e3, sps=sps, rrc_rolloff=0.35)
    raise ConfigError(f"unknown scheme {scheme!r}")


@dataclass(frozen=True)
class SampleBlock:
    samples: np.ndarray
    sample_rate: float

    def __post_init__(self) -> None:
        if self.sample_rate <= 0:
            raise ConfigError("sample_rate must be positive")
        if len(self.samples) and not np.all(np.isfinite(self.samples)):
            raise ConfigError("samples must be finite")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def rrc_taps(rolloff: float, sps: int, span: int) -> np.ndarray:
    """Root-raised-cosine taps, span*sps+1 long, normalized to sum(taps^2) = 1.

    The cascade of two such filters then has unit gain at symbol centers.
    """
    if not 0.0 < rolloff <= 1.0:
        raise ConfigError("rolloff must be in (0, 1]")
    n = span * sps + 1
    t = (np.arange(n) - (n - 1) / 2) / sps  # in symbol periods
    a = rolloff
    taps = np.empty(n)
    for i, ti in enumerate(t):
        if abs(ti) < 1e-12:
            taps[i] = 1.0 - a + 4.0 * a / np.pi
        elif abs(abs(4.0 * a * ti) - 1.0) < 1e-9:
            taps[i] = (a / np.sqrt(2.0)) * (
                (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * a))
                + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * a))
            )
        else:
            num = np.sin(np.pi * ti * (1.0 - a)) + 4.0 * a * ti * np.cos(np.pi * ti * (1.0 + a))
            den = np.pi * ti * (1.0 - (4.0 * a * ti) ** 2)
            taps[i] = num / den
    return taps / np.sqrt(np.sum(taps**2))


def gaussian_taps(bt: float, sps: int, span: int) -> np.ndarray:
    """Gaussian pulse with 3 dB bandwidth bt * symbol_rate; taps sum to 1."""
    if not 0.0 < bt <= 1.0:
        raise ConfigError("BT must be in (0, 1]")
    n = span * sps + 1
    t = (np.arange(n) - (n - 1) / 2) / sps
    alpha = 2.0 * np.pi * bt / np.sqrt(np.log(2.0))
    taps = np.exp(-(alpha**2) * t**2 / 2.0)
    return taps / np.sum(taps)


def differential_encode(symbols: np.ndarray, order: int) -> np.ndarray:
    """out[n] = (out[n-1] + in[n]) mod order, out[-1] = 0."""
    symbols = np.asarray(symbols, dtype=np.int64)
    if np.any(symbols < 0) or np.any(symbols >= order):
        raise ConfigError(f"symbol indices must be < {order}")
    return np.cumsum(symbols) % order


def differential_decode(symbols: np.ndarray, order: int) -> np.ndarray:
    """Inverse of differential_encode; the first output assumes out[-1] = 0."""
    symbols = np.asarray(symbols, dtype=np.int64)
    prev = np.concatenate(([0], symbols[:-1]))
    return (symbols - prev) % order


def bits_to_psk_steps(bits: np.ndarray, scheme: str) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    if scheme == "dbpsk":
        return bits
    if len(bits) % 2 != 0:
        raise ConfigError("DQPSK needs an even bit count")
    pairs = bits.reshape(-1, 2)
    lut = np.zeros((2, 2), dtype=np.int64)
    for (b0, b1), k in DQPSK_DIBIT_TO_STEP.items():
        lut[b0, b1] = k
    return lut[pairs[:, 0], pairs[:, 1]]


def psk_steps_to_bits(steps: np.ndarray, scheme: str) -> np.ndarray:
    steps = np.asarray(steps, dtype=np.int64)
    if scheme == "dbpsk":
        return steps.astype(np.uint8)
    lut = np.zeros((4, 2), dtype=np.uint8)
    for k, (b0, b1) in DQPSK_STEP_TO_DIBIT.items():
        lut[k] = (b0, b1)
    return lut[steps].reshape(-1)


def _modulate_psk(bits: np.ndarray, p: ModParams) -> np.ndarray:
    order = 2 ** p.bits_per_symbol
    steps = bits_to_psk_steps(bits, p.scheme)
    indices = differential_encode(steps, order)
    symbols = np.exp(2j * np.pi * indices / order)
    pulses = np.zeros(len(symbols) * p.sps, dtype=np.complex128)
    pulses[:: p.sps] = symbols
    taps = rrc_taps(p.rrc_rolloff, p.sps, p.filter_span)
    return oaconvolve(pulses, taps, mode="full")


def _modulate_fsk(bits: np.ndarray, p: ModParams) -> np.ndarray:
    nrz = np.asarray(bits, dtype=np.float64) * 2.0 - 1.0
    held = np.repeat(nrz, p.sps)
    taps = gaussian_taps(p.gauss_bt, p.sps, p.filter_span)
    freq = oaconvolve(held, taps, mode="full")
    # deviation m*Rs/2: phase step per sample is pi*m*freq/sps
    phase = np.cumsum(np.pi * p.mod_index * freq / p.sps)
    return np.exp(1j * phase)


def modulate(bits: np.ndarray, p: ModParams) -> SampleBlock:
    """Modulate a bitstream to complex baseband at sps * symbol_rate."""
    bits = np.asarray(bits)
    if len(bits) == 0:
        raise ConfigError("bit stream is empty")
    if p.scheme in PSK_SCHEMES:
        samples = _modulate_psk(bits, p)
    else:
        samples = _modulate_fsk(bits, p)
    return SampleBlock(samples=samples, sample_rate=p.sample_rate)

"""FCC narrowband white-space device compliance checks.

Covers the subchannel grid inside a 6 MHz TV channel, the center
frequency rule, the EIRP/antenna-gain reduction rule, the 1% duty cycle
(36 s in any sliding hour), adjacent-channel emissions, and the
normalized-gain to absolute-power calibration mapping.
"""
from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import (
    CalibrationRangeError,
    ConfigError,
    CoverageError,
    LedgerError,
)
from .spectral import PowerSpectrum, band_power, to_db

TV_CHANNEL_WIDTH_HZ = 6e6
SUBCHANNEL_SPACING_HZ = 100e3
EDGE_GUARD_HZ = 250e3
HALF_SUBCHANNEL_HZ = 50e3
MAX_NWSD_FREQ_HZ = 602e6
EIRP_LIMIT_DBM = 18.6  # per 100 kHz
REFERENCE_GAIN_DBI = 6.0
ADJACENT_LIMIT_DBM = -42.8  # per 100 kHz
AGGREGATE_LIMIT_DBM = 30.0  # conducted, per 6 MHz channel
DUTY_LIMIT_S = 36.0
DUTY_WINDOW_S = 3600.0


@dataclass(frozen=True)
class TvChannel:
    f_low: float
    f_high: float
    adjacent_low_vacant: bool = False
    adjacent_high_vacant: bool = False
    bonded_low: bool = False
    bonded_high: bool = False

    def __post_init__(self) -> None:
        if abs((self.f_high - self.f_low) - TV_CHANNEL_WIDTH_HZ) > 1e-3:
            raise ConfigError("a TV channel must be exactly 6 MHz wide")
        if self.f_low <= 0 or round(self.f_low) % 1000 != 0:
            raise ConfigError("f_low must sit on a 1 kHz grid")

    @property
    def low_guard_active(self) -> bool:
        return not (self.adjacent_low_vacant or self.bonded_low)

    @property
    def high_guard_active(self) -> bool:
        return not (self.adjacent_high_vacant or self.bonded_high)


@dataclass(frozen=True)
class SubchannelPlan:
    centers: tuple
    spacing: float = SUBCHANNEL_SPACING_HZ

    def __post_init__(self) -> None:
        for f in self.centers:
            if abs(f / SUBCHANNEL_SPACING_HZ - round(f / SUBCHANNEL_SPACING_HZ)) > 1e-9:
                raise ConfigError("every center must be a multiple of 100 kHz")

    def __contains__(self, f: float) -> bool:
        return any(abs(f - c) < 1.0 for c in self.centers)

    def __len__(self) -> int:
        return len(self.centers)


@dataclass(frozen=True)
class RegVerdict:
    passed: bool
    rule: str
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


def _snap_up(f: float, step: float) -> float:
    return math.ceil(round(f / step, 9) - 1e-9) * step


def _snap_down(f: float, step: float) -> float:
    return math.floor(round(f / step, 9) + 1e-9) * step


def subchannel_grid(ch: TvChannel) -> SubchannelPlan:
    """100 kHz-spaced centers inside the channel, honoring the edge guards.

    A guarded edge keeps centers at least 250 kHz + 50 kHz inside it; a
    vacant-adjacent or bonded edge drops the 250 kHz offset, leaving only
    the half-subchannel so the occupied 100 kHz stays inside the channel.
    Centers always land on absolute multiples of 100 kHz.
    """
    lo = ch.f_low + HALF_SUBCHANNEL_HZ
    if ch.low_guard_active:
        lo += EDGE_GUARD_HZ
    hi = ch.f_high - HALF_SUBCHANNEL_HZ
    if ch.high_guard_active:
        hi -= EDGE_GUARD_HZ
    first = _snap_up(lo, SUBCHANNEL_SPACING_HZ)
    last = _snap_down(hi, SUBCHANNEL_SPACING_HZ)
    count = int(round((last - first) / SUBCHANNEL_SPACING_HZ)) + 1
    centers = tuple(first + i * SUBCHANNEL_SPACING_HZ for i in range(count))
    return SubchannelPlan(centers=centers)


def check_center_frequency(f: float, ch: TvChannel) -> RegVerdict:
    """Pass iff f is on the channel's subchannel grid and below 602 MHz."""
    if f >= MAX_NWSD_FREQ_HZ:
        return RegVerdict(False, "max-frequency",
                          f"{f / 1e6:.3f} MHz is not below 602 MHz")
    plan = subchannel_grid(ch)
    if f not in plan:
        return RegVerdict(False, "subchannel-grid",
                          f"{f / 1e6:.3f} MHz is not a permitted subchannel center")
    return RegVerdict(True, "center-frequency")


def check_eirp(p_conducted_dbm: float, antenna_gain_dbi: float) -> RegVerdict:
    """Conducted limit 12.6 dBm, reduced dB-for-dB above 6 dBi antenna gain."""
    limit = (EIRP_LIMIT_DBM - REFERENCE_GAIN_DBI) - max(
        0.0, antenna_gain_dbi - REFERENCE_GAIN_DBI
    )
    if p_conducted_dbm <= limit + 1e-12:
        return RegVerdict(True, "eirp")
    return RegVerdict(
        False,
        "eirp",
        f"conducted {p_conducted_dbm:.1f} dBm exceeds the "
        f"{limit:.1f} dBm limit at {antenna_gain_dbi:.1f} dBi",
    )


def check_aggregate_power(subchannel_powers_dbm) -> RegVerdict:
    """Total conducted power over the active subchannels of one 6 MHz channel."""
    total_mw = sum(10.0 ** (p / 10.0) for p in subchannel_powers_dbm)
    if total_mw <= 0:
        return RegVerdict(True, "aggregate-power")
    total_dbm = 10.0 * math.log10(total_mw)
    if total_dbm <= AGGREGATE_LIMIT_DBM + 1e-12:
        return RegVerdict(True, "aggregate-power")
    return RegVerdict(False, "aggregate-power",
                      f"total {total_dbm:.2f} dBm exceeds 30 dBm")


class DutyCycleLedger:
    """Accepted transmit intervals under the 36 s / sliding hour budget."""

    def __init__(self) -> None:
        self._intervals: list[tuple[float, float]] = []  # (start, end), sorted

    @property
    def intervals(self) -> tuple:
        return tuple(self._intervals)

    def _busy_in_window(self, w_start: float, w_end: float) -> float:
        total = 0.0
        for s, e in self._intervals:
            total += max(0.0, min(e, w_end) - max(s, w_start))
        return total

    def request(self, start: float, duration_s: float) -> bool:
        """Append the interval if no sliding hour would exceed 36 s of transmit.

        The busy total over (t - 3600, t] is piecewise linear with
        breakpoints only where an interval starts or ends, so checking
        windows ending at each end point (and each end point + 3600 s)
        covers every instant.
        """
        if duration_s <= 0:
            raise ConfigError("duration_s must be positive")
        end = start + duration_s
        for s, e in self._intervals:
            if start < e and s < end:
                raise LedgerError(
                    f"interval [{start}, {end}) overlaps existing [{s}, {e})"
                )
        candidate = sorted(self._intervals + [(start, end)])
        checkpoints = set()
        for s, e in candidate:
            checkpoints.update((e, s + DUTY_WINDOW_S, e + DUTY_WINDOW_S))
        for t in checkpoints:
            busy = 0.0
            for s, e in candidate:
                busy += max(0.0, min(e, t) - max(s, t - DUTY_WINDOW_S))
            if busy > DUTY_LIMIT_S + 1e-9:
                return False
        bisect.insort(self._intervals, (start, end))
        return True


def check_adjacent_emissions(
    ps: PowerSpectrum,
    ch: TvChannel,
    cal: "CalibrationTable",
    gain_setting: float,
    n_slices: int = 5,
) -> RegVerdict:
    """Every 100 kHz slice adjacent to the channel must stay below -42.8 dBm.

    The relative spectrum is pinned to absolute power by equating its
    in-channel total with the calibrated channel power at gain_setting,
    then each of the n_slices 100 kHz slices on both sides is integrated.
    """
    span_lo = ch.f_low - n_slices * SUBCHANNEL_SPACING_HZ
    span_hi = ch.f_high + n_slices * SUBCHANNEL_SPACING_HZ
    f_min = min(ps.bin_freq(k) for k in range(ps.fft_size))
    f_max = max(ps.bin_freq(k) for k in range(ps.fft_size))
    if f_min > span_lo or f_max < span_hi:
        raise CoverageError("spectrum does not cover the adjacent 100 kHz slices")
    p_in = band_power(ps, ch.f_low, ch.f_high)
    if p_in <= 0:
        raise CoverageError("no in-channel power to calibrate against")
    abs_in_dbm = gain_to_power(cal, gain_setting)
    scale_db = abs_in_dbm - 10.0 * math.log10(p_in)
    for side, edge, sign in (("below", ch.f_low, -1), ("above", ch.f_high, +1)):
        for i in range(n_slices):
            lo = edge + sign * i * SUBCHANNEL_SPACING_HZ
            hi = lo + sign * SUBCHANNEL_SPACING_HZ
            lo, hi = min(lo, hi), max(lo, hi)
            p = band_power(ps, lo, hi)
            slice_dbm = -math.inf if p <= 0 else 10.0 * math.log10(p) + scale_db
            if slice_dbm > ADJACENT_LIMIT_DBM:
                return RegVerdict(
                    False,
                    "adjacent-emissions",
                    f"slice {lo / 1e6:.2f}-{hi / 1e6:.2f} MHz ({side} channel) "
                    f"at {slice_dbm:.1f} dBm exceeds {ADJACENT_LIMIT_DBM} dBm",
                )
    return RegVerdict(True, "adjacent-emissions")


@dataclass(frozen=True)
class CalibrationTable:
    gains: tuple
    channel_power_dbm: tuple
    psd_dbm_hz: tuple
    peak_dbm: tuple

    def __post_init__(self) -> None:
        n = len(self.gains)
        if n < 2 or any(len(c) != n for c in
                        (self.channel_power_dbm, self.psd_dbm_hz, self.peak_dbm)):
            raise ConfigError("calibration table needs >= 2 equal-length rows")
        if any(b <= a for a, b in zip(self.gains, self.gains[1:])):
            raise ConfigError("gains must be strictly increasing")
        if any(b <= a for a, b in
               zip(self.channel_power_dbm, self.channel_power_dbm[1:])):
            raise ConfigError("channel power must be strictly increasing with gain")


def load_calibration(path=None) -> CalibrationTable:
    """Load a calibration CSV; the bundled measured table is the default."""
    if path is None:
        ref = resources.files("tvwslink").joinpath("data/power_calibration.csv")
        text = ref.read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    rows = list(csv.DictReader(text.splitlines()))
    if not rows:
        raise ConfigError("calibration file has no data rows")
    return CalibrationTable(
        gains=tuple(float(r["gain"]) for r in rows),
        channel_power_dbm=tuple(float(r["channel_power_dbm"]) for r in rows),
        psd_dbm_hz=tuple(float(r["psd_dbm_hz"]) for r in rows),
        peak_dbm=tuple(float(r["peak_dbm"]) for r in rows),
    )


def gain_to_power(cal: CalibrationTable, g: float) -> float:
    """Channel power in dBm/100 kHz at normalized gain g, linear in dB between knots."""
    if not cal.gains[0] <= g <= cal.gains[-1]:
        raise CalibrationRangeError(
            f"gain {g} outside calibrated range [{cal.gains[0]}, {cal.gains[-1]}]"
        )
    return float(np.interp(g, cal.gains, cal.channel_power_dbm))


def power_to_gain(cal: CalibrationTable, dbm: float) -> float:
    """Inverse of gain_to_power along the same polyline."""
    lo, hi = cal.channel_power_dbm[0], cal.channel_power_dbm[-1]
    if not lo <= dbm <= hi:
        raise CalibrationRangeError(
            f"power {dbm} dBm outside calibrated range [{lo}, {hi}]"
        )
    return float(np.interp(dbm, cal.channel_power_dbm, cal.gains))

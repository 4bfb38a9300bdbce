"""Link benchmark accounting: SNR estimate, PER/PLR/throughput/latency, CSV export.

Definitions, all taken literally:

    SNR        = 10*log10((P_s - P_n) / P_n)
    PER        = N_fail / N_tx
    PLR        = (N_tx - N_ok) / N_tx
    throughput = 8 * N_ok * L_p / (1000 * T)   [kbps]
    latency    = T / (N_ok + N_fail)

Lost packets are never observed directly; they surface as N_tx - N_ok -
N_fail at finalize. The first n_discarded delivered packets (receiver
warm-up) are excluded from both the counters and N_tx.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import AccountingError, BelowNoiseError, ConfigError

CSV_COLUMNS = [
    "timestamp_utc",
    "scheme",
    "fc_hz",
    "bw_hz",
    "symbol_rate",
    "sps",
    "packet_len_bytes",
    "n_tx",
    "n_discarded",
    "n_ok",
    "n_fail",
    "per",
    "plr",
    "snr_db",
    "total_time_s",
    "latency_ms",
    "throughput_kbps",
    "rx_bytes",
    "seed",
]


def estimate_snr(p_s: float, p_n: float) -> float:
    """SNR in dB from a signal+noise power measurement and a noise-only one."""
    if p_n <= 0.0:
        raise ConfigError("noise power must be positive")
    if p_s <= p_n:
        raise BelowNoiseError(
            f"measured power {p_s:.3g} does not exceed the noise floor {p_n:.3g}"
        )
    return 10.0 * math.log10((p_s - p_n) / p_n)


@dataclass
class LinkCounters:
    """Single-writer accumulator for one link run."""

    l_p: int
    n_discarded: int = 0
    n_ok: int = 0
    n_fail: int = 0
    _skipped: int = 0
    _finalized: bool = False

    def __post_init__(self) -> None:
        if self.l_p <= 0:
            raise ConfigError("packet payload length must be positive")
        if self.n_discarded < 0:
            raise ConfigError("n_discarded must be >= 0")

    def record(self, crc_ok: bool) -> None:
        """Count one delivered packet; the first n_discarded are warm-up."""
        if self._finalized:
            raise AccountingError("cannot record after finalize")
        if self._skipped < self.n_discarded:
            self._skipped += 1
            return
        if crc_ok:
            self.n_ok += 1
        else:
            self.n_fail += 1

    def finalize(
        self,
        n_tx: int,
        t_total: float,
        snr_db: float | None,
        *,
        scheme: str = "",
        fc_hz: float = 0.0,
        bw_hz: float = 0.0,
        symbol_rate: float = 0.0,
        sps: int = 0,
        rx_bytes: int = 0,
        seed: int = 0,
    ) -> "LinkReport":
        """Freeze the counters into a LinkReport.

        n_tx is the transmitter-side packet count; warm-up packets are
        subtracted from it so PER/PLR denominators match the counters.
        """
        if t_total <= 0.0:
            raise ConfigError("t_total must be positive")
        n_eff = n_tx - self._skipped
        if n_eff < self.n_ok + self.n_fail:
            raise AccountingError(
                f"{self.n_ok + self.n_fail} observed packets exceed n_tx = {n_eff}"
            )
        self._finalized = True
        delivered = self.n_ok + self.n_fail
        latency_ms = 1000.0 * t_total / delivered if delivered else None
        return LinkReport(
            timestamp_utc=datetime.now(timezone.utc).isoformat(),
            scheme=scheme,
            fc_hz=fc_hz,
            bw_hz=bw_hz,
            symbol_rate=symbol_rate,
            sps=sps,
            packet_len_bytes=self.l_p,
            n_tx=n_eff,
            n_discarded=self._skipped,
            n_ok=self.n_ok,
            n_fail=self.n_fail,
            per=self.n_fail / n_eff if n_eff else 0.0,
            plr=(n_eff - self.n_ok) / n_eff if n_eff else 0.0,
            snr_db=snr_db,
            total_time_s=t_total,
            latency_ms=latency_ms,
            throughput_kbps=8.0 * self.n_ok * self.l_p / (1000.0 * t_total),
            rx_bytes=rx_bytes,
            seed=seed,
        )


@dataclass(frozen=True)
class LinkReport:
    timestamp_utc: str
    scheme: str
    fc_hz: float
    bw_hz: float
    symbol_rate: float
    sps: int
    packet_len_bytes: int
    n_tx: int
    n_discarded: int
    n_ok: int
    n_fail: int
    per: float
    plr: float
    snr_db: float | None
    total_time_s: float
    latency_ms: float | None
    throughput_kbps: float
    rx_bytes: int
    seed: int
    failed_stage: str | None = None

    @property
    def n_lost(self) -> int:
        return self.n_tx - self.n_ok - self.n_fail


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)  # shortest string that round-trips the float
    return str(value)


def export_csv(report: LinkReport, path: str) -> None:
    """Append one row; write the header first if the file is new or empty."""
    new_file = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(CSV_COLUMNS)
        writer.writerow([_fmt(getattr(report, col)) for col in CSV_COLUMNS])

"""Narrowband TVWS software modem and link benchmark toolkit."""

from .channel import (
    ChannelProfile,
    apply_awgn,
    apply_cfo,
    apply_gain,
    apply_multipath,
    apply_profile,
)
from .campaign import CampaignConfig, read_iq, run_link, sweep, write_iq
from .errors import TvwsLinkError
from .framing import FrameConfig, Frame, CrcStatus, build_packet, extract_payload
from .linkstats import LinkCounters, LinkReport, estimate_snr, export_csv
from .modulators import ModParams, SampleBlock, SCHEMES, default_params, modulate
from .receiver import SyncConfig, demodulate
from .regulation import (
    CalibrationTable,
    DutyCycleLedger,
    SubchannelPlan,
    TvChannel,
    check_center_frequency,
    check_eirp,
    gain_to_power,
    load_calibration,
    power_to_gain,
    subchannel_grid,
)
from .spectral import (
    PowerSpectrum,
    adjacent_channel_power,
    avg_fft_power,
    channel_power,
    occupied_bandwidth,
    to_db,
)

__version__ = "0.1.0"

__all__ = [
    "CampaignConfig",
    "CalibrationTable",
    "ChannelProfile",
    "CrcStatus",
    "DutyCycleLedger",
    "Frame",
    "FrameConfig",
    "LinkCounters",
    "LinkReport",
    "ModParams",
    "PowerSpectrum",
    "SampleBlock",
    "SCHEMES",
    "SubchannelPlan",
    "SyncConfig",
    "TvChannel",
    "TvwsLinkError",
    "adjacent_channel_power",
    "apply_awgn",
    "apply_cfo",
    "apply_gain",
    "apply_multipath",
    "apply_profile",
    "avg_fft_power",
    "build_packet",
    "channel_power",
    "check_center_frequency",
    "check_eirp",
    "default_params",
    "demodulate",
    "estimate_snr",
    "export_csv",
    "extract_payload",
    "gain_to_power",
    "load_calibration",
    "modulate",
    "occupied_bandwidth",
    "power_to_gain",
    "read_iq",
    "run_link",
    "subchannel_grid",
    "sweep",
    "to_db",
    "write_iq",
]

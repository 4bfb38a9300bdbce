"""Packet construction and recovery.

Over-the-air layout (all fields MSB-first within bytes):

    preamble | access code | length | length | [seq] | payload | crc32

The 16-bit length field counts payload plus CRC bytes and is transmitted
twice; receivers drop the frame if the two copies disagree.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import (
    ConfigError,
    HeaderMismatchError,
    MalformedFrameError,
    PayloadLengthError,
    TruncatedFrameError,
)

DEFAULT_ACCESS_CODE = 0xE15AE893E15AE893
DEFAULT_PREAMBLE_BITS = 32
CRC_LEN = 4
LENGTH_FIELD_BITS = 16
MAX_PAYLOAD_LEN = 0xFFFF - CRC_LEN


class CrcStatus(Enum):
    UNCHECKED = "unchecked"
    OK = "ok"
    FAIL = "fail"


@dataclass(frozen=True)
class FrameConfig:
    payload_len: int
    preamble_bits: int = DEFAULT_PREAMBLE_BITS
    access_code: int = DEFAULT_ACCESS_CODE
    access_code_bits: int = 64
    include_seq: bool = True
    crc_len: int = CRC_LEN

    def __post_init__(self) -> None:
        if self.access_code_bits % 8 != 0 or self.access_code_bits < 32:
            raise ConfigError("access code length must be a multiple of 8 and >= 32 bits")
        if self.access_code >= (1 << self.access_code_bits):
            raise ConfigError("access code does not fit its declared bit length")
        if self.payload_len < 0 or self.payload_len + self.crc_len > 0xFFFF:
            raise ConfigError("payload_len must satisfy 0 <= payload_len + crc_len <= 65535")
        if self.crc_len != CRC_LEN:
            raise ConfigError("only a 4-byte CRC trailer is supported")

    @property
    def header_bits(self) -> int:
        n = self.preamble_bits + self.access_code_bits + 2 * LENGTH_FIELD_BITS
        if self.include_seq:
            n += 16
        return n

    @property
    def packet_bits(self) -> int:
        return self.header_bits + 8 * (self.payload_len + self.crc_len)


@dataclass(frozen=True)
class Frame:
    payload: bytes
    crc: bytes
    seq: int | None = None
    crc_ok: CrcStatus = CrcStatus.UNCHECKED


def crc32_append(payload: bytes) -> bytes:
    """Append the 32-bit CRC trailer (poly 0x04C11DB7, reflected, init/xor 0xFFFFFFFF)."""
    if len(payload) > MAX_PAYLOAD_LEN:
        raise PayloadLengthError(f"payload of {len(payload)} bytes exceeds {MAX_PAYLOAD_LEN}")
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    return payload + crc.to_bytes(4, "big")


def crc32_check(frame_bytes: bytes) -> tuple[bool, bytes]:
    """Verify the trailing CRC. Returns (ok, payload-without-trailer)."""
    if len(frame_bytes) < CRC_LEN:
        raise MalformedFrameError("frame shorter than the CRC trailer")
    payload, trailer = frame_bytes[:-CRC_LEN], frame_bytes[-CRC_LEN:]
    expected = (zlib.crc32(payload) & 0xFFFFFFFF).to_bytes(4, "big")
    return trailer == expected, payload


def bytes_to_bits(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def bits_to_bytes(bits: np.ndarray) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def int_to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_int(bits: np.ndarray) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def preamble_bits(n: int) -> np.ndarray:
    """Alternating 1010... pattern of n bits."""
    return (np.arange(n, dtype=np.uint8) + 1) & 1


def build_packet(payload: bytes, cfg: FrameConfig, seq: int | None = None) -> np.ndarray:
    """Assemble the full over-the-air bitstream for one packet."""
    if len(payload) != cfg.payload_len:
        raise ConfigError(
            f"payload is {len(payload)} bytes, config expects {cfg.payload_len}"
        )
    body = crc32_append(payload)
    length = len(body)
    length_bits = int_to_bits(length, LENGTH_FIELD_BITS)
    parts = [
        preamble_bits(cfg.preamble_bits),
        int_to_bits(cfg.access_code, cfg.access_code_bits),
        length_bits,
        length_bits,
    ]
    if cfg.include_seq:
        parts.append(int_to_bits(0 if seq is None else seq & 0xFFFF, 16))
    parts.append(bytes_to_bits(body))
    return np.concatenate(parts)


def correlate_access_code(
    bits: np.ndarray, max_bit_errors: int = 0, cfg: FrameConfig | None = None
) -> np.ndarray:
    """Offsets where a window matches the access code in <= max_bit_errors positions."""
    if max_bit_errors > 3:
        raise ConfigError("max_bit_errors must be <= 3")
    code = int_to_bits(
        cfg.access_code if cfg else DEFAULT_ACCESS_CODE,
        cfg.access_code_bits if cfg else 64,
    )
    bits = np.asarray(bits, dtype=np.uint8)
    if len(bits) < len(code):
        return np.array([], dtype=np.int64)
    x = bits.astype(np.float32) * 2.0 - 1.0
    c = code.astype(np.float32) * 2.0 - 1.0
    corr = np.correlate(x, c, mode="valid")
    errors = np.rint((len(code) - corr) / 2.0).astype(np.int64)
    return np.flatnonzero(errors <= max_bit_errors).astype(np.int64)


def extract_payload(bits: np.ndarray, offset: int, cfg: FrameConfig) -> Frame:
    """Recover an unchecked Frame whose access code starts at bit `offset`."""
    bits = np.asarray(bits, dtype=np.uint8)
    pos = offset + cfg.access_code_bits
    if pos + 2 * LENGTH_FIELD_BITS > len(bits):
        raise TruncatedFrameError("header runs past the end of the stream")
    len_a = bits_to_int(bits[pos : pos + LENGTH_FIELD_BITS])
    pos += LENGTH_FIELD_BITS
    len_b = bits_to_int(bits[pos : pos + LENGTH_FIELD_BITS])
    pos += LENGTH_FIELD_BITS
    if len_a != len_b:
        raise HeaderMismatchError(f"length copies disagree ({len_a} vs {len_b})")
    seq = None
    if cfg.include_seq:
        if pos + 16 > len(bits):
            raise TruncatedFrameError("sequence field runs past the end of the stream")
        seq = bits_to_int(bits[pos : pos + 16])
        pos += 16
    if len_a < cfg.crc_len:
        raise HeaderMismatchError(f"declared length {len_a} smaller than the CRC trailer")
    end = pos + 8 * len_a
    if end > len(bits):
        raise TruncatedFrameError("payload runs past the end of the stream")
    body = bits_to_bytes(bits[pos:end])
    return Frame(payload=body[: -cfg.crc_len], crc=body[-cfg.crc_len :], seq=seq)


def check_frame(frame: Frame) -> Frame:
    """Return the frame with crc_ok resolved to OK or FAIL."""
    ok, _ = crc32_check(frame.payload + frame.crc)
    return replace(frame, crc_ok=CrcStatus.OK if ok else CrcStatus.FAIL)

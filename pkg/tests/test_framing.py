import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tvwslink.errors import (
    ConfigError,
    HeaderMismatchError,
    MalformedFrameError,
    PayloadLengthError,
    TruncatedFrameError,
)
from tvwslink.framing import (
    CrcStatus,
    FrameConfig,
    bits_to_bytes,
    bits_to_int,
    build_packet,
    bytes_to_bits,
    check_frame,
    correlate_access_code,
    crc32_append,
    crc32_check,
    extract_payload,
    int_to_bits,
    preamble_bits,
)


def test_crc32_known_check_value():
    # standard CRC-32 check: crc("123456789") = 0xCBF43926
    out = crc32_append(b"123456789")
    assert out[-4:] == (0xCBF43926).to_bytes(4, "big")


def test_crc32_roundtrip_and_corruption():
    ok, payload = crc32_check(crc32_append(b"hello world"))
    assert ok and payload == b"hello world"
    framed = bytearray(crc32_append(b"hello world"))
    framed[3] ^= 0x40
    ok, _ = crc32_check(bytes(framed))
    assert not ok


def test_crc32_check_too_short():
    with pytest.raises(MalformedFrameError):
        crc32_check(b"ab")


def test_crc32_append_oversized_payload():
    with pytest.raises(PayloadLengthError):
        crc32_append(b"x" * 65532)


def test_empty_payload_crc():
    ok, payload = crc32_check(crc32_append(b""))
    assert ok and payload == b""


@given(st.binary(min_size=0, max_size=300))
def test_crc32_roundtrip_property(data):
    ok, payload = crc32_check(crc32_append(data))
    assert ok and payload == data


def test_bits_bytes_roundtrip():
    data = bytes(range(256))
    assert bits_to_bytes(bytes_to_bits(data)) == data


def test_bit_order_msb_first():
    assert list(bytes_to_bits(b"\x80")) == [1, 0, 0, 0, 0, 0, 0, 0]
    assert list(int_to_bits(0xA5, 8)) == [1, 0, 1, 0, 0, 1, 0, 1]
    assert bits_to_int(np.array([1, 0, 1])) == 5


def test_preamble_alternates():
    assert list(preamble_bits(6)) == [1, 0, 1, 0, 1, 0]


def test_frame_config_validation():
    with pytest.raises(ConfigError):
        FrameConfig(payload_len=500, access_code_bits=20)
    with pytest.raises(ConfigError):
        FrameConfig(payload_len=500, access_code=1 << 70)
    with pytest.raises(ConfigError):
        FrameConfig(payload_len=-1)
    with pytest.raises(ConfigError):
        FrameConfig(payload_len=0xFFFC)


def test_packet_bit_budget():
    cfg = FrameConfig(payload_len=500)
    bits = build_packet(b"\x11" * 500, cfg, seq=3)
    assert len(bits) == cfg.packet_bits
    assert cfg.packet_bits == 32 + 64 + 16 + 16 + 16 + 8 * 504


def test_packet_roundtrip():
    cfg = FrameConfig(payload_len=64)
    payload = bytes(range(64))
    bits = build_packet(payload, cfg, seq=41)
    offsets = correlate_access_code(bits, cfg=cfg)
    assert len(offsets) == 1 and offsets[0] == cfg.preamble_bits
    frame = check_frame(extract_payload(bits, int(offsets[0]), cfg))
    assert frame.payload == payload
    assert frame.seq == 41
    assert frame.crc_ok is CrcStatus.OK


@settings(max_examples=30, deadline=None)
@given(st.binary(min_size=8, max_size=64), st.integers(0, 0xFFFF))
def test_packet_roundtrip_property(payload, seq):
    cfg = FrameConfig(payload_len=len(payload))
    bits = build_packet(payload, cfg, seq=seq)
    off = correlate_access_code(bits, cfg=cfg)
    frame = check_frame(extract_payload(bits, int(off[0]), cfg))
    assert frame.payload == payload and frame.seq == seq
    assert frame.crc_ok is CrcStatus.OK


def test_access_code_tolerates_bit_errors():
    cfg = FrameConfig(payload_len=16)
    bits = build_packet(b"p" * 16, cfg, seq=0)
    corrupted = bits.copy()
    for pos in (cfg.preamble_bits + 5, cfg.preamble_bits + 40):
        corrupted[pos] ^= 1
    assert len(correlate_access_code(corrupted, max_bit_errors=0, cfg=cfg)) == 0
    hits = correlate_access_code(corrupted, max_bit_errors=2, cfg=cfg)
    assert cfg.preamble_bits in hits


def test_access_code_max_errors_capped():
    with pytest.raises(ConfigError):
        correlate_access_code(np.zeros(100, dtype=np.uint8), max_bit_errors=4)


def test_extract_truncated_stream():
    cfg = FrameConfig(payload_len=100)
    bits = build_packet(b"z" * 100, cfg, seq=0)
    with pytest.raises(TruncatedFrameError):
        extract_payload(bits[: cfg.header_bits + 40], cfg.preamble_bits, cfg)


def test_extract_header_mismatch():
    cfg = FrameConfig(payload_len=32)
    bits = build_packet(b"q" * 32, cfg, seq=0)
    # flip one bit of the second length copy only
    pos = cfg.preamble_bits + cfg.access_code_bits + 16 + 3
    bits[pos] ^= 1
    with pytest.raises(HeaderMismatchError):
        extract_payload(bits, cfg.preamble_bits, cfg)


def test_crc_failure_is_a_status_not_an_error():
    cfg = FrameConfig(payload_len=32)
    bits = build_packet(b"q" * 32, cfg, seq=0)
    bits[cfg.header_bits + 10] ^= 1  # corrupt payload body
    frame = check_frame(extract_payload(bits, cfg.preamble_bits, cfg))
    assert frame.crc_ok is CrcStatus.FAIL


def test_no_seq_field_layout():
    cfg = FrameConfig(payload_len=8, include_seq=False)
    bits = build_packet(b"abcdefgh", cfg)
    frame = check_frame(extract_payload(bits, cfg.preamble_bits, cfg))
    assert frame.seq is None and frame.payload == b"abcdefgh"
    assert frame.crc_ok is CrcStatus.OK

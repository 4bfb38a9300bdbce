import math

import numpy as np
import pytest

from tvwslink.channel import (
    ChannelProfile,
    apply_awgn,
    apply_cfo,
    apply_gain,
    apply_multipath,
    apply_phase_noise,
    apply_profile,
)
from tvwslink.errors import ConfigError, ZeroPowerError
from tvwslink.modulators import SampleBlock

RNG = np.random.default_rng(7)


def _unit_noise(n, fs=1e6):
    s = (RNG.standard_normal(n) + 1j * RNG.standard_normal(n)) / np.sqrt(2)
    return SampleBlock(s, fs)


def test_profile_validation():
    with pytest.raises(ConfigError):
        ChannelProfile(taps=())
    with pytest.raises(ConfigError):
        ChannelProfile(noise_ref_bw=-1.0)
    with pytest.raises(ConfigError):
        ChannelProfile(phase_noise_std=-0.1)


def test_awgn_infinite_snr_is_identity():
    x = _unit_noise(1000)
    y = apply_awgn(x, math.inf, seed=3)
    assert np.array_equal(y.samples, x.samples)


def test_awgn_empirical_snr():
    x = _unit_noise(1_000_000)
    y = apply_awgn(x, 10.0, seed=11)
    noise = y.samples - x.samples
    snr = 10 * np.log10(np.mean(np.abs(x.samples) ** 2) / np.mean(np.abs(noise) ** 2))
    assert snr == pytest.approx(10.0, abs=0.1)


def test_awgn_deterministic():
    x = _unit_noise(5000)
    a = apply_awgn(x, 5.0, seed=42)
    b = apply_awgn(x, 5.0, seed=42)
    assert np.array_equal(a.samples, b.samples)
    c = apply_awgn(x, 5.0, seed=43)
    assert not np.array_equal(a.samples, c.samples)


def test_awgn_zero_power_input():
    with pytest.raises(ZeroPowerError):
        apply_awgn(SampleBlock(np.zeros(100, dtype=complex), 1e6), 10.0)


def test_awgn_noise_ref_bandwidth_scaling():
    # with a 100 kHz reference at 400 kHz sampling, total noise is 4x stronger
    x = _unit_noise(1_000_000, fs=400e3)
    y = apply_awgn(x, 10.0, seed=5, noise_ref_bw=100e3)
    noise = y.samples - x.samples
    ratio = np.mean(np.abs(noise) ** 2) / np.mean(np.abs(x.samples) ** 2)
    assert 10 * np.log10(ratio) == pytest.approx(-10 + 10 * np.log10(4), abs=0.1)


def test_cfo_identity_and_modulus():
    x = _unit_noise(2000)
    assert np.array_equal(apply_cfo(x, 0.0, 0.0).samples, x.samples)
    y = apply_cfo(x, 1234.0, 0.5)
    assert np.allclose(np.abs(y.samples), np.abs(x.samples))


def test_cfo_shifts_tone():
    fs, f, df = 1e6, 50e3, 30e3
    n = np.arange(1 << 14)
    x = SampleBlock(np.exp(2j * np.pi * f * n / fs), fs)
    y = apply_cfo(x, df)
    spec = np.abs(np.fft.fft(y.samples))
    peak = np.fft.fftfreq(len(n), 1 / fs)[np.argmax(spec)]
    assert peak == pytest.approx(f + df, abs=fs / len(n))


def test_cfo_rejects_beyond_nyquist():
    with pytest.raises(ConfigError):
        apply_cfo(_unit_noise(10, fs=1e3), 600.0)


def test_multipath_identity():
    x = _unit_noise(500)
    y = apply_multipath(x, [1.0])
    assert np.allclose(y.samples, x.samples)


def test_multipath_matches_direct_convolution():
    x = _unit_noise(200)
    taps = np.array([0.9, 0.3 - 0.2j, 0.1j])
    y = apply_multipath(x, taps)
    direct = np.zeros(len(x.samples), dtype=complex)
    for n in range(len(x.samples)):
        for k, h in enumerate(taps):
            if n - k >= 0:
                direct[n] += h * x.samples[n - k]
    assert np.allclose(y.samples, direct, atol=1e-12)
    assert len(y.samples) == len(x.samples)


def test_multipath_output_power():
    x = _unit_noise(1_000_000)
    taps = np.array([1.0, 0.5, 0.25j])
    y = apply_multipath(x, taps)
    expected = np.sum(np.abs(taps) ** 2)
    assert np.mean(np.abs(y.samples) ** 2) == pytest.approx(expected, rel=0.01)


def test_gain_scales_power():
    x = _unit_noise(1000)
    y = apply_gain(x, -6.0)
    ratio = np.mean(np.abs(y.samples) ** 2) / np.mean(np.abs(x.samples) ** 2)
    assert 10 * np.log10(ratio) == pytest.approx(-6.0, abs=1e-9)


def test_phase_noise_properties():
    x = _unit_noise(200_000)
    y = apply_phase_noise(x, 0.01, seed=1)
    assert np.allclose(np.abs(y.samples), np.abs(x.samples))
    walk = np.angle(y.samples / x.samples)
    inc = np.angle(np.exp(1j * np.diff(np.unwrap(walk))))
    assert np.std(inc) == pytest.approx(0.01, rel=0.05)
    assert np.array_equal(apply_phase_noise(x, 0.0).samples, x.samples)


def test_profile_composition_deterministic():
    x = _unit_noise(20000)
    prof = ChannelProfile(snr_db=12.0, cfo_hz=500.0, phase0=0.3,
                          taps=(1.0, 0.2 + 0.1j), gain_db=-3.0, seed=77)
    a = apply_profile(x, prof)
    b = apply_profile(x, prof)
    assert np.array_equal(a.samples, b.samples)


def test_profile_seed_changes_only_noise():
    x = _unit_noise(20000)
    p1 = ChannelProfile(snr_db=10.0, cfo_hz=100.0, seed=1)
    p2 = ChannelProfile(snr_db=10.0, cfo_hz=100.0, seed=2)
    clean = ChannelProfile(cfo_hz=100.0)  # snr = inf, no noise
    base = apply_profile(x, clean)
    n1 = apply_profile(x, p1).samples - base.samples
    n2 = apply_profile(x, p2).samples - base.samples
    assert not np.array_equal(n1, n2)
    assert np.mean(np.abs(n1) ** 2) == pytest.approx(np.mean(np.abs(n2) ** 2), rel=0.1)

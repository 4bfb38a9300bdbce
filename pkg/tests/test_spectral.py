import numpy as np
import pytest

from tvwslink.errors import ConfigError, ZeroPowerError
from tvwslink.modulators import SampleBlock
from tvwslink.spectral import (
    DB_FLOOR,
    PowerSpectrum,
    adjacent_channel_power,
    avg_fft_power,
    band_power,
    channel_power,
    occupied_bandwidth,
    to_db,
)

RNG = np.random.default_rng(31)


def _spectrum(bins, fs=1.0, fc=0.0):
    bins = np.asarray(bins, dtype=float)
    return PowerSpectrum(bins=bins, fft_size=len(bins), iterations=1,
                         sample_rate=fs, center_freq=fc)


def test_power_spectrum_validation():
    with pytest.raises(ConfigError):
        PowerSpectrum(np.ones(8), fft_size=16, iterations=1, sample_rate=1.0)
    with pytest.raises(ConfigError):
        PowerSpectrum(-np.ones(8), fft_size=8, iterations=1, sample_rate=1.0)


def test_avg_fft_power_zero_input():
    x = SampleBlock(np.zeros(4096, dtype=complex), 1e3)
    ps = avg_fft_power(x, 256, 4)
    assert np.all(ps.bins == 0)


def test_avg_fft_power_tone_on_bin():
    n, k0 = 256, 17
    t = np.arange(n)
    x = SampleBlock(np.exp(2j * np.pi * k0 * t / n), 1e3)
    ps = avg_fft_power(x, n, 1)
    assert ps.bins[k0] == pytest.approx(1.0, rel=1e-12)
    others = np.delete(ps.bins, k0)
    assert np.max(others) < 1e-20


def test_avg_fft_power_average_of_identical_windows():
    n = 128
    seg = RNG.standard_normal(n) + 1j * RNG.standard_normal(n)
    x4 = SampleBlock(np.tile(seg, 4), 1e3)
    x1 = SampleBlock(seg, 1e3)
    a = avg_fft_power(x4, n, 4)
    b = avg_fft_power(x1, n, 1)
    assert np.allclose(a.bins, b.bins, rtol=1e-12)


def test_avg_fft_power_needs_enough_samples():
    with pytest.raises(ConfigError):
        avg_fft_power(SampleBlock(np.ones(100, dtype=complex), 1e3), 64, 2)


def test_parseval_identity():
    n, m = 256, 8
    s = RNG.standard_normal(n * m) + 1j * RNG.standard_normal(n * m)
    x = SampleBlock(s, 1e3)
    ps = avg_fft_power(x, n, m)
    assert channel_power(ps, 0, n - 1) == pytest.approx(
        np.mean(np.abs(s) ** 2), rel=1e-12
    )


def test_channel_power_single_bin_and_bounds():
    ps = _spectrum([0.0, 2.0, 3.0, 0.0])
    assert channel_power(ps, 1, 1) == 2.0
    assert channel_power(ps, 0, 3) == 5.0
    with pytest.raises(IndexError):
        channel_power(ps, 2, 4)
    with pytest.raises(IndexError):
        channel_power(ps, -1, 2)


def test_channel_power_monotone_in_range_inclusion():
    bins = RNG.random(64)
    ps = _spectrum(bins)
    inner = channel_power(ps, 10, 20)
    assert channel_power(ps, 8, 22) >= inner
    assert channel_power(ps, 10, 21) >= inner


def test_averaging_reduces_variance():
    # stationary noise: variance of P_k falls roughly as 1/M
    n = 128
    s = RNG.standard_normal(n * 16 * 40) + 1j * RNG.standard_normal(n * 16 * 40)
    var = {}
    for m in (1, 4, 16):
        estimates = []
        for i in range(40):
            seg = SampleBlock(s[i * n * 16 : i * n * 16 + n * m], 1e3)
            estimates.append(avg_fft_power(seg, n, m).bins)
        var[m] = np.mean(np.var(np.stack(estimates), axis=0))
    assert var[1] / var[4] == pytest.approx(4.0, rel=1.0)   # within 2x of ideal
    assert var[4] / var[16] == pytest.approx(4.0, rel=1.0)


def test_to_db_values_and_floor():
    ps = _spectrum([1.0, 0.1, 0.0])
    db = to_db(ps)
    assert db[0] == pytest.approx(0.0, abs=1e-12)
    assert db[1] == pytest.approx(-10.0, abs=1e-9)
    assert db[2] == DB_FLOOR


def test_obw_single_tone():
    bins = np.zeros(64)
    bins[0] = 5.0  # DC bin
    ps = _spectrum(bins, fs=64.0)
    assert occupied_bandwidth(ps) == pytest.approx(1.0)


def test_obw_flat_spectrum():
    # flat over all bins: 99% of the mass needs ~99% of the bins
    ps = _spectrum(np.ones(200), fs=200.0)
    assert occupied_bandwidth(ps, 0.99) == pytest.approx(198.0, abs=1.5)


def test_obw_zero_power():
    with pytest.raises(ZeroPowerError):
        occupied_bandwidth(_spectrum(np.zeros(16)))


def test_obw_fraction_validation():
    with pytest.raises(ConfigError):
        occupied_bandwidth(_spectrum(np.ones(16)), fraction=0.0)


def test_acp_all_in_band():
    bins = np.zeros(64)
    bins[:4] = 1.0
    ps = _spectrum(bins)
    assert adjacent_channel_power(ps, (0, 7), (8, 15)) <= -200.0


def test_acp_equal_flat_bands():
    bins = np.zeros(64)
    bins[0:8] = 0.5
    bins[8:16] = 0.5
    ps = _spectrum(bins)
    assert adjacent_channel_power(ps, (0, 7), (8, 15)) == pytest.approx(0.0, abs=1e-9)


def test_acp_normalizes_per_bandwidth():
    # same total power, adjacent band twice as wide -> -3 dB per 100 kHz
    bins = np.zeros(64)
    bins[0:8] = 1.0 / 8
    bins[8:24] = 1.0 / 16
    ps = _spectrum(bins)
    assert adjacent_channel_power(ps, (0, 7), (8, 23)) == pytest.approx(-3.01, abs=0.01)


def test_acp_requires_disjoint_ranges():
    ps = _spectrum(np.ones(32))
    with pytest.raises(ConfigError):
        adjacent_channel_power(ps, (0, 10), (5, 20))


def test_acp_zero_in_band():
    ps = _spectrum(np.concatenate([np.zeros(8), np.ones(8)]))
    with pytest.raises(ZeroPowerError):
        adjacent_channel_power(ps, (0, 7), (8, 15))


def test_bin_freq_mapping():
    ps = _spectrum(np.ones(8), fs=800.0, fc=10_000.0)
    assert ps.bin_freq(0) == 10_000.0
    assert ps.bin_freq(1) == 10_100.0
    assert ps.bin_freq(7) == 9_900.0  # wraps to negative side
    assert band_power(ps, 9_900.0, 10_100.0) == pytest.approx(3.0)

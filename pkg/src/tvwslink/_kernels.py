"""Numba kernels for the sample-rate recursive loops in the receiver.

Everything here is a plain function of ndarrays so the receiver module
stays testable and the hot loops run at native speed.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def agc_kernel(x, reference, rate, gain0, gain_min, gain_max):
    y = np.empty_like(x)
    g = gain0
    for n in range(x.shape[0]):
        y[n] = x[n] * g
        g += rate * (reference - abs(y[n]))
        if g < gain_min:
            g = gain_min
        elif g > gain_max:
            g = gain_max
    return y


@njit(cache=True, inline="always")
def _cubic_interp(x, k, mu):
    # 4-point Lagrange interpolation around sample k with fraction mu in [0,1)
    a = x[k - 1]
    b = x[k]
    c = x[k + 1]
    d = x[k + 2]
    return (
        b
        + mu * (c - a / 3.0 - b / 2.0 - d / 6.0)
        + mu * mu * ((a + c) / 2.0 - b)
        + mu * mu * mu * ((b - c) / 2.0 + (d - a) / 6.0)
    )


@njit(cache=True)
def gardner_kernel(x, sps, k1, k2, ema_alpha, lock_threshold):
    """Gardner timing recovery; returns (symbols, final |error| EMA, locked flag).

    The loop strobes one output per nominal symbol period, adjusting the
    strobe position with a PI filter driven by the Gardner error.
    """
    n = x.shape[0]
    max_syms = int(n / sps * 1.5) + 16
    out = np.empty(max_syms, dtype=np.complex128)
    pos = sps + 1.0  # leave room for the interpolator and the mid sample
    v_int = 0.0
    prev = 0.0 + 0.0j
    ema = 1.0
    locked = False
    count = 0
    pwr = 0.0
    for i in range(min(n, 64)):
        pwr += abs(x[i]) ** 2
    pwr /= min(n, 64)
    if pwr < 1e-30:
        pwr = 1e-30
    while pos + sps + 2.0 < n:
        k = int(pos)
        mu = pos - k
        cur = _cubic_interp(x, k, mu)
        mpos = pos - sps / 2.0
        mk = int(mpos)
        mid = _cubic_interp(x, mk, mpos - mk)
        # normalize by tracked symbol power so loop gain is scale-free
        pwr = 0.99 * pwr + 0.01 * abs(cur) ** 2
        if pwr < 1e-30:
            pwr = 1e-30
        e = ((prev - cur) * np.conj(mid)).real / pwr
        if e > 1.0:
            e = 1.0
        elif e < -1.0:
            e = -1.0
        v_int += k2 * e
        # keep the recovered clock within +-25% of nominal
        if v_int > 0.25:
            v_int = 0.25
        elif v_int < -0.25:
            v_int = -0.25
        step = sps * (1.0 + k1 * e + v_int)
        if step < 0.5 * sps:
            step = 0.5 * sps
        pos += step
        if count >= max_syms:
            break
        out[count] = cur
        count += 1
        prev = cur
        ema = (1.0 - ema_alpha) * ema + ema_alpha * abs(e)
        if ema < lock_threshold:
            locked = True
    return out[:count], ema, locked


@njit(cache=True)
def cma_kernel(x, ntaps, mu):
    """Constant-modulus adaptive FIR with center-spike initialization."""
    n = x.shape[0]
    w = np.zeros(ntaps, dtype=np.complex128)
    w[ntaps // 2] = 1.0 + 0.0j
    out = np.empty(n, dtype=np.complex128)
    buf = np.zeros(ntaps, dtype=np.complex128)
    for i in range(n):
        # shift register: newest sample at index 0
        for j in range(ntaps - 1, 0, -1):
            buf[j] = buf[j - 1]
        buf[0] = x[i]
        y = 0.0 + 0.0j
        for j in range(ntaps):
            y += w[j] * buf[j]
        out[i] = y
        err = y * (abs(y) ** 2 - 1.0)
        for j in range(ntaps):
            w[j] -= mu * err * np.conj(buf[j])
    return out


@njit(cache=True)
def costas_kernel(x, order, k1, k2):
    """Second-order Costas loop; de-rotates by the tracked phase/frequency."""
    n = x.shape[0]
    out = np.empty(n, dtype=np.complex128)
    phase = 0.0
    freq = 0.0
    for i in range(n):
        y = x[i] * np.exp(-1j * phase)
        out[i] = y
        if order == 2:
            e = y.real * y.imag
        else:
            e = (1.0 if y.real > 0.0 else -1.0) * y.imag - (
                1.0 if y.imag > 0.0 else -1.0
            ) * y.real
        if e > 1.0:
            e = 1.0
        elif e < -1.0:
            e = -1.0
        freq += k2 * e
        phase += freq + k1 * e
        if phase > np.pi:
            phase -= 2.0 * np.pi
        elif phase < -np.pi:
            phase += 2.0 * np.pi
    return out

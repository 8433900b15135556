"""Compiled byte-entropy kernels.

Curve points use the identity H = (n*log2(n) - sum_b c_b*log2(c_b)) / n, which
keeps single-symbol prefixes at exactly 0.0 and all-distinct prefixes at
exactly log2(n). Histograms are extended in place, 8 bytes per step.
"""

import numpy as np
from numba import njit

STEP = 8
MAX_CURVE_BYTES = 256

# c * log2(c) for every count a curve prefix can reach
NLOGN = np.zeros(MAX_CURVE_BYTES + 1, dtype=np.float64)
NLOGN[1:] = np.arange(1, MAX_CURVE_BYTES + 1) * np.log2(np.arange(1, MAX_CURVE_BYTES + 1))


@njit(cache=True, nogil=True)
def _clamp(h):
    if h < 0.0:
        return 0.0
    if h > 8.0:
        return 8.0
    return h


@njit(cache=True, nogil=True)
def histogram_entropy(data, start, length):
    counts = np.zeros(256, dtype=np.int64)
    for i in range(start, start + length):
        counts[data[i]] += 1
    s = 0.0
    for b in range(256):
        c = counts[b]
        if c > 0:
            s += c * np.log2(c)
    return _clamp((length * np.log2(length) - s) / length)


@njit(cache=True, nogil=True)
def _fill_curve(data, start, npoints, nlogn, counts, present, out):
    npresent = 0
    pos = start
    for k in range(npoints):
        for _ in range(STEP):
            b = data[pos]
            pos += 1
            if counts[b] == 0:
                present[npresent] = b
                npresent += 1
            counts[b] += 1
        n = STEP * (k + 1)
        s = 0.0
        for i in range(npresent):
            s += nlogn[counts[present[i]]]
        out[k] = _clamp((nlogn[n] - s) / n)
    for i in range(npresent):
        counts[present[i]] = 0


@njit(cache=True, nogil=True)
def prefix_entropies(data, start, npoints, nlogn):
    counts = np.zeros(256, dtype=np.int64)
    present = np.empty(256, dtype=np.int64)
    out = np.empty(npoints, dtype=np.float64)
    _fill_curve(data, start, npoints, nlogn, counts, present, out)
    return out


@njit(cache=True, nogil=True)
def fragment_areas(data, starts, npoints, nlogn, ref):
    """Trapezoid area of (ref - curve) over [8, 8*npoints] for each start.

    Accumulates interval by interval, in the same order as
    cumulative_fragment_areas, so both agree bit for bit.
    """
    counts = np.zeros(256, dtype=np.int64)
    present = np.empty(256, dtype=np.int64)
    curve = np.empty(npoints, dtype=np.float64)
    areas = np.empty(starts.shape[0], dtype=np.float64)
    half = STEP / 2.0
    for f in range(starts.shape[0]):
        _fill_curve(data, starts[f], npoints, nlogn, counts, present, curve)
        total = 0.0
        for k in range(1, npoints):
            total = total + half * ((ref[k - 1] - curve[k - 1]) + (ref[k] - curve[k]))
        areas[f] = total
    return areas


@njit(cache=True, nogil=True)
def cumulative_fragment_areas(data, start, npoints, nlogn, ref):
    """out[k] is the area over [8, 8*(k+1)]; out[0] is 0."""
    curve = prefix_entropies(data, start, npoints, nlogn)
    out = np.zeros(npoints, dtype=np.float64)
    half = STEP / 2.0
    for k in range(1, npoints):
        out[k] = out[k - 1] + half * ((ref[k - 1] - curve[k - 1]) + (ref[k] - curve[k]))
    return out



@njit(cache=True, nogil=True)
def _mulhi(a, b):
    """High 64 bits of the 128-bit product of two uint64 values."""
    mask = np.uint64(0xFFFFFFFF)
    s32 = np.uint64(32)
    a_lo, a_hi = a & mask, a >> s32
    b_lo, b_hi = b & mask, b >> s32
    p0 = a_lo * b_lo
    p1 = a_lo * b_hi
    p2 = a_hi * b_lo
    p3 = a_hi * b_hi
    carry = ((p0 >> s32) + (p1 & mask) + (p2 & mask)) >> s32
    return p3 + (p1 >> s32) + (p2 >> s32) + carry


@njit(cache=True, nogil=True)
def _randint(word, a, b):
    return a + np.int64(_mulhi(word, np.uint64(b - a + 1)))


@njit(cache=True, nogil=True)
def multi_fragment_areas(data, words, fragments, npoints, nlogn, ref):
    """Header plus ``fragments - 1`` offsets drawn from ``words``, and their areas.

    Offsets follow the same rule as detector.fragment_offsets: one draw in
    [o, size - o - 1] for two fragments, otherwise one draw per partition
    clamped to size - o. Needs len(words) >= fragments - 1.
    """
    size = data.shape[0]
    o = STEP * npoints
    starts = np.zeros(fragments, dtype=np.int64)
    if fragments == 2:
        starts[1] = _randint(words[0], o, size - o - 1)
    else:
        part = size // fragments
        last = size - o
        for k in range(1, fragments):
            s = _randint(words[k - 1], k * part, (k + 1) * part)
            starts[k] = s if s < last else last
    return starts, fragment_areas(data, starts, npoints, nlogn, ref)

# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled click-sampling kernel.

Same counter-based scheme as ``edcsim._sampler_py`` (SplitMix64 output i
-> uniform double -> first cumulative bin above it); the two must stay
bit-identical.  This version runs the per-photon loop in C and releases
the GIL, so worker threads can sample disjoint index ranges in parallel.
"""

import numpy as np

from libc.stdint cimport int64_t, uint64_t

cdef uint64_t _GAMMA = 0x9E3779B97F4A7C15U
cdef double _TO_UNIT = 1.0 / 9007199254740992.0  # 2^-53


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9U
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBU
    return z ^ (z >> 31)


def sample_counts(cumprobs, long long start, long long stop, seed):
    """Counts of photons ``start..stop-1`` landing in each of the four bins."""
    cdef double[::1] cp = np.ascontiguousarray(cumprobs, dtype=np.float64)
    out = np.zeros(4, dtype=np.int64)
    cdef int64_t[::1] counts = out
    cdef uint64_t s = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t i
    cdef uint64_t lo = <uint64_t>start
    cdef uint64_t hi = <uint64_t>stop
    cdef double u
    cdef Py_ssize_t k
    if cp.shape[0] != 4:
        raise ValueError("cumprobs must have length 4")
    with nogil:
        for i in range(lo, hi):
            u = <double>(_mix64((i + 1) * _GAMMA + s) >> 11) * _TO_UNIT
            k = 0
            while k < 3 and u >= cp[k]:
                k += 1
            counts[k] += 1
    return out

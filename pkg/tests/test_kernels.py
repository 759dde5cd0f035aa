"""Sampling kernels: reference oracle, backend equivalence, partition invariance."""

from __future__ import annotations

import numpy as np
import pytest

from edcsim.kernels import available_backends

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def splitmix64_reference(seed: int, index: int) -> int:
    """Arbitrary-precision reference for the per-photon 64-bit draw."""
    z = (seed + (index + 1) * GAMMA) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return (z ^ (z >> 31)) & MASK


def counts_reference(cumprobs, start, stop, seed):
    """Brute-force per-photon loop in pure Python integers."""
    counts = [0, 0, 0, 0]
    for i in range(start, stop):
        u = (splitmix64_reference(seed, i) >> 11) * 2.0**-53
        k = 0
        while k < 3 and u >= cumprobs[k]:
            k += 1
        counts[k] += 1
    return counts


CUMPROBS = np.array([0.1, 0.4, 0.85, 1.0])


@pytest.mark.parametrize("name", sorted(available_backends()))
class TestBackend:
    def test_matches_reference(self, name):
        kernel = available_backends()[name].sample_counts
        got = kernel(CUMPROBS, 0, 5000, 12345)
        assert got.tolist() == counts_reference(CUMPROBS, 0, 5000, 12345)

    def test_subrange_matches_reference(self, name):
        kernel = available_backends()[name].sample_counts
        got = kernel(CUMPROBS, 1700, 2400, 999)
        assert got.tolist() == counts_reference(CUMPROBS, 1700, 2400, 999)

    def test_partition_invariance(self, name):
        kernel = available_backends()[name].sample_counts
        whole = kernel(CUMPROBS, 0, 30_000, 7)
        pieces = sum(kernel(CUMPROBS, a, b, 7)
                     for a, b in [(0, 11), (11, 9_000), (9_000, 29_999), (29_999, 30_000)])
        assert np.array_equal(whole, pieces)

    def test_degenerate_distribution(self, name):
        kernel = available_backends()[name].sample_counts
        sure = np.array([0.0, 1.0, 1.0, 1.0])  # all mass on detector 2
        assert kernel(sure, 0, 1000, 3).tolist() == [0, 1000, 0, 0]

    def test_large_seed_wraps(self, name):
        kernel = available_backends()[name].sample_counts
        seed = (1 << 64) - 1
        assert kernel(CUMPROBS, 0, 200, seed).tolist() == counts_reference(CUMPROBS, 0, 200, seed)


def test_backends_bit_identical_when_compiled_present():
    backends = available_backends()
    if "cython" not in backends:
        pytest.skip("compiled kernel not built")
    rng = np.random.default_rng(31337)
    for _ in range(20):
        probs = rng.dirichlet(np.ones(4))
        cum = np.cumsum(probs)
        cum[-1] = 1.0
        seed = int(rng.integers(0, 2**63))
        a = backends["python"].sample_counts(cum, 0, 50_000, seed)
        b = backends["cython"].sample_counts(cum, 0, 50_000, seed)
        assert np.array_equal(a, b)

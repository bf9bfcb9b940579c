"""Seeded random streams and batched detector sampling."""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import EmptyBatch
from .noise import DetectorSpec


def substream(seed, *key: int) -> np.random.Generator:
    """Independent generator addressed by (seed, key...).

    The stream is a pure function of its address, so work can be split over
    any number of workers without changing results.
    """
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(key))
    else:
        ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def _uniforms(rng, n, width, det):
    cols = width if det.dark_count_prob > 0.0 else 1
    return rng.random((n, cols))


def _detected(rng, n, detectors, det):
    if det.efficiency >= 1.0:
        return np.ones(n, dtype=np.bool_)
    return (rng.random((n, detectors)) < det.efficiency).all(axis=1)


def correlated_batch(probs, n: int, det: DetectorSpec, rng: np.random.Generator, backend=None):
    """Measure ``n`` pairs with joint Born table ``probs`` and return (Σ a·b, kept)."""
    probs = np.atleast_2d(probs)
    u = _uniforms(rng, n, 3, det)
    keep = _detected(rng, n, 2, det)
    a, b = _kernels.joint_outcomes(probs, u, det.dark_count_prob, backend=backend)
    return _kernels.product_sum(a, b, keep, backend=backend)


def correlated_outcomes(probs, n: int, det: DetectorSpec, rng: np.random.Generator, backend=None):
    """Like :func:`correlated_batch` but returns the outcome arrays; 0 marks a discarded pair."""
    probs = np.atleast_2d(probs)
    u = _uniforms(rng, n, 3, det)
    keep = _detected(rng, n, 2, det)
    a, b = _kernels.joint_outcomes(probs, u, det.dark_count_prob, backend=backend)
    a[~keep] = 0
    b[~keep] = 0
    return a, b


def single_outcomes(p_plus, n: int, det: DetectorSpec, rng: np.random.Generator, backend=None):
    """±1 outcomes of one detector, 0 where nothing was detected."""
    p_plus = np.atleast_1d(np.asarray(p_plus, dtype=np.float64))
    u = _uniforms(rng, n, 2, det)
    keep = _detected(rng, n, 1, det)
    o = _kernels.single_outcomes(p_plus, u, det.dark_count_prob, backend=backend)
    o[~keep] = 0
    return o


def correlator_mean(total: int, kept: int) -> float:
    if kept == 0:
        raise EmptyBatch("every pair in the batch was discarded")
    return total / kept

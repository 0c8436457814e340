"""Stochastic channel synthesis: i.i.d. Rayleigh fading and a clustered
millimetre-wave model built from uniform-linear-array steering vectors.

Reproducibility contract: every generator is a pure function of its
parameters and a seed. Streams are Philox counter-based generators keyed by
``SeedSequence(entropy=seed, spawn_key=...)``, so per-trial substreams can be
derived independently and drawn in any order (or in parallel) with identical
results.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

RngLike = "int | np.random.Generator"


def _key_word(key) -> int:
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError("stream keys must be non-negative")
        return int(key)
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    raise TypeError(f"stream key must be int or str, got {type(key).__name__}")


def stream(seed: int, *keys) -> np.random.Generator:
    """Deterministic substream for (seed, keys).

    Keys may be ints (e.g. sweep index, trial index) or short strings
    (channel labels). Distinct key tuples give statistically independent
    streams; the same tuple always reproduces the same draws.
    """
    spawn = tuple(_key_word(k) for k in keys)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=spawn)
    return np.random.Generator(np.random.Philox(ss))


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(int(seed))


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Circular complex Gaussian draws, per-entry variance `variance`."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def rayleigh_matrix(rows: int, cols: int, variance: float, seed) -> np.ndarray:
    """(rows, cols) i.i.d. circular complex Gaussian matrix.

    Each entry has mean zero and E|entry|^2 = variance (real and imaginary
    parts are independent with variance/2 each).
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"matrix extents must be positive, got {rows}x{cols}")
    if not variance > 0:
        raise ValueError("variance must be positive")
    return complex_normal(_as_generator(seed), (rows, cols), variance)


@dataclass(frozen=True)
class MmwParams:
    """Clustered-arrival channel parameters.

    clusters: number of angular clusters (T); subpaths: arrivals per cluster
    (J); variance: per-path gain power (linear); aoa_center / aod_center:
    nominal arrival / departure angles in radians. Cluster centres are drawn
    uniformly within cluster_spread of the nominal angle, and each subpath
    within subpath_spread of its cluster centre.
    """

    clusters: int
    subpaths: int
    variance: float
    aoa_center: float = 0.0
    aod_center: float = 0.0
    cluster_spread: float = np.deg2rad(60.0)
    subpath_spread: float = np.deg2rad(2.0)

    def __post_init__(self):
        if self.clusters < 1:
            raise ValueError("clusters must be >= 1")
        if self.subpaths < 1:
            raise ValueError("subpaths must be >= 1")
        if not self.variance > 0:
            raise ValueError("variance must be positive")
        if self.cluster_spread < 0 or self.subpath_spread < 0:
            raise ValueError("angle spreads must be >= 0")


def _cluster_angles(rng, center, n_clusters, n_subpaths, cluster_spread, subpath_spread):
    centres = rng.uniform(center - cluster_spread, center + cluster_spread, size=n_clusters)
    return rng.uniform(centres[:, None] - subpath_spread,
                       centres[:, None] + subpath_spread,
                       size=(n_clusters, n_subpaths))


def mmw_matrix(rx_elems: int, tx_elems: int, params: MmwParams, seed) -> np.ndarray:
    """Clustered mmWave channel: sum of T*J random-gain rank-one arrivals.

    Returns sqrt(rx*tx) * sum_{t,l} gain[t,l] * a_rx(aoa[t,l]) a_tx(aod[t,l])^T
    with gain ~ CN(0, variance) per path and half-wavelength ULA steering
    vectors on both sides. AoA and AoD angle sets are drawn independently.
    """
    if rx_elems < 1 or tx_elems < 1:
        raise ValueError(f"array sizes must be positive, got {rx_elems}x{tx_elems}")
    rng = _as_generator(seed)
    t, j = params.clusters, params.subpaths
    aoa = _cluster_angles(rng, params.aoa_center, t, j,
                          params.cluster_spread, params.subpath_spread)
    aod = _cluster_angles(rng, params.aod_center, t, j,
                          params.cluster_spread, params.subpath_spread)
    gains = complex_normal(rng, (t, j), params.variance)

    # a_rx(angle) columns for all paths at once: (rx, T*J)
    m_rx = np.arange(rx_elems)[:, None]
    m_tx = np.arange(tx_elems)[:, None]
    a_rx = np.exp(1j * np.pi * m_rx * np.sin(aoa.ravel())[None, :]) / np.sqrt(rx_elems)
    a_tx = np.exp(1j * np.pi * m_tx * np.sin(aod.ravel())[None, :]) / np.sqrt(tx_elems)
    return np.sqrt(rx_elems * tx_elems) * ((a_rx * gains.ravel()) @ a_tx.T)

"""Independent brute-force oracles used to pin expected values.

The exhaustive searches here evaluate objectives directly from the channel
definitions on a polar grid (modulus step 0.05, phase step 3 degrees per
element) and never call the solvers they check.
"""
from __future__ import annotations

import numpy as np

RHO_STEP = 0.05
PHASE_STEP_DEG = 3.0


def polar_grid(conventional: bool = False) -> np.ndarray:
    """All grid values of one reflection coefficient."""
    rhos = np.array([1.0]) if conventional else np.arange(0.0, 1.0 + 1e-12, RHO_STEP)
    phases = np.deg2rad(np.arange(0.0, 360.0, PHASE_STEP_DEG))
    return (rhos[:, None] * np.exp(1j * phases[None, :])).ravel()


def _pair_grid(conventional: bool):
    phis = polar_grid(conventional)
    p1, p2 = np.meshgrid(phis, phis, indexing="ij")
    return p1.ravel(), p2.ravel()


def radarcomm_grid_min(direct, tx_to_ris, ris_to_rx, conventional=False,
                       chunk=200_000):
    """Exhaustive min of ||direct + ris_to_rx diag(phi) tx_to_ris||_F, K in {1, 2}."""
    d = np.asarray(direct, complex)
    g = np.asarray(tx_to_ris, complex)
    h = np.asarray(ris_to_rx, complex)
    k = g.shape[0]
    dvec = d.reshape(-1)
    cols = [np.outer(h[:, i], g[i, :]).reshape(-1) for i in range(k)]
    if k == 1:
        phis = polar_grid(conventional)
        vals = np.abs(dvec[:, None] + cols[0][:, None] * phis[None, :]) ** 2
        return float(np.sqrt(vals.sum(axis=0).min()))
    assert k == 2
    p1, p2 = _pair_grid(conventional)
    best = np.inf
    for lo in range(0, p1.size, chunk):
        s1, s2 = p1[lo:lo + chunk], p2[lo:lo + chunk]
        vals = np.abs(dvec[:, None] + cols[0][:, None] * s1[None, :]
                      + cols[1][:, None] * s2[None, :]) ** 2
        best = min(best, float(vals.sum(axis=0).min()))
    return float(np.sqrt(best))


def d2d_grid_maxmin(inst, conventional=False, chunk=200_000):
    """Exhaustive max over the grid of the worst-link SINR, K = 2, any L."""
    l = inst.num_links
    assert inst.num_elements == 2
    p2 = inst.powers ** 2
    base = inst.direct
    c1 = np.einsum("a,b->ab", inst.ris_to_rx[:, 0], inst.tx_to_ris[0, :])
    c2 = np.einsum("a,b->ab", inst.ris_to_rx[:, 1], inst.tx_to_ris[1, :])
    g1, g2 = _pair_grid(conventional)
    best = -np.inf
    for lo in range(0, g1.size, chunk):
        s1, s2 = g1[lo:lo + chunk], g2[lo:lo + chunk]
        ch = (base[:, :, None] + c1[:, :, None] * s1[None, None, :]
              + c2[:, :, None] * s2[None, None, :])
        powers = np.abs(ch) ** 2 * p2[None, :, None]
        num = powers[np.arange(l), np.arange(l)]
        den = powers.sum(axis=1) - num + inst.noise_var
        best = max(best, float((num / den).min(axis=0).max()))
    return best


def pls_grid_max(inst, conventional=False, chunk=200_000):
    """Exhaustive max of the secrecy rate over the grid, K = 2."""
    assert inst.num_elements == 2
    g, hb, he, gj = (inst.bs_to_ris, inst.ris_to_bob, inst.ris_to_eve, inst.jam_to_ris)
    g1, g2 = _pair_grid(conventional)
    best = 0.0
    for lo in range(0, g1.size, chunk):
        s1, s2 = g1[lo:lo + chunk], g2[lo:lo + chunk]
        cb = inst.bs_to_bob + g[0] * hb[0] * s1 + g[1] * hb[1] * s2
        ce = inst.bs_to_eve + g[0] * he[0] * s1 + g[1] * he[1] * s2
        cj = inst.jam_to_eve + gj[0] * he[0] * s1 + gj[1] * he[1] * s2
        sb = np.abs(cb) ** 2 / inst.noise_bob
        se = np.abs(ce) ** 2 / (np.abs(cj) ** 2 + inst.noise_eve)
        best = max(best, float(np.log2((1 + sb) / (1 + se)).max()))
    return max(0.0, best)


def unit_modulus_random_baseline(a, d, draws, rng):
    """Best objective of `draws` random unit-modulus vectors (for bounds)."""
    k = a.shape[1]
    phases = rng.uniform(0.0, 2 * np.pi, size=(draws, k))
    phis = np.exp(1j * phases)
    vals = np.linalg.norm(d[None, :] + phis @ a.T, axis=1)
    return float(vals.min())

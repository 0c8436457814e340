"""Cross-link interference mitigation for device-to-device pairs sharing a
band, assisted by a reflecting surface.

The design maximizes the worst-case link SINR. Homogenizing each
transmit/receive pair's channel magnitude into a rank-one quadratic form
turns the problem into a fractional program over a rank-relaxed PSD matrix,
solved by alternating a max-min epigraph SDP with a closed-form ratio update
(a Dinkelbach-type loop); a Gaussian randomization step then recovers
feasible reflection coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (DimensionMismatch, ReflectionVector, RisMode, as_complex_matrix,
                   hermitize, make_diag_channel)
from .channels import stream
from .solvers import (DEFAULT_SDP_OPTIONS, SdpProblem, SolverOptions, rank_one_candidates,
                      solve_sdp)


@dataclass(frozen=True)
class HomogenizedQuadratic:
    """Rank-one Hermitian PSD form: value(phi) = |vector^H [phi; 1]|^2.

    Encodes |cascade(phi) + direct|^2 with vector = [h; conj(direct)] where
    h[k] = conj(row_k-of-cascade product); matrix = outer(vector, vector^H).
    """

    vector: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.outer(self.vector, self.vector.conj())

    def value(self, phi_bar: np.ndarray) -> float:
        return float(np.abs(np.vdot(self.vector, phi_bar)) ** 2)


@dataclass(frozen=True)
class D2DInstance:
    """L device-to-device links sharing the band.

    direct: (L, L) transmitter-to-receiver channels (diagonal = desired);
    tx_to_ris: (K, L); ris_to_rx: (L, K); powers: per-link transmit
    amplitudes (squared in the SINR); noise_var: receiver noise power.
    """

    direct: np.ndarray
    tx_to_ris: np.ndarray
    ris_to_rx: np.ndarray
    powers: np.ndarray
    noise_var: float

    def __post_init__(self):
        d = as_complex_matrix(self.direct, "direct")
        g = as_complex_matrix(self.tx_to_ris, "tx_to_ris")
        h = as_complex_matrix(self.ris_to_rx, "ris_to_rx")
        if d.shape[0] != d.shape[1]:
            raise DimensionMismatch("direct", "square", d.shape)
        l = d.shape[0]
        if g.shape[1] != l:
            raise DimensionMismatch("tx_to_ris", f"{l} columns", g.shape[1])
        if h.shape[0] != l:
            raise DimensionMismatch("ris_to_rx", f"{l} rows", h.shape[0])
        if h.shape[1] != g.shape[0]:
            raise DimensionMismatch("ris_to_rx", f"{g.shape[0]} columns", h.shape[1])
        p = np.asarray(self.powers, dtype=float)
        if p.shape != (l,) or (p <= 0).any():
            raise ValueError("powers must be length-L and positive")
        if not self.noise_var > 0:
            raise ValueError("noise_var must be positive")
        object.__setattr__(self, "direct", d.copy())
        object.__setattr__(self, "tx_to_ris", g.copy())
        object.__setattr__(self, "ris_to_rx", h.copy())
        object.__setattr__(self, "powers", p.copy())

    @property
    def num_links(self) -> int:
        return self.direct.shape[0]

    @property
    def num_elements(self) -> int:
        return self.tx_to_ris.shape[0]

    def combined(self, phi) -> np.ndarray:
        return self.direct + make_diag_channel(phi, self.ris_to_rx, self.tx_to_ris)


def link_quadratic(inst: D2DInstance, rx: int, tx: int) -> HomogenizedQuadratic:
    """Homogenized quadratic of the rx<-tx channel magnitude.

    For phi_bar = [phi; 1]: phi_bar^H F phi_bar =
    |ris_to_rx[rx,:] @ diag(phi) @ tx_to_ris[:,tx] + direct[rx,tx]|^2.
    """
    l = inst.num_links
    if not (0 <= rx < l and 0 <= tx < l):
        raise IndexError(f"link index out of range: ({rx}, {tx}) with L={l}")
    h = np.conj(inst.ris_to_rx[rx, :] * inst.tx_to_ris[:, tx])
    return HomogenizedQuadratic(np.concatenate([h, [np.conj(inst.direct[rx, tx])]]))


def _quadratic_vectors(inst: D2DInstance) -> np.ndarray:
    """(L, L, K+1) array of homogenizing vectors for all link pairs."""
    l, k = inst.num_links, inst.num_elements
    u = np.empty((l, l, k + 1), dtype=complex)
    for rx in range(l):
        for tx in range(l):
            u[rx, tx] = link_quadratic(inst, rx, tx).vector
    return u


def _candidate_sinrs(u: np.ndarray, p2: np.ndarray, noise_var: float,
                     cand: np.ndarray) -> np.ndarray:
    """Worst-link SINR for each homogenized candidate column."""
    l = u.shape[0]
    vals = np.abs(np.einsum("abk,kj->abj", u.conj(), cand)) ** 2  # (L, L, J)
    num = vals[np.arange(l), np.arange(l)] * p2[:, None]
    den = (vals * p2[None, :, None]).sum(axis=1) - num + noise_var
    return (num / den).min(axis=0)


def sinr(inst: D2DInstance, phi, link: int) -> float:
    """Received SINR of one link: desired power over cross-link power plus noise."""
    l = inst.num_links
    if not 0 <= link < l:
        raise IndexError(f"link index {link} out of range for L={l}")
    ch = inst.combined(phi)
    p2 = inst.powers ** 2
    powers = np.abs(ch[link, :]) ** 2 * p2
    num = powers[link]
    return float(num / (powers.sum() - num + inst.noise_var))


def _min_ratio(u, p2, noise_var, phi_bar_matrix) -> float:
    vals = np.real(np.einsum("abi,ij,abj->ab", u.conj(), phi_bar_matrix, u))
    l = u.shape[0]
    num = vals[np.arange(l), np.arange(l)] * p2
    den = (vals * p2[None, :]).sum(axis=1) - num + noise_var
    return float((num / den).min())


@dataclass(frozen=True)
class MaxMinOptions:
    """Dinkelbach loop controls for the worst-SINR design."""

    outer_tol: float = 1e-5        # relative stall tolerance on the ratio value
    max_outer: int = 50
    max_restarts: int = 4          # re-enter from a better rank-one point
    randomization_trials: int = 200
    sdp: SolverOptions = DEFAULT_SDP_OPTIONS


DEFAULT_MAXMIN_OPTIONS = MaxMinOptions()


@dataclass
class MaxMinResult:
    phi: ReflectionVector
    worst_sinr: float
    sdr_bound: float               # relaxed worst-SINR value at termination
    lambda_history: list
    iterations: int
    sdr_matrix: np.ndarray


def randomize_rank_one(phi_bar_matrix: np.ndarray, inst: D2DInstance,
                       trials: int, seed, mode: RisMode = RisMode.ABSORPTIVE,
                       ) -> ReflectionVector:
    """Recover feasible coefficients from a rank-relaxed solution.

    Draws `trials` Gaussian vectors with the relaxed matrix as covariance,
    normalizes each by its homogenization coordinate and enforces the modulus
    constraints of `mode`; the dominant eigenvector (identically normalized)
    is always included, and for the absorptive mode the fully phase-projected
    copy of every candidate is evaluated as well. Returns the candidate with
    the largest worst-link SINR.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else stream(int(seed))
    conventional = mode is RisMode.CONVENTIONAL
    cand = rank_one_candidates(phi_bar_matrix, trials, rng, conventional)
    u = _quadratic_vectors(inst)
    worst = _candidate_sinrs(u, inst.powers ** 2, inst.noise_var, cand)
    best = cand[:-1, int(np.argmax(worst))]
    return ReflectionVector(best, mode)


def maxmin_design(inst: D2DInstance, mode: RisMode = RisMode.ABSORPTIVE,
                  opts: MaxMinOptions = DEFAULT_MAXMIN_OPTIONS,
                  seed: int = 0) -> MaxMinResult:
    """Maximize the worst-link SINR over the surface coefficients.

    Rank-relaxed fractional program solved by alternating (a) a max-min
    epigraph SDP at fixed ratio parameter and (b) the closed-form ratio
    update evaluated at the new matrix; the parameter sequence is
    non-decreasing and the loop stops when its relative improvement falls
    below outer_tol (a non-improving update terminates immediately, keeping
    the previous matrix). Gaussian randomization then extracts coefficients.
    """
    u = _quadratic_vectors(inst)
    l, k = inst.num_links, inst.num_elements
    n = k + 1
    p2 = inst.powers ** 2
    f_mats = np.einsum("abi,abj->abij", u, u.conj())  # (L, L, n, n) rank-one forms

    phi_bar = np.zeros((n, n), dtype=complex)
    phi_bar[k, k] = 1.0
    lam = _min_ratio(u, p2, inst.noise_var, phi_bar)
    history = [lam]

    conventional = mode is RisMode.CONVENTIONAL
    rng = seed if isinstance(seed, np.random.Generator) else stream(int(seed))
    iters = 0
    best_phi, best_worst = None, -np.inf
    for _restart in range(opts.max_restarts):
        for _ in range(opts.max_outer):
            terms = []
            for rx in range(l):
                m = p2[rx] * f_mats[rx, rx].copy()
                for tx in range(l):
                    if tx != rx:
                        m -= lam * p2[tx] * f_mats[rx, tx]
                terms.append((hermitize(m), -lam * inst.noise_var))
            sol = solve_sdp(SdpProblem(size=n, maxmin_terms=tuple(terms),
                                       unit_diag=conventional), opts.sdp)
            iters += 1
            lam_new = _min_ratio(u, p2, inst.noise_var, sol.matrix)
            if lam_new <= lam * (1.0 + opts.outer_tol) + 1e-300:
                if lam_new > lam:
                    lam, phi_bar = lam_new, sol.matrix
                    history.append(lam)
                break
            lam, phi_bar = lam_new, sol.matrix
            history.append(lam)

        phi = randomize_rank_one(phi_bar, inst, opts.randomization_trials, rng, mode)
        worst = min(sinr(inst, phi, link) for link in range(l))
        if worst > best_worst:
            best_phi, best_worst = phi, worst
        if not conventional:
            # phase-only recovery of the same relaxed point is also feasible
            # for the bounded-modulus surface; keep it when it wins
            alt = randomize_rank_one(phi_bar, inst, opts.randomization_trials, rng,
                                     RisMode.CONVENTIONAL)
            alt_worst = min(sinr(inst, alt, link) for link in range(l))
            if alt_worst > best_worst:
                best_phi = ReflectionVector(alt.coeffs, RisMode.ABSORPTIVE)
                best_worst = alt_worst
        # if recovery beat the relaxed point beyond the loop tolerance (an
        # inner local optimum), continue the monotone loop from that point
        cand_bar = np.outer(best_phi.augmented(), best_phi.augmented().conj())
        cand_ratio = _min_ratio(u, p2, inst.noise_var, cand_bar)
        if cand_ratio > lam * (1.0 + opts.outer_tol):
            lam, phi_bar = cand_ratio, cand_bar
            history.append(lam)
            continue
        break

    # the selected rank-one point is itself relaxation-feasible, so the
    # certified relaxed value always dominates the recovered one
    bound = max(lam, best_worst)
    return MaxMinResult(phi=best_phi, worst_sinr=best_worst, sdr_bound=bound,
                        lambda_history=history, iterations=iters, sdr_matrix=phi_bar)

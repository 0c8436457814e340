"""Interference-channel suppression between a multi-antenna transmitter and a
multi-antenna victim receiver assisted by a reflecting surface.

The combined channel is ``direct + ris_to_rx @ diag(phi) @ tx_to_ris``; the
design picks phi to minimize its Frobenius norm, either over the unit disk
per element (absorptive surface, convex) or over unit-modulus elements
(phase-only surface, gradient projection).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DimensionMismatch, ReflectionVector, as_complex_matrix, make_diag_channel
from .solvers import DEFAULT_LS_OPTIONS, SolverOptions, solve_disk_ls, solve_unit_modulus_gp


@dataclass(frozen=True)
class RadarCommInstance:
    """Channels of one suppression scenario.

    direct: (N, M) transmitter-to-victim channel; tx_to_ris: (K, M);
    ris_to_rx: (N, K).
    """

    direct: np.ndarray
    tx_to_ris: np.ndarray
    ris_to_rx: np.ndarray

    def __post_init__(self):
        d = as_complex_matrix(self.direct, "direct")
        g = as_complex_matrix(self.tx_to_ris, "tx_to_ris")
        h = as_complex_matrix(self.ris_to_rx, "ris_to_rx")
        if g.shape[1] != d.shape[1]:
            raise DimensionMismatch("tx_to_ris", f"{d.shape[1]} columns", g.shape[1])
        if h.shape[0] != d.shape[0]:
            raise DimensionMismatch("ris_to_rx", f"{d.shape[0]} rows", h.shape[0])
        if h.shape[1] != g.shape[0]:
            raise DimensionMismatch("ris_to_rx", f"{g.shape[0]} columns", h.shape[1])
        object.__setattr__(self, "direct", d.copy())
        object.__setattr__(self, "tx_to_ris", g.copy())
        object.__setattr__(self, "ris_to_rx", h.copy())

    @property
    def num_elements(self) -> int:
        return self.tx_to_ris.shape[0]

    def combined(self, phi) -> np.ndarray:
        """direct + cascade channel for the given coefficients."""
        return self.direct + make_diag_channel(phi, self.ris_to_rx, self.tx_to_ris)

    def residual(self, phi) -> float:
        """Frobenius norm of the combined channel."""
        return float(np.linalg.norm(self.combined(phi)))


def build_ls_system(inst: RadarCommInstance) -> tuple[np.ndarray, np.ndarray]:
    """Vectorize the design problem into least-squares form.

    Returns (A, d) with A of shape (N*M, K) whose k-th column stacks the
    rank-one contribution of element k (column-major), and d the stacked
    direct channel, so that ||d + A phi||_2 equals the combined-channel
    Frobenius norm for every phi.
    """
    n, m = inst.direct.shape
    k = inst.num_elements
    # column index k holds vec(outer(ris_to_rx[:,k], tx_to_ris[k,:]))
    a = np.einsum("nk,km->mnk", inst.ris_to_rx, inst.tx_to_ris).reshape(n * m, k)
    d = inst.direct.reshape(-1, order="F")
    return a, d


@dataclass(frozen=True)
class DesignResult:
    phi: ReflectionVector
    residual: float


def _consistent_residual(inst: RadarCommInstance, phi: ReflectionVector,
                         ls_objective: float) -> float:
    res = inst.residual(phi)
    if abs(res - ls_objective) > 1e-9 * max(1.0, res):
        raise RuntimeError(
            f"vectorized objective {ls_objective:.12g} disagrees with matrix "
            f"residual {res:.12g}")
    return res


def design_aris(inst: RadarCommInstance,
                opts: SolverOptions = DEFAULT_LS_OPTIONS) -> DesignResult:
    """Absorptive design: minimize the combined-channel norm over |phi_k| <= 1."""
    a, d = build_ls_system(inst)
    phi = solve_disk_ls(a, d, opts)
    ls_obj = float(np.linalg.norm(d + a @ phi.coeffs))
    return DesignResult(phi, _consistent_residual(inst, phi, ls_obj))


def design_conventional(inst: RadarCommInstance,
                        opts: SolverOptions = DEFAULT_LS_OPTIONS) -> DesignResult:
    """Phase-only design: minimize the combined-channel norm over |phi_k| = 1."""
    a, d = build_ls_system(inst)
    res = solve_unit_modulus_gp(a, d, opts)
    return DesignResult(res.phi, _consistent_residual(inst, res.phi, res.objective))


def mean_modulus(phi: ReflectionVector) -> float:
    """Average modulus of the reflection coefficients, in [0, 1]."""
    return float(phi.moduli.mean())

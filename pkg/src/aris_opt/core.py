"""Shared value types and elementary constructions for RIS reflection design.

Complex data is stored as double-precision numpy arrays. All functions are
pure; instances are immutable and safe to share across threads/processes.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

MOD_TOL = 1e-9  # slack allowed on reflection-coefficient modulus bounds


class DimensionMismatch(ValueError):
    """Operand dimensions are inconsistent; names the offending operand."""

    def __init__(self, operand: str, expected, actual):
        self.operand = operand
        self.expected = expected
        self.actual = actual
        super().__init__(f"{operand}: expected {expected}, got {actual}")


class RisMode(enum.Enum):
    """Element constraint family: bounded modulus vs phase-only."""

    ABSORPTIVE = "aris"          # |coeff| <= 1
    CONVENTIONAL = "conventional"  # |coeff| == 1


@dataclass(frozen=True)
class ReflectionVector:
    """Per-element reflection coefficients of a K-element surface.

    coeffs: length-K complex array; mode decides the feasible set
    (absorptive: moduli at most 1; conventional: moduli exactly 1).
    """

    coeffs: np.ndarray
    mode: RisMode = RisMode.ABSORPTIVE

    def __post_init__(self):
        c = np.atleast_1d(np.array(self.coeffs, dtype=complex))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coeffs must be a non-empty 1-D array")
        if not np.isfinite(c).all():
            raise ValueError("coeffs must be finite")
        m = np.abs(c)
        if self.mode is RisMode.ABSORPTIVE:
            if (m > 1.0 + MOD_TOL).any():
                raise ValueError(
                    f"absorptive coefficients need |c| <= 1, max modulus {m.max():.12g}")
        else:
            if (np.abs(m - 1.0) > MOD_TOL).any():
                raise ValueError(
                    f"conventional coefficients need |c| == 1, worst deviation "
                    f"{np.abs(m - 1.0).max():.12g}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def __len__(self) -> int:
        return self.coeffs.size

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.coeffs)

    @property
    def phases(self) -> np.ndarray:
        return np.angle(self.coeffs)

    def diagonal(self) -> np.ndarray:
        """K x K diagonal matrix applied between incident and reflected channels."""
        return np.diag(self.coeffs)

    def augmented(self) -> np.ndarray:
        """Coefficients with a trailing 1, the homogenization variable."""
        return np.concatenate([self.coeffs, [1.0 + 0.0j]])


def as_complex_matrix(a, name: str) -> np.ndarray:
    """Validate and convert to a finite 2-D complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or min(m.shape) == 0:
        raise DimensionMismatch(name, "2-D with positive extents", m.shape)
    if not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_complex_vector(a, name: str) -> np.ndarray:
    v = np.atleast_1d(np.asarray(a, dtype=complex))
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatch(name, "1-D with positive length", v.shape)
    if not np.isfinite(v).all():
        raise ValueError(f"{name} contains non-finite entries")
    return v


def make_diag_channel(phi, ris_to_rx, tx_to_ris) -> np.ndarray:
    """Cascade channel ris_to_rx @ diag(phi) @ tx_to_ris.

    Args:
        phi: ReflectionVector or length-K complex array.
        ris_to_rx: (rows, K) channel out of the surface.
        tx_to_ris: (K, cols) channel into the surface.
    Returns:
        (rows, cols) complex matrix, sum_k phi[k] * outer(ris_to_rx[:,k], tx_to_ris[k,:]).
    """
    coeffs = phi.coeffs if isinstance(phi, ReflectionVector) else as_complex_vector(phi, "phi")
    h = as_complex_matrix(ris_to_rx, "ris_to_rx")
    g = as_complex_matrix(tx_to_ris, "tx_to_ris")
    k = coeffs.size
    if h.shape[1] != k:
        raise DimensionMismatch("ris_to_rx", f"{k} columns", h.shape[1])
    if g.shape[0] != k:
        raise DimensionMismatch("tx_to_ris", f"{k} rows", g.shape[0])
    return (h * coeffs) @ g


def steering_vector(num_elements: int, angle: float) -> np.ndarray:
    """Unit-norm response of a half-wavelength uniform linear array.

    Entry m is exp(j*pi*m*sin(angle)) / sqrt(num_elements).
    """
    if num_elements < 1:
        raise ValueError("num_elements must be >= 1")
    if not np.isfinite(angle):
        raise ValueError("angle must be finite")
    m = np.arange(num_elements)
    return np.exp(1j * np.pi * m * np.sin(angle)) / np.sqrt(num_elements)


def vectorize(mat) -> np.ndarray:
    """Stack the columns of a matrix into one vector (column-major order)."""
    m = as_complex_matrix(mat, "mat")
    return m.reshape(-1, order="F")


def db_to_linear(db) -> np.ndarray | float:
    """Power quantity from decibels: 10**(db/10)."""
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0) if np.ndim(db) else 10.0 ** (db / 10.0)


def linear_to_db(x) -> np.ndarray | float:
    """Decibels from a linear power quantity: 10*log10(x)."""
    return 10.0 * np.log10(x)


def hermitize(a: np.ndarray) -> np.ndarray:
    """Nearest Hermitian matrix, (A + A^H)/2."""
    return (a + a.conj().T) / 2.0

"""Optimization kernels shared by the application modules.

Three solvers:

* :func:`solve_disk_ls` -- complex least squares with per-coordinate unit-disk
  constraints (convex), via monotone accelerated projected gradient.
* :func:`solve_unit_modulus_gp` -- least squares with unit-modulus
  constraints (non-convex), via gradient projection.
* :func:`solve_sdp` -- linear / max-min objectives over Hermitian PSD
  matrices with bounded diagonals, via a dual log-det barrier interior-point
  method. Matrix sizes here are small (tens), so each Newton step costs one
  Cholesky/inverse of the dual slack plus a dense system in the handful of
  dual multipliers.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .core import RisMode, ReflectionVector, as_complex_matrix, as_complex_vector, hermitize


class StepRule(enum.Enum):
    FIXED_SAFE = "fixed-safe"      # constant step 1/L (or 0.9/L for phase projection)
    BACKTRACKING = "backtracking"  # Armijo halving from 1/L


@dataclass(frozen=True)
class SolverOptions:
    """Iteration limits and tolerances.

    tol is a relative objective-change tolerance (1e-8 suits the least-squares
    solvers; the SDP solver reads it as a relative duality-gap target and its
    own default is 1e-6, see DEFAULT_SDP_OPTIONS).
    """

    max_iters: int = 20000
    tol: float = 1e-8
    step_rule: StepRule = StepRule.FIXED_SAFE

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


DEFAULT_LS_OPTIONS = SolverOptions()
DEFAULT_SDP_OPTIONS = SolverOptions(max_iters=4000, tol=1e-6)


class ConvergenceError(RuntimeError):
    """Solver hit its iteration cap; carries the last iterate and residual."""

    def __init__(self, message: str, iterate: np.ndarray, residual: float):
        super().__init__(f"{message} (residual {residual:.6g})")
        self.iterate = iterate
        self.residual = residual


class SdpInfeasibleError(RuntimeError):
    """The constraint set of an SDP is (numerically) empty."""


# ---------------------------------------------------------------------------
# disk-constrained least squares
# ---------------------------------------------------------------------------

def _disk_project(x: np.ndarray) -> np.ndarray:
    m = np.abs(x)
    return np.where(m > 1.0, x / np.where(m > 1.0, m, 1.0), x)


def _kkt_residual(x: np.ndarray, grad: np.ndarray) -> float:
    """Stationarity violation for min f s.t. |x_k| <= 1.

    Inactive coordinates need grad = 0; active ones need grad anti-parallel
    to x with a non-negative multiplier.
    """
    m = np.abs(x)
    active = m >= 1.0 - 1e-6
    res = np.abs(grad).astype(float)
    if active.any():
        xa, ga = x[active], grad[active]
        mult = np.maximum(0.0, -np.real(np.conj(xa) * ga) / np.maximum(m[active] ** 2, 1e-30))
        res[active] = np.abs(ga + mult * xa)
    return float(res.max())


def solve_disk_ls(a, d, opts: SolverOptions = DEFAULT_LS_OPTIONS) -> ReflectionVector:
    """Minimize ||d + A x||_2 over per-coordinate unit disks |x_k| <= 1.

    The problem is convex; the returned point satisfies the first-order
    optimality conditions to tight tolerance. Uses Nesterov-accelerated
    projected gradient with a monotone safeguard (acceleration steps are kept
    only when they do not increase the objective).
    """
    a = as_complex_matrix(a, "a")
    d = as_complex_vector(d, "d")
    if a.shape[0] != d.size:
        from .core import DimensionMismatch
        raise DimensionMismatch("d", f"length {a.shape[0]}", d.size)

    sv = np.linalg.svd(a, compute_uv=False)
    lip = 2.0 * sv[0] ** 2  # gradient Lipschitz constant of ||d + Ax||^2
    if lip == 0.0:
        return ReflectionVector(np.zeros(a.shape[1], complex), RisMode.ABSORPTIVE)
    step = 1.0 / lip

    def fval(x, r):
        return float(np.real(np.vdot(r, r)))

    # warm start at the projected minimum-norm least-squares solution
    x = _disk_project(np.linalg.lstsq(a, -d, rcond=None)[0])
    r = d + a @ x
    f = fval(x, r)
    g = 2.0 * (a.conj().T @ r)
    g_scale = max(1.0, float(np.abs(2.0 * (a.conj().T @ d)).max()))
    kkt_tol = 1e-6 * g_scale

    y, t_mom = x, 1.0
    f_prev = f
    stall = 0
    for it in range(opts.max_iters):
        if _kkt_residual(x, g) <= kkt_tol:
            return ReflectionVector(x, RisMode.ABSORPTIVE)
        gy = 2.0 * (a.conj().T @ (d + a @ y))
        x_acc = _disk_project(y - step * gy)
        r_acc = d + a @ x_acc
        f_acc = fval(x_acc, r_acc)
        if f_acc <= f:
            x_new, f_new = x_acc, f_acc
        else:
            # monotone fallback: plain projected-gradient step, restart momentum
            x_new = _disk_project(x - step * g)
            r_new = d + a @ x_new
            f_new = fval(x_new, r_new)
            t_mom = 1.0
            if f_new > f:  # cannot happen for step <= 1/L up to rounding
                x_new, f_new = x, f
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_mom**2))
        y = x_new + ((t_mom - 1.0) / t_next) * (x_new - x)
        t_mom = t_next
        x, f = x_new, f_new
        g = 2.0 * (a.conj().T @ (d + a @ x))
        stall = stall + 1 if abs(f_prev - f) <= opts.tol * max(f, 1e-30) else 0
        f_prev = f
        if stall >= 25 and _kkt_residual(x, g) <= 10 * kkt_tol:
            return ReflectionVector(x, RisMode.ABSORPTIVE)
    raise ConvergenceError("disk-constrained least squares did not converge",
                           x, float(np.linalg.norm(d + a @ x)))


# ---------------------------------------------------------------------------
# unit-modulus gradient projection
# ---------------------------------------------------------------------------

def _phase_project(x: np.ndarray) -> np.ndarray:
    m = np.abs(x)
    return np.where(m > 0.0, x / np.where(m > 0.0, m, 1.0), 1.0 + 0.0j)


@dataclass(frozen=True)
class GpResult:
    """Best iterate of the phase-only design plus convergence bookkeeping."""

    phi: ReflectionVector
    objective: float          # ||d + A phi||_2 at phi
    converged: bool
    iterations: int


def solve_unit_modulus_gp(a, d, opts: SolverOptions = DEFAULT_LS_OPTIONS) -> GpResult:
    """Minimize ||d + A x||_2 over unit-modulus coordinates |x_k| = 1.

    Gradient projection: from the phase of the pseudo-inverse solution, take
    fixed steps of 0.9 / lambda_max(A^H A) and re-project onto unit moduli.
    The objective is non-increasing; on hitting the iteration cap the best
    iterate is returned with converged=False.
    """
    a = as_complex_matrix(a, "a")
    d = as_complex_vector(d, "d")
    if a.shape[0] != d.size:
        from .core import DimensionMismatch
        raise DimensionMismatch("d", f"length {a.shape[0]}", d.size)
    m, k = a.shape

    sv = np.linalg.svd(a, compute_uv=False)
    lam_max = sv[0] ** 2
    if lam_max == 0.0:
        phi = ReflectionVector(np.ones(k, complex), RisMode.CONVENTIONAL)
        return GpResult(phi, float(np.linalg.norm(d)), True, 0)
    rank = int((sv > sv[0] * max(m, k) * np.finfo(float).eps).sum())
    if rank == k:
        x = _phase_project(-np.linalg.lstsq(a, d, rcond=None)[0])
    else:
        # rank-deficient pseudo-inverse init degenerates; A^H d has the same
        # fixed-point structure and is always defined
        x = _phase_project(-(a.conj().T @ d))
    beta = 0.9 / lam_max

    def fval(x):
        r = d + a @ x
        return float(np.real(np.vdot(r, r)))

    f = fval(x)
    best_x, best_f = x, f
    for it in range(1, opts.max_iters + 1):
        xi = x - beta * (a.conj().T @ (d + a @ x))
        x_new = _phase_project(xi)
        f_new = fval(x_new)
        if f_new < best_f:
            best_x, best_f = x_new, f_new
        if f_new > f + 1e-12 * max(f, 1.0):
            break  # fixed point reached up to rounding; keep the best iterate
        converged = abs(f - f_new) <= opts.tol * max(f, 1e-30)
        x, f = x_new, f_new
        if converged:
            phi = ReflectionVector(best_x, RisMode.CONVENTIONAL)
            return GpResult(phi, float(np.sqrt(best_f)), True, it)
    phi = ReflectionVector(best_x, RisMode.CONVENTIONAL)
    return GpResult(phi, float(np.sqrt(best_f)), False, opts.max_iters)


# ---------------------------------------------------------------------------
# SDP: linear / max-min objectives over diagonally-bounded PSD matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceConstraint:
    """Re tr(matrix @ X) {<=, >=, ==} bound, with matrix Hermitian."""

    matrix: np.ndarray
    bound: float
    sense: str = "<="

    def __post_init__(self):
        if self.sense not in ("<=", ">=", "=="):
            raise ValueError(f"unknown sense {self.sense!r}")


@dataclass(frozen=True)
class SdpProblem:
    """Decision variable: Hermitian PSD X of the given size with
    X[k,k] <= 1 for k < size-1 (or == 1 everywhere when unit_diag) and
    X[size-1, size-1] == 1.

    Objective: maximize Re tr(objective @ X), plus, when maxmin_terms is
    non-empty, + min_l (Re tr(A_l @ X) + b_l) over the given (A_l, b_l)
    pairs (the epigraph variable is handled internally).
    """

    size: int
    objective: np.ndarray | None = None
    maxmin_terms: tuple = ()
    constraints: tuple = ()
    unit_diag: bool = False

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("size must be >= 1")
        if self.objective is None and not self.maxmin_terms:
            raise ValueError("need an objective matrix and/or maxmin_terms")


@dataclass
class SdrMatrix:
    """Solution of an SdpProblem: PSD matrix, attained objective, and the
    certified duality gap at termination."""

    matrix: np.ndarray
    objective: float
    gap: float
    converged: bool
    newton_iterations: int


def _check_hermitian(mat, name, n):
    m = np.asarray(mat, dtype=complex)
    if m.shape != (n, n):
        from .core import DimensionMismatch
        raise DimensionMismatch(name, (n, n), m.shape)
    dev = np.abs(m - m.conj().T).max()
    if dev > 1e-8 * max(1.0, np.abs(m).max()):
        raise ValueError(f"{name} is not Hermitian (deviation {dev:.3g})")
    return hermitize(m)


def solve_sdp(problem: SdpProblem, opts: SolverOptions = DEFAULT_SDP_OPTIONS) -> SdrMatrix:
    """Solve an :class:`SdpProblem` by a dual log-det barrier Newton method.

    The dual has one scalar multiplier per diagonal bound, per max-min term
    and per extra trace constraint, with slack matrix
    ``S = Diag(dual diag) - objective - sum mu_l A_l + sum nu_i B_i``; the
    primal iterate is recovered analytically as ``X = kappa * S^{-1}``, which
    is PSD by construction and satisfies the diagonal bounds exactly on the
    central path. Terminates when the duality gap falls below
    ``opts.tol * max(1, |dual objective|)``.
    """
    n = problem.size
    cmat = (np.zeros((n, n), complex) if problem.objective is None
            else _check_hermitian(problem.objective, "objective", n))
    amats = [_check_hermitian(a, f"maxmin_terms[{i}]", n)
             for i, (a, _) in enumerate(problem.maxmin_terms)]
    aoffs = np.array([float(b) for (_, b) in problem.maxmin_terms])
    nmm = len(amats)

    bmats, bbnds, beq = [], [], []
    for i, tc in enumerate(problem.constraints):
        mat = _check_hermitian(tc.matrix, f"constraints[{i}]", n)
        bnd = float(tc.bound)
        if tc.sense == ">=":
            mat, bnd = -mat, -bnd
        bmats.append(mat)
        bbnds.append(bnd)
        beq.append(tc.sense == "==")
    nex = len(bmats)
    bbnds = np.asarray(bbnds)
    beq = np.asarray(beq, dtype=bool)

    # common scale so barrier arithmetic sees O(1) data
    scale = max(1.0, float(np.abs(cmat).max()),
                max((float(np.abs(a).max()) for a in amats), default=0.0),
                max((float(np.abs(b).max()) for b in bmats), default=0.0))
    cmat = cmat / scale
    amats = [a / scale for a in amats]
    aoffs_s = aoffs / scale
    # extra-constraint rows keep their own scale; normalize each row
    if nex:
        rsc = np.array([max(1.0, float(np.abs(b).max())) for b in bmats])
        bmats = [b / s for b, s in zip(bmats, rsc)]
        bbnds = bbnds / rsc

    eq_diag = np.ones(n, bool) if problem.unit_diag else np.zeros(n, bool)
    eq_diag[n - 1] = True
    ineq_idx = np.where(~eq_diag)[0]

    mu = np.full(nmm, 1.0 / nmm) if nmm else np.zeros(0)
    nu = np.where(beq, 0.0, 1.0) if nex else np.zeros(0)

    astack = np.stack(amats) if nmm else np.zeros((0, n, n), complex)
    bstack = np.stack(bmats) if nex else np.zeros((0, n, n), complex)
    aflat = astack.reshape(nmm, n * n) if nmm else np.zeros((0, n * n), complex)
    bflat = bstack.reshape(nex, n * n) if nex else np.zeros((0, n * n), complex)
    aswap = astack.transpose(0, 2, 1).reshape(nmm, n * n) if nmm else np.zeros((0, n * n), complex)
    bswap = bstack.transpose(0, 2, 1).reshape(nex, n * n) if nex else np.zeros((0, n * n), complex)
    diag_ix = np.diag_indices(n)

    def slack(dd, mu, nu):
        s = -cmat.copy()
        if nmm:
            s -= (mu @ aflat).reshape(n, n)
        if nex:
            s += (nu @ bflat).reshape(n, n)
        s[diag_ix] += dd
        return s

    def delta_slack(step_v):
        ds = np.zeros((n, n), complex)
        if nmm:
            ds -= (step_v[n:n + nmm] @ aflat).reshape(n, n)
        if nex:
            ds += (step_v[n + nmm:] @ bflat).reshape(n, n)
        ds[diag_ix] += step_v[:n]
        return ds

    r0 = cmat + (mu @ aflat).reshape(n, n) if nmm else cmat
    dd = np.ones(n) * (float(np.abs(r0).sum(axis=1).max()) + 1.0 + float(np.abs(nu).sum()))

    nbar = n + ineq_idx.size + nmm + int((~beq).sum())
    nvar = n + nmm + nex
    kappa = 1.0
    newton_total = 0
    gap = np.inf
    g_dual = np.inf
    blowup = 1e14 * max(1.0, dd.max())
    nu_ineq_ix = n + nmm + np.where(~beq)[0]
    e_simplex = np.zeros(nvar + 1)
    e_simplex[n:n + nmm] = 1.0

    for _outer in range(120):
        for _ in range(60):
            if newton_total >= opts.max_iters:
                break
            s = slack(dd, mu, nu)
            q = np.linalg.inv(s)
            qd = np.real(np.diag(q))

            grad = np.empty(nvar)
            grad[:n] = 1.0 / kappa - qd
            grad[ineq_idx] -= 1.0 / dd[ineq_idx]
            h = np.zeros((nvar, nvar))
            h[:n, :n] = np.abs(q) ** 2
            h[ineq_idx, ineq_idx] += 1.0 / dd[ineq_idx] ** 2
            if nmm:
                qaq = (q[None] @ astack) @ q[None]          # (nmm, n, n)
                qaq_flat = qaq.reshape(nmm, -1)
                grad[n:n + nmm] = (aoffs_s / kappa
                                   + np.real(aflat.conj() @ q.reshape(-1))
                                   - 1.0 / mu)
                cols = -np.real(qaq[:, diag_ix[0], diag_ix[1]])
                h[:n, n:n + nmm] = cols.T
                h[n:n + nmm, :n] = cols
                h[n:n + nmm, n:n + nmm] = np.real(qaq_flat @ aswap.T)
                h[n + np.arange(nmm), n + np.arange(nmm)] += 1.0 / mu ** 2
            if nex:
                qbq = (q[None] @ bstack) @ q[None]
                grad[n + nmm:] = bbnds / kappa - np.real(bflat.conj() @ q.reshape(-1))
                if (~beq).any():
                    grad[nu_ineq_ix] -= 1.0 / nu[~beq]
                cols = np.real(qbq[:, diag_ix[0], diag_ix[1]])
                h[:n, n + nmm:] = cols.T
                h[n + nmm:, :n] = cols
                h[n + nmm:, n + nmm:] = np.real(qbq.reshape(nex, -1) @ bswap.T)
                if nmm:
                    cross = -np.real(qaq_flat @ bswap.T)
                    h[n:n + nmm, n + nmm:] = cross
                    h[n + nmm:, n:n + nmm] = cross.T
                if (~beq).any():
                    h[nu_ineq_ix, nu_ineq_ix] += 1.0 / nu[~beq] ** 2

            try:
                if nmm:
                    kkt = np.empty((nvar + 1, nvar + 1))
                    kkt[:nvar, :nvar] = h
                    kkt[nvar, :] = e_simplex
                    kkt[:, nvar] = e_simplex
                    kkt[nvar, nvar] = 0.0
                    rhs = np.concatenate([-grad, [0.0]])
                    step_v = np.linalg.solve(kkt, rhs)[:nvar]
                else:
                    step_v = np.linalg.solve(h, -grad)
            except np.linalg.LinAlgError:
                h[np.diag_indices(nvar)] += 1e-12 * max(1.0, h.max())
                step_v = np.linalg.solve(h, -grad)
            decrement2 = float(-grad @ step_v)
            newton_total += 1

            ds = delta_slack(step_v)
            alpha, ok = 1.0, False
            for _bt in range(60):
                dd_n = dd + alpha * step_v[:n]
                mu_n = mu + alpha * step_v[n:n + nmm]
                nu_n = nu + alpha * step_v[n + nmm:]
                feasible = (dd_n[ineq_idx] > 0).all() and (mu_n > 0).all()
                if feasible and nex:
                    feasible = (nu_n[~beq] > 0).all()
                if feasible:
                    try:
                        np.linalg.cholesky(s + alpha * ds)
                        ok = True
                        break
                    except np.linalg.LinAlgError:
                        pass
                alpha *= 0.5
            if not ok:
                break
            dd, mu, nu = dd_n, mu_n, nu_n
            if decrement2 / 2.0 < 1e-9:
                break

        g_dual = float(dd[ineq_idx].sum() + dd[eq_diag].sum()
                       + (mu @ aoffs_s if nmm else 0.0)
                       + (nu @ bbnds if nex else 0.0))
        diverged = dd.max() > blowup or (nex > 0 and np.abs(nu).max() > blowup)
        if diverged:
            raise SdpInfeasibleError(
                "dual iterates diverge; the constraint set appears empty")
        gap = kappa * nbar
        if gap <= opts.tol * max(1.0, abs(g_dual)) or newton_total >= opts.max_iters:
            break
        kappa /= 8.0

    s = slack(dd, mu, nu)
    x = kappa * np.linalg.inv(s)
    x = hermitize(x)
    obj = float(np.real(np.vdot(cmat, x))) * scale
    if nmm:
        obj += min(float(np.real(np.vdot(a, x))) * scale + b
                   for a, b in zip(amats, aoffs))
    converged = gap <= opts.tol * max(1.0, abs(g_dual))
    return SdrMatrix(matrix=x, objective=obj, gap=gap * scale,
                     converged=converged, newton_iterations=newton_total)


# ---------------------------------------------------------------------------
# Gaussian rank-one candidate sampling (shared by the SDR applications)
# ---------------------------------------------------------------------------

def rank_one_candidates(phi_bar_matrix: np.ndarray, count: int,
                        rng: np.random.Generator, conventional: bool,
                        max_resample: int = 64) -> np.ndarray:
    """Feasible homogenized vectors drawn from an SDR solution.

    Samples `count` Gaussian vectors with covariance `phi_bar_matrix`,
    normalizes each by its last coordinate, then enforces the modulus
    constraints (clip moduli above one; for the phase-only mode project every
    coordinate to unit modulus). The dominant eigenvector, identically
    normalized, is prepended as a deterministic candidate. Columns of the
    returned (n, count+1) array all have last coordinate exactly 1.
    """
    x = hermitize(np.asarray(phi_bar_matrix, dtype=complex))
    n = x.shape[0]
    w, v = np.linalg.eigh(x)
    half = v * np.sqrt(np.clip(w, 0.0, None))

    cols = []
    lead = v[:, -1]
    if abs(lead[n - 1]) > 1e-12:
        cols.append(lead / lead[n - 1])
    need = count
    for _ in range(max_resample):
        if need <= 0:
            break
        # draw row-wise so candidate streams are prefix-stable in `count`
        w = rng.standard_normal((need, 2 * n))
        draws = half @ ((w[:, :n] + 1j * w[:, n:]).T / np.sqrt(2.0))
        keep = np.abs(draws[n - 1]) > 1e-12
        if keep.any():
            cols.append(draws[:, keep] / draws[n - 1, keep])
            need -= int(keep.sum())
    cand = np.column_stack(cols) if cols else np.empty((n, 0), complex)
    mods = np.abs(cand[:n - 1])
    if conventional:
        safe = mods > 1e-300
        cand[:n - 1] = np.where(safe, cand[:n - 1] / np.where(safe, mods, 1.0), 1.0)
    else:
        cand[:n - 1] = np.where(mods > 1.0,
                                cand[:n - 1] / np.where(mods > 0, mods, 1.0),
                                cand[:n - 1])
    return cand

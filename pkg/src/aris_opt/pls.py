"""Secrecy-rate maximization for a single-antenna downlink overheard by an
eavesdropper, with an optional friendly jammer, assisted by a reflecting
surface.

The achievable secrecy rate is log2((1+SINR at the intended user)/(1+SINR at
the eavesdropper)), clamped at zero. Maximizing it over the surface
coefficients is a fractional program whose numerator couples two quadratic
forms; after rank relaxation it is solved by an outer closed-form ratio
update (Dinkelbach-type) around an inner sequence of convex programs in
which the coupled term is replaced by a tangent minorant. The minorant's
linearization point is searched over a small phase/radius grid, which makes
the inner stage robust to the phase ambiguity of the jammer cross term.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import ReflectionVector, RisMode, as_complex_vector, hermitize
from .channels import stream
from .d2d import HomogenizedQuadratic
from .solvers import (DEFAULT_SDP_OPTIONS, SdpProblem, SolverOptions,
                      rank_one_candidates, solve_sdp)


@dataclass(frozen=True)
class PlsInstance:
    """Wiretap scenario channels.

    Scalars: bs_to_bob, bs_to_eve, jam_to_eve, jam_to_bob (residual
    self-interference after cancellation). Length-K vectors: bs_to_ris,
    jam_to_ris, ris_to_bob, ris_to_eve. noise_bob_raw is the thermal noise at
    the intended user; the effective value adds |jam_to_bob|^2.
    """

    bs_to_bob: complex
    bs_to_eve: complex
    bs_to_ris: np.ndarray
    ris_to_bob: np.ndarray
    ris_to_eve: np.ndarray
    jam_to_eve: complex = 0.0
    jam_to_bob: complex = 0.0
    jam_to_ris: np.ndarray | None = None
    noise_bob_raw: float = 1.0
    noise_eve: float = 1.0
    jammer_enabled: bool = True

    def __post_init__(self):
        g = as_complex_vector(self.bs_to_ris, "bs_to_ris")
        hb = as_complex_vector(self.ris_to_bob, "ris_to_bob")
        he = as_complex_vector(self.ris_to_eve, "ris_to_eve")
        k = g.size
        if hb.size != k or he.size != k:
            raise ValueError("bs_to_ris, ris_to_bob, ris_to_eve must share length K")
        gj = (np.zeros(k, complex) if self.jam_to_ris is None
              else as_complex_vector(self.jam_to_ris, "jam_to_ris"))
        if gj.size != k:
            raise ValueError("jam_to_ris must have length K")
        if not self.noise_bob_raw > 0 or not self.noise_eve > 0:
            raise ValueError("noise powers must be positive")
        if not self.jammer_enabled:
            if (abs(self.jam_to_eve) > 0 or abs(self.jam_to_bob) > 0
                    or np.abs(gj).max() > 0):
                raise ValueError("jammer_enabled=False requires zero jammer channels "
                                 "(see without_jammer())")
        for name, arr in (("bs_to_ris", g), ("ris_to_bob", hb),
                          ("ris_to_eve", he), ("jam_to_ris", gj)):
            owned = arr.copy()
            owned.flags.writeable = False
            object.__setattr__(self, name, owned)
        object.__setattr__(self, "bs_to_bob", complex(self.bs_to_bob))
        object.__setattr__(self, "bs_to_eve", complex(self.bs_to_eve))
        object.__setattr__(self, "jam_to_eve", complex(self.jam_to_eve))
        object.__setattr__(self, "jam_to_bob", complex(self.jam_to_bob))

    @property
    def num_elements(self) -> int:
        return self.bs_to_ris.size

    @property
    def noise_bob(self) -> float:
        """Effective noise at the intended user, incl. jammer residual."""
        return abs(self.jam_to_bob) ** 2 + self.noise_bob_raw

    def without_jammer(self) -> "PlsInstance":
        """Copy of this scenario with all jammer channels zeroed."""
        return replace(self, jam_to_eve=0.0, jam_to_bob=0.0,
                       jam_to_ris=np.zeros(self.num_elements, complex),
                       jammer_enabled=False)


@dataclass(frozen=True)
class PlsQuadratics:
    """Homogenized magnitude forms of the three relevant links."""

    bob: HomogenizedQuadratic    # |bs->bob combined|^2
    eve: HomogenizedQuadratic    # |bs->eve combined|^2
    jam: HomogenizedQuadratic    # |jammer->eve combined|^2


def secrecy_quadratics(inst: PlsInstance) -> PlsQuadratics:
    """Rank-one quadratic forms for the three magnitude terms of the rate."""
    fb = np.conj(inst.bs_to_ris * inst.ris_to_bob)
    fe = np.conj(inst.bs_to_ris * inst.ris_to_eve)
    fj = np.conj(inst.jam_to_ris * inst.ris_to_eve)
    return PlsQuadratics(
        bob=HomogenizedQuadratic(np.concatenate([fb, [np.conj(inst.bs_to_bob)]])),
        eve=HomogenizedQuadratic(np.concatenate([fe, [np.conj(inst.bs_to_eve)]])),
        jam=HomogenizedQuadratic(np.concatenate([fj, [np.conj(inst.jam_to_eve)]])),
    )


def bob_sinr(inst: PlsInstance, phi) -> float:
    coeffs = phi.coeffs if isinstance(phi, ReflectionVector) else np.asarray(phi, complex)
    amp = inst.bs_to_bob + (inst.bs_to_ris * coeffs) @ inst.ris_to_bob
    return float(abs(amp) ** 2 / inst.noise_bob)


def eve_sinr(inst: PlsInstance, phi) -> float:
    coeffs = phi.coeffs if isinstance(phi, ReflectionVector) else np.asarray(phi, complex)
    amp = inst.bs_to_eve + (inst.bs_to_ris * coeffs) @ inst.ris_to_eve
    jam = inst.jam_to_eve + (inst.jam_to_ris * coeffs) @ inst.ris_to_eve
    return float(abs(amp) ** 2 / (abs(jam) ** 2 + inst.noise_eve))


def secrecy_rate(inst: PlsInstance, phi) -> float:
    """Achievable secrecy rate in bits per channel use (clamped at zero)."""
    return max(0.0, float(np.log2((1.0 + bob_sinr(inst, phi))
                                  / (1.0 + eve_sinr(inst, phi)))))


def relaxed_secrecy_objective(phi_bar_matrix: np.ndarray, quads: PlsQuadratics,
                              noise_bob: float, noise_eve: float) -> float:
    """Fractional objective of the rank-relaxed program at a PSD matrix.

    Closed-form ratio used for the outer parameter update:
    [nb*ne + ne*tr(X Fb) + nb*tr(X Fj) + tr(X Fb X Fj)] /
    [ne + tr(X (Fe + Fj))].
    """
    x = np.asarray(phi_bar_matrix)
    ub, ue, uj = quads.bob.vector, quads.eve.vector, quads.jam.vector
    tb = float(np.real(np.conj(ub) @ x @ ub))
    te = float(np.real(np.conj(ue) @ x @ ue))
    tj = float(np.real(np.conj(uj) @ x @ uj))
    w = np.conj(ub) @ x @ uj  # tr(X Fb X Fj) = |w|^2 for the rank-one forms
    num = noise_bob * noise_eve + noise_eve * tb + noise_bob * tj + abs(w) ** 2
    return num / (noise_eve + te + tj)


def _parametric_value(x, quads, noise_bob, noise_eve, lam) -> float:
    """Dinkelbach parametric objective: numerator - lam * denominator."""
    ub, ue, uj = quads.bob.vector, quads.eve.vector, quads.jam.vector
    tb = float(np.real(np.conj(ub) @ x @ ub))
    te = float(np.real(np.conj(ue) @ x @ ue))
    tj = float(np.real(np.conj(uj) @ x @ uj))
    w = np.conj(ub) @ x @ uj
    return (noise_bob * noise_eve + noise_eve * tb + noise_bob * tj + abs(w) ** 2
            - lam * (noise_eve + te + tj))


@dataclass(frozen=True)
class SecrecyOptions:
    """Nested-loop controls for the secrecy-rate design."""

    outer_tol: float = 5e-3     # relative stall tolerance on the ratio value
    max_outer: int = 30
    inner_tol: float = 1e-6     # relative improvement threshold per inner step
    max_inner: int = 30
    phase_starts: int = 8       # linearization-phase grid for the coupled term
    radius_starts: tuple = (0.05, 0.2, 0.5)
    refine_leaders: int = 3     # grid seeds iterated to convergence after screening
    screen_tol: float = 1e-3    # SDP gap tolerance while ranking grid seeds
    max_restarts: int = 6       # re-enter the loop from a better rank-one point
    randomization_trials: int = 200
    sdp: SolverOptions = DEFAULT_SDP_OPTIONS


DEFAULT_SECRECY_OPTIONS = SecrecyOptions()


@dataclass
class SecrecyResult:
    phi: ReflectionVector
    rate: float
    rate_bound: float            # relaxed-rate value at termination (upper proxy)
    lambda_history: list
    iterations: int              # outer ratio updates (inner stages run), all loops
    sdr_matrix: np.ndarray


def _inner_stage(x0, quads, noise_bob, noise_eve, lam, conventional, opts):
    """Maximize the parametric objective by tangent-minorant iterations.

    The coupled term |w(X)|^2 with w = ub^H X uj is minorized by
    2 Re(conj(w0) w) - |w0|^2, exact at w = w0, valid for every w0; each
    minorant maximization is one linear SDP on the diagonally-bounded PSD
    set. Runs one pass seeded at the current w(x0) plus a grid of virtual
    phases/radii, and returns the best point found (never worse than x0).
    """
    ub, uj = quads.bob.vector, quads.jam.vector
    fb, fe, fj = quads.bob.matrix, quads.eve.matrix, quads.jam.matrix
    n = fb.shape[0]
    base = noise_eve * fb + noise_bob * fj - lam * (fe + fj)
    cross = np.outer(ub, uj.conj())
    jam_active = bool(np.abs(uj).max() > 0)

    screen_opts = replace(opts.sdp, tol=max(opts.sdp.tol, opts.screen_tol))

    def one_step(w0, sdp_opts=None):
        w_mat = base + w0 * cross + np.conj(w0) * cross.conj().T if jam_active else base
        sol = solve_sdp(SdpProblem(size=n, objective=hermitize(w_mat),
                                   unit_diag=conventional), sdp_opts or opts.sdp)
        return sol.matrix, _parametric_value(sol.matrix, quads, noise_bob, noise_eve, lam)

    def run(x_start, val_start):
        x_best, val_best = x_start, val_start
        for _ in range(opts.max_inner):
            x_new, val = one_step(np.conj(ub) @ x_best @ uj)
            if val <= val_best + opts.inner_tol * max(1.0, abs(val_best)):
                if val > val_best:
                    x_best, val_best = x_new, val
                break
            x_best, val_best = x_new, val
            if not jam_active:
                break  # no coupled term: the single SDP is already exact
        return x_best, val_best

    seeds = [np.conj(ub) @ x0 @ uj] if jam_active else [0.0]
    if jam_active:
        r_full = np.linalg.norm(ub) * np.linalg.norm(uj)
        for frac in opts.radius_starts:
            for q in range(opts.phase_starts):
                seeds.append(r_full * frac * np.exp(2j * np.pi * q / opts.phase_starts))
    # screen: one loosely-solved minorant step per seed, then iterate leaders
    stepped = sorted((one_step(ws, screen_opts) for ws in seeds), key=lambda t: -t[1])
    x_best = x0
    val_best = _parametric_value(x0, quads, noise_bob, noise_eve, lam)
    for x_s, v_s in stepped[:max(1, opts.refine_leaders)]:
        x_run, val_run = run(x_s, v_s)
        if val_run > val_best:
            x_best, val_best = x_run, val_run
    return x_best


def maximize_secrecy(inst: PlsInstance, mode: RisMode = RisMode.ABSORPTIVE,
                     opts: SecrecyOptions = DEFAULT_SECRECY_OPTIONS,
                     seed: int = 0) -> SecrecyResult:
    """Maximize the secrecy rate over the surface coefficients.

    Outer loop: closed-form ratio update (non-decreasing; stops on relative
    stall below outer_tol). Inner stage: minorant SDP iterations as in
    :func:`_inner_stage`. Rank-one recovery by Gaussian randomization with
    the secrecy rate as the selection metric; if a recovered candidate's
    fractional value exceeds the relaxed value, the loop re-enters from that
    candidate (keeping the ratio sequence monotone) so the reported bound
    always dominates the recovered solution.
    """
    quads = secrecy_quadratics(inst)
    nb, ne = inst.noise_bob, inst.noise_eve
    k = inst.num_elements
    n = k + 1
    conventional = mode is RisMode.CONVENTIONAL
    rng = stream(int(seed)) if not isinstance(seed, np.random.Generator) else seed

    x = np.zeros((n, n), complex)
    x[k, k] = 1.0
    history = []
    iters_total = 0
    best_phi, best_rate = None, -np.inf
    bound_frac = 0.0

    for _restart in range(opts.max_restarts):
        lam_prev = None
        for _ in range(opts.max_outer):
            lam = relaxed_secrecy_objective(x, quads, nb, ne)
            if not history or lam > history[-1]:
                history.append(lam)
            if lam_prev is not None and abs(lam - lam_prev) <= opts.outer_tol * max(1.0, abs(lam_prev)):
                break
            lam_prev = lam
            iters_total += 1
            x = _inner_stage(x, quads, nb, ne, lam, conventional, opts)

        cand = rank_one_candidates(x, opts.randomization_trials, rng, conventional)
        if not conventional:
            # phase-only recoveries of the same relaxed point stay feasible
            alt = rank_one_candidates(x, opts.randomization_trials, rng, True)
            cand = np.column_stack([cand, alt])
        rates = [secrecy_rate(inst, cand[:k, j]) for j in range(cand.shape[1])]
        j = int(np.argmax(rates))
        if rates[j] > best_rate:
            best_rate, best_phi = rates[j], cand[:k, j]
        # candidates are relaxation-feasible points; fold the best fractional
        # value into the certified bound, and re-enter the loop from it when
        # it beats the relaxed iterate beyond the loop tolerance (an inner
        # local optimum)
        frac = [relaxed_secrecy_objective(np.outer(cand[:, j2], cand[:, j2].conj()),
                                          quads, nb, ne) for j2 in range(cand.shape[1])]
        j_frac = int(np.argmax(frac))
        lam_now = relaxed_secrecy_objective(x, quads, nb, ne)
        bound_frac = max(bound_frac, lam_now, frac[j_frac])
        if frac[j_frac] > lam_now * (1.0 + opts.outer_tol):
            v = cand[:, j_frac]
            x = np.outer(v, v.conj())
            continue
        break

    rate_bound = max(0.0, float(np.log2(bound_frac / nb)))
    phi = ReflectionVector(best_phi, mode)
    return SecrecyResult(phi=phi, rate=best_rate, rate_bound=rate_bound,
                         lambda_history=history, iterations=iters_total, sdr_matrix=x)

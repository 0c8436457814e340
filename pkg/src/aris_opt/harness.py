"""Monte-Carlo experiment engine: seeded trial sweeps, aggregation, CSV and
optional SVG output.

Determinism: every trial draws its channels from a stream keyed by
(base seed, sweep index, trial index), so results are independent of
execution order and of the number of workers. Within a trial all design
variants (absorptive/phase-only, jammer on/off) share the same channel draw,
which makes the per-trial comparisons paired.
"""
from __future__ import annotations

import csv
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import d2d, pls, radarcomm
from .channels import MmwParams, mmw_matrix, rayleigh_matrix, stream
from .core import RisMode, db_to_linear
from .radarcomm import mean_modulus

MODES = ("aris", "conventional")
_RIS_MODE = {"aris": RisMode.ABSORPTIVE, "conventional": RisMode.CONVENTIONAL}

CSV_HEADER = ("experiment", "sweep_param", "sweep_value", "mode", "metric_name",
              "metric_mean", "metric_std", "mean_modulus", "trials_ok", "trials_failed")


@dataclass(frozen=True)
class ExperimentSpec:
    sweep_param: str
    metric_name: str
    default_sweep: tuple
    default_trials: int
    defaults: dict
    family: str                # "radar_comm" | "d2d" | "pls"
    jammer_choice: bool = False  # pls experiments accept jammer on/off/both


EXPERIMENTS: dict[str, ExperimentSpec] = {
    "radar_comm_sigma_d": ExperimentSpec(
        sweep_param="sigma_d_db", metric_name="residual_fro",
        default_sweep=(-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0),
        default_trials=50,
        defaults=dict(m_antennas=6, n_antennas=6, num_elements=64,
                      sigma_h_db=0.0, sigma_g_db=0.0),
        family="radar_comm"),
    "radar_comm_k": ExperimentSpec(
        sweep_param="num_elements", metric_name="residual_fro",
        default_sweep=(8, 16, 24, 32, 40, 48, 56, 64), default_trials=50,
        defaults=dict(m_antennas=6, n_antennas=6, sigma_h_db=0.0, sigma_g_db=0.0,
                      sigma_d_db=5.0),
        family="radar_comm"),
    "radar_comm_clusters": ExperimentSpec(
        sweep_param="clusters", metric_name="residual_fro",
        default_sweep=(1, 2, 3, 4, 5, 6, 7, 8), default_trials=30,
        defaults=dict(m_antennas=6, n_antennas=6, num_elements=64, subpaths=4,
                      sigma_h_db=0.0, sigma_g_db=0.0, sigma_d_db=10.0),
        family="radar_comm"),
    "d2d_power": ExperimentSpec(
        sweep_param="power", metric_name="worst_sinr_db",
        default_sweep=(10.0, 30.0, 50.0, 100.0), default_trials=20,
        defaults=dict(num_links=6, num_elements=64, sigma_h_db=0.0, sigma_g_db=0.0,
                      sigma_d_db=0.0, noise_var=1.0),
        family="d2d"),
    "d2d_sigma_d": ExperimentSpec(
        sweep_param="sigma_d_db", metric_name="worst_sinr_db",
        default_sweep=(-10.0, 0.0, 10.0, 20.0, 30.0), default_trials=20,
        defaults=dict(num_links=6, num_elements=64, sigma_h_db=0.0, sigma_g_db=0.0,
                      power=50.0, noise_var=1.0),
        family="d2d"),
    "d2d_k": ExperimentSpec(
        sweep_param="num_elements", metric_name="worst_sinr_db",
        default_sweep=(16, 32, 48, 64), default_trials=20,
        defaults=dict(num_links=6, sigma_h_db=0.0, sigma_g_db=0.0, sigma_d_db=10.0,
                      power=50.0, noise_var=1.0),
        family="d2d"),
    "pls_convergence": ExperimentSpec(
        sweep_param="num_elements", metric_name="outer_iterations",
        default_sweep=(16,), default_trials=10,
        defaults=dict(bs_bob_db=0.0, bs_eve_db=0.0, bs_ris_db=0.0, ris_bob_db=0.0,
                      ris_eve_db=0.0, jam_eve_db=0.0, jam_ris_db=0.0, jammer=1.0),
        family="pls", jammer_choice=True),
    "pls_sigma_de": ExperimentSpec(
        sweep_param="bs_eve_db", metric_name="secrecy_rate_bits",
        default_sweep=(-10.0, -5.0, 0.0, 5.0, 10.0), default_trials=30,
        defaults=dict(num_elements=2, bs_bob_db=10.0, bs_ris_db=10.0, ris_bob_db=0.0,
                      ris_eve_db=0.0, jam_eve_db=0.0, jam_ris_db=0.0, jammer=2.0),
        family="pls", jammer_choice=True),
    "pls_sigma_dj": ExperimentSpec(
        sweep_param="jam_eve_db", metric_name="secrecy_rate_bits",
        default_sweep=(-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0), default_trials=30,
        defaults=dict(num_elements=2, bs_bob_db=10.0, bs_eve_db=0.0, bs_ris_db=10.0,
                      ris_bob_db=0.0, ris_eve_db=0.0, jam_ris_db=0.0, jammer=2.0),
        family="pls", jammer_choice=True),
}

# jammer param encoding: 0 off, 1 on, 2 both (kept numeric so --set works uniformly)
JAMMER_OFF, JAMMER_ON, JAMMER_BOTH = 0.0, 1.0, 2.0


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep definition. Unknown parameter keys are rejected."""

    experiment: str
    sweep: tuple = ()
    trials: int = 0
    seed: int = 0
    modes: tuple = MODES
    params: dict = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; "
                             f"choose from {sorted(EXPERIMENTS)}")
        spec = EXPERIMENTS[self.experiment]
        sweep = tuple(self.sweep) if self.sweep else spec.default_sweep
        if not sweep:
            raise ValueError("sweep must be non-empty")
        trials = self.trials if self.trials else spec.default_trials
        if trials < 1:
            raise ValueError("trials must be >= 1")
        modes = tuple(self.modes)
        bad = [m for m in modes if m not in MODES]
        if bad or not modes:
            raise ValueError(f"modes must be a non-empty subset of {MODES}, got {modes}")
        allowed = set(spec.defaults)
        unknown = set(self.params) - allowed
        if unknown:
            raise ValueError(f"unknown parameter keys for {self.experiment}: "
                             f"{sorted(unknown)} (allowed: {sorted(allowed)})")
        merged = dict(spec.defaults)
        merged.update({k: float(v) for k, v in self.params.items()})
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        object.__setattr__(self, "sweep", sweep)
        object.__setattr__(self, "trials", int(trials))
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "params", merged)

    @property
    def spec(self) -> ExperimentSpec:
        return EXPERIMENTS[self.experiment]

    def variants(self) -> tuple:
        """Row labels: modes crossed with the jammer setting where relevant."""
        spec = self.spec
        if spec.family != "pls" or not spec.jammer_choice:
            return self.modes
        jam = self.params.get("jammer", JAMMER_ON)
        if jam == JAMMER_BOTH:
            out = []
            for m in self.modes:
                label = "conv" if m == "conventional" else m
                out.extend([f"{label}_jammer", f"{label}_nojammer"])
            return tuple(out)
        return self.modes


@dataclass(frozen=True)
class SweepRow:
    experiment: str
    sweep_param: str
    sweep_value: float
    mode: str
    metric_name: str
    metric_mean: float
    metric_std: float
    mean_modulus: float
    trials_ok: int
    trials_failed: int
    wall_time: float  # seconds spent on this row's sweep point (not in CSV)


@dataclass(frozen=True)
class SweepResult:
    config: ExperimentConfig
    rows: tuple


# ---------------------------------------------------------------------------
# scenario builders
# ---------------------------------------------------------------------------

_PREDEFINED_AOD = {"direct": np.deg2rad(15.0), "tx_to_ris": np.deg2rad(30.0),
                   "ris_to_rx": np.deg2rad(-15.0)}


def make_radar_comm_instance(params: dict, rng_key, clustered: bool = False,
                             clusters: int | None = None) -> radarcomm.RadarCommInstance:
    """Draw one suppression scenario (Rayleigh or clustered model)."""
    m = int(params["m_antennas"])
    n = int(params["n_antennas"])
    k = int(params["num_elements"])
    var = {c: db_to_linear(params[f"sigma_{c}_db"]) for c in ("d", "g", "h")}
    if not clustered:
        return radarcomm.RadarCommInstance(
            direct=rayleigh_matrix(n, m, var["d"], _sub(rng_key, "direct")),
            tx_to_ris=rayleigh_matrix(k, m, var["g"], _sub(rng_key, "tx_to_ris")),
            ris_to_rx=rayleigh_matrix(n, k, var["h"], _sub(rng_key, "ris_to_rx")),
        )
    t = int(clusters if clusters is not None else params["clusters"])
    j = int(params["subpaths"])

    def mk(label, rx_elems, tx_elems, variance):
        aod = _PREDEFINED_AOD[label]
        p = MmwParams(clusters=t, subpaths=j, variance=variance,
                      aoa_center=aod + np.pi, aod_center=aod)
        return mmw_matrix(rx_elems, tx_elems, p, _sub(rng_key, label))

    return radarcomm.RadarCommInstance(
        direct=mk("direct", n, m, var["d"]),
        tx_to_ris=mk("tx_to_ris", k, m, var["g"]),
        ris_to_rx=mk("ris_to_rx", n, k, var["h"]),
    )


def make_d2d_instance(params: dict, rng_key) -> d2d.D2DInstance:
    l = int(params["num_links"])
    k = int(params["num_elements"])
    var = {c: db_to_linear(params[f"sigma_{c}_db"]) for c in ("d", "g", "h")}
    return d2d.D2DInstance(
        direct=rayleigh_matrix(l, l, var["d"], _sub(rng_key, "direct")),
        tx_to_ris=rayleigh_matrix(k, l, var["g"], _sub(rng_key, "tx_to_ris")),
        ris_to_rx=rayleigh_matrix(l, k, var["h"], _sub(rng_key, "ris_to_rx")),
        powers=np.full(l, float(params["power"])),
        noise_var=float(params["noise_var"]),
    )


def make_pls_instance(params: dict, rng_key, jammer: bool) -> pls.PlsInstance:
    k = int(params["num_elements"])

    def scalar(label, key_db):
        g = _sub(rng_key, label)
        return complex(rayleigh_matrix(1, 1, db_to_linear(params[key_db]), g)[0, 0])

    def vector(label, key_db):
        g = _sub(rng_key, label)
        return rayleigh_matrix(k, 1, db_to_linear(params[key_db]), g)[:, 0]

    # jammer channels are always drawn so jammer on/off comparisons stay paired
    inst = pls.PlsInstance(
        bs_to_bob=scalar("bs_bob", "bs_bob_db"),
        bs_to_eve=scalar("bs_eve", "bs_eve_db"),
        bs_to_ris=vector("bs_ris", "bs_ris_db"),
        ris_to_bob=vector("ris_bob", "ris_bob_db"),
        ris_to_eve=vector("ris_eve", "ris_eve_db"),
        jam_to_eve=scalar("jam_eve", "jam_eve_db"),
        jam_to_ris=vector("jam_ris", "jam_ris_db"),
        noise_bob_raw=1.0, noise_eve=1.0,
    )
    return inst if jammer else inst.without_jammer()


def _sub(rng_key, label):
    base, si, ti = rng_key
    return stream(base, si, ti, label)


# ---------------------------------------------------------------------------
# per-trial runners
# ---------------------------------------------------------------------------

def run_trial(experiment: str, sweep_value: float, params: dict,
              variants: tuple, seed: int, sweep_index: int, trial_index: int) -> dict:
    """Metrics of one channel realization for every requested variant.

    Returns {variant: (metric_value, mean_modulus)}.
    """
    spec = EXPERIMENTS[experiment]
    params = dict(params)
    params[spec.sweep_param] = float(sweep_value)
    key = (seed, sweep_index, trial_index)
    out = {}
    if spec.family == "radar_comm":
        clustered = experiment == "radar_comm_clusters"
        inst = make_radar_comm_instance(params, key, clustered=clustered)
        for v in variants:
            design = radarcomm.design_aris if v == "aris" else radarcomm.design_conventional
            res = design(inst)
            out[v] = (res.residual, mean_modulus(res.phi))
    elif spec.family == "d2d":
        inst = make_d2d_instance(params, key)
        for v in variants:
            res = d2d.maxmin_design(inst, _RIS_MODE[v],
                                    seed=stream(seed, sweep_index, trial_index, v, "rand"))
            _assert_monotone(res.lambda_history, experiment)
            out[v] = (10.0 * np.log10(max(res.worst_sinr, 1e-300)),
                      mean_modulus(res.phi))
    else:
        insts = {}
        for v in variants:
            mode, jam = _parse_pls_variant(v, params)
            if jam not in insts:
                insts[jam] = make_pls_instance(params, key, jammer=jam)
            res = pls.maximize_secrecy(insts[jam], _RIS_MODE[mode],
                                       seed=stream(seed, sweep_index, trial_index, v, "rand"))
            _assert_monotone(res.lambda_history, experiment)
            metric = (float(res.iterations) if spec.metric_name == "outer_iterations"
                      else res.rate)
            out[v] = (metric, mean_modulus(res.phi))
    return out


def _parse_pls_variant(variant: str, params: dict):
    if variant.endswith("_jammer"):
        mode = variant[:-len("_jammer")]
        jam = True
    elif variant.endswith("_nojammer"):
        mode = variant[:-len("_nojammer")]
        jam = False
    else:
        mode = variant
        jam = params.get("jammer", JAMMER_ON) != JAMMER_OFF
    mode = "conventional" if mode == "conv" else mode
    return mode, jam


def _assert_monotone(history, label):
    h = np.asarray(history, dtype=float)
    if h.size >= 2 and np.any(np.diff(h) < 0):
        raise AssertionError(f"ratio sequence decreased in {label}: {history}")


def _run_trial_star(args):
    try:
        return run_trial(*args)
    except Exception as exc:  # noqa: BLE001 -- failures are data here
        return exc


def run_experiment(cfg: ExperimentConfig) -> SweepResult:
    """Execute the sweep and aggregate (trial failures are counted, not fatal)."""
    spec = cfg.spec
    variants = cfg.variants()
    rows = []
    for si, sweep_value in enumerate(cfg.sweep):
        t0 = time.monotonic()
        tasks = [(cfg.experiment, sweep_value, cfg.params, variants,
                  cfg.seed, si, ti) for ti in range(cfg.trials)]
        results: list = [None] * cfg.trials
        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                for ti, res in enumerate(pool.map(_run_trial_star, tasks)):
                    results[ti] = res
        else:
            for ti, task in enumerate(tasks):
                results[ti] = _run_trial_star(task)
        wall = time.monotonic() - t0
        for variant in variants:
            metrics, moduli, failed = [], [], 0
            for res in results:
                if isinstance(res, dict):
                    metrics.append(res[variant][0])
                    moduli.append(res[variant][1])
                else:
                    failed += 1
            if failed > 0.1 * cfg.trials:
                warnings.warn(
                    f"{cfg.experiment} @ {spec.sweep_param}={sweep_value}: "
                    f"{failed}/{cfg.trials} trials failed", RuntimeWarning)
            mean = float(np.mean(metrics)) if metrics else float("nan")
            std = float(np.std(metrics)) if metrics else float("nan")
            mod = float(np.mean(moduli)) if moduli else float("nan")
            rows.append(SweepRow(
                experiment=cfg.experiment, sweep_param=spec.sweep_param,
                sweep_value=float(sweep_value), mode=variant,
                metric_name=spec.metric_name, metric_mean=mean, metric_std=std,
                mean_modulus=mod, trials_ok=len(metrics), trials_failed=failed,
                wall_time=wall))
    return SweepResult(config=cfg, rows=tuple(rows))


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(result: SweepResult, path) -> None:
    """UTF-8, LF-terminated CSV with a fixed header and 17-digit floats."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in result.rows:
            w.writerow([r.experiment, r.sweep_param, _fmt(r.sweep_value), r.mode,
                        r.metric_name, _fmt(r.metric_mean), _fmt(r.metric_std),
                        _fmt(r.mean_modulus), r.trials_ok, r.trials_failed])


def write_plots(result: SweepResult, csv_path) -> list:
    """SVG line charts beside the CSV (one per metric plus mean modulus).

    Requires matplotlib; output is byte-stable for identical results.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    matplotlib.rcParams["svg.hashsalt"] = "aris-opt"

    from pathlib import Path
    csv_path = Path(csv_path)
    written = []
    metric = result.rows[0].metric_name if result.rows else "metric"
    for field_name, label, suffix in ((
            "metric_mean", metric, "metric"), ("mean_modulus", "mean modulus", "modulus")):
        fig, ax = plt.subplots(figsize=(6, 4))
        for variant in dict.fromkeys(r.mode for r in result.rows):
            pts = [(r.sweep_value, getattr(r, field_name))
                   for r in result.rows if r.mode == variant]
            xs, ys = zip(*sorted(pts))
            ax.plot(xs, ys, marker="o", label=variant)
        ax.set_xlabel(result.rows[0].sweep_param if result.rows else "sweep")
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
        ax.legend()
        out = csv_path.with_name(csv_path.stem + f"_{suffix}.svg")
        fig.savefig(out, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(out)
    return written

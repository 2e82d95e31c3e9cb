"""Experiment orchestration: flop estimates, unit conversion, sweeps, CSV output."""

import csv
import json
import math
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import baselines, channel, model, outer
from .errors import ConfigError, NonConvergenceError
from .inner import InnerOptions

CSV_COLUMNS = ["experiment", "sweep_var", "sweep_value", "trial", "seed",
               "algorithm", "ee_nats_per_joule", "ee_bits_per_joule",
               "sum_rate_nats", "tx_power_w", "outer_iters", "inner_iters",
               "converged", "wall_ms"]

ALGORITHMS = ("proposed", "wmmse", "poweralloc_mrt", "poweralloc_random")


# ---------------------------------------------------------------------------
# flop-cost model


@dataclass
class FlopEstimate:
    """Per-sweep flop counts of the three block updates."""

    phi1: int
    phi2: int
    phi3: int

    @property
    def per_sweep_total(self):
        return self.phi1 + self.phi2 + self.phi3

    def grand_total(self, rho1, rho2):
        """Total for rho1 outer iterations of rho2 sweeps each."""
        return rho1 * rho2 * self.per_sweep_total

    def to_dict(self):
        return {"phi1": self.phi1, "phi2": self.phi2, "phi3": self.phi3,
                "per_sweep_total": self.per_sweep_total}


def estimate_flops(cfg):
    """Real-flop counts of the receiver, weight and beamformer updates."""
    N = sum(cfg.N)
    L = sum(n * m for n, m in zip(cfg.N, cfg.M))
    phi1 = 9 * N * L
    phi2 = 8 * (N + 2) * L + 3 * N
    phi3 = sum(129 * m ** 3 + (15 + 8 * n) * m ** 2 + (N + 2) * m
               for m, n in zip(cfg.M, cfg.N)) + (12 * cfg.K + 8) * N
    return FlopEstimate(phi1=phi1, phi2=phi2, phi3=phi3)


# ---------------------------------------------------------------------------
# unit conversion


def convert_units(value, frm, to):
    """Convert between dBm/W, dB/linear and nats/bits."""
    pairs = {
        ("dBm", "W"): lambda x: 10.0 ** ((x - 30.0) / 10.0),
        ("W", "dBm"): lambda x: 10.0 * math.log10(x) + 30.0,
        ("dB", "linear"): lambda x: 10.0 ** (x / 10.0),
        ("linear", "dB"): lambda x: 10.0 * math.log10(x),
        ("nats", "bits"): lambda x: x / math.log(2.0),
        ("bits", "nats"): lambda x: x * math.log(2.0),
    }
    if frm == to:
        return value
    try:
        return pairs[(frm, to)](value)
    except KeyError:
        raise ConfigError(f"cannot convert {frm!r} to {to!r}") from None


def dbm_to_w(x):
    return convert_units(x, "dBm", "W")


# ---------------------------------------------------------------------------
# SISO brute-force oracle


def siso_grid_oracle(cfg, H, points=10 ** 6):
    """Grid search over transmit power for single-cell single-user SISO.

    Returns (eta_star, p_star). Independent of the iterative solvers.
    """
    if not (cfg.K == 1 and cfg.M[0] == 1 and cfg.N[0] == 1):
        raise ConfigError("the grid oracle only handles K=M=N=1")
    g = abs(H.h[0][0][0][0]) ** 2
    p = np.linspace(0.0, cfg.P[0], points)
    rates = cfg.alpha[0][0] * np.log1p(p * g / cfg.sigma2[0][0])
    ee = rates / (cfg.xi * p + cfg.fixed_power)
    i = int(np.argmax(ee))
    return float(ee[i]), float(p[i])


def siso_grid_F(cfg, H, eta, points=10 ** 6):
    """Grid-evaluated F(eta) for the same SISO setting."""
    g = abs(H.h[0][0][0][0]) ** 2
    p = np.linspace(0.0, cfg.P[0], points)
    rates = cfg.alpha[0][0] * np.log1p(p * g / cfg.sigma2[0][0])
    vals = rates - eta * (cfg.xi * p + cfg.fixed_power)
    return float(vals.max())


# ---------------------------------------------------------------------------
# experiment sweeps


@dataclass
class ExperimentSpec:
    """One Monte Carlo sweep: a variable, its values, trials, algorithms."""

    name: str
    sweep_variable: str          # bs_power_dbm | antenna_count | circuit_power_dbm
    sweep_values: list
    trials: int
    cfg: model.SystemConfig
    geom: channel.GeometryConfig
    algorithms: list
    seed: int = 0
    restarts: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.sweep_values:
            raise ConfigError("sweep_values must be nonempty")
        if self.sweep_variable not in ("bs_power_dbm", "antenna_count",
                                       "circuit_power_dbm"):
            raise ConfigError(f"unknown sweep variable {self.sweep_variable!r}")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {alg!r}")


def _apply_sweep(cfg, variable, value):
    kw = dict(K=cfg.K, M=list(cfg.M), N=list(cfg.N), P=list(cfg.P), Pc=cfg.Pc,
              P0=cfg.P0, xi=cfg.xi, alpha=[list(a) for a in cfg.alpha],
              sigma2=[list(s) for s in cfg.sigma2], delta=cfg.delta,
              epsilon=cfg.epsilon)
    if variable == "bs_power_dbm":
        kw["P"] = [dbm_to_w(value)] * cfg.K
    elif variable == "antenna_count":
        kw["M"] = [int(value)] * cfg.K
    elif variable == "circuit_power_dbm":
        kw["Pc"] = dbm_to_w(value)
    return model.SystemConfig(**kw)


def _run_algorithm(alg, cfg, H, seed, restarts):
    inner = InnerOptions(delta=cfg.delta, restarts=restarts, restart_seed=seed)
    opts = outer.OuterOptions(epsilon=cfg.epsilon, inner=inner)
    if alg == "proposed":
        rep = outer.outer_solve(cfg, H, opts)
        return (rep.ee, rep.sum_rate, sum(rep.per_bs_powers), rep.outer_iters,
                rep.inner_iters_total, rep.converged)
    if alg == "wmmse":
        rep = baselines.wmmse_sum_rate(cfg, H, inner)
        sum_rate = model.weighted_sum_rate(cfg, H, rep.W)
        ee = model.energy_efficiency(cfg, H, rep.W)
        return (ee, sum_rate, model.total_power(cfg, rep.W), 0,
                rep.total_iters, rep.converged)
    if alg in ("poweralloc_mrt", "poweralloc_random"):
        dirs = (baselines.mrt_directions(cfg, H) if alg == "poweralloc_mrt"
                else baselines.random_directions(cfg, seed))
        rep = baselines.ee_power_allocation(cfg, H, dirs, opts)
        return (rep.ee, rep.sum_rate, sum(rep.per_bs_powers), rep.outer_iters,
                rep.inner_iters_total, rep.converged)
    raise ConfigError(f"unknown algorithm {alg!r}")


def run_experiment(spec, deterministic=True):
    """Run the sweep; returns data rows followed by per-value mean rows."""
    rows = []
    for value in spec.sweep_values:
        cfg_v = _apply_sweep(spec.cfg, spec.sweep_variable, value)
        for trial in range(spec.trials):
            seed_t = spec.seed ^ trial
            drop = channel.drop_users(spec.geom, cfg_v, seed_t)
            H = channel.generate_channels(spec.geom, cfg_v, drop, seed_t)
            for alg in spec.algorithms:
                t0 = time.perf_counter()
                try:
                    ee, sr, txp, oit, iit, conv = _run_algorithm(
                        alg, cfg_v, H, seed_t, spec.restarts)
                except NonConvergenceError:
                    ee = sr = txp = float("nan")
                    oit = iit = 0
                    conv = False
                wall = 0.0 if deterministic else (time.perf_counter() - t0) * 1e3
                rows.append({
                    "experiment": spec.name, "sweep_var": spec.sweep_variable,
                    "sweep_value": value, "trial": trial, "seed": seed_t,
                    "algorithm": alg, "ee_nats_per_joule": ee,
                    "ee_bits_per_joule": ee / math.log(2.0),
                    "sum_rate_nats": sr, "tx_power_w": txp,
                    "outer_iters": oit, "inner_iters": iit,
                    "converged": conv, "wall_ms": wall,
                })
    rows.extend(_mean_rows(spec, rows))
    return rows


def _mean_rows(spec, rows):
    means = []
    for value in spec.sweep_values:
        for alg in spec.algorithms:
            sub = [r for r in rows if r["sweep_value"] == value
                   and r["algorithm"] == alg and r["trial"] != "mean"]
            ok = [r for r in sub if r["converged"]]
            if not sub:
                continue

            def avg(key, pool=ok):
                return (sum(r[key] for r in pool) / len(pool)) if pool else float("nan")

            means.append({
                "experiment": spec.name, "sweep_var": spec.sweep_variable,
                "sweep_value": value, "trial": "mean", "seed": "",
                "algorithm": alg,
                "ee_nats_per_joule": avg("ee_nats_per_joule"),
                "ee_bits_per_joule": avg("ee_bits_per_joule"),
                "sum_rate_nats": avg("sum_rate_nats"),
                "tx_power_w": avg("tx_power_w"),
                "outer_iters": avg("outer_iters"),
                "inner_iters": avg("inner_iters"),
                "converged": len(ok) / len(sub),
                "wall_ms": avg("wall_ms", sub),
            })
    return means


def write_results(path, spec, rows):
    """CSV with the fixed column order plus a JSON sidecar of the full spec."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row[k]) for k in CSV_COLUMNS})
    sidecar = {
        "name": spec.name, "sweep_variable": spec.sweep_variable,
        "sweep_values": list(spec.sweep_values), "trials": spec.trials,
        "algorithms": list(spec.algorithms), "seed": spec.seed,
        "restarts": spec.restarts,
        "system": {"K": spec.cfg.K, "M": spec.cfg.M, "N": spec.cfg.N,
                   "P": spec.cfg.P, "Pc": spec.cfg.Pc, "P0": spec.cfg.P0,
                   "xi": spec.cfg.xi, "alpha": spec.cfg.alpha,
                   "sigma2": spec.cfg.sigma2, "delta": spec.cfg.delta,
                   "epsilon": spec.cfg.epsilon},
        "geometry": asdict(spec.geom),
    }
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2)


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return v


def spot_check_rows(spec, rows, fraction=0.01, rng=None):
    """Re-verify a random sample of data rows by recomputing EE from scratch."""
    rng = rng or np.random.default_rng(0)
    data = [r for r in rows if r["trial"] != "mean" and r["converged"]
            and r["algorithm"] == "proposed"]
    n = max(1, int(len(data) * fraction))
    checked = 0
    for r in rng.choice(len(data), size=min(n, len(data)), replace=False):
        row = data[int(r)]
        cfg_v = _apply_sweep(spec.cfg, spec.sweep_variable, row["sweep_value"])
        drop = channel.drop_users(spec.geom, cfg_v, row["seed"])
        H = channel.generate_channels(spec.geom, cfg_v, drop, row["seed"])
        rep = outer.outer_solve(cfg_v, H, outer.OuterOptions(
            epsilon=cfg_v.epsilon, inner=InnerOptions(delta=cfg_v.delta)))
        ee = model.energy_efficiency(cfg_v, H, rep.W)
        if not math.isclose(ee, row["ee_nats_per_joule"], rel_tol=1e-9):
            raise AssertionError(
                f"row re-verification failed: {ee} vs {row['ee_nats_per_joule']}")
        checked += 1
    return checked

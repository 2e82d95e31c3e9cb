"""Outer bisection on the energy-efficiency factor eta.

Finds the root of F(eta) = max_W { weighted sum rate - eta * consumed power },
evaluating F at the stationary point the inner solver delivers. The bisection
driver is shared with the protocol simulator so both paths take bit-identical
decisions.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import model
from .errors import DegenerateConfigError, NonConvergenceError
from .inner import InnerOptions, inner_solve
from .model import BeamformerSet


@dataclass
class OuterOptions:
    epsilon: float = 1e-5
    max_iters: int = 200
    inner: InnerOptions = None
    warm_start: bool = True

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.inner is None:
            self.inner = InnerOptions()


@dataclass
class SolveReport:
    """Final solution plus per-user and per-BS summaries and the search trace."""

    eta_star: float
    W: BeamformerSet
    per_user_rates: list
    per_bs_powers: list
    ee: float
    sum_rate: float
    outer_iters: int
    inner_iters_total: int
    F_trace: list
    converged: bool = True

    def to_dict(self):
        return {
            "eta_star": self.eta_star,
            "ee_nats_per_joule": self.ee,
            "ee_bits_per_joule": self.ee / math.log(2.0),
            "sum_rate_nats": self.sum_rate,
            "per_user_rates": self.per_user_rates,
            "per_bs_powers": self.per_bs_powers,
            "outer_iters": self.outer_iters,
            "inner_iters_total": self.inner_iters_total,
            "F_trace": [[e, f] for e, f in self.F_trace],
            "converged": self.converged,
            "beamformers": [[[ [float(z.real), float(z.imag)] for z in wk]
                             for wk in row] for row in self.W.w],
        }


def eta_upper_bound(cfg, H):
    """Interference-free full-power rate divided by the fixed consumption."""
    denom = cfg.fixed_power
    if denom <= 0.0:
        raise DegenerateConfigError(
            "fixed power consumption is zero; the eta range is unbounded")
    r_max = 0.0
    for j, k in cfg.users():
        gain = float(np.vdot(H.h[j][j][k], H.h[j][j][k]).real)
        r_max += cfg.alpha[j][k] * math.log(1.0 + cfg.P[j] * gain / cfg.sigma2[j][k])
    return r_max / denom


def bisect_eta(cfg, bound, epsilon, max_iters, evaluate):
    """Bisection driver; `evaluate(eta)` returns (F_value, W, inner_iters).

    Returns (eta_star, W_certificate, F_trace, iterations, inner_total).
    The certificate is the beamformer set from the last eta with F >= 0.
    """
    eta_min, eta_max = 0.0, bound
    trace = []
    best_W = None
    last_W = None
    inner_total = 0
    for it in range(1, max_iters + 1):
        eta = 0.5 * (eta_min + eta_max)
        F, W, n_inner = evaluate(eta)
        trace.append((eta, F))
        inner_total += n_inner
        last_W = W
        if F <= 0.0:
            eta_max = eta
        else:
            eta_min = eta
            best_W = W
        if eta_max - eta_min <= epsilon:
            eta_star = 0.5 * (eta_min + eta_max)
            return eta_star, best_W if best_W is not None else last_W, trace, it, inner_total
    raise NonConvergenceError("eta bisection hit the iteration cap", trace=trace)


def evaluate_F(cfg, H, eta, opts=None):
    """One inner solve at fixed eta; F = G(W) - eta * fixed consumption."""
    opts = opts or OuterOptions(epsilon=cfg.epsilon,
                                inner=InnerOptions(delta=cfg.delta))
    report = inner_solve(cfg, H, eta, opts.inner)
    return report.G - eta * cfg.fixed_power, report.W


def _build_report(cfg, H, eta_star, W, trace, outer_iters, inner_total, converged=True):
    rates = [[model.user_rate(cfg, H, W, j, k) for k in range(cfg.N[j])]
             for j in range(cfg.K)]
    powers = W.per_bs_power(cfg)
    sum_rate = sum(cfg.alpha[j][k] * rates[j][k] for j, k in cfg.users())
    ee = sum_rate / (cfg.xi * sum(powers) + cfg.fixed_power)
    return SolveReport(eta_star=eta_star, W=W, per_user_rates=rates,
                       per_bs_powers=powers, ee=ee, sum_rate=sum_rate,
                       outer_iters=outer_iters, inner_iters_total=inner_total,
                       F_trace=trace, converged=converged)


def outer_solve(cfg, H, opts=None):
    """Bisection over eta with warm-started inner solves."""
    opts = opts or OuterOptions(epsilon=cfg.epsilon,
                                inner=InnerOptions(delta=cfg.delta))
    bound = eta_upper_bound(cfg, H)
    state = {"W": None}

    def evaluate(eta):
        inner_opts = opts.inner
        if opts.warm_start and state["W"] is not None:
            inner_opts = replace(opts.inner, init=state["W"])
        report = inner_solve(cfg, H, eta, inner_opts)
        state["W"] = report.W
        return report.G - eta * cfg.fixed_power, report.W, report.total_iters

    eta_star, W, trace, iters, inner_total = bisect_eta(
        cfg, bound, opts.epsilon, opts.max_iters, evaluate)
    return _build_report(cfg, H, eta_star, W, trace, iters, inner_total)

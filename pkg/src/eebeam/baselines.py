"""Comparison schemes: sum-rate WMMSE and power-only optimization over fixed beams.

The power-allocation baseline keeps the beam directions fixed (MRT or random
isotropic) and maximizes energy efficiency over per-user powers only, using
the same outer bisection with a cyclic coordinate-ascent inner loop.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergenceError
from .inner import InnerOptions, inner_solve
from .model import BeamformerSet
from .outer import OuterOptions, _build_report, bisect_eta, eta_upper_bound

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class FixedBeamDirections:
    """Unit-norm transmit directions v[j][k] with their provenance."""

    v: list
    kind: str  # "mrt" or "random"


def mrt_directions(cfg, H):
    v = [[H.h[j][j][k] / np.linalg.norm(H.h[j][j][k]) for k in range(cfg.N[j])]
         for j in range(cfg.K)]
    return FixedBeamDirections(v=v, kind="mrt")


def random_directions(cfg, seed):
    """Isotropic unit vectors (normalized complex Gaussian)."""
    rng = np.random.default_rng(seed)
    v = []
    for j in range(cfg.K):
        row = []
        for _ in range(cfg.N[j]):
            g = rng.standard_normal(cfg.M[j]) + 1j * rng.standard_normal(cfg.M[j])
            row.append(g / np.linalg.norm(g))
        v.append(row)
    return FixedBeamDirections(v=v, kind="random")


def wmmse_sum_rate(cfg, H, opts=None):
    """Sum-rate-only beamforming: the block-coordinate solver at eta = 0."""
    opts = opts or InnerOptions(delta=cfg.delta)
    return inner_solve(cfg, H, 0.0, opts)


def _golden_max(fun, lo, hi, tol=1e-8):
    """Golden-section maximization of a unimodal-ish scalar function."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    return x, fun(x)


class _PowerProblem:
    """Rates and objective as a function of per-user powers with fixed beams."""

    def __init__(self, cfg, H, dirs):
        self.cfg = cfg
        users = list(cfg.users())
        self.users = users
        n = len(users)
        gain = np.zeros((n, n))
        for i, (j, k) in enumerate(users):
            for l, (m, nn) in enumerate(users):
                gain[i, l] = abs(np.vdot(H.h[m][j][k], dirs.v[m][nn])) ** 2
        self.gain = gain
        self.sigma2 = np.array([cfg.sigma2[j][k] for j, k in users])
        self.alpha = np.array([cfg.alpha[j][k] for j, k in users])
        self.cell_of = np.array([j for j, _ in users])

    def objective(self, p, eta):
        rx = self.gain @ p
        sig = p * np.diag(self.gain)
        rates = np.log(1.0 + sig / (rx - sig + self.sigma2))
        return float(self.alpha @ rates - eta * self.cfg.xi * p.sum())

    def coordinate_ascent(self, p, eta, delta, max_sweeps=200, tol=1e-8):
        """Cyclic exact 1-D maximization of the objective over each power."""
        p = p.copy()
        g_prev = self.objective(p, eta)
        sweeps = 0
        for sweeps in range(1, max_sweeps + 1):
            for l in range(len(p)):
                j = self.cell_of[l]
                used = p[self.cell_of == j].sum() - p[l]
                cap = self.cfg.P[j] - used

                def g_of(x, l=l):
                    q = p.copy()
                    q[l] = x
                    return self.objective(q, eta)

                p[l], _ = _golden_max(g_of, 0.0, cap, tol)
            g_now = self.objective(p, eta)
            if abs(g_now - g_prev) <= delta:
                return p, g_now, sweeps
            g_prev = g_now
        raise NonConvergenceError("power coordinate ascent hit the sweep cap")


def ee_power_allocation(cfg, H, dirs, opts=None):
    """Energy-efficiency maximization over powers only, beams fixed at `dirs`."""
    opts = opts or OuterOptions(epsilon=cfg.epsilon,
                                inner=InnerOptions(delta=cfg.delta))
    prob = _PowerProblem(cfg, H, dirs)
    bound = eta_upper_bound(cfg, H)
    n = len(prob.users)
    state = {"p": np.array([cfg.P[j] / cfg.N[j] for j, _ in prob.users])}

    def evaluate(eta):
        p0 = state["p"] if opts.warm_start else np.array(
            [cfg.P[j] / cfg.N[j] for j, _ in prob.users])
        p, g, sweeps = prob.coordinate_ascent(p0, eta, opts.inner.delta,
                                              max_sweeps=opts.inner.max_iters)
        state["p"] = p
        w = _beams_from_powers(cfg, dirs, prob, p)
        return g - eta * cfg.fixed_power, w, sweeps

    eta_star, W, trace, iters, inner_total = bisect_eta(
        cfg, bound, opts.epsilon, opts.max_iters, evaluate)
    return _build_report(cfg, H, eta_star, W, trace, iters, inner_total)


def _beams_from_powers(cfg, dirs, prob, p):
    w = [[None] * cfg.N[j] for j in range(cfg.K)]
    for l, (j, k) in enumerate(prob.users):
        w[j][k] = math.sqrt(max(p[l], 0.0)) * dirs.v[j][k]
    return BeamformerSet(w)

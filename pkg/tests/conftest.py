import sys

import numpy as np
import pytest

from eebeam.model import ChannelSet, BeamformerSet, SystemConfig


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Surface the per-criterion acceptance verdicts in the test log."""
    mod = sys.modules.get("test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None) if mod else None
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for line in sorted(verdicts):
            terminalreporter.write_line(line)


def random_channels(cfg, seed):
    """Unit-scale random Rayleigh channels for synthetic instances."""
    rng = np.random.default_rng(seed)
    h = [[[ (rng.standard_normal(cfg.M[m]) + 1j * rng.standard_normal(cfg.M[m]))
            / np.sqrt(2.0)
            for k in range(cfg.N[j])]
          for j in range(cfg.K)]
         for m in range(cfg.K)]
    return ChannelSet(h=h, seed=seed)


def random_feasible_beams(cfg, seed, full_power=False):
    rng = np.random.default_rng(seed)
    w = []
    for j in range(cfg.K):
        raw = [rng.standard_normal(cfg.M[j]) + 1j * rng.standard_normal(cfg.M[j])
               for _ in range(cfg.N[j])]
        total = sum(float(np.vdot(v, v).real) for v in raw)
        scale = cfg.P[j] / total if full_power else rng.uniform(0, cfg.P[j]) / total
        w.append([np.sqrt(scale) * v for v in raw])
    return BeamformerSet(w)


def small_instance(seed=0, K=3, M=4, N=2, P=2.0, Pc=0.3, P0=1.0, sigma2=1.0,
                   **kw):
    cfg = SystemConfig.uniform(K=K, M=M, N=N, P=P, Pc=Pc, P0=P0,
                               sigma2=sigma2, **kw)
    return cfg, random_channels(cfg, seed)


def siso_instance(g=1.0, sigma2=1.0, P=1.0, fixed=1.0, xi=1.0):
    """Single-cell single-user single-antenna instance with gain |h|^2 = g."""
    cfg = SystemConfig.uniform(K=1, M=1, N=1, P=P, Pc=fixed, P0=0.0, xi=xi,
                               sigma2=sigma2)
    H = ChannelSet(h=[[[np.array([np.sqrt(g) + 0j])]]])
    return cfg, H

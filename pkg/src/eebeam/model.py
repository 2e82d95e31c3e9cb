"""System configuration, beamformer containers and the link-level metrics.

All rates are in nats per channel use (natural logarithm throughout) and all
powers in Watts. dBm/bits conversions live in the reporting layer only.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateConfigError, ValidationError


def _as_per_user(value, N):
    """Expand a scalar into a ragged per-(cell, user) table."""
    if np.isscalar(value):
        return [[float(value)] * n for n in N]
    return [[float(x) for x in row] for row in value]


@dataclass
class SystemConfig:
    """Static parameters of the multicell MISO downlink.

    K cells; BS-j has M[j] antennas, P[j] Watts of transmit budget and serves
    N[j] single-antenna users. Pc is circuit power per antenna, P0 the basic
    per-BS power, xi the amplifier inefficiency. alpha/sigma2 are per-user
    weights and noise powers. delta/epsilon are the inner and outer
    convergence thresholds.
    """

    K: int
    M: list
    N: list
    P: list
    Pc: float
    P0: float
    xi: float = 1.0
    alpha: list = None
    sigma2: list = None
    delta: float = 1e-3
    epsilon: float = 1e-5

    def __post_init__(self):
        self.M = [int(m) for m in self.M]
        self.N = [int(n) for n in self.N]
        self.P = [float(p) for p in self.P]
        if not (self.K >= 1 and len(self.M) == len(self.N) == len(self.P) == self.K):
            raise ConfigError("K, M, N, P have inconsistent lengths")
        if min(self.M) < 1 or min(self.N) < 1:
            raise ConfigError("antenna and user counts must be >= 1")
        if min(self.P) <= 0:
            raise ConfigError("power budgets must be positive")
        if self.Pc < 0 or self.P0 < 0:
            raise ConfigError("circuit/basic powers must be nonnegative")
        if self.xi < 1:
            raise ConfigError("amplifier inefficiency xi must be >= 1")
        if self.delta <= 0 or self.epsilon <= 0:
            raise ConfigError("convergence thresholds must be positive")
        self.alpha = _as_per_user(1.0 if self.alpha is None else self.alpha, self.N)
        if self.sigma2 is None:
            raise ConfigError("sigma2 must be provided")
        self.sigma2 = _as_per_user(self.sigma2, self.N)
        for j in range(self.K):
            if len(self.alpha[j]) != self.N[j] or len(self.sigma2[j]) != self.N[j]:
                raise ConfigError(f"alpha/sigma2 shape mismatch in cell {j}")
            if min(self.alpha[j]) <= 0:
                raise ConfigError("user weights must be positive")
            if min(self.sigma2[j]) <= 0:
                raise ConfigError("noise powers must be positive")

    @classmethod
    def uniform(cls, K, M, N, P, Pc, P0, xi=1.0, alpha=1.0, sigma2=1.0,
                delta=1e-3, epsilon=1e-5):
        """Convenience constructor with identical per-cell parameters."""
        return cls(K=K, M=[M] * K, N=[N] * K, P=[P] * K, Pc=Pc, P0=P0, xi=xi,
                   alpha=alpha, sigma2=sigma2, delta=delta, epsilon=epsilon)

    def users(self):
        """Iterate over all (cell, user) index pairs."""
        for j in range(self.K):
            for k in range(self.N[j]):
                yield j, k

    @property
    def total_users(self):
        return sum(self.N)

    @property
    def fixed_power(self):
        """Transmit-independent consumption: sum_j (M_j * Pc + P0)."""
        return sum(m * self.Pc + self.P0 for m in self.M)


@dataclass
class ChannelSet:
    """Channel vectors h[m][j][k]: BS-m to User-(j,k), length M[m], linear scale."""

    h: list
    seed: int = None

    def validate(self, cfg):
        if len(self.h) != cfg.K:
            raise ValidationError("channel table has wrong number of source BSs")
        for m in range(cfg.K):
            for j, k in cfg.users():
                vec = np.asarray(self.h[m][j][k])
                if vec.shape != (cfg.M[m],):
                    raise ValidationError(
                        f"channel ({m},{j},{k}) has shape {vec.shape}, "
                        f"expected ({cfg.M[m]},)")
                if not np.all(np.isfinite(vec)):
                    raise ValidationError(f"channel ({m},{j},{k}) has non-finite entries")
        return self


@dataclass
class BeamformerSet:
    """Transmit vectors w[j][k], length M[j], in sqrt-Watt scale."""

    w: list

    def per_bs_power(self, cfg):
        return [sum(float(np.vdot(wk, wk).real) for wk in self.w[j])
                for j in range(cfg.K)]

    def validate(self, cfg, slack=1e-9):
        for j, p in enumerate(self.per_bs_power(cfg)):
            if p > cfg.P[j] + slack:
                raise ValidationError(
                    f"BS {j} power {p} exceeds budget {cfg.P[j]}")
        return self

    @classmethod
    def zeros(cls, cfg):
        return cls([[np.zeros(cfg.M[j], dtype=complex) for _ in range(cfg.N[j])]
                    for j in range(cfg.K)])


@dataclass
class ReceiverFilters:
    """Scalar receive filters mu[j][k], one complex value per user."""

    mu: list

    @classmethod
    def zeros(cls, cfg):
        return cls([[0j] * cfg.N[j] for j in range(cfg.K)])


@dataclass
class AuxWeights:
    """Positive rate-linked weights s[j][k] (reciprocal of the per-user MMSE)."""

    s: list


def _check_index(cfg, j, k):
    if not (0 <= j < cfg.K and 0 <= k < cfg.N[j]):
        raise IndexError(f"user index ({j},{k}) out of range")


def own_gain(H, W, j, k):
    """Complex effective gain h_{j,j,k}^H w_{j,k}."""
    return complex(np.vdot(H.h[j][j][k], W.w[j][k]))


def interference(cfg, H, W, j, k):
    """Aggregate interference power at User-(j,k): intra-cell plus inter-cell."""
    _check_index(cfg, j, k)
    hk = H.h[j][j][k]
    total = 0.0
    for n in range(cfg.N[j]):
        if n != k:
            total += abs(np.vdot(hk, W.w[j][n])) ** 2
    for m in range(cfg.K):
        if m == j:
            continue
        hm = H.h[m][j][k]
        for n in range(cfg.N[m]):
            total += abs(np.vdot(hm, W.w[m][n])) ** 2
    return total


def user_rate(cfg, H, W, j, k):
    """Instantaneous rate of User-(j,k) in nats per channel use."""
    _check_index(cfg, j, k)
    sig = abs(own_gain(H, W, j, k)) ** 2
    return math.log(1.0 + sig / (interference(cfg, H, W, j, k) + cfg.sigma2[j][k]))


def rx_power(cfg, H, W, j, k):
    """Total received signal power at User-(j,k): sum over all (m,n) of |h^H w|^2."""
    _check_index(cfg, j, k)
    total = 0.0
    for m in range(cfg.K):
        hm = H.h[m][j][k]
        for n in range(cfg.N[m]):
            total += abs(np.vdot(hm, W.w[m][n])) ** 2
    return total


def mse(cfg, H, W, U, j, k):
    """Mean square error of User-(j,k) under scalar receive filter mu."""
    _check_index(cfg, j, k)
    mu = complex(U.mu[j][k])
    g = own_gain(H, W, j, k)
    return (abs(mu) ** 2 * (rx_power(cfg, H, W, j, k) + cfg.sigma2[j][k])
            - 2.0 * (mu.conjugate() * g).real + 1.0)


def mmse(cfg, H, W, j, k):
    """MSE at the optimal scalar receiver; satisfies rate = log(1/mmse)."""
    _check_index(cfg, j, k)
    sig = abs(own_gain(H, W, j, k)) ** 2
    return 1.0 - sig / (rx_power(cfg, H, W, j, k) + cfg.sigma2[j][k])


def total_power(cfg, W):
    """Radiated power sum_{j,k} ||w_{j,k}||^2."""
    return sum(W.per_bs_power(cfg))


def consumed_power(cfg, W):
    """Total consumption: xi * radiated + sum_j (M_j Pc + P0)."""
    return cfg.xi * total_power(cfg, W) + cfg.fixed_power


def weighted_sum_rate(cfg, H, W):
    return sum(cfg.alpha[j][k] * user_rate(cfg, H, W, j, k) for j, k in cfg.users())


def energy_efficiency(cfg, H, W):
    """Weighted sum rate divided by total consumed power, nats per Joule."""
    denom = consumed_power(cfg, W)
    if denom <= 0.0:
        raise DegenerateConfigError("total power consumption is zero")
    return weighted_sum_rate(cfg, H, W) / denom


def surrogate_G(cfg, H, W, eta):
    """Subtractive objective sum_{j,k} (alpha R - eta xi ||w||^2)."""
    total = 0.0
    for j, k in cfg.users():
        total += (cfg.alpha[j][k] * user_rate(cfg, H, W, j, k)
                  - eta * cfg.xi * float(np.vdot(W.w[j][k], W.w[j][k]).real))
    return total


def surrogate_H(cfg, H, W, U, S, eta):
    """MSE-based surrogate; equals surrogate_G at the optimal filters/weights."""
    total = 0.0
    for j, k in cfg.users():
        s = float(S.s[j][k])
        if s <= 0.0:
            raise ValidationError(f"auxiliary weight s[{j}][{k}] must be positive")
        a = cfg.alpha[j][k]
        e = mse(cfg, H, W, U, j, k)
        total += (-a * e * s + a * math.log(s) + a
                  - eta * cfg.xi * float(np.vdot(W.w[j][k], W.w[j][k]).real))
    return total

"""Seeded generation of cell geometry, user drops and channel vectors.

The default geometry is a cluster of three adjacent hexagonal cells with a
log-distance path loss, log-normal shadowing, and i.i.d. Rayleigh small-scale
fading. Everything is deterministic given (geometry, config, seed).
"""

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .errors import ConfigError
from .model import ChannelSet


@dataclass
class GeometryConfig:
    """Cell layout and large-scale propagation parameters.

    pathloss in dB is -pathloss_a * log10(d_m) + pathloss_b, shadowing is
    log-normal with std shadow_std_db. Defaults follow a 500 m macro cell
    with users dropped at 400-500 m from their serving BS.
    """

    cell_radius_m: float = 500.0
    min_user_distance_m: float = 400.0
    pathloss_a: float = 38.0
    pathloss_b: float = -34.5
    shadow_std_db: float = 8.0
    layout: str = "HexCluster3"

    def __post_init__(self):
        if not (0 < self.min_user_distance_m < self.cell_radius_m):
            raise ConfigError(
                "min_user_distance_m must lie strictly inside the cell radius")
        if self.shadow_std_db < 0:
            raise ConfigError("shadow_std_db must be nonnegative")
        if self.layout != "HexCluster3":
            raise ConfigError(f"unknown layout {self.layout!r}")

    @classmethod
    def small_cell(cls, shadow_std_db=8.0):
        """100 m small-cell profile with the matching path-loss law."""
        return cls(cell_radius_m=100.0, min_user_distance_m=70.0,
                   pathloss_a=30.0, pathloss_b=-38.0,
                   shadow_std_db=shadow_std_db)


@dataclass
class DropRealization:
    """One random placement of base stations and users."""

    bs_positions: list        # K (x, y) points in meters
    user_positions: list      # per (j, k) points
    distances: list           # d[m][j][k] meters
    theta: list               # path-loss-only linear gain, shadowing excluded
    seed: int


def pathloss_db(geom, d):
    """Distance path loss in dB (negative), shadowing excluded."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    return -geom.pathloss_a * math.log10(d) + geom.pathloss_b


def bs_positions(geom, K):
    """Centers of K mutually adjacent hexagons (inter-site distance sqrt(3) R)."""
    r = geom.cell_radius_m
    d = math.sqrt(3.0) * r
    ring = [(0.0, 0.0), (d, 0.0), (d / 2.0, d * math.sqrt(3.0) / 2.0)]
    if K <= len(ring):
        return ring[:K]
    # beyond 3 cells, continue on a circle around the cluster centroid
    extra = []
    for i in range(K - len(ring)):
        ang = 2.0 * math.pi * i / (K - len(ring))
        extra.append((d / 2.0 + d * math.cos(ang),
                      d / (2.0 * math.sqrt(3.0)) + d * math.sin(ang)))
    return ring + extra


def drop_users(geom, cfg, seed):
    """Place users uniformly in the sector annulus facing away from the cluster.

    Radius uniform in [min_user_distance, cell_radius], angle uniform over the
    120-degree sector centered on the outward direction from the cluster
    centroid through the serving BS.
    """
    rng = np.random.default_rng(seed)
    bs = bs_positions(geom, cfg.K)
    cx = sum(p[0] for p in bs) / cfg.K
    cy = sum(p[1] for p in bs) / cfg.K

    user_positions = []
    for j in range(cfg.K):
        bx, by = bs[j]
        out = math.atan2(by - cy, bx - cx) if cfg.K > 1 else 0.0
        radii = rng.uniform(geom.min_user_distance_m, geom.cell_radius_m, cfg.N[j])
        angles = out + rng.uniform(-math.pi / 3.0, math.pi / 3.0, cfg.N[j])
        user_positions.append(
            [(bx + r * math.cos(a), by + r * math.sin(a))
             for r, a in zip(radii, angles)])

    distances = []
    theta = []
    for m in range(cfg.K):
        dm, tm = [], []
        for j in range(cfg.K):
            dj, tj = [], []
            for k in range(cfg.N[j]):
                ux, uy = user_positions[j][k]
                d = math.hypot(ux - bs[m][0], uy - bs[m][1])
                dj.append(d)
                tj.append(10.0 ** (pathloss_db(geom, d) / 10.0))
            dm.append(dj)
            tm.append(tj)
        distances.append(dm)
        theta.append(tm)

    return DropRealization(bs_positions=bs, user_positions=user_positions,
                           distances=distances, theta=theta, seed=seed)


def shadowing_db(geom, cfg, drop, seed):
    """Per-link shadowing draws (dB) used by generate_channels for this seed."""
    rng = np.random.default_rng(seed)
    out = []
    for m in range(cfg.K):
        row = []
        for j in range(cfg.K):
            row.append(rng.normal(0.0, geom.shadow_std_db, cfg.N[j]))
        out.append(row)
    return out


def generate_channels(geom, cfg, drop, seed):
    """Draw h[m][j][k] = sqrt(theta_eff) * h_w with h_w ~ CN(0, I).

    theta_eff combines the drop's path loss with fresh log-normal shadowing;
    both the shadowing and the small-scale fading come from `seed`.
    """
    rng = np.random.default_rng(seed)
    shadow = []
    for m in range(cfg.K):
        row = []
        for j in range(cfg.K):
            row.append(rng.normal(0.0, geom.shadow_std_db, cfg.N[j]))
        shadow.append(row)

    h = []
    for m in range(cfg.K):
        hm = []
        for j in range(cfg.K):
            n_users = cfg.N[j]
            gains = np.array(drop.theta[m][j]) * 10.0 ** (shadow[m][j] / 10.0)
            hw = (rng.standard_normal((n_users, cfg.M[m]))
                  + 1j * rng.standard_normal((n_users, cfg.M[m]))) / math.sqrt(2.0)
            hj = [np.sqrt(gains[k]) * hw[k] for k in range(n_users)]
            hm.append(hj)
        h.append(hm)
    return ChannelSet(h=h, seed=seed)


def save_channels(path, geom, cfg, channels):
    """Persist a ChannelSet as JSON with [re, im] pairs plus provenance echo."""
    payload = {
        "seed": channels.seed,
        "geometry": asdict(geom),
        "K": cfg.K,
        "M": cfg.M,
        "N": cfg.N,
        "h": [[[ [[float(z.real), float(z.imag)] for z in channels.h[m][j][k]]
                 for k in range(cfg.N[j])]
               for j in range(cfg.K)]
              for m in range(cfg.K)],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_channels(path):
    """Inverse of save_channels; returns (ChannelSet, payload dict)."""
    with open(path) as fh:
        payload = json.load(fh)
    h = [[[np.array([complex(re, im) for re, im in vec])
           for vec in row] for row in plane] for plane in payload["h"]]
    return ChannelSet(h=h, seed=payload.get("seed")), payload


def noise_power_w(bandwidth_hz=10e6, noise_figure_db=9.0):
    """Thermal noise power: -174 dBm/Hz + 10 log10(B) + NF, in Watts."""
    dbm = -174.0 + 10.0 * math.log10(bandwidth_hz) + noise_figure_db
    return 10.0 ** ((dbm - 30.0) / 10.0)

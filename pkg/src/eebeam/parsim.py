"""Round-based simulation of the central-controller / per-cell-processor scheme.

One processor per cell executes the block-coordinate updates using only its
locally held CSI, its own state, and scalar message payloads; the controller
aggregates per-user totals, runs the eta bisection, and keeps an exact count
of the real numbers shared per round. In deterministic mode the result is
bit-for-bit identical to the centralized solver because both paths call the
same per-cell kernels in the same order.

Counted recurring overhead per outer round is 1 (eta broadcast)
+ 3 * inner_rounds * total_users (weights, |filter|^2 and per-user power
totals) + K (per-BS power reports); CSI distribution at initialization is
recorded but excluded from the recurring count.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ProtocolError
from .inner import (InnerOptions, cell_objective, cell_receivers, cell_rx_powers,
                    cell_weights, mrt_full_power, rx_power_table,
                    totals_from_table, update_cell_beamformers)
from .model import BeamformerSet
from .outer import OuterOptions, _build_report, bisect_eta, eta_upper_bound

CONTROLLER = "controller"
BROADCAST = "*"


@dataclass
class Message:
    round: int                # outer round index (0 = initialization)
    sender: str
    recipient: str
    kind: str                 # CsiShare | EtaBroadcast | CrossTermReport | PowerReport | StopCommand
    payload: dict
    payload_real_count: int
    initialization: bool = False


@dataclass
class ProtocolTrace:
    messages: list = field(default_factory=list)
    kappa1: int = 0
    kappa2: list = field(default_factory=list)   # inner rounds per outer round
    K: int = 0
    total_users: int = 0
    complete: bool = False

    def log(self, msg):
        self.messages.append(msg)

    @property
    def total_reals(self):
        return sum(m.payload_real_count for m in self.messages
                   if not m.initialization)

    def expected_reals(self):
        """Closed-form recurring overhead for the measured round counts."""
        cross = 3 * self.total_users if self.K > 1 else 0
        return sum(cross * k2 + self.K + 1 for k2 in self.kappa2)

    def export_lines(self):
        return [f"{m.round} {m.sender} {m.recipient} {m.kind} {m.payload_real_count}"
                for m in self.messages]


def count_overhead(trace):
    """Total shared reals of a complete trace (initialization excluded)."""
    if not trace.complete:
        raise ProtocolError("trace is incomplete: no StopCommand recorded")
    return trace.total_reals


class CellProcessor:
    """Per-cell worker: holds CSI, its own beamformers, filters and weights.

    All knowledge of other cells arrives through message payloads (or the
    CSI-deterministic initialization).
    """

    def __init__(self, cfg, j, opts):
        self.cfg = cfg
        self.j = j
        self.opts = opts
        self.H = None
        self.W = None        # own beamformers only
        self.U = None
        self.S = None
        self.totals = None   # total received power at own users
        self.lam = 0.0

    def receive_csi(self, payload):
        """Store the shared CSI and derive the deterministic full-power init.

        The MRT starting point is a pure function of the CSI, so every node
        can compute the initial per-user totals without any exchange.
        """
        self.H = payload["csi"]
        cfg = self.cfg
        W0 = mrt_full_power(cfg, self.H)
        totals = totals_from_table(cfg, rx_power_table(cfg, self.H, W0))
        self.W = W0.w[self.j]
        self.totals = totals[self.j]

    def filter_update(self):
        """Phase A of an inner round: own receivers and weights."""
        j = self.j
        self.U = cell_receivers(self.cfg, self.H, self.W, j, self.totals)
        self.S = cell_weights(self.cfg, self.H, self.W, j, self.totals)
        return {"s": list(self.S), "u2": [abs(u) ** 2 for u in self.U]}

    def beamformer_update(self, s_tab, u2_tab, eta):
        """Phase B: closed-form own-cell update from the shared tables."""
        self.W, self.lam = update_cell_beamformers(
            self.cfg, self.H, s_tab, u2_tab, self.U, eta, self.j, self.opts)
        return cell_rx_powers(self.cfg, self.H, self.W, self.j)

    def accept_totals(self, totals_all):
        self.totals = totals_all[self.j]

    def local_objective(self, eta):
        return cell_objective(self.cfg, self.H, self.W, self.j, self.totals, eta)

    def tx_power(self):
        return sum(float(np.vdot(w, w).real) for w in self.W)


def _csi_real_count(cfg):
    links = sum(cfg.N[j] for j in range(cfg.K))
    return sum(2 * cfg.M[m] * links for m in range(cfg.K))


def run_parallel(cfg, H, opts=None):
    """Simulate the coordinated run; returns (SolveReport, ProtocolTrace)."""
    opts = opts or OuterOptions(epsilon=cfg.epsilon,
                                inner=InnerOptions(delta=cfg.delta))
    inner_opts = opts.inner
    if isinstance(inner_opts.init, BeamformerSet) or inner_opts.init != "mrt":
        raise ProtocolError("the protocol simulation supports the MRT init only")
    if inner_opts.restarts != 1:
        raise ProtocolError("the protocol simulation does not support restarts")
    if not opts.warm_start:
        raise ProtocolError("the protocol keeps per-processor state; warm start "
                            "is inherent and cannot be disabled")

    trace = ProtocolTrace(K=cfg.K, total_users=cfg.total_users)
    processors = [CellProcessor(cfg, j, inner_opts) for j in range(cfg.K)]

    for proc in processors:
        trace.log(Message(0, CONTROLLER, f"processor-{proc.j}", "CsiShare",
                          {"csi": H}, _csi_real_count(cfg), initialization=True))
        proc.receive_csi({"csi": H})

    outer_round = {"n": 0}

    def run_inner_rounds(eta):
        """One full block-coordinate solve at fixed eta, message by message."""
        g_trace = []
        rounds = 0
        for n in range(1, inner_opts.max_iters + 1):
            rounds = n
            # phase A: filters and weights, shared among all nodes
            reports = []
            for proc in processors:
                payload = proc.filter_update()
                reports.append(payload)
                if cfg.K > 1:
                    trace.log(Message(outer_round["n"], f"processor-{proc.j}",
                                      BROADCAST, "CrossTermReport", payload,
                                      2 * cfg.N[proc.j]))
            if len(reports) != cfg.K:
                raise ProtocolError(
                    f"round {n}: expected {cfg.K} filter reports, got {len(reports)}")
            s_tab = [r["s"] for r in reports]
            u2_tab = [r["u2"] for r in reports]

            # phase B: per-cell beamformer updates, then aggregation of the
            # per-user received-power totals at the controller
            table = [proc.beamformer_update(s_tab, u2_tab, eta)
                     for proc in processors]
            totals = totals_from_table(cfg, table)
            if cfg.K > 1:
                trace.log(Message(outer_round["n"], CONTROLLER, BROADCAST,
                                  "CrossTermReport", {"totals": totals},
                                  cfg.total_users))
            for proc in processors:
                proc.accept_totals(totals)

            g = sum(proc.local_objective(eta) for proc in processors)
            g_trace.append(g)
            if n > 1 and abs(g_trace[-1] - g_trace[-2]) <= inner_opts.delta:
                break
        return g_trace, rounds

    def evaluate(eta):
        outer_round["n"] += 1
        trace.log(Message(outer_round["n"], CONTROLLER, BROADCAST,
                          "EtaBroadcast", {"eta": eta}, 1))
        g_trace, rounds = run_inner_rounds(eta)
        trace.kappa2.append(rounds)
        for proc in processors:
            trace.log(Message(outer_round["n"], f"processor-{proc.j}", CONTROLLER,
                              "PowerReport", {"power": proc.tx_power()}, 1))
        W = BeamformerSet([list(proc.W) for proc in processors])
        return g_trace[-1] - eta * cfg.fixed_power, W, rounds

    bound = eta_upper_bound(cfg, H)
    eta_star, W, f_trace, iters, inner_total = bisect_eta(
        cfg, bound, opts.epsilon, opts.max_iters, evaluate)
    trace.kappa1 = outer_round["n"]
    trace.log(Message(outer_round["n"], CONTROLLER, BROADCAST, "StopCommand",
                      {}, 0))
    trace.complete = True

    report = _build_report(cfg, H, eta_star, W, f_trace, iters, inner_total)
    return report, trace


def save_trace(path, trace):
    """Write one message per line: round, from, to, kind, real_count."""
    with open(path, "w") as fh:
        for line in trace.export_lines():
            fh.write(line + "\n")

"""Block-coordinate inner solver for the subtractive objective at fixed eta.

One sweep updates the scalar receive filters, the rate-linked weights, and
then every cell's beamformers in closed form, with a per-cell bisection on
the power-constraint multiplier. The per-cell kernels operate on shared
scalar tables (per-BS received powers, weights, |filter|^2) so that the
round-based protocol simulator in `parsim` can replay the exact same
floating-point operations from message payloads alone.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import model
from .errors import NonConvergenceError
from .linalg import eig_hermitian, solve_pd
from .model import AuxWeights, BeamformerSet, ReceiverFilters

RIDGE_SCALE = 1e-10  # Tikhonov ridge relative to trace(A)/dim, keeps eta=0 solvable


@dataclass
class InnerOptions:
    """Knobs for the block-coordinate solver."""

    delta: float = 1e-3
    max_iters: int = 500
    lambda_tol: float = 1e-8
    lambda_max_iters: int = 128
    init: object = "mrt"        # "mrt", "random", or a BeamformerSet to warm-start
    init_seed: int = 0
    restarts: int = 1           # >1 adds random re-initializations, keeps best G
    restart_seed: int = 0

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.max_iters < 1 or self.lambda_max_iters < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass
class InnerReport:
    """Outcome of one block-coordinate run."""

    W: BeamformerSet
    U: ReceiverFilters
    S: AuxWeights
    G_trace: list
    iters: int
    lam: list
    converged: bool
    total_iters: int = 0

    @property
    def G(self):
        return self.G_trace[-1]


# ---------------------------------------------------------------------------
# shared per-cell kernels


def mrt_full_power(cfg, H):
    """Deterministic init: per-user MRT directions at equal full power."""
    w = []
    for j in range(cfg.K):
        row = []
        for k in range(cfg.N[j]):
            h = H.h[j][j][k]
            row.append(math.sqrt(cfg.P[j] / cfg.N[j]) * h / np.linalg.norm(h))
        w.append(row)
    return BeamformerSet(w)


def random_full_power(cfg, rng):
    """Random isotropic directions at equal full power per user."""
    w = []
    for j in range(cfg.K):
        row = []
        for k in range(cfg.N[j]):
            v = rng.standard_normal(cfg.M[j]) + 1j * rng.standard_normal(cfg.M[j])
            row.append(math.sqrt(cfg.P[j] / cfg.N[j]) * v / np.linalg.norm(v))
        w.append(row)
    return BeamformerSet(w)


def cell_rx_powers(cfg, H, W_j, src):
    """Powers BS `src` delivers to every user: T[j][k] = sum_k' |h^H w|^2.

    Depends only on the channels out of BS `src` and its own beamformers,
    which is what makes the quantity shareable in the parallel protocol.
    """
    table = []
    for j in range(cfg.K):
        row = []
        for k in range(cfg.N[j]):
            h = H.h[src][j][k]
            row.append(sum(abs(np.vdot(h, wk)) ** 2 for wk in W_j))
        table.append(row)
    return table


def rx_power_table(cfg, H, W):
    return [cell_rx_powers(cfg, H, W.w[src], src) for src in range(cfg.K)]


def totals_from_table(cfg, table):
    """Total received power per user, summed over source BSs in index order."""
    return [[sum(table[m][j][k] for m in range(cfg.K)) for k in range(cfg.N[j])]
            for j in range(cfg.K)]


def cell_receivers(cfg, H, W_j, j, totals_j):
    """Optimal scalar receive filters for cell j's users."""
    out = []
    for k in range(cfg.N[j]):
        g = complex(np.vdot(H.h[j][j][k], W_j[k]))
        out.append(g / (totals_j[k] + cfg.sigma2[j][k]))
    return out


def cell_weights(cfg, H, W_j, j, totals_j):
    """Optimal auxiliary weights 1/mmse for cell j's users."""
    out = []
    for k in range(cfg.N[j]):
        sig = abs(np.vdot(H.h[j][j][k], W_j[k])) ** 2
        ehat = 1.0 - sig / (totals_j[k] + cfg.sigma2[j][k])
        out.append(1.0 / ehat)
    return out


def cell_objective(cfg, H, W_j, j, totals_j, eta):
    """Cell j's contribution to the subtractive objective at current powers."""
    total = 0.0
    for k in range(cfg.N[j]):
        sig = abs(np.vdot(H.h[j][j][k], W_j[k])) ** 2
        rate = math.log(1.0 + sig / (totals_j[k] - sig + cfg.sigma2[j][k]))
        total += (cfg.alpha[j][k] * rate
                  - eta * cfg.xi * float(np.vdot(W_j[k], W_j[k]).real))
    return total


def build_A_from_tables(cfg, H, s_tab, u2_tab, eta, j):
    """Quadratic-form matrix of the cell-j beamformer update."""
    A = np.zeros((cfg.M[j], cfg.M[j]), dtype=complex)
    for m in range(cfg.K):
        for n in range(cfg.N[m]):
            c = cfg.alpha[m][n] * s_tab[m][n] * u2_tab[m][n]
            if c != 0.0:
                h = H.h[j][m][n]
                A += c * np.outer(h, h.conj())
    A += eta * cfg.xi * np.eye(cfg.M[j])
    return A


def _ridge(A):
    return RIDGE_SCALE * float(np.trace(A).real) / A.shape[0]


def _phi(evals, psi_diag, lam):
    """Eigen-form transmit power of cell j as a function of the multiplier."""
    denom = (evals + lam) ** 2
    with np.errstate(divide="ignore"):
        terms = np.where(psi_diag > 0.0, psi_diag / denom, 0.0)
    return float(np.sum(terms))


def _cell_beams(cfg, H, A, coeffs, j, lam):
    """Beamformers of cell j at multiplier lam via a ridge-stabilized PD solve."""
    shifted = A + (lam + _ridge(A)) * np.eye(cfg.M[j])
    out = []
    for k in range(cfg.N[j]):
        c = coeffs[k]
        if c == 0.0:
            out.append(np.zeros(cfg.M[j], dtype=complex))
        else:
            out.append(c * solve_pd(shifted, H.h[j][j][k], validate=False))
    return out


def update_cell_beamformers(cfg, H, s_tab, u2_tab, u_own, eta, j, opts):
    """Closed-form cell-j update: build A, pick the multiplier, solve per user.

    `u_own` holds the complex filters of cell j's own users; all other users
    enter only through the shared s/|u|^2 tables.
    """
    A = build_A_from_tables(cfg, H, s_tab, u2_tab, eta, j)
    coeffs = [cfg.alpha[j][k] * s_tab[j][k] * u_own[k] for k in range(cfg.N[j])]
    if all(c == 0.0 for c in coeffs):
        return [np.zeros(cfg.M[j], dtype=complex) for _ in range(cfg.N[j])], 0.0

    evals, evecs = eig_hermitian(A)
    psi_diag = np.zeros(cfg.M[j])
    for k in range(cfg.N[j]):
        proj = evecs.conj().T @ H.h[j][j][k]
        psi_diag += abs(coeffs[k]) ** 2 * np.abs(proj) ** 2

    P = cfg.P[j]
    if _phi(evals, psi_diag, 0.0) <= P:
        lam = 0.0
    else:
        lam = _bisect_lambda(evals, psi_diag, P, opts)
    return _cell_beams(cfg, H, A, coeffs, j, lam), lam


def _bisect_lambda(evals, psi_diag, P, opts):
    """Find lam with phi(lam) = P by bracket doubling plus bisection.

    Returns a feasible point: phi(lam) <= P within relative tolerance.
    """
    hi = 1.0
    for _ in range(200):
        if _phi(evals, psi_diag, hi) < P:
            break
        hi *= 2.0
    else:
        raise NonConvergenceError("could not bracket the power multiplier",
                                  bracket=(0.0, hi))
    lo = 0.0
    for _ in range(opts.lambda_max_iters):
        mid = 0.5 * (lo + hi)
        pm = _phi(evals, psi_diag, mid)
        if pm > P:
            lo = mid
        else:
            hi = mid
            if P - pm <= opts.lambda_tol * P:
                return mid
    raise NonConvergenceError("power-multiplier bisection hit the iteration cap",
                              bracket=(lo, hi))


# ---------------------------------------------------------------------------
# public per-operation surface (table plumbing hidden)


def update_receivers(cfg, H, W):
    """Optimal scalar receive filters for every user at the given beamformers."""
    totals = totals_from_table(cfg, rx_power_table(cfg, H, W))
    return ReceiverFilters([cell_receivers(cfg, H, W.w[j], j, totals[j])
                            for j in range(cfg.K)])


def update_weights(cfg, H, W):
    """Optimal auxiliary weights (reciprocal MMSE) for every user."""
    totals = totals_from_table(cfg, rx_power_table(cfg, H, W))
    return AuxWeights([cell_weights(cfg, H, W.w[j], j, totals[j])
                       for j in range(cfg.K)])


def build_A(cfg, H, U, S, eta, j):
    u2_tab = [[abs(U.mu[m][n]) ** 2 for n in range(cfg.N[m])] for m in range(cfg.K)]
    return build_A_from_tables(cfg, H, S.s, u2_tab, eta, j)


def beamformer_at_lambda(cfg, H, U, S, eta, j, lam):
    """Cell-j beamformers at a fixed multiplier value."""
    A = build_A(cfg, H, U, S, eta, j)
    coeffs = [cfg.alpha[j][k] * S.s[j][k] * U.mu[j][k] for k in range(cfg.N[j])]
    return _cell_beams(cfg, H, A, coeffs, j, lam)


def power_of_lambda(cfg, H, U, S, eta, j, lam):
    """Cell-j transmit power at multiplier lam, via the eigen-form expression."""
    A = build_A(cfg, H, U, S, eta, j)
    evals, evecs = eig_hermitian(A)
    psi_diag = np.zeros(cfg.M[j])
    for k in range(cfg.N[j]):
        c = cfg.alpha[j][k] * S.s[j][k] * U.mu[j][k]
        proj = evecs.conj().T @ H.h[j][j][k]
        psi_diag += abs(c) ** 2 * np.abs(proj) ** 2
    return _phi(evals, psi_diag, lam)


def solve_lambda(cfg, H, U, S, eta, j, opts=None):
    """Power-feasible multiplier and beamformers for cell j."""
    opts = opts or InnerOptions()
    u2_tab = [[abs(U.mu[m][n]) ** 2 for n in range(cfg.N[m])] for m in range(cfg.K)]
    u_own = [U.mu[j][k] for k in range(cfg.N[j])]
    w, lam = update_cell_beamformers(cfg, H, S.s, u2_tab, u_own, eta, j, opts)
    return lam, w


# ---------------------------------------------------------------------------
# full solver


def _initial_beamformers(cfg, H, opts, rng=None):
    if isinstance(opts.init, BeamformerSet):
        return opts.init
    if opts.init == "mrt":
        return mrt_full_power(cfg, H)
    if opts.init == "random":
        rng = rng or np.random.default_rng(opts.init_seed)
        return random_full_power(cfg, rng)
    raise ValueError(f"unknown init {opts.init!r}")


def _solve_once(cfg, H, eta, opts, W0):
    W = [list(row) for row in W0.w]
    totals = totals_from_table(cfg, rx_power_table(cfg, H, BeamformerSet(W)))

    trace = []
    lam = [0.0] * cfg.K
    converged = False
    n = 0
    U = [[0j] * cfg.N[j] for j in range(cfg.K)]
    S = [[1.0] * cfg.N[j] for j in range(cfg.K)]
    for n in range(1, opts.max_iters + 1):
        for j in range(cfg.K):
            U[j] = cell_receivers(cfg, H, W[j], j, totals[j])
        for j in range(cfg.K):
            S[j] = cell_weights(cfg, H, W[j], j, totals[j])
        u2_tab = [[abs(u) ** 2 for u in row] for row in U]
        for j in range(cfg.K):
            W[j], lam[j] = update_cell_beamformers(
                cfg, H, S, u2_tab, U[j], eta, j, opts)
        totals = totals_from_table(cfg, rx_power_table(cfg, H, BeamformerSet(W)))
        G = sum(cell_objective(cfg, H, W[j], j, totals[j], eta)
                for j in range(cfg.K))
        trace.append(G)
        if n > 1 and abs(trace[-1] - trace[-2]) <= opts.delta:
            converged = True
            break

    return InnerReport(W=BeamformerSet(W), U=ReceiverFilters(U), S=AuxWeights(S),
                       G_trace=trace, iters=n, lam=lam, converged=converged,
                       total_iters=n)


def inner_solve(cfg, H, eta, opts=None):
    """Run the block-coordinate solver, optionally with random restarts."""
    opts = opts or InnerOptions(delta=cfg.delta)
    best = _solve_once(cfg, H, eta, opts, _initial_beamformers(cfg, H, opts))
    total = best.iters
    for r in range(1, opts.restarts):
        rng = np.random.default_rng((opts.restart_seed, r))
        report = _solve_once(cfg, H, eta, opts, random_full_power(cfg, rng))
        total += report.iters
        if report.G > best.G:
            best = report
    best.total_iters = total
    return best
